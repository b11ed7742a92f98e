//! Cross-validated evaluation of the three detection approaches.
//!
//! Every observation (gesture or sensor window) is scored by the model of
//! the fold that held it out. Out-of-fold scores are then bundled per
//! session in chronological order and pooled into one ROC per bundle size.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::{fold_indices, kfold_split, CvMode};
use super::metrics::{auc, roc_and_eer, RocCurve};
use crate::classify::{ClassifierSpec, Dataset, ForestParams};
use crate::error::{Error, Result};
use crate::features::{shared_names, FeatureKind, FeatureMask, FeatureVector};
use crate::fusion::fused_scores;
use crate::segment::{
    gesture_window, segment_gestures, segment_windows, GestureKind, SegmentParams,
};
use crate::sensor::{select_from_dataset, sensor_feature_names, window_values};
use crate::session::{filter_session, AgeGroup, FilterPolicy, Label, Session};
use crate::touch::{stroke_values, tap_values, STROKE_FEATURES, TAP_FEATURES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Approach {
    TouchTap,
    TouchStroke,
    Sensor,
    CombinedTap,
    CombinedStroke,
}

impl Approach {
    pub fn feature_kind(self) -> FeatureKind {
        match self {
            Approach::TouchTap => FeatureKind::Tap,
            Approach::TouchStroke => FeatureKind::Stroke,
            Approach::Sensor => FeatureKind::Sensor,
            Approach::CombinedTap => FeatureKind::TapSensor,
            Approach::CombinedStroke => FeatureKind::StrokeSensor,
        }
    }

    pub fn feature_names(self) -> Arc<[String]> {
        static TAP_SENSOR: OnceLock<Arc<[String]>> = OnceLock::new();
        static STROKE_SENSOR: OnceLock<Arc<[String]>> = OnceLock::new();
        let combined = |touch: &[&str]| {
            shared_names(
                touch
                    .iter()
                    .map(|s| s.to_string())
                    .chain(sensor_feature_names().iter().cloned()),
            )
        };
        match self {
            Approach::TouchTap => crate::touch::tap_feature_names(),
            Approach::TouchStroke => crate::touch::stroke_feature_names(),
            Approach::Sensor => sensor_feature_names(),
            Approach::CombinedTap => TAP_SENSOR.get_or_init(|| combined(&TAP_FEATURES)).clone(),
            Approach::CombinedStroke => STROKE_SENSOR
                .get_or_init(|| combined(&STROKE_FEATURES))
                .clone(),
        }
    }

    fn gesture_kind(self) -> Option<GestureKind> {
        match self {
            Approach::TouchTap | Approach::CombinedTap => Some(GestureKind::Tap),
            Approach::TouchStroke | Approach::CombinedStroke => Some(GestureKind::Stroke),
            Approach::Sensor => None,
        }
    }
}

/// Which children take part; adults are always kept.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgeFilter {
    #[default]
    All,
    YoungChild,
    OlderChild,
}

impl AgeFilter {
    pub fn keeps(self, s: &Session) -> bool {
        match self {
            AgeFilter::All => true,
            _ if s.label == Label::Adult => true,
            AgeFilter::YoungChild => s.age_group == AgeGroup::YoungChild,
            AgeFilter::OlderChild => s.age_group == AgeGroup::OlderChild,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub approach: Approach,
    pub classifier: ClassifierSpec,
    pub k_list: Vec<usize>,
    /// Sensor window length in seconds (sensor approach only).
    pub window_s: f64,
    pub age_filter: AgeFilter,
    pub folds: usize,
    pub mode: CvMode,
    pub stride: usize,
    pub seed: u64,
    /// Features kept by importance ranking in the sensor approach, refit on
    /// each training fold. `None` keeps all 128.
    pub sensor_top_k: Option<usize>,
    pub segment: SegmentParams,
    pub min_samples: usize,
    /// Average per-fold metrics instead of pooling out-of-fold scores.
    pub per_fold: bool,
    pub excluded_app_id: Option<String>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            approach: Approach::TouchStroke,
            classifier: ClassifierSpec::forest(),
            k_list: vec![1, 2, 4, 8, 16],
            window_s: 1.0,
            age_filter: AgeFilter::All,
            folds: 10,
            mode: CvMode::Record,
            stride: 1,
            seed: 0,
            sensor_top_k: Some(20),
            segment: SegmentParams::default(),
            min_samples: 3,
            per_fold: false,
            excluded_app_id: None,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.k_list.is_empty() || self.k_list.contains(&0) {
            return bad(format!(
                "k_list must be non-empty positive sizes, got {:?}",
                self.k_list
            ));
        }
        if self.stride == 0 {
            return bad("stride must be positive".into());
        }
        if self.folds < 2 {
            return bad(format!("need at least 2 folds, got {}", self.folds));
        }
        if self.approach == Approach::Sensor && !(1.0..=20.0).contains(&self.window_s) {
            return bad(format!("window_s {} outside [1, 20]", self.window_s));
        }
        if self.sensor_top_k == Some(0) {
            return bad("sensor_top_k must be positive".into());
        }
        Ok(())
    }

    fn selection_k(&self) -> Option<usize> {
        if self.approach == Approach::Sensor {
            self.sensor_top_k
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub id: String,
    pub label: Label,
    pub age_group: AgeGroup,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    /// Index into [`ObservationSet::sessions`].
    pub session: usize,
    pub t: i64,
    pub label: Label,
    pub values: Vec<f64>,
}

/// Feature rows of one approach, grouped by session in time order.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationSet {
    pub names: Arc<[String]>,
    pub kind: FeatureKind,
    pub sessions: Vec<SessionInfo>,
    pub observations: Vec<Observation>,
    pub warnings: Vec<String>,
}

impl ObservationSet {
    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn to_vectors(&self) -> Vec<FeatureVector> {
        self.observations
            .iter()
            .map(|o| {
                FeatureVector::new(
                    self.names.clone(),
                    o.values.clone(),
                    o.label,
                    &self.sessions[o.session].id,
                    self.kind,
                )
            })
            .collect()
    }

    pub fn project(&self, mask: &FeatureMask) -> Result<Self> {
        let idx = mask.indices(&self.names)?;
        Ok(Self {
            names: mask.shared_names(),
            observations: self
                .observations
                .iter()
                .map(|o| Observation {
                    values: idx.iter().map(|&i| o.values[i]).collect(),
                    ..o.clone()
                })
                .collect(),
            ..self.clone()
        })
    }

    /// Permutes observation labels, keeping the class counts.
    pub fn shuffle_labels(&self, seed: u64) -> Self {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut labels: Vec<Label> = self.observations.iter().map(|o| o.label).collect();
        labels.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let mut out = self.clone();
        for (o, l) in out.observations.iter_mut().zip(labels) {
            o.label = l;
        }
        out
    }

    fn dataset(&self) -> Result<Dataset> {
        Dataset::from_shared(
            self.names.clone(),
            self.observations.iter().map(|o| o.values.clone()).collect(),
            self.observations
                .iter()
                .map(|o| o.label.is_child())
                .collect(),
        )
    }
}

struct Extracted {
    rows: Vec<(i64, Vec<f64>)>,
    skipped: usize,
}

fn extract_session(session: &Session, cfg: &EvalConfig) -> Result<Extracted> {
    let mut rows = Vec::new();
    let mut skipped = 0;
    match cfg.approach.gesture_kind() {
        None => {
            let set = segment_windows(session, cfg.window_s, cfg.min_samples)?;
            skipped += set.dropped_sparse;
            for w in &set.windows {
                rows.push((w.t_start, window_values(w)?));
            }
        }
        Some(kind) => {
            let combined = matches!(
                cfg.approach,
                Approach::CombinedTap | Approach::CombinedStroke
            );
            for g in segment_gestures(&session.touch_events, &cfg.segment) {
                if !g.complete || g.kind != kind {
                    continue;
                }
                let mut values = match kind {
                    GestureKind::Tap => tap_values(&g).to_vec(),
                    GestureKind::Stroke => match stroke_values(&g) {
                        Ok(v) => v.to_vec(),
                        Err(Error::DegenerateStroke(_)) => {
                            skipped += 1;
                            continue;
                        }
                        Err(e) => return Err(e),
                    },
                };
                if combined {
                    let w = gesture_window(session, &g, cfg.min_samples)?;
                    match window_values(&w) {
                        Ok(v) => values.extend(v),
                        Err(Error::TooFewSamples { .. }) => {
                            skipped += 1;
                            continue;
                        }
                        Err(e) => return Err(e),
                    }
                }
                rows.push((g.t_start, values));
            }
        }
    }
    Ok(Extracted { rows, skipped })
}

/// Extracts the approach's observations from every session passing the age
/// filter.
pub fn extract_observations(sessions: &[Session], cfg: &EvalConfig) -> Result<ObservationSet> {
    cfg.validate()?;
    let policy = FilterPolicy {
        excluded_app_id: cfg.excluded_app_id.clone(),
    };
    let kept: Vec<&Session> = sessions
        .iter()
        .filter(|s| cfg.age_filter.keeps(s))
        .collect();
    let extracted = kept
        .par_iter()
        .map(|s| {
            if policy.excluded_app_id.is_some() {
                extract_session(&filter_session(s, &policy), cfg)
            } else {
                extract_session(s, cfg)
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut set = ObservationSet {
        names: cfg.approach.feature_names(),
        kind: cfg.approach.feature_kind(),
        sessions: Vec::with_capacity(kept.len()),
        observations: Vec::new(),
        warnings: Vec::new(),
    };
    for (i, (s, ex)) in kept.iter().zip(extracted).enumerate() {
        set.sessions.push(SessionInfo {
            id: s.id.clone(),
            label: s.label,
            age_group: s.age_group,
        });
        if ex.skipped > 0 {
            set.warnings.push(format!(
                "session {}: skipped {} observation(s)",
                s.id, ex.skipped
            ));
        }
        set.observations
            .extend(ex.rows.into_iter().map(|(t, values)| Observation {
                session: i,
                t,
                label: s.label,
                values,
            }));
    }
    Ok(set)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub k: usize,
    pub auc: Option<f64>,
    pub eer: Option<f64>,
    pub n_pos: usize,
    pub n_neg: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldAudit {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub train_fingerprint: String,
    pub test_fingerprint: String,
    /// Feature mask refit on this fold's training rows, when selection ran.
    pub selected: Option<Vec<String>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeakageCheck {
    pub folds_disjoint: bool,
    pub selection_train_only: bool,
}

/// Pooled fused scores for one bundle size.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BundleScores {
    pub k: usize,
    pub pos: Vec<f64>,
    pub neg: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub n_sessions: usize,
    pub n_observations: usize,
    pub features: Vec<String>,
    pub curve: Vec<CurvePoint>,
    pub folds: Vec<FoldAudit>,
    pub leakage: LeakageCheck,
    pub fold_assignment: Vec<usize>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub bundle_scores: Vec<BundleScores>,
}

impl EvalReport {
    pub fn point(&self, k: usize) -> Option<&CurvePoint> {
        self.curve.iter().find(|p| p.k == k)
    }

    pub fn auc_at(&self, k: usize) -> Option<f64> {
        self.point(k).and_then(|p| p.auc)
    }

    pub fn eer_at(&self, k: usize) -> Option<f64> {
        self.point(k).and_then(|p| p.eer)
    }

    pub fn roc(&self, k: usize) -> Result<RocCurve> {
        let b = self
            .bundle_scores
            .iter()
            .find(|b| b.k == k)
            .ok_or_else(|| Error::InvalidConfig(format!("k={k} not evaluated")))?;
        RocCurve::new(&b.pos, &b.neg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// FNV-1a over the sorted index set, as hex.
fn fingerprint(indices: &[usize]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for &i in indices {
        for b in (i as u64).to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    format!("{h:016x}")
}

fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(fold as u64 + 1)
}

struct FoldResult {
    audit: FoldAudit,
    test: Vec<usize>,
    scores: Vec<f64>,
    selection_clean: bool,
}

fn run_fold(
    set: &ObservationSet,
    data: &Dataset,
    assignment: &[usize],
    fold: usize,
    cfg: &EvalConfig,
) -> Result<FoldResult> {
    let (train, test) = fold_indices(assignment, fold);
    let seed = fold_seed(cfg.seed, fold);
    let mut train_data = data.subset(&train);
    let mut test_data = data.subset(&test);
    let mut selected = None;
    let mut selection_clean = true;

    if let Some(k) = cfg.selection_k() {
        // Only the training rows reach the selector.
        let selector_rows = &train;
        selection_clean = selector_rows.iter().all(|&i| assignment[i] != fold);
        let params = ForestParams {
            seed: seed ^ 0x005E_1EC7,
            ..ForestParams::default()
        };
        let sel = select_from_dataset(&train_data, k.min(set.names.len()), &params)?;
        let cols = sel.mask.indices(train_data.names())?;
        train_data = train_data.project(&cols);
        test_data = test_data.project(&cols);
        selected = Some(sel.mask.names().to_vec());
    }

    let model = cfg.classifier.train(&train_data, seed)?;
    let scores = (0..test_data.len())
        .map(|i| model.score(test_data.row(i)).map(|s| s.p_child()))
        .collect::<Result<Vec<_>>>()?;

    Ok(FoldResult {
        audit: FoldAudit {
            fold,
            n_train: train.len(),
            n_test: test.len(),
            train_fingerprint: fingerprint(&train),
            test_fingerprint: fingerprint(&test),
            selected,
        },
        test,
        scores,
        selection_clean,
    })
}

/// Groups observation indices into chronological streams of one session
/// and one label.
fn streams(
    set: &ObservationSet,
    members: impl Iterator<Item = usize>,
) -> BTreeMap<(usize, bool), Vec<usize>> {
    let mut out: BTreeMap<(usize, bool), Vec<usize>> = BTreeMap::new();
    for i in members {
        let o = &set.observations[i];
        out.entry((o.session, o.label.is_child()))
            .or_default()
            .push(i);
    }
    for idx in out.values_mut() {
        idx.sort_by_key(|&i| (set.observations[i].t, i));
    }
    out
}

fn bundle_pool(
    set: &ObservationSet,
    scores: &[f64],
    members: impl Iterator<Item = usize>,
    k: usize,
    stride: usize,
) -> BundleScores {
    let mut pool = BundleScores {
        k,
        ..Default::default()
    };
    for ((_, child), idx) in streams(set, members) {
        let s: Vec<f64> = idx.iter().map(|&i| scores[i]).collect();
        let fused = fused_scores(&s, k, stride);
        if child {
            pool.pos.extend(fused);
        } else {
            pool.neg.extend(fused);
        }
    }
    pool
}

/// Cross-validates `cfg.classifier` on pre-extracted observations.
pub fn evaluate_observations(set: &ObservationSet, cfg: &EvalConfig) -> Result<EvalReport> {
    cfg.validate()?;
    if set.is_empty() {
        return Err(Error::EmptyData);
    }
    let data = set.dataset()?;
    if !data.has_both_classes() {
        return Err(Error::SingleClass);
    }
    let groups: Vec<&str> = set
        .observations
        .iter()
        .map(|o| set.sessions[o.session].id.as_str())
        .collect();
    let assignment = kfold_split(data.labels(), &groups, cfg.folds, cfg.mode, cfg.seed)?;

    let results = (0..cfg.folds)
        .into_par_iter()
        .map(|f| run_fold(set, &data, &assignment, f, cfg))
        .collect::<Result<Vec<_>>>()?;

    let mut scores = vec![f64::NAN; set.len()];
    let mut seen = vec![false; set.len()];
    let mut folds_disjoint = true;
    for r in &results {
        for (&i, &s) in r.test.iter().zip(&r.scores) {
            folds_disjoint &= !seen[i];
            seen[i] = true;
            scores[i] = s;
        }
    }
    folds_disjoint &= seen.iter().all(|&x| x);
    if cfg.mode == CvMode::Session {
        for f in 0..cfg.folds {
            let (train, test) = fold_indices(&assignment, f);
            let train_ids: std::collections::HashSet<&str> =
                train.iter().map(|&i| groups[i]).collect();
            folds_disjoint &= test.iter().all(|&i| !train_ids.contains(groups[i]));
        }
    }
    let leakage = LeakageCheck {
        folds_disjoint,
        selection_train_only: results.iter().all(|r| r.selection_clean),
    };

    let mut warnings = set.warnings.clone();
    let mut curve = Vec::with_capacity(cfg.k_list.len());
    let mut bundle_scores = Vec::with_capacity(cfg.k_list.len());
    for &k in &cfg.k_list {
        let pool = bundle_pool(set, &scores, 0..set.len(), k, cfg.stride);
        let (auc_k, eer_k) = if cfg.per_fold {
            per_fold_metrics(set, &scores, &results, k, cfg.stride)
        } else if pool.pos.is_empty() || pool.neg.is_empty() {
            (None, None)
        } else {
            (
                Some(auc(&pool.pos, &pool.neg)?),
                Some(roc_and_eer(&pool.pos, &pool.neg)?.1),
            )
        };
        if auc_k.is_some_and(|a| a < 0.5) {
            warnings.push(format!("k={k}: AUC below 0.5, scores are not flipped"));
        }
        if auc_k.is_none() {
            let msg =
                format!("k={k}: no session has enough observations for a bundle in both classes");
            tracing::warn!("{msg}");
            warnings.push(msg);
        }
        curve.push(CurvePoint {
            k,
            auc: auc_k,
            eer: eer_k,
            n_pos: pool.pos.len(),
            n_neg: pool.neg.len(),
        });
        bundle_scores.push(pool);
    }

    Ok(EvalReport {
        config: cfg.clone(),
        n_sessions: set.sessions.len(),
        n_observations: set.len(),
        features: set.names.to_vec(),
        curve,
        folds: results.into_iter().map(|r| r.audit).collect(),
        leakage,
        fold_assignment: assignment,
        warnings,
        bundle_scores,
    })
}

fn per_fold_metrics(
    set: &ObservationSet,
    scores: &[f64],
    folds: &[FoldResult],
    k: usize,
    stride: usize,
) -> (Option<f64>, Option<f64>) {
    let mut aucs = Vec::new();
    let mut eers = Vec::new();
    for r in folds {
        let pool = bundle_pool(set, scores, r.test.iter().copied(), k, stride);
        if let (Ok(a), Ok((_, e))) = (auc(&pool.pos, &pool.neg), roc_and_eer(&pool.pos, &pool.neg))
        {
            aucs.push(a);
            eers.push(e);
        }
    }
    if aucs.is_empty() {
        return (None, None);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    (Some(mean(&aucs)), Some(mean(&eers)))
}

pub fn evaluate_pipeline(sessions: &[Session], cfg: &EvalConfig) -> Result<EvalReport> {
    let set = extract_observations(sessions, cfg)?;
    evaluate_observations(&set, cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub window_s: f64,
    pub n_observations: usize,
    pub curve: Vec<CurvePoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub config: EvalConfig,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn auc(&self, window_s: f64, k: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.window_s == window_s)?
            .curve
            .iter()
            .find(|p| p.k == k)?
            .auc
    }

    /// Plot-ready long format: `window_s,k,auc,eer`; missing values empty.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "window_s,k,auc,eer")?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for row in &self.rows {
            for p in &row.curve {
                writeln!(w, "{},{},{},{}", row.window_s, p.k, opt(p.auc), opt(p.eer))?;
            }
        }
        Ok(())
    }
}

/// One sensor-approach evaluation per window length.
pub fn sweep_window(sessions: &[Session], cfg: &EvalConfig, n_list: &[f64]) -> Result<SweepTable> {
    if cfg.approach != Approach::Sensor {
        return Err(Error::InvalidConfig(
            "window sweep needs the sensor approach".into(),
        ));
    }
    let rows = n_list
        .par_iter()
        .map(|&n| {
            let run = EvalConfig {
                window_s: n,
                ..cfg.clone()
            };
            let report = evaluate_pipeline(sessions, &run)?;
            Ok(SweepRow {
                window_s: n,
                n_observations: report.n_observations,
                curve: report.curve,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        config: cfg.clone(),
        rows,
    })
}

/// Re-evaluates with only the features accepted by `keep`.
pub fn ablate_features(
    set: &ObservationSet,
    cfg: &EvalConfig,
    keep: impl Fn(&str) -> bool,
) -> Result<EvalReport> {
    let mask = FeatureMask::from_predicate(&set.names, keep)?;
    evaluate_observations(&set.project(&mask)?, cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub classifier: String,
    pub best_auc: f64,
    pub best_params: ClassifierSpec,
    /// AUC of every parameter set, in grid order.
    pub trials: Vec<(ClassifierSpec, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareTable {
    pub approach: Approach,
    pub rows: Vec<CompareRow>,
}

/// Single-observation (k = 1) AUC of each parameter set; each classifier
/// reports its best.
pub fn compare_classifiers(
    set: &ObservationSet,
    cfg: &EvalConfig,
    grid: &[(String, Vec<ClassifierSpec>)],
) -> Result<CompareTable> {
    if grid.is_empty() || grid.iter().any(|(_, g)| g.is_empty()) {
        return Err(Error::InvalidConfig(
            "every classifier needs at least one parameter set".into(),
        ));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for (name, specs) in grid {
        let mut trials = Vec::with_capacity(specs.len());
        for spec in specs {
            let run = EvalConfig {
                classifier: *spec,
                k_list: vec![1],
                ..cfg.clone()
            };
            let report = evaluate_observations(set, &run)?;
            let a = report.auc_at(1).ok_or(Error::EmptySide("k=1"))?;
            trials.push((*spec, a));
        }
        let (best_params, best_auc) = trials
            .iter()
            .copied()
            .fold(None::<(ClassifierSpec, f64)>, |best, t| match best {
                Some(b) if b.1 >= t.1 => Some(b),
                _ => Some(t),
            })
            .expect("non-empty grid");
        rows.push(CompareRow {
            classifier: name.clone(),
            best_auc,
            best_params,
            trials,
        });
    }
    Ok(CompareTable {
        approach: cfg.approach,
        rows,
    })
}

/// Scores produced elsewhere, one per line:
/// `{"session":..., "label":"child|adult", "p_child":...}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExternalScore {
    pub session: String,
    pub label: Label,
    pub p_child: f64,
}

/// Single-observation AUC of an external score file, for comparison rows
/// from classifiers trained outside this crate.
pub fn external_auc(scores: &[ExternalScore]) -> Result<f64> {
    let pos: Vec<f64> = scores
        .iter()
        .filter(|s| s.label.is_child())
        .map(|s| s.p_child)
        .collect();
    let neg: Vec<f64> = scores
        .iter()
        .filter(|s| !s.label.is_child())
        .map(|s| s.p_child)
        .collect();
    auc(&pos, &neg)
}
