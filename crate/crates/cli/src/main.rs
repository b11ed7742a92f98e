use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use childsense::classify::{
    load_model, save_model, train_forest, ClassifierSpec, Dataset, ForestParams,
};
use childsense::eval::{
    ablate_features, compare_classifiers, evaluate_observations, external_auc,
    extract_observations, sweep_window, AgeFilter, Approach, CvMode, EvalConfig, ExternalScore,
};
use childsense::features::{
    apply_mask, read_feature_csv, write_feature_csv, FeatureMask, FeatureVector,
};
use childsense::fusion::{decide, make_bundles};
use childsense::segment::{segment_gestures, SegmentParams};
use childsense::session::{
    load_dataset, parse_sensor_log, parse_touch_log, read_manifest, Label, SensorKind, Session,
};
use childsense::synth::{generate_dataset, write_dataset, GenConfig};
use childsense::touch::is_size_feature;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Child-vs-adult detection from touch and motion-sensor logs.
#[derive(Parser, Debug)]
#[command(name = "childsense", version)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate synthetic sessions: manifest plus JSONL logs.
    Synth(SynthArgs),
    /// Parse every log of a dataset and report counts.
    Ingest(IngestArgs),
    /// Emit the gesture index of every session as JSONL.
    Segment(SegmentArgs),
    /// Extract a feature CSV.
    Extract(ExtractArgs),
    /// Train a classifier on a feature CSV.
    Train(TrainArgs),
    /// Score a feature CSV and emit one decision per bundle.
    Predict(PredictArgs),
    /// Cross-validated AUC/EER per bundle size.
    Eval(EvalArgs),
    /// Sensor window-length sweep.
    Sweep(SweepArgs),
    /// Evaluate with a subset of the features.
    Ablate(AblateArgs),
    /// Grid-search several classifiers at k = 1.
    Compare(CompareArgs),
    /// Rank features by forest importance.
    Rank(RankArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Preset {
    Default,
    OverlappingSize,
    BurstTremor,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Generator config JSON; missing fields take the preset's values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "default")]
    preset: Preset,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sessions_per_class: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct IngestArgs {
    /// Dataset manifest.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct SegmentFlags {
    /// Longest silence inside one gesture.
    #[arg(long, default_value_t = 1000)]
    gap_ms: i64,
    /// Movement below which a short touch is a tap.
    #[arg(long, default_value_t = 10.0)]
    tap_move_px: f64,
    #[arg(long, default_value_t = 300)]
    tap_max_ms: i64,
}

impl SegmentFlags {
    fn params(&self) -> SegmentParams {
        SegmentParams {
            gap_ms: self.gap_ms,
            tap_move_px: self.tap_move_px,
            tap_max_ms: self.tap_max_ms,
        }
    }
}

#[derive(Args, Debug)]
struct SegmentArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    segment: SegmentFlags,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    #[arg(long)]
    data: PathBuf,
    /// tap, stroke, sensor, tap+sensor or stroke+sensor.
    #[arg(long, value_parser = parse_kind)]
    kind: Approach,
    #[arg(long, default_value_t = 1.0)]
    window_s: f64,
    /// One feature name per line.
    #[arg(long)]
    mask: Option<PathBuf>,
    #[arg(long, value_parser = parse_serde::<AgeFilter>, default_value = "all")]
    age_filter: AgeFilter,
    #[arg(long, default_value_t = 3)]
    min_samples: usize,
    #[command(flatten)]
    segment: SegmentFlags,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    features: PathBuf,
    /// Classifier with default parameters; overridden by --classifier-config.
    #[arg(long, default_value = "forest")]
    classifier: String,
    /// Classifier JSON, e.g. {"kind":"forest","n_estimators":100}.
    #[arg(long)]
    classifier_config: Option<PathBuf>,
    #[arg(long)]
    mask: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    features: PathBuf,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    stride: usize,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Flags overriding fields of an evaluation config file.
#[derive(Args, Debug, Clone)]
struct EvalFlags {
    /// Evaluation config JSON; may name the dataset under "data".
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset manifest (overrides the config's "data").
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, value_parser = parse_serde::<Approach>)]
    approach: Option<Approach>,
    /// forest, tree, logistic or perceptron with default parameters.
    #[arg(long)]
    classifier: Option<String>,
    /// Comma-separated bundle sizes.
    #[arg(long, value_delimiter = ',')]
    k_list: Option<Vec<usize>>,
    #[arg(long)]
    window_s: Option<f64>,
    #[arg(long, value_parser = parse_serde::<AgeFilter>)]
    age_filter: Option<AgeFilter>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long, value_parser = parse_serde::<CvMode>)]
    mode: Option<CvMode>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sensor features kept per fold; 0 keeps all.
    #[arg(long)]
    top_k: Option<usize>,
    /// Average metrics over folds instead of pooling scores.
    #[arg(long)]
    per_fold: bool,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    eval: EvalFlags,
    #[arg(long)]
    out: PathBuf,
    /// Directory for one `roc_k<k>.csv` per bundle size.
    #[arg(long)]
    roc_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    eval: EvalFlags,
    /// Window lengths in seconds, comma-separated (default 1..=20).
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<f64>>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AblateArgs {
    #[command(flatten)]
    eval: EvalFlags,
    /// Keep only the touch-size features.
    #[arg(long)]
    size_only: bool,
    /// Keep features whose name contains this text (repeatable).
    #[arg(long)]
    keep: Vec<String>,
    #[arg(long)]
    mask: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    eval: EvalFlags,
    /// Grid JSON: [{"name":"forest","params":[{"kind":"forest",...}]}, ...].
    #[arg(long)]
    grid: Option<PathBuf>,
    /// External scores as NAME=PATH.jsonl (repeatable).
    #[arg(long)]
    external: Vec<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RankArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_parser = parse_kind, default_value = "sensor")]
    kind: Approach,
    #[arg(long, default_value_t = 1.0)]
    window_s: f64,
    #[arg(long, default_value_t = 200)]
    n_estimators: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_serde<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn parse_kind(s: &str) -> std::result::Result<Approach, String> {
    match s {
        "tap" => Ok(Approach::TouchTap),
        "stroke" => Ok(Approach::TouchStroke),
        "sensor" => Ok(Approach::Sensor),
        "tap+sensor" => Ok(Approach::CombinedTap),
        "stroke+sensor" => Ok(Approach::CombinedStroke),
        other => parse_serde(other),
    }
}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    childsense::Error::InvalidConfig(msg.into()).into()
}

fn classifier_by_name(name: &str) -> Result<ClassifierSpec> {
    Ok(match name {
        "forest" => ClassifierSpec::forest(),
        "tree" => ClassifierSpec::tree(),
        "logistic" => ClassifierSpec::Logistic {
            learning_rate: 0.1,
            epochs: 300,
        },
        "perceptron" => ClassifierSpec::Perceptron {
            learning_rate: 1.0,
            epochs: 100,
        },
        other => return Err(invalid(format!("unknown classifier `{other}`"))),
    })
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_reader(BufReader::new(file))
        .map_err(|e| invalid(format!("{}: {e}", path.display())))
}

/// Writes to `path`, or to stdout when absent.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))?,
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn pretty<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

fn read_mask(path: &Path) -> Result<FeatureMask> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(FeatureMask::parse(&text)?)
}

fn read_features(path: &Path) -> Result<Vec<FeatureVector>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(read_feature_csv(BufReader::new(file))?)
}

fn load(path: &Path) -> Result<Vec<Session>> {
    load_dataset(path).with_context(|| format!("loading dataset {}", path.display()))
}

fn synth(args: SynthArgs) -> Result<()> {
    let mut cfg = match args.preset {
        Preset::Default => GenConfig::default(),
        Preset::OverlappingSize => GenConfig::overlapping_size(),
        Preset::BurstTremor => GenConfig::burst_tremor(),
    };
    if let Some(path) = &args.config {
        // Missing keys fall back to the preset.
        let mut base = serde_json::to_value(&cfg)?;
        let patch: serde_json::Value = read_json(path)?;
        merge(&mut base, patch);
        cfg = serde_json::from_value(base)
            .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(n) = args.sessions_per_class {
        cfg.sessions_per_class = n;
    }
    let sessions = generate_dataset(&cfg)?;
    let manifest = write_dataset(&sessions, &args.out)?;
    fs::write(args.out.join("gen_config.json"), pretty(&cfg)?)?;
    tracing::info!(sessions = sessions.len(), manifest = %manifest.display(), "synthetic dataset written");
    Ok(())
}

fn merge(base: &mut serde_json::Value, patch: serde_json::Value) {
    match (base, patch) {
        (serde_json::Value::Object(b), serde_json::Value::Object(p)) => {
            for (k, v) in p {
                merge(b.entry(k).or_insert(serde_json::Value::Null), v);
            }
        }
        (slot, v) => *slot = v,
    }
}

#[derive(Serialize)]
struct IngestRow {
    session: String,
    label: Label,
    touch_events: usize,
    sensor_samples: BTreeMap<&'static str, usize>,
    skipped_sensor_lines: usize,
}

fn ingest(args: IngestArgs) -> Result<()> {
    let base = args.data.parent().unwrap_or(Path::new("."));
    let resolve = |p: &Path| {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };
    let mut out = Vec::new();
    for entry in read_manifest(&args.data)? {
        let open = |p: &Path| {
            File::open(resolve(p)).with_context(|| format!("opening {}", resolve(p).display()))
        };
        let touch = parse_touch_log(BufReader::new(open(&entry.touch)?))
            .with_context(|| format!("session {} touch log", entry.id))?;
        let sensors = parse_sensor_log(BufReader::new(open(&entry.sensors)?))
            .with_context(|| format!("session {} sensor log", entry.id))?;
        let row = IngestRow {
            session: entry.id.clone(),
            label: entry.label,
            touch_events: touch.len(),
            sensor_samples: SensorKind::ALL
                .iter()
                .map(|&k| (k.as_str(), sensors.streams.get(k).len()))
                .collect(),
            skipped_sensor_lines: sensors.skipped,
        };
        out.extend(serde_json::to_vec(&row)?);
        out.push(b'\n');
    }
    emit(args.out.as_deref(), &out)
}

#[derive(Serialize)]
struct GestureRow<'a> {
    session: &'a str,
    kind: &'a str,
    t_start: i64,
    t_end: i64,
    n_points: usize,
    complete: bool,
}

fn segment(args: SegmentArgs) -> Result<()> {
    let sessions = load(&args.data)?;
    let params = args.segment.params();
    let mut out = Vec::new();
    for s in &sessions {
        for g in segment_gestures(&s.touch_events, &params) {
            let row = GestureRow {
                session: &s.id,
                kind: g.kind.as_str(),
                t_start: g.t_start,
                t_end: g.t_end,
                n_points: g.points.len(),
                complete: g.complete,
            };
            out.extend(serde_json::to_vec(&row)?);
            out.push(b'\n');
        }
    }
    emit(args.out.as_deref(), &out)
}

fn extract(args: ExtractArgs) -> Result<()> {
    let sessions = load(&args.data)?;
    let cfg = EvalConfig {
        approach: args.kind,
        window_s: args.window_s,
        age_filter: args.age_filter,
        min_samples: args.min_samples,
        segment: args.segment.params(),
        ..EvalConfig::default()
    };
    let set = extract_observations(&sessions, &cfg)?;
    for w in &set.warnings {
        tracing::warn!("{w}");
    }
    let mut vectors = set.to_vectors();
    let mut names = set.names.to_vec();
    if let Some(path) = &args.mask {
        let mask = read_mask(path)?;
        vectors = vectors
            .iter()
            .map(|v| apply_mask(v, &mask))
            .collect::<childsense::Result<_>>()?;
        names = mask.names().to_vec();
    }
    let mut buf = Vec::new();
    write_feature_csv(&names, &vectors, &mut buf)?;
    emit(args.out.as_deref(), &buf)
}

fn train(args: TrainArgs) -> Result<()> {
    let spec = match &args.classifier_config {
        Some(path) => read_json(path)?,
        None => classifier_by_name(&args.classifier)?,
    };
    let mut vectors = read_features(&args.features)?;
    if let Some(path) = &args.mask {
        let mask = read_mask(path)?;
        vectors = vectors
            .iter()
            .map(|v| apply_mask(v, &mask))
            .collect::<childsense::Result<_>>()?;
    }
    let data = Dataset::from_vectors(&vectors)?;
    if !data.has_both_classes() {
        return Err(childsense::Error::SingleClass.into());
    }
    let model = spec.train(&data, args.seed)?;
    save_model(&model, &args.out)?;
    tracing::info!(kind = model.kind(), rows = data.len(), "model written");
    Ok(())
}

#[derive(Serialize)]
struct DecisionRow<'a> {
    session: &'a str,
    label: Label,
    bundle: usize,
    k: usize,
    fused: f64,
    verdict: Label,
    threshold: f64,
}

fn predict(args: PredictArgs) -> Result<()> {
    if args.k == 0 || args.stride == 0 {
        return Err(invalid("k and stride must be positive"));
    }
    let model = load_model(&args.model)?;
    let mask = FeatureMask::new(model.feature_names.clone())?;
    let vectors = read_features(&args.features)?;
    // Rows stay in file order within each session.
    let mut sessions: Vec<(&str, Label, Vec<f64>)> = Vec::new();
    for v in &vectors {
        let row = apply_mask(v, &mask)?;
        let score = model.score(&row.values)?.p_child();
        match sessions.iter_mut().find(|(id, _, _)| *id == v.group) {
            Some(entry) => entry.2.push(score),
            None => sessions.push((&v.group, v.label, vec![score])),
        }
    }
    let mut out = Vec::new();
    for (id, label, scores) in &sessions {
        for (i, b) in make_bundles(scores, args.k, args.stride).iter().enumerate() {
            let d = decide(b.fused, args.threshold);
            let row = DecisionRow {
                session: id,
                label: *label,
                bundle: i,
                k: args.k,
                fused: d.fused,
                verdict: d.verdict,
                threshold: args.threshold,
            };
            out.extend(serde_json::to_vec(&row)?);
            out.push(b'\n');
        }
    }
    emit(args.out.as_deref(), &out)
}

/// Resolved config plus the dataset path, as written into every artifact.
#[derive(Serialize, serde::Deserialize)]
struct RunConfig {
    #[serde(default)]
    data: Option<PathBuf>,
    #[serde(flatten)]
    eval: EvalConfig,
}

fn resolve(flags: &EvalFlags) -> Result<(PathBuf, EvalConfig)> {
    let mut run = match &flags.config {
        Some(path) => read_json::<RunConfig>(path)?,
        None => RunConfig {
            data: None,
            eval: EvalConfig::default(),
        },
    };
    let cfg = &mut run.eval;
    if let Some(v) = flags.approach {
        cfg.approach = v;
    }
    if let Some(name) = &flags.classifier {
        cfg.classifier = classifier_by_name(name)?;
    }
    if let Some(v) = &flags.k_list {
        cfg.k_list = v.clone();
    }
    if let Some(v) = flags.window_s {
        cfg.window_s = v;
    }
    if let Some(v) = flags.age_filter {
        cfg.age_filter = v;
    }
    if let Some(v) = flags.folds {
        cfg.folds = v;
    }
    if let Some(v) = flags.mode {
        cfg.mode = v;
    }
    if let Some(v) = flags.stride {
        cfg.stride = v;
    }
    if let Some(v) = flags.seed {
        cfg.seed = v;
    }
    if let Some(v) = flags.top_k {
        cfg.sensor_top_k = (v > 0).then_some(v);
    }
    if flags.per_fold {
        cfg.per_fold = true;
    }
    cfg.validate()?;
    let data = flags
        .data
        .clone()
        .or(run.data)
        .ok_or_else(|| invalid("no dataset: pass --data or set \"data\" in the config"))?;
    Ok((data, run.eval))
}

#[derive(Serialize)]
struct Artifact<'a, T: Serialize> {
    data: &'a Path,
    #[serde(flatten)]
    body: &'a T,
}

fn eval(args: EvalArgs) -> Result<()> {
    let (data, cfg) = resolve(&args.eval)?;
    let sessions = load(&data)?;
    let set = extract_observations(&sessions, &cfg)?;
    let report = evaluate_observations(&set, &cfg)?;
    for p in &report.curve {
        tracing::info!(k = p.k, auc = ?p.auc, eer = ?p.eer, "bundle size");
    }
    fs::write(
        &args.out,
        pretty(&Artifact {
            data: &data,
            body: &report,
        })?,
    )?;
    if let Some(dir) = &args.roc_dir {
        fs::create_dir_all(dir)?;
        for p in report.curve.iter().filter(|p| p.auc.is_some()) {
            let mut w = BufWriter::new(File::create(dir.join(format!("roc_k{}.csv", p.k)))?);
            report.roc(p.k)?.write_csv(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let (data, mut cfg) = resolve(&args.eval)?;
    if args.eval.approach.is_none() && args.eval.config.is_none() {
        cfg.approach = Approach::Sensor;
    }
    let n_list = args
        .n_list
        .clone()
        .unwrap_or_else(|| (1..=20).map(f64::from).collect());
    let sessions = load(&data)?;
    let table = sweep_window(&sessions, &cfg, &n_list)?;
    fs::write(
        &args.out,
        pretty(&Artifact {
            data: &data,
            body: &table,
        })?,
    )?;
    if let Some(path) = &args.csv {
        let mut w = BufWriter::new(File::create(path)?);
        table.write_csv(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn ablate(args: AblateArgs) -> Result<()> {
    let (data, cfg) = resolve(&args.eval)?;
    let mask = args.mask.as_deref().map(read_mask).transpose()?;
    if !args.size_only && args.keep.is_empty() && mask.is_none() {
        return Err(invalid("ablate needs --size-only, --keep or --mask"));
    }
    let keep = |name: &str| {
        (args.size_only && is_size_feature(name))
            || args.keep.iter().any(|k| name.contains(k.as_str()))
            || mask
                .as_ref()
                .is_some_and(|m| m.names().iter().any(|n| n == name))
    };
    let sessions = load(&data)?;
    let set = extract_observations(&sessions, &cfg)?;
    let report = ablate_features(&set, &cfg, keep)?;
    fs::write(
        &args.out,
        pretty(&Artifact {
            data: &data,
            body: &report,
        })?,
    )?;
    Ok(())
}

#[derive(serde::Deserialize)]
struct GridEntry {
    name: String,
    params: Vec<ClassifierSpec>,
}

#[derive(Serialize)]
struct ExternalRow {
    name: String,
    auc: f64,
}

#[derive(Serialize)]
struct CompareOut {
    config: EvalConfig,
    table: childsense::eval::CompareTable,
    external: Vec<ExternalRow>,
}

fn default_grid() -> Vec<(String, Vec<ClassifierSpec>)> {
    let forest = |n| ClassifierSpec::Forest {
        n_estimators: n,
        max_features: childsense::classify::MaxFeatures::Log2,
        criterion: childsense::classify::Criterion::Entropy,
        max_depth: None,
        min_leaf: 1,
    };
    vec![
        ("forest".into(), vec![forest(50), forest(200)]),
        ("tree".into(), vec![ClassifierSpec::tree()]),
        (
            "logistic".into(),
            vec![
                ClassifierSpec::Logistic {
                    learning_rate: 0.1,
                    epochs: 300,
                },
                ClassifierSpec::Logistic {
                    learning_rate: 1.0,
                    epochs: 300,
                },
            ],
        ),
        (
            "perceptron".into(),
            vec![ClassifierSpec::Perceptron {
                learning_rate: 1.0,
                epochs: 100,
            }],
        ),
    ]
}

fn compare(args: CompareArgs) -> Result<()> {
    let (data, cfg) = resolve(&args.eval)?;
    let grid = match &args.grid {
        Some(path) => read_json::<Vec<GridEntry>>(path)?
            .into_iter()
            .map(|g| (g.name, g.params))
            .collect(),
        None => default_grid(),
    };
    let mut external = Vec::new();
    for spec in &args.external {
        let (name, path) = spec
            .split_once('=')
            .ok_or_else(|| invalid(format!("--external `{spec}` is not NAME=PATH")))?;
        let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        let scores = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, l)| {
                serde_json::from_str::<ExternalScore>(l).map_err(|e| childsense::Error::Parse {
                    line: i + 1,
                    reason: e.to_string(),
                })
            })
            .collect::<childsense::Result<Vec<_>>>()?;
        external.push(ExternalRow {
            name: name.to_string(),
            auc: external_auc(&scores)?,
        });
    }
    let sessions = load(&data)?;
    let set = extract_observations(&sessions, &cfg)?;
    let table = compare_classifiers(&set, &cfg, &grid)?;
    for row in &table.rows {
        tracing::info!(classifier = %row.classifier, best_auc = row.best_auc, "compare");
    }
    fs::write(
        &args.out,
        pretty(&Artifact {
            data: &data,
            body: &CompareOut {
                config: cfg,
                table,
                external,
            },
        })?,
    )?;
    Ok(())
}

fn rank(args: RankArgs) -> Result<()> {
    let sessions = load(&args.data)?;
    let cfg = EvalConfig {
        approach: args.kind,
        window_s: args.window_s,
        ..EvalConfig::default()
    };
    let set = extract_observations(&sessions, &cfg)?;
    let data = Dataset::from_vectors(&set.to_vectors())?;
    if !data.has_both_classes() {
        return Err(childsense::Error::SingleClass.into());
    }
    let forest = train_forest(
        &data,
        &ForestParams {
            n_estimators: args.n_estimators,
            seed: args.seed,
            ..ForestParams::default()
        },
    )?;
    let mut out = String::from("rank,feature,importance\n");
    for (i, (name, imp)) in forest.feature_importance(data.names()).iter().enumerate() {
        out.push_str(&format!("{},{name},{imp}\n", i + 1));
    }
    emit(args.out.as_deref(), out.as_bytes())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(invalid("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("starting thread pool")?;
    }
    match cli.command {
        Command::Synth(a) => synth(a),
        Command::Ingest(a) => ingest(a),
        Command::Segment(a) => segment(a),
        Command::Extract(a) => extract(a),
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Eval(a) => eval(a),
        Command::Sweep(a) => sweep(a),
        Command::Ablate(a) => ablate(a),
        Command::Compare(a) => compare(a),
        Command::Rank(a) => rank(a),
    }
}

/// 1 for configuration mistakes, 2 for problems with the data.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err
        .chain()
        .find_map(|e| e.downcast_ref::<childsense::Error>())
    {
        Some(e) if e.is_validation() => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => tracing::Level::WARN,
        1 => tracing::Level::INFO,
        _ => tracing::Level::DEBUG,
    };
    tracing_subscriber::fmt()
        .with_writer(io::stderr)
        .with_max_level(level)
        .with_target(false)
        .with_ansi(io::stderr().is_terminal())
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
