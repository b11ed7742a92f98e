use std::fs;
use std::io::BufReader;
use std::path::Path;

use childsense::classify::ClassifierSpec;
use childsense::eval::{evaluate_pipeline, Approach, EvalConfig};
use childsense::segment::{segment_gestures, GestureKind, SegmentParams};
use childsense::session::{
    load_dataset, parse_sensor_log, parse_touch_log, read_manifest, Label, Session,
};
use childsense::synth::{
    generate_dataset, write_dataset, BehaviorProfile, Dist, GenConfig, Profiles,
};

fn small(seed: u64) -> GenConfig {
    GenConfig {
        sessions_per_class: 8,
        gestures_per_session: 24,
        session_duration_s: 30.0,
        seed,
        ..GenConfig::default()
    }
}

fn stroke_eval(sessions: &[Session], classifier: ClassifierSpec, seed: u64) -> f64 {
    let cfg = EvalConfig {
        approach: Approach::TouchStroke,
        classifier,
        k_list: vec![1],
        folds: 5,
        seed,
        ..EvalConfig::default()
    };
    evaluate_pipeline(sessions, &cfg)
        .unwrap()
        .auc_at(1)
        .unwrap()
}

fn forest(n: usize) -> ClassifierSpec {
    match ClassifierSpec::forest() {
        ClassifierSpec::Forest {
            max_features,
            criterion,
            max_depth,
            min_leaf,
            ..
        } => ClassifierSpec::Forest {
            n_estimators: n,
            max_features,
            criterion,
            max_depth,
            min_leaf,
        },
        _ => unreachable!(),
    }
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn default_scale_and_clean_logs() {
    let cfg = GenConfig::default();
    let sessions = generate_dataset(&cfg).unwrap();
    assert_eq!(sessions.len(), 50);
    let gestures: usize = sessions
        .iter()
        .map(|s| {
            segment_gestures(&s.touch_events, &SegmentParams::default())
                .iter()
                .filter(|g| g.complete)
                .count()
        })
        .sum();
    assert!(gestures >= 2000, "{gestures} gestures");

    let tmp = tempfile::tempdir().unwrap();
    let manifest = write_dataset(&sessions, tmp.path()).unwrap();
    for entry in read_manifest(&manifest).unwrap() {
        let touch = fs::File::open(tmp.path().join(&entry.touch)).unwrap();
        let events = parse_touch_log(BufReader::new(touch)).unwrap();
        assert!(!events.is_empty());
        let sensors = parse_sensor_log(BufReader::new(
            fs::File::open(tmp.path().join(&entry.sensors)).unwrap(),
        ))
        .unwrap();
        assert_eq!(sensors.skipped, 0);
    }
    assert_eq!(load_dataset(&manifest).unwrap(), sessions);
}

#[test]
fn same_seed_same_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    write_dataset(&generate_dataset(&small(5)).unwrap(), a.path()).unwrap();
    write_dataset(&generate_dataset(&small(5)).unwrap(), b.path()).unwrap();
    assert_eq!(dir_bytes(a.path()), dir_bytes(b.path()));
    let c = tempfile::tempdir().unwrap();
    write_dataset(&generate_dataset(&small(6)).unwrap(), c.path()).unwrap();
    assert_ne!(dir_bytes(a.path()), dir_bytes(c.path()));
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    (
        m,
        (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt(),
    )
}

#[test]
fn generated_moments_match_profile() {
    let cfg = GenConfig {
        sessions_per_class: 40,
        ..GenConfig::default()
    };
    let child = &cfg.profiles.child;
    let sessions = generate_dataset(&cfg).unwrap();
    let (mut size, mut pressure, mut chord_mm, mut tap_ms) = (vec![], vec![], vec![], vec![]);
    for s in sessions.iter().filter(|s| s.label == Label::Child) {
        for g in segment_gestures(&s.touch_events, &SegmentParams::default()) {
            let n = g.points.len() as f64;
            size.push(g.points.iter().map(|p| p.size).sum::<f64>() / n);
            pressure.push(g.points.iter().map(|p| p.pressure).sum::<f64>() / n);
            match g.kind {
                GestureKind::Tap => tap_ms.push(g.duration_ms() as f64),
                GestureKind::Stroke => {
                    let (a, b) = (g.points.first().unwrap(), g.points.last().unwrap());
                    chord_mm
                        .push(((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).sqrt() / cfg.px_per_mm);
                }
            }
        }
    }
    let within = |xs: &[f64], d: &Dist, what: &str| {
        assert!(
            xs.len() >= 1000 || what == "tap duration",
            "{what}: only {}",
            xs.len()
        );
        let (m, s) = mean_std(xs);
        assert!(
            (m - d.mean).abs() <= 0.05 * d.mean,
            "{what} mean {m} vs {}",
            d.mean
        );
        assert!(
            (s - d.std).abs() <= 0.05 * d.std,
            "{what} std {s} vs {}",
            d.std
        );
    };
    within(&size, &child.touch_size, "size");
    within(&pressure, &child.touch_pressure, "pressure");
    within(&chord_mm, &child.stroke_length_mm, "stroke length");
    assert!(tap_ms.len() >= 300);
    let (m, _) = mean_std(&tap_ms);
    assert!(
        (m - child.tap_duration_ms.mean).abs() <= 0.05 * child.tap_duration_ms.mean,
        "tap duration {m}"
    );
}

#[test]
fn identical_profiles_are_indistinguishable() {
    let child = BehaviorProfile::child();
    let cfg = GenConfig {
        profiles: Profiles {
            child: child.clone(),
            adult: child,
        },
        ..small(21)
    };
    let auc = stroke_eval(&generate_dataset(&cfg).unwrap(), forest(50), 0);
    assert!((0.4..=0.6).contains(&auc), "null AUC {auc}");
}

#[test]
fn separability_dial_is_monotone() {
    let mut means = Vec::new();
    for gap in [0.0, 0.05, 0.15] {
        let mut total = 0.0;
        for seed in 0..5 {
            let child = BehaviorProfile::child();
            let mut adult = child.clone();
            adult.touch_size.mean += gap;
            let cfg = GenConfig {
                profiles: Profiles { child, adult },
                ..small(100 + seed)
            };
            total += stroke_eval(&generate_dataset(&cfg).unwrap(), forest(50), seed);
        }
        means.push(total / 5.0);
    }
    assert!(means.windows(2).all(|w| w[1] >= w[0] - 0.01), "{means:?}");
    assert!(means[2] > 0.9, "{means:?}");
}

#[test]
fn forest_not_worse_than_tree() {
    for seed in 0..10 {
        let sessions = generate_dataset(&small(200 + seed)).unwrap();
        let f = stroke_eval(&sessions, forest(100), seed);
        let t = stroke_eval(&sessions, ClassifierSpec::tree(), seed);
        assert!(f >= t - 0.05, "seed {seed}: forest {f} vs tree {t}");
    }
}
