use childsense::eval::{auc, kfold_split, CvMode, RocCurve};
use childsense::fusion::decide;
use childsense::segment::{
    classify_gesture, segment_gestures, segment_windows, GestureKind, SegmentParams,
};
use childsense::sensor::axis_stats;
use childsense::session::{
    parse_sensor_log, parse_touch_log, write_sensor_log, write_touch_log, AgeGroup, Label, Phase,
    SensorKind, SensorSample, SensorStreams, Session, TouchEvent,
};
use proptest::prelude::*;

fn scores() -> impl Strategy<Value = Vec<f64>> {
    // Coarse grid so ties are common.
    prop::collection::vec((0u32..40).prop_map(|v| v as f64 / 40.0), 1..40)
}

fn phase() -> impl Strategy<Value = Phase> {
    prop_oneof![Just(Phase::Down), Just(Phase::Move), Just(Phase::Up)]
}

fn touch_events() -> impl Strategy<Value = Vec<TouchEvent>> {
    prop::collection::vec(
        (
            0i64..1500,
            phase(),
            0.0f64..1080.0,
            0.0f64..1920.0,
            0.0f64..1.0,
            0.0f64..1.0,
        ),
        0..60,
    )
    .prop_map(|raw| {
        let mut t = 1_700_000_000_000;
        raw.into_iter()
            .map(|(dt, phase, x, y, p, s)| {
                t += dt;
                TouchEvent::new(t, phase, x, y, p, s)
            })
            .collect()
    })
}

fn sensor_kind() -> impl Strategy<Value = SensorKind> {
    prop::sample::select(SensorKind::ALL.to_vec())
}

fn streams() -> impl Strategy<Value = SensorStreams> {
    prop::collection::vec(
        (
            0i64..30,
            sensor_kind(),
            -20.0f64..20.0,
            -20.0f64..20.0,
            -20.0f64..20.0,
        ),
        0..200,
    )
    .prop_map(|raw| {
        let mut s = SensorStreams::new();
        let mut t = 0;
        for (dt, kind, x, y, z) in raw {
            t += dt;
            s.push(SensorSample::new(t, kind, x, y, z));
        }
        s
    })
}

proptest! {
    #[test]
    fn auc_invariant_under_monotone_maps(pos in scores(), neg in scores(), a in 0.1f64..10.0, b in -5.0f64..5.0) {
        let base = auc(&pos, &neg).unwrap();
        prop_assert!((0.0..=1.0).contains(&base));
        let affine = |v: &[f64]| v.iter().map(|x| a * x + b).collect::<Vec<_>>();
        let cubed = |v: &[f64]| v.iter().map(|x| (x - 0.3).powi(3)).collect::<Vec<_>>();
        prop_assert!((auc(&affine(&pos), &affine(&neg)).unwrap() - base).abs() < 1e-12);
        prop_assert!((auc(&cubed(&pos), &cubed(&neg)).unwrap() - base).abs() < 1e-12);
        prop_assert!((auc(&neg, &pos).unwrap() - (1.0 - base)).abs() < 1e-12);
        let roc = RocCurve::new(&pos, &neg).unwrap();
        prop_assert!((roc.trapezoid_auc() - base).abs() < 1e-12);
    }

    #[test]
    fn eer_symmetric_under_class_swap(pos in scores(), neg in scores()) {
        let eer = RocCurve::new(&pos, &neg).unwrap().eer();
        prop_assert!((0.0..=1.0).contains(&eer));
        let flip = |v: &[f64]| v.iter().map(|x| 1.0 - x).collect::<Vec<_>>();
        let swapped = RocCurve::new(&flip(&neg), &flip(&pos)).unwrap().eer();
        prop_assert!((eer - swapped).abs() < 1e-12, "{} vs {}", eer, swapped);
    }

    #[test]
    fn moments_under_negation(values in prop::collection::vec(-50.0f64..50.0, 3..100)) {
        let s = axis_stats(&values).unwrap();
        let neg: Vec<f64> = values.iter().map(|v| -v).collect();
        let n = axis_stats(&neg).unwrap();
        prop_assert!((s.skewness + n.skewness).abs() < 1e-9 * s.skewness.abs().max(1.0));
        prop_assert!((s.kurtosis - n.kurtosis).abs() < 1e-9 * s.kurtosis.abs().max(1.0));
        prop_assert!((s.mean + n.mean).abs() < 1e-9);
        prop_assert!((s.std - n.std).abs() < 1e-9);
        prop_assert_eq!(s.min, -n.max);
        prop_assert!(s.kurtosis >= 0.0);
        prop_assert!((s.var - s.std * s.std).abs() < 1e-9 * s.var.max(1.0));
    }

    #[test]
    fn touch_log_round_trip(events in touch_events()) {
        let mut buf = Vec::new();
        write_touch_log(&events, &mut buf).unwrap();
        prop_assert_eq!(parse_touch_log(&buf[..]).unwrap(), events);
    }

    #[test]
    fn sensor_log_partitions_by_kind(s in streams()) {
        let mut buf = Vec::new();
        write_sensor_log(&s, &mut buf).unwrap();
        let log = parse_sensor_log(&buf[..]).unwrap();
        prop_assert_eq!(log.parsed, s.len());
        prop_assert_eq!(log.skipped, 0);
        for kind in SensorKind::ALL {
            prop_assert_eq!(log.streams.get(kind), s.get(kind));
            prop_assert!(log.streams.get(kind).iter().all(|x| x.sensor == kind));
        }
    }

    #[test]
    fn magnitude_identity(x in -100.0f64..100.0, y in -100.0f64..100.0, z in -100.0f64..100.0) {
        let m = SensorSample::new(0, SensorKind::Acc, x, y, z).magnitude();
        prop_assert!(m >= 0.0);
        prop_assert!((m * m - (x * x + y * y + z * z)).abs() < 1e-9 * (m * m).max(1.0));
    }

    #[test]
    fn windows_partition_the_recording(s in streams(), n in 1u32..5) {
        prop_assume!(!s.is_empty());
        let session = Session::new("s", Label::Adult, AgeGroup::Adult, vec![], s.clone()).unwrap();
        let set = segment_windows(&session, n as f64, 0).unwrap();
        let width = n as i64 * 1000;
        let (first, _) = s.time_range().unwrap();
        for (i, w) in set.windows.iter().enumerate() {
            prop_assert_eq!(w.t_start, first + i as i64 * width);
            prop_assert_eq!(w.t_end - w.t_start, width);
            for kind in SensorKind::ALL {
                prop_assert!(w.samples.get(kind).iter().all(|x| x.t >= w.t_start && x.t < w.t_end));
            }
        }
        let covered: usize = set.windows.iter().map(|w| w.samples.len()).sum();
        let inside = SensorKind::ALL
            .iter()
            .map(|&k| s.get(k).iter().filter(|x| x.t < first + set.windows.len() as i64 * width).count())
            .sum::<usize>();
        prop_assert_eq!(covered, inside);
    }

    #[test]
    fn segmentation_keeps_every_event(events in touch_events()) {
        let gestures = segment_gestures(&events, &SegmentParams::default());
        let flat: Vec<TouchEvent> = gestures.iter().flat_map(|g| g.points.clone()).collect();
        prop_assert_eq!(flat, events);
        for g in &gestures {
            prop_assert!(g.t_start <= g.t_end);
            if g.complete {
                prop_assert_eq!(g.points.first().unwrap().phase, Phase::Down);
                prop_assert_eq!(g.points.last().unwrap().phase, Phase::Up);
            }
            prop_assert_eq!(g.kind, classify_gesture(g, 10.0, 300));
        }
    }

    #[test]
    fn tap_rule(dur in 0i64..600, dx in 0.0f64..30.0) {
        let pts = vec![
            TouchEvent::new(0, Phase::Down, 100.0, 100.0, 0.5, 0.2),
            TouchEvent::new(dur, Phase::Up, 100.0 + dx, 100.0, 0.5, 0.2),
        ];
        let g = segment_gestures(&pts, &SegmentParams { gap_ms: 10_000, ..SegmentParams::default() }).remove(0);
        let tap = dx < 10.0 && dur < 300;
        prop_assert_eq!(g.kind == GestureKind::Tap, tap);
    }

    #[test]
    fn threshold_monotone(fused in 0.0f64..1.0, t1 in 0.0f64..1.0, t2 in 0.0f64..1.0) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        if decide(fused, hi).verdict == Label::Child {
            prop_assert_eq!(decide(fused, lo).verdict, Label::Child);
        }
        prop_assert_eq!(decide(fused, fused).verdict, Label::Child);
    }

    #[test]
    fn kfold_covers_and_respects_sessions(
        sizes in prop::collection::vec((1usize..8, any::<bool>()), 6..20),
        folds in 2usize..6,
        seed in any::<u64>(),
    ) {
        let mut labels = Vec::new();
        let mut names = Vec::new();
        for (i, &(n, child)) in sizes.iter().enumerate() {
            for _ in 0..n {
                labels.push(child);
                names.push(format!("s{i}"));
            }
        }
        prop_assume!(labels.len() >= folds);
        let groups: Vec<&str> = names.iter().map(String::as_str).collect();

        let rec = kfold_split(&labels, &groups, folds, CvMode::Record, seed).unwrap();
        prop_assert!(rec.iter().all(|&f| f < folds));
        for class in [true, false] {
            let counts: Vec<usize> =
                (0..folds).map(|f| rec.iter().zip(&labels).filter(|(&a, &l)| a == f && l == class).count()).collect();
            prop_assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
        }

        let ses = kfold_split(&labels, &groups, folds, CvMode::Session, seed).unwrap();
        for (i, g) in groups.iter().enumerate() {
            let first = groups.iter().position(|h| h == g).unwrap();
            prop_assert_eq!(ses[i], ses[first]);
        }
    }
}
