//! Tap and stroke features.
//!
//! Coordinates feed the geometric stroke features but are never emitted
//! themselves. All standard deviations use the population (1/n) convention.

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::features::{shared_names, FeatureKind, FeatureVector};
use crate::segment::{distance, trajectory_length, Gesture};
use crate::session::{Label, TouchEvent};

pub const TAP_FEATURES: [&str; 3] = ["pressure", "size", "duration"];

/// Stroke feature names in canonical order.
pub const STROKE_FEATURES: [&str; 22] = [
    "straight_to_trajectory_length_ratio",
    "average_size",
    "std_size",
    "start_p",
    "start_to_LDP_length",
    "average_velocity",
    "std_velocity",
    "start_to_LDP_duration",
    "average_pressure",
    "LDP_to_stop_length",
    "trajectory_length",
    "average_distance",
    "straight_length",
    "LDP_velocity",
    "std_distance",
    "std_pressure",
    "LDP_to_stop_duration",
    "LDP_p",
    "stop_p",
    "LDP_s",
    "start_s",
    "stop_s",
];

pub fn tap_feature_names() -> Arc<[String]> {
    static NAMES: OnceLock<Arc<[String]>> = OnceLock::new();
    NAMES.get_or_init(|| shared_names(TAP_FEATURES)).clone()
}

pub fn stroke_feature_names() -> Arc<[String]> {
    static NAMES: OnceLock<Arc<[String]>> = OnceLock::new();
    NAMES.get_or_init(|| shared_names(STROKE_FEATURES)).clone()
}

/// Touch-size features: `size`, `average_size`, `std_size` and the
/// `*_s` point sizes.
pub fn is_size_feature(name: &str) -> bool {
    name.contains("size") || name.ends_with("_s")
}

pub(crate) fn mean(xs: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = xs.len();
    if n == 0 {
        return 0.0;
    }
    xs.sum::<f64>() / n as f64
}

pub(crate) fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let m = mean(xs.iter().copied());
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64;
    (m, var.sqrt())
}

/// `[pressure, size, duration]`: mean pressure and size over the tap's
/// events and the first-to-last timestamp span in ms.
pub fn tap_values(g: &Gesture) -> [f64; 3] {
    let p = mean(g.points.iter().map(|e| e.pressure));
    let s = mean(g.points.iter().map(|e| e.size));
    let duration = match (g.points.first(), g.points.last()) {
        (Some(a), Some(b)) => (b.t - a.t) as f64,
        _ => 0.0,
    };
    [p, s, duration]
}

pub fn tap_features(g: &Gesture, label: Label, group: &str) -> FeatureVector {
    FeatureVector::new(
        tap_feature_names(),
        tap_values(g).to_vec(),
        label,
        group,
        FeatureKind::Tap,
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LdpResult {
    pub index: usize,
    pub deviation: f64,
}

/// Largest Deviation Point: the point farthest from the start-stop chord.
///
/// Ties go to the earliest index. For a closed stroke (start == stop) the
/// distance from the start point is used instead.
pub fn find_ldp(points: &[(f64, f64)]) -> Result<LdpResult> {
    if points.len() < 2 {
        return Err(Error::DegenerateStroke(format!(
            "{} point(s), need 2",
            points.len()
        )));
    }
    let (x0, y0) = points[0];
    let (x1, y1) = points[points.len() - 1];
    let (dx, dy) = (x1 - x0, y1 - y0);
    let chord = dx.hypot(dy);
    let deviation = |&(x, y): &(f64, f64)| {
        if chord == 0.0 {
            (x - x0).hypot(y - y0)
        } else {
            (dx * (y - y0) - dy * (x - x0)).abs() / chord
        }
    };
    let mut best = LdpResult {
        index: 0,
        deviation: deviation(&points[0]),
    };
    for (i, p) in points.iter().enumerate().skip(1) {
        let d = deviation(p);
        if d > best.deviation {
            best = LdpResult {
                index: i,
                deviation: d,
            };
        }
    }
    Ok(best)
}

fn segment_velocity(a: &TouchEvent, b: &TouchEvent) -> Option<f64> {
    let dt = b.t - a.t;
    (dt > 0).then(|| distance(a, b) / dt as f64)
}

/// Velocity at the LDP: the segment ending there, or starting there when the
/// LDP is the first point. Segments without elapsed time are passed over for
/// the nearest timed one.
fn ldp_velocity(points: &[TouchEvent], ldp: usize) -> f64 {
    let segments = points.len() - 1;
    let preferred = if ldp == 0 { 0 } else { ldp - 1 };
    let backward = (0..=preferred).rev();
    let forward = preferred + 1..segments;
    backward
        .chain(forward)
        .find_map(|s| segment_velocity(&points[s], &points[s + 1]))
        .unwrap_or(0.0)
}

/// The 22 stroke features, in [`STROKE_FEATURES`] order.
pub fn stroke_values(g: &Gesture) -> Result<[f64; 22]> {
    let pts = &g.points;
    if pts.len() < 2 {
        return Err(Error::DegenerateStroke(format!(
            "{} point(s), need 2",
            pts.len()
        )));
    }
    let (start, stop) = (&pts[0], &pts[pts.len() - 1]);
    if stop.t <= start.t {
        return Err(Error::DegenerateStroke("stroke has zero duration".into()));
    }

    let straight = distance(start, stop);
    let trajectory = trajectory_length(pts);
    let ratio = if trajectory == 0.0 {
        1.0
    } else {
        straight / trajectory
    };

    let dists: Vec<f64> = pts.windows(2).map(|w| distance(&w[0], &w[1])).collect();
    let velocities: Vec<f64> = pts
        .windows(2)
        .filter_map(|w| segment_velocity(&w[0], &w[1]))
        .collect();
    let (avg_dist, std_dist) = mean_std(&dists);
    let (avg_vel, std_vel) = mean_std(&velocities);
    let pressures: Vec<f64> = pts.iter().map(|e| e.pressure).collect();
    let sizes: Vec<f64> = pts.iter().map(|e| e.size).collect();
    let (avg_p, std_p) = mean_std(&pressures);
    let (avg_s, std_s) = mean_std(&sizes);

    let xy: Vec<(f64, f64)> = pts.iter().map(|e| (e.x, e.y)).collect();
    let ldp_idx = find_ldp(&xy)?.index;
    let ldp = &pts[ldp_idx];

    Ok([
        ratio,
        avg_s,
        std_s,
        start.pressure,
        distance(start, ldp),
        avg_vel,
        std_vel,
        (ldp.t - start.t) as f64,
        avg_p,
        distance(ldp, stop),
        trajectory,
        avg_dist,
        straight,
        ldp_velocity(pts, ldp_idx),
        std_dist,
        std_p,
        (stop.t - ldp.t) as f64,
        ldp.pressure,
        stop.pressure,
        ldp.size,
        start.size,
        stop.size,
    ])
}

pub fn stroke_features(g: &Gesture, label: Label, group: &str) -> Result<FeatureVector> {
    Ok(FeatureVector::new(
        stroke_feature_names(),
        stroke_values(g)?.to_vec(),
        label,
        group,
        FeatureKind::Stroke,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segment::GestureKind;
    use crate::session::Phase;
    use proptest::prelude::*;

    fn ev(t: i64, x: f64, y: f64, p: f64, s: f64) -> TouchEvent {
        TouchEvent::new(t, Phase::Move, x, y, p, s)
    }

    fn gesture(kind: GestureKind, points: Vec<TouchEvent>) -> Gesture {
        let t_start = points.first().unwrap().t;
        let t_end = points.last().unwrap().t;
        Gesture {
            kind,
            points,
            t_start,
            t_end,
            complete: true,
        }
    }

    fn named(values: &[f64; 22], name: &str) -> f64 {
        values[STROKE_FEATURES.iter().position(|n| *n == name).unwrap()]
    }

    #[test]
    fn tap_averages() {
        let g = gesture(
            GestureKind::Tap,
            vec![ev(100, 1.0, 1.0, 0.4, 0.1), ev(180, 1.0, 1.0, 0.6, 0.3)],
        );
        let [p, s, d] = tap_values(&g);
        assert!((p - 0.5).abs() < 1e-12 && (s - 0.2).abs() < 1e-12);
        assert_eq!(d, 80.0);
        let single = gesture(GestureKind::Tap, vec![ev(50, 1.0, 1.0, 0.7, 0.2)]);
        assert_eq!(tap_values(&single), [0.7, 0.2, 0.0]);
    }

    #[test]
    fn ldp_examples() {
        assert_eq!(
            find_ldp(&[(0.0, 0.0), (4.0, 3.0), (8.0, 0.0)]).unwrap(),
            LdpResult {
                index: 1,
                deviation: 3.0
            }
        );
        assert_eq!(
            find_ldp(&[(0.0, 0.0), (3.0, 4.0), (6.0, 8.0)]).unwrap(),
            LdpResult {
                index: 0,
                deviation: 0.0
            }
        );
        let closed = find_ldp(&[(0.0, 0.0), (1.0, 1.0), (0.0, 0.0)]).unwrap();
        assert_eq!(closed.index, 1);
        assert!((closed.deviation - 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(
            find_ldp(&[(0.0, 0.0)]),
            Err(Error::DegenerateStroke(_))
        ));
    }

    #[test]
    fn straight_two_point_stroke() {
        let g = gesture(
            GestureKind::Stroke,
            vec![ev(0, 0.0, 0.0, 0.5, 0.2), ev(30, 30.0, 40.0, 0.5, 0.2)],
        );
        let v = stroke_values(&g).unwrap();
        assert_eq!(named(&v, "straight_to_trajectory_length_ratio"), 1.0);
        assert_eq!(named(&v, "std_distance"), 0.0);
        assert_eq!(named(&v, "average_velocity"), 50.0 / 30.0);
        assert_eq!(named(&v, "LDP_velocity"), 50.0 / 30.0);
    }

    #[test]
    fn constant_pressure_stroke() {
        let pts = (0..5)
            .map(|i| ev(i * 10, i as f64 * 3.0, (i * i) as f64, 0.37, 0.2))
            .collect();
        let v = stroke_values(&gesture(GestureKind::Stroke, pts)).unwrap();
        for name in ["average_pressure", "start_p", "stop_p", "LDP_p"] {
            assert_eq!(named(&v, name), 0.37, "{name}");
        }
        assert_eq!(named(&v, "std_pressure"), 0.0);
    }

    #[test]
    fn degenerate_strokes() {
        let one = gesture(GestureKind::Stroke, vec![ev(0, 0.0, 0.0, 0.5, 0.2)]);
        assert!(matches!(
            stroke_values(&one),
            Err(Error::DegenerateStroke(_))
        ));
        let instant = gesture(
            GestureKind::Stroke,
            vec![ev(5, 0.0, 0.0, 0.5, 0.2), ev(5, 9.0, 0.0, 0.5, 0.2)],
        );
        assert!(matches!(
            stroke_values(&instant),
            Err(Error::DegenerateStroke(_))
        ));
    }

    #[test]
    fn zero_dt_segments_are_skipped() {
        let pts = vec![
            ev(0, 0.0, 0.0, 0.5, 0.2),
            ev(10, 10.0, 0.0, 0.5, 0.2),
            ev(10, 12.0, 0.0, 0.5, 0.2),
            ev(20, 22.0, 0.0, 0.5, 0.2),
        ];
        let v = stroke_values(&gesture(GestureKind::Stroke, pts)).unwrap();
        assert_eq!(named(&v, "average_velocity"), 1.0);
        assert!(v.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn ldp_velocity_at_first_point_uses_outgoing_segment() {
        // Closed loop whose farthest point from the start is the second one.
        let pts = vec![
            ev(0, 0.0, 0.0, 0.5, 0.2),
            ev(10, 0.0, 0.0, 0.5, 0.2),
            ev(30, 0.0, 0.0, 0.5, 0.2),
        ];
        let v = stroke_values(&gesture(GestureKind::Stroke, pts.clone())).unwrap();
        assert_eq!(named(&v, "LDP_velocity"), 0.0);
        assert_eq!(ldp_velocity(&pts, 0), 0.0);
        let moving = vec![ev(0, 0.0, 0.0, 0.5, 0.2), ev(10, 5.0, 0.0, 0.5, 0.2)];
        assert_eq!(ldp_velocity(&moving, 0), 0.5);
    }

    fn arb_stroke() -> impl Strategy<Value = Vec<TouchEvent>> {
        prop::collection::vec(
            (
                0.0f64..500.0,
                0.0f64..500.0,
                0.0f64..=1.0,
                0.0f64..=1.0,
                1i64..30,
            ),
            2..20,
        )
        .prop_map(|raw| {
            let mut t = 0;
            raw.into_iter()
                .map(|(x, y, p, s, dt)| {
                    t += dt;
                    ev(t, x, y, p, s)
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn stroke_invariants(pts in arb_stroke(), dx in -100.0f64..100.0, dy in -100.0f64..100.0) {
            let g = gesture(GestureKind::Stroke, pts.clone());
            let v = stroke_values(&g).unwrap();
            prop_assert!(v.iter().all(|x| x.is_finite()));
            let ratio = named(&v, "straight_to_trajectory_length_ratio");
            prop_assert!((0.0..=1.0 + 1e-12).contains(&ratio));
            let total = named(&v, "start_to_LDP_duration") + named(&v, "LDP_to_stop_duration");
            prop_assert_eq!(total, g.duration_ms() as f64);

            let moved: Vec<_> = pts.iter().map(|e| ev(e.t, e.x + dx + 200.0, e.y + dy + 200.0, e.pressure, e.size)).collect();
            let w = stroke_values(&gesture(GestureKind::Stroke, moved)).unwrap();
            for (a, b) in v.iter().zip(&w) {
                prop_assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0), "{} vs {}", a, b);
            }
        }
    }
}
