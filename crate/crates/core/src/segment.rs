//! Gesture segmentation of touch streams and window slicing of sensor streams.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::session::{Phase, SensorKind, SensorStreams, Session, TouchEvent};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GestureKind {
    Tap,
    Stroke,
}

impl GestureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GestureKind::Tap => "tap",
            GestureKind::Stroke => "stroke",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gesture {
    pub kind: GestureKind,
    pub points: Vec<TouchEvent>,
    pub t_start: i64,
    pub t_end: i64,
    /// False when the run lacked a `down`/`up` or was cut by a timeout.
    /// Incomplete gestures never produce features.
    pub complete: bool,
}

impl Gesture {
    pub fn duration_ms(&self) -> i64 {
        self.t_end - self.t_start
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentParams {
    /// Longest tolerated silence inside a down..up run.
    pub gap_ms: i64,
    pub tap_move_px: f64,
    pub tap_max_ms: i64,
}

impl Default for SegmentParams {
    fn default() -> Self {
        Self {
            gap_ms: 1000,
            tap_move_px: 10.0,
            tap_max_ms: 300,
        }
    }
}

pub fn distance(a: &TouchEvent, b: &TouchEvent) -> f64 {
    (b.x - a.x).hypot(b.y - a.y)
}

/// Sum of consecutive point distances.
pub fn trajectory_length(points: &[TouchEvent]) -> f64 {
    points.windows(2).map(|w| distance(&w[0], &w[1])).sum()
}

/// Tap iff the finger moved less than `tap_move_px` and lifted within
/// `tap_max_ms`.
pub fn classify_gesture(g: &Gesture, tap_move_px: f64, tap_max_ms: i64) -> GestureKind {
    if trajectory_length(&g.points) < tap_move_px && g.duration_ms() < tap_max_ms {
        GestureKind::Tap
    } else {
        GestureKind::Stroke
    }
}

fn close(points: Vec<TouchEvent>, complete: bool, params: &SegmentParams) -> Gesture {
    let t_start = points.first().map_or(0, |p| p.t);
    let t_end = points.last().map_or(0, |p| p.t);
    let mut g = Gesture {
        kind: GestureKind::Tap,
        points,
        t_start,
        t_end,
        complete,
    };
    g.kind = classify_gesture(&g, params.tap_move_px, params.tap_max_ms);
    g
}

/// Splits a time-ordered event stream into down..up runs.
///
/// Anomalies (a run interrupted by a new `down`, orphan `move`/`up` events,
/// a silence longer than `gap_ms`, or a stream ending mid-run) produce
/// gestures with `complete == false` instead of errors.
pub fn segment_gestures(events: &[TouchEvent], params: &SegmentParams) -> Vec<Gesture> {
    let mut out = Vec::new();
    // (points, started with down)
    let mut current: Option<(Vec<TouchEvent>, bool)> = None;

    for ev in events {
        if let Some((points, _)) = &current {
            let last = points.last().expect("open run is never empty");
            if ev.t - last.t > params.gap_ms {
                let (points, _) = current.take().unwrap();
                out.push(close(points, false, params));
            }
        }
        match ev.phase {
            Phase::Down => {
                if let Some((points, _)) = current.take() {
                    out.push(close(points, false, params));
                }
                current = Some((vec![ev.clone()], true));
            }
            Phase::Move => match &mut current {
                Some((points, _)) => points.push(ev.clone()),
                None => current = Some((vec![ev.clone()], false)),
            },
            Phase::Up => {
                let (mut points, from_down) = current.take().unwrap_or_default();
                points.push(ev.clone());
                out.push(close(points, from_down, params));
            }
        }
    }
    if let Some((points, _)) = current {
        out.push(close(points, false, params));
    }
    out
}

/// A slice of the four sensor streams over `[t_start, t_end)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SensorWindow {
    pub t_start: i64,
    pub t_end: i64,
    pub samples: SensorStreams,
    /// Set when a gesture window hit the session bounds while expanding.
    pub sparse: bool,
}

impl SensorWindow {
    fn cut(streams: &SensorStreams, t_start: i64, t_end: i64, sparse: bool) -> Self {
        let mut samples = SensorStreams::new();
        for kind in SensorKind::ALL {
            samples
                .get_mut(kind)
                .extend_from_slice(streams.slice(kind, t_start, t_end));
        }
        Self {
            t_start,
            t_end,
            samples,
            sparse,
        }
    }

    pub fn min_count(&self) -> usize {
        SensorKind::ALL
            .iter()
            .map(|&k| self.samples.get(k).len())
            .min()
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug, Default)]
pub struct WindowSet {
    pub windows: Vec<SensorWindow>,
    /// Full-length windows dropped for having too few samples in some sensor.
    pub dropped_sparse: usize,
}

fn median_interval(streams: &SensorStreams) -> i64 {
    let mut gaps: Vec<i64> = SensorKind::ALL
        .iter()
        .flat_map(|&k| streams.get(k).windows(2).map(|w| w[1].t - w[0].t))
        .filter(|&d| d > 0)
        .collect();
    if gaps.is_empty() {
        return 0;
    }
    gaps.sort_unstable();
    gaps[gaps.len() / 2]
}

/// Cuts the sensor streams into consecutive, non-overlapping windows of
/// `n_seconds`, starting at the first sample.
///
/// The recording is taken to extend one median sample interval past its last
/// sample, so 10 s of 100 Hz data (t = 0..9990) yields ten 1 s windows. A
/// trailing partial window is dropped.
pub fn segment_windows(session: &Session, n_seconds: f64, min_samples: usize) -> Result<WindowSet> {
    if !(1.0..=20.0).contains(&n_seconds) {
        return Err(Error::InvalidConfig(format!(
            "window length {n_seconds} s outside [1, 20]"
        )));
    }
    let streams = &session.sensors;
    let (first, last) = streams
        .time_range()
        .ok_or_else(|| Error::EmptyStream(format!("session {} has no sensor data", session.id)))?;
    let width = (n_seconds * 1000.0).round() as i64;
    let end = last + median_interval(streams);
    let count = ((end - first) / width).max(0);

    let mut set = WindowSet::default();
    for i in 0..count {
        let t_start = first + i * width;
        let w = SensorWindow::cut(streams, t_start, t_start + width, false);
        if w.min_count() < min_samples {
            set.dropped_sparse += 1;
        } else {
            set.windows.push(w);
        }
    }
    if set.dropped_sparse > 0 {
        tracing::debug!(session = %session.id, dropped = set.dropped_sparse, "dropped sparse windows");
    }
    Ok(set)
}

/// Sensor window aligned with a gesture.
///
/// Spans the gesture itself; if some sensor holds fewer than `min_samples`
/// there, the window widens symmetrically about the gesture midpoint until it
/// does. A window that needs to reach past the session's recorded range is
/// flagged sparse.
pub fn gesture_window(session: &Session, g: &Gesture, min_samples: usize) -> Result<SensorWindow> {
    let streams = &session.sensors;
    for kind in SensorKind::ALL {
        if streams.get(kind).is_empty() {
            return Err(Error::EmptyStream(format!(
                "session {} has no {kind} samples",
                session.id
            )));
        }
    }
    let (s0, s1) = streams.time_range().expect("streams non-empty");
    let mid = (g.t_start + g.t_end) as f64 / 2.0;
    let mut half = (g.t_end - g.t_start) as f64 / 2.0;
    let mut exhausted = false;

    for kind in SensorKind::ALL {
        let samples = streams.get(kind);
        let inside = streams.slice(kind, g.t_start, g.t_end + 1).len();
        if inside >= min_samples {
            continue;
        }
        if samples.len() < min_samples {
            exhausted = true;
            half = half
                .max((mid - s0 as f64).abs())
                .max((s1 as f64 - mid).abs());
            continue;
        }
        let mut dist: Vec<f64> = samples.iter().map(|s| (s.t as f64 - mid).abs()).collect();
        let k = min_samples.max(1) - 1;
        dist.select_nth_unstable_by(k, f64::total_cmp);
        half = half.max(dist[k]);
    }

    let t_start = g.t_start.min((mid - half).floor() as i64);
    let t_end = g.t_end.max((mid + half).ceil() as i64) + 1;
    let sparse = exhausted || t_start < s0 || t_end - 1 > s1;
    Ok(SensorWindow::cut(streams, t_start, t_end, sparse))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::{AgeGroup, Label, SensorSample};

    fn ev(t: i64, phase: Phase, x: f64, y: f64) -> TouchEvent {
        TouchEvent::new(t, phase, x, y, 0.5, 0.2)
    }

    fn session_with_sensors(t0: i64, n: usize, step: i64) -> Session {
        let mut streams = SensorStreams::new();
        for i in 0..n as i64 {
            for kind in SensorKind::ALL {
                streams.push(SensorSample::new(t0 + i * step, kind, 0.1, 0.2, 0.3));
            }
        }
        Session::new("s", Label::Adult, AgeGroup::Adult, vec![], streams).unwrap()
    }

    #[test]
    fn single_run() {
        let events = [
            ev(0, Phase::Down, 0.0, 0.0),
            ev(10, Phase::Move, 1.0, 0.0),
            ev(20, Phase::Up, 2.0, 0.0),
        ];
        let gs = segment_gestures(&events, &SegmentParams::default());
        assert_eq!(gs.len(), 1);
        assert_eq!(gs[0].points.len(), 3);
        assert!(gs[0].complete);
    }

    #[test]
    fn two_runs() {
        let events = [
            ev(0, Phase::Down, 0.0, 0.0),
            ev(10, Phase::Move, 1.0, 0.0),
            ev(20, Phase::Up, 2.0, 0.0),
            ev(100, Phase::Down, 0.0, 0.0),
            ev(150, Phase::Up, 0.0, 0.0),
        ];
        let gs = segment_gestures(&events, &SegmentParams::default());
        assert_eq!(
            gs.iter().map(|g| g.points.len()).collect::<Vec<_>>(),
            vec![3, 2]
        );
        assert!(gs.iter().all(|g| g.complete));
    }

    #[test]
    fn unterminated_run_is_incomplete() {
        let events = [ev(0, Phase::Down, 0.0, 0.0), ev(10, Phase::Move, 1.0, 0.0)];
        let gs = segment_gestures(&events, &SegmentParams::default());
        assert_eq!(gs.len(), 1);
        assert!(!gs[0].complete);
    }

    #[test]
    fn orphan_and_timeout_runs_are_incomplete() {
        let events = [
            ev(0, Phase::Move, 0.0, 0.0),
            ev(10, Phase::Up, 1.0, 0.0),
            ev(20, Phase::Down, 0.0, 0.0),
            ev(5000, Phase::Up, 0.0, 0.0),
        ];
        let gs = segment_gestures(&events, &SegmentParams::default());
        assert_eq!(gs.len(), 3);
        assert!(gs.iter().all(|g| !g.complete));
        assert_eq!(
            gs.iter().map(|g| g.points.len()).sum::<usize>(),
            events.len()
        );
    }

    fn gesture(points: Vec<TouchEvent>) -> Gesture {
        close(points, true, &SegmentParams::default())
    }

    #[test]
    fn classify_rules() {
        let one = gesture(vec![ev(0, Phase::Down, 5.0, 5.0)]);
        let one = Gesture { t_end: 80, ..one };
        assert_eq!(classify_gesture(&one, 10.0, 300), GestureKind::Tap);

        // 3 points, 60 + 60 px in 200 ms.
        let swipe = gesture(vec![
            ev(0, Phase::Down, 0.0, 0.0),
            ev(100, Phase::Move, 60.0, 0.0),
            ev(200, Phase::Up, 120.0, 0.0),
        ]);
        assert_eq!(trajectory_length(&swipe.points), 120.0);
        assert_eq!(classify_gesture(&swipe, 10.0, 300), GestureKind::Stroke);

        let slow = gesture(vec![
            ev(0, Phase::Down, 0.0, 0.0),
            ev(500, Phase::Up, 3.0, 4.0),
        ]);
        assert_eq!(classify_gesture(&slow, 10.0, 300), GestureKind::Stroke);
    }

    #[test]
    fn ten_seconds_at_100hz() {
        let s = session_with_sensors(0, 1000, 10);
        let set = segment_windows(&s, 1.0, 3).unwrap();
        assert_eq!(set.windows.len(), 10);
        assert!(set
            .windows
            .iter()
            .all(|w| w.samples.get(SensorKind::Acc).len() == 100));
    }

    #[test]
    fn partial_windows_dropped() {
        assert_eq!(
            segment_windows(&session_with_sensors(0, 50, 10), 1.0, 3)
                .unwrap()
                .windows
                .len(),
            0
        );
        assert_eq!(
            segment_windows(&session_with_sensors(0, 250, 10), 1.0, 3)
                .unwrap()
                .windows
                .len(),
            2
        );
    }

    #[test]
    fn window_errors() {
        let empty = Session::new(
            "e",
            Label::Adult,
            AgeGroup::Adult,
            vec![],
            SensorStreams::new(),
        )
        .unwrap();
        assert!(matches!(
            segment_windows(&empty, 1.0, 3),
            Err(Error::EmptyStream(_))
        ));
        assert!(matches!(
            segment_windows(&session_with_sensors(0, 10, 10), 0.5, 3),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn stroke_window_needs_no_expansion() {
        let s = session_with_sensors(0, 1000, 10);
        let g = Gesture {
            kind: GestureKind::Stroke,
            points: vec![],
            t_start: 1000,
            t_end: 1800,
            complete: true,
        };
        let w = gesture_window(&s, &g, 3).unwrap();
        assert_eq!((w.t_start, w.t_end), (1000, 1801));
        assert_eq!(w.samples.get(SensorKind::Rot).len(), 81);
        assert!(!w.sparse);
    }

    #[test]
    fn tap_window_expands() {
        let s = session_with_sensors(0, 1000, 10);
        let g = Gesture {
            kind: GestureKind::Tap,
            points: vec![],
            t_start: 1002,
            t_end: 1012,
            complete: true,
        };
        let w = gesture_window(&s, &g, 3).unwrap();
        assert!(w.min_count() >= 3);
        assert!(w.t_start <= 1002 && w.t_end > 1012);
        assert!(!w.sparse);
    }

    #[test]
    fn gesture_outside_recording_is_sparse() {
        let s = session_with_sensors(0, 100, 10);
        let g = Gesture {
            kind: GestureKind::Tap,
            points: vec![],
            t_start: 5000,
            t_end: 5050,
            complete: true,
        };
        let w = gesture_window(&s, &g, 3).unwrap();
        assert!(w.sparse);
        assert!(w.t_start <= 5000 && w.t_end > 5050);
        assert!(w.min_count() >= 3);
    }
}
