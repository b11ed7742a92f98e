//! Synthetic sessions drawn from parameterized behavioral profiles.
//!
//! Strokes are quadratic arcs sampled every 10 ms; taps are short
//! near-stationary touches. Sensors run at a fixed rate and carry a
//! constant baseline, white Gaussian tremor and Poisson-timed half-sine
//! motion bursts.

use std::f64::consts::PI;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::session::{
    write_session, AgeGroup, Label, Phase, SensorKind, SensorSample, SensorStreams, Session,
    SessionManifest, TouchEvent,
};

/// Timestamp of the first sample in every generated session.
pub const BASE_EPOCH_MS: i64 = 1_700_000_000_000;
const TOUCH_STEP_MS: i64 = 10;
const SCREEN: (f64, f64) = (1080.0, 1920.0);
const GRAVITY: f64 = 9.81;
const ROT_BASELINE: [f64; 3] = [0.1, 0.2, 0.3];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dist {
    pub mean: f64,
    pub std: f64,
}

impl Dist {
    pub const fn new(mean: f64, std: f64) -> Self {
        Self { mean, std }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        if self.std == 0.0 {
            return self.mean;
        }
        Normal::new(self.mean, self.std)
            .expect("validated std")
            .sample(rng)
    }

    fn check(&self, what: &str) -> Result<()> {
        if !self.mean.is_finite() || !self.std.is_finite() || self.std < 0.0 {
            return Err(Error::InvalidProfile(format!(
                "{what}: mean {} std {}",
                self.mean, self.std
            )));
        }
        Ok(())
    }
}

/// One value per motion sensor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerSensor {
    pub acc: f64,
    pub gyro: f64,
    pub lacc: f64,
    pub rot: f64,
}

impl PerSensor {
    pub const fn uniform(v: f64) -> Self {
        Self {
            acc: v,
            gyro: v,
            lacc: v,
            rot: v,
        }
    }

    pub fn get(&self, kind: SensorKind) -> f64 {
        match kind {
            SensorKind::Acc => self.acc,
            SensorKind::Gyro => self.gyro,
            SensorKind::Lacc => self.lacc,
            SensorKind::Rot => self.rot,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BehaviorProfile {
    pub stroke_length_mm: Dist,
    /// px per ms.
    pub stroke_speed: Dist,
    /// Largest deviation from the chord as a fraction of chord length.
    pub curviness: Dist,
    pub touch_size: Dist,
    pub touch_pressure: Dist,
    pub tap_duration_ms: Dist,
    /// Event-to-event noise on size and pressure within one gesture.
    pub event_jitter: f64,
    /// Std of the white noise added to every axis.
    pub tremor_amplitude: PerSensor,
    /// Relative std of a per-session multiplier on the tremor.
    pub tremor_spread: f64,
    /// Peak of a motion burst.
    pub burst_amplitude: PerSensor,
    /// Bursts per minute.
    pub movement_event_rate: f64,
    pub burst_duration_ms: f64,
    pub tap_fraction: f64,
    pub sample_rate_hz: f64,
}

impl BehaviorProfile {
    pub fn child() -> Self {
        Self {
            stroke_length_mm: Dist::new(20.0, 8.0),
            stroke_speed: Dist::new(1.6, 0.5),
            curviness: Dist::new(0.04, 0.03),
            touch_size: Dist::new(0.17, 0.04),
            touch_pressure: Dist::new(0.40, 0.10),
            tap_duration_ms: Dist::new(90.0, 30.0),
            event_jitter: 0.01,
            tremor_amplitude: PerSensor {
                acc: 0.12,
                gyro: 0.06,
                lacc: 0.12,
                rot: 0.004,
            },
            tremor_spread: 0.08,
            burst_amplitude: PerSensor {
                acc: 1.5,
                gyro: 0.8,
                lacc: 1.5,
                rot: 0.05,
            },
            movement_event_rate: 6.0,
            burst_duration_ms: 1000.0,
            tap_fraction: 0.3,
            sample_rate_hz: 100.0,
        }
    }

    pub fn adult() -> Self {
        Self {
            stroke_length_mm: Dist::new(28.0, 10.0),
            stroke_speed: Dist::new(1.2, 0.4),
            curviness: Dist::new(0.08, 0.04),
            touch_size: Dist::new(0.22, 0.04),
            touch_pressure: Dist::new(0.45, 0.10),
            tap_duration_ms: Dist::new(110.0, 35.0),
            tremor_amplitude: PerSensor {
                acc: 0.06,
                gyro: 0.03,
                lacc: 0.06,
                rot: 0.002,
            },
            movement_event_rate: 2.0,
            ..Self::child()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dists = [
            ("stroke_length_mm", &self.stroke_length_mm),
            ("stroke_speed", &self.stroke_speed),
            ("curviness", &self.curviness),
            ("touch_size", &self.touch_size),
            ("touch_pressure", &self.touch_pressure),
            ("tap_duration_ms", &self.tap_duration_ms),
        ];
        for (name, d) in dists {
            d.check(name)?;
        }
        let bad = |m: String| Err(Error::InvalidProfile(m));
        if self.stroke_length_mm.mean <= 0.0 || self.stroke_speed.mean <= 0.0 {
            return bad("stroke length and speed means must be positive".into());
        }
        if self.curviness.mean < 0.0 {
            return bad("curviness mean must be non-negative".into());
        }
        for (name, d) in [
            ("touch_size", &self.touch_size),
            ("touch_pressure", &self.touch_pressure),
        ] {
            if !(0.0..=1.0).contains(&d.mean) {
                return bad(format!("{name} mean {} outside [0, 1]", d.mean));
            }
        }
        for kind in SensorKind::ALL {
            for (what, v) in [
                ("tremor", self.tremor_amplitude.get(kind)),
                ("burst", self.burst_amplitude.get(kind)),
            ] {
                if !v.is_finite() || v < 0.0 {
                    return bad(format!("{kind} {what} amplitude {v}"));
                }
            }
        }
        let nonneg = [
            ("event_jitter", self.event_jitter),
            ("tremor_spread", self.tremor_spread),
            ("movement_event_rate", self.movement_event_rate),
            ("burst_duration_ms", self.burst_duration_ms),
        ];
        for (name, v) in nonneg {
            if !v.is_finite() || v < 0.0 {
                return bad(format!("{name} {v} must be non-negative"));
            }
        }
        if !(0.0..=1.0).contains(&self.tap_fraction) {
            return bad(format!("tap_fraction {} outside [0, 1]", self.tap_fraction));
        }
        if !(self.sample_rate_hz > 0.0 && self.sample_rate_hz <= 1000.0) {
            return bad(format!(
                "sample_rate_hz {} outside (0, 1000]",
                self.sample_rate_hz
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profiles {
    pub child: BehaviorProfile,
    pub adult: BehaviorProfile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub profiles: Profiles,
    pub sessions_per_class: usize,
    pub gestures_per_session: usize,
    pub session_duration_s: f64,
    pub seed: u64,
    /// Share of child sessions labelled as the younger age group.
    pub young_fraction: f64,
    pub px_per_mm: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            profiles: Profiles {
                child: BehaviorProfile::child(),
                adult: BehaviorProfile::adult(),
            },
            sessions_per_class: 25,
            gestures_per_session: 40,
            session_duration_s: 60.0,
            seed: 7,
            young_fraction: 0.76,
            px_per_mm: 19.0,
        }
    }
}

impl GenConfig {
    /// Both classes touch with the same size distribution; the stroke
    /// dynamics still differ.
    pub fn overlapping_size() -> Self {
        let mut cfg = Self::default();
        cfg.profiles.adult.touch_size = cfg.profiles.child.touch_size;
        cfg
    }

    /// Classes differ only in motion: continuous tremor and short bursts.
    /// Touch behavior is shared.
    pub fn burst_tremor() -> Self {
        let mut cfg = Self::default();
        let child = &cfg.profiles.child;
        cfg.profiles.adult = BehaviorProfile {
            tremor_amplitude: cfg.profiles.adult.tremor_amplitude,
            movement_event_rate: cfg.profiles.adult.movement_event_rate,
            ..child.clone()
        };
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        self.profiles.child.validate()?;
        self.profiles.adult.validate()?;
        if self.sessions_per_class == 0 || self.gestures_per_session == 0 {
            return Err(Error::InvalidConfig(
                "session and gesture counts must be at least 1".into(),
            ));
        }
        if !(self.session_duration_s.is_finite() && self.session_duration_s >= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "session_duration_s {} below 1",
                self.session_duration_s
            )));
        }
        if !(0.0..=1.0).contains(&self.young_fraction) {
            return Err(Error::InvalidConfig(format!(
                "young_fraction {} outside [0, 1]",
                self.young_fraction
            )));
        }
        if !(self.px_per_mm > 0.0 && self.px_per_mm.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "px_per_mm {} must be positive",
                self.px_per_mm
            )));
        }
        let slot_ms = self.session_duration_s * 1000.0 / self.gestures_per_session as f64;
        if slot_ms < 100.0 {
            return Err(Error::InvalidConfig(format!(
                "{} gestures do not fit in {} s",
                self.gestures_per_session, self.session_duration_s
            )));
        }
        Ok(())
    }
}

/// Identity of a generated session.
#[derive(Clone, Debug, PartialEq)]
pub struct SessionMeta {
    pub id: String,
    pub label: Label,
    pub age_group: AgeGroup,
    pub t0: i64,
}

/// Quadratic Bezier point at parameter `u`.
fn bezier(p0: (f64, f64), c: (f64, f64), p2: (f64, f64), u: f64) -> (f64, f64) {
    let a = (1.0 - u) * (1.0 - u);
    let b = 2.0 * u * (1.0 - u);
    let d = u * u;
    (a * p0.0 + b * c.0 + d * p2.0, a * p0.1 + b * c.1 + d * p2.1)
}

fn unit_clamp(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Places the gesture's points on screen at a random position.
fn place(points: &mut [(f64, f64)], rng: &mut ChaCha8Rng) {
    let (min_x, max_x) = points.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| {
        (lo.min(p.0), hi.max(p.0))
    });
    let (min_y, max_y) = points.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| {
        (lo.min(p.1), hi.max(p.1))
    });
    let slack_x = (SCREEN.0 - (max_x - min_x)).max(0.0);
    let slack_y = (SCREEN.1 - (max_y - min_y)).max(0.0);
    let dx = rng.gen_range(0.0..=slack_x) - min_x;
    let dy = rng.gen_range(0.0..=slack_y) - min_y;
    for p in points.iter_mut() {
        p.0 = (p.0 + dx).max(0.0);
        p.1 = (p.1 + dy).max(0.0);
    }
}

fn gesture_events(
    points: &[(f64, f64)],
    t0: i64,
    step: i64,
    size: f64,
    pressure: f64,
    jitter: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<TouchEvent> {
    let noise = Dist::new(0.0, jitter);
    let last = points.len() - 1;
    points
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| {
            let phase = match i {
                0 => Phase::Down,
                i if i == last => Phase::Up,
                _ => Phase::Move,
            };
            let s = unit_clamp(size + noise.sample(rng));
            let p = unit_clamp(pressure + noise.sample(rng));
            TouchEvent::new(t0 + i as i64 * step, phase, x, y, p, s)
        })
        .collect()
}

fn stroke(
    profile: &BehaviorProfile,
    px_per_mm: f64,
    t0: i64,
    max_ms: i64,
    rng: &mut ChaCha8Rng,
) -> Vec<TouchEvent> {
    let chord = profile.stroke_length_mm.sample(rng).max(2.0) * px_per_mm;
    let speed = profile.stroke_speed.sample(rng).max(0.05);
    let bend = profile.curviness.sample(rng).max(0.0) * chord;
    let side = if rng.gen::<bool>() { 1.0 } else { -1.0 };
    let angle = rng.gen_range(0.0..2.0 * PI);
    let (dx, dy) = (angle.cos(), angle.sin());
    let p0 = (0.0, 0.0);
    let p2 = (chord * dx, chord * dy);
    // The arc's peak deviation from the chord is half the control offset.
    let c = (
        p2.0 / 2.0 - side * 2.0 * bend * dy,
        p2.1 / 2.0 + side * 2.0 * bend * dx,
    );

    let arc = {
        let fine: Vec<(f64, f64)> = (0..=64)
            .map(|i| bezier(p0, c, p2, i as f64 / 64.0))
            .collect();
        fine.windows(2)
            .map(|w| ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt())
            .sum::<f64>()
    };
    let duration = (arc / speed).min(max_ms as f64);
    let segments = ((duration / TOUCH_STEP_MS as f64).round() as usize).max(2);
    let mut points: Vec<(f64, f64)> = (0..=segments)
        .map(|i| bezier(p0, c, p2, i as f64 / segments as f64))
        .collect();
    place(&mut points, rng);

    let size = unit_clamp(profile.touch_size.sample(rng));
    let pressure = unit_clamp(profile.touch_pressure.sample(rng));
    gesture_events(
        &points,
        t0,
        TOUCH_STEP_MS,
        size,
        pressure,
        profile.event_jitter,
        rng,
    )
}

fn tap(profile: &BehaviorProfile, t0: i64, rng: &mut ChaCha8Rng) -> Vec<TouchEvent> {
    let duration = profile
        .tap_duration_ms
        .sample(rng)
        .clamp(20.0, 280.0)
        .round() as i64;
    let x = rng.gen_range(50.0..SCREEN.0 - 50.0);
    let y = rng.gen_range(50.0..SCREEN.1 - 50.0);
    let wobble = Dist::new(0.0, 0.5);
    let mid = (
        x + wobble.sample(rng).clamp(-2.0, 2.0),
        y + wobble.sample(rng).clamp(-2.0, 2.0),
    );
    let points = [(x, y), mid, mid];
    let size = unit_clamp(profile.touch_size.sample(rng));
    let pressure = unit_clamp(profile.touch_pressure.sample(rng));
    gesture_events(
        &points,
        t0,
        duration / 2,
        size,
        pressure,
        profile.event_jitter,
        rng,
    )
    .into_iter()
    .enumerate()
    .map(|(i, mut e)| {
        if i == 2 {
            e.t = t0 + duration;
        }
        e
    })
    .collect()
}

fn touch_stream(
    profile: &BehaviorProfile,
    duration_s: f64,
    n_gestures: usize,
    px_per_mm: f64,
    t0: i64,
    rng: &mut ChaCha8Rng,
) -> Vec<TouchEvent> {
    let slot = (duration_s * 1000.0 / n_gestures as f64).floor() as i64;
    // Room for the gesture plus a quiet gap before the next slot.
    let max_ms = (slot - 60).max(20);
    let mut events = Vec::new();
    for i in 0..n_gestures {
        let start = t0 + i as i64 * slot + rng.gen_range(0..=20);
        let g = if rng.gen::<f64>() < profile.tap_fraction {
            tap(profile, start, rng)
        } else {
            stroke(profile, px_per_mm, start, max_ms - 20, rng)
        };
        events.extend(g);
    }
    events
}

struct Burst {
    start: f64,
    dir: [f64; 3],
}

fn sensor_streams(
    profile: &BehaviorProfile,
    duration_s: f64,
    t0: i64,
    rng: &mut ChaCha8Rng,
) -> SensorStreams {
    let n = (duration_s * profile.sample_rate_hz).round() as usize;
    let dt_ms = 1000.0 / profile.sample_rate_hz;
    let times: Vec<i64> = (0..n)
        .map(|i| t0 + (i as f64 * dt_ms).round() as i64)
        .collect();

    let mut bursts = Vec::new();
    if profile.movement_event_rate > 0.0 {
        let gap = Exp::new(profile.movement_event_rate / 60_000.0).expect("positive rate");
        let mut at = gap.sample(rng);
        while at < duration_s * 1000.0 {
            let v: [f64; 3] = std::array::from_fn(|_| Dist::new(0.0, 1.0).sample(rng));
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt().max(1e-12);
            bursts.push(Burst {
                start: at,
                dir: v.map(|c| c / norm),
            });
            at += gap.sample(rng);
        }
    }
    let envelope = |t: f64| -> [f64; 3] {
        let mut out = [0.0; 3];
        if profile.burst_duration_ms <= 0.0 {
            return out;
        }
        for b in &bursts {
            let u = (t - b.start) / profile.burst_duration_ms;
            if (0.0..1.0).contains(&u) {
                let e = (PI * u).sin();
                for (o, d) in out.iter_mut().zip(b.dir) {
                    *o += e * d;
                }
            }
        }
        out
    };

    let spread = Dist::new(1.0, profile.tremor_spread).sample(rng).max(0.1);
    let mut streams = SensorStreams::new();
    for kind in SensorKind::ALL {
        let tremor = Dist::new(0.0, profile.tremor_amplitude.get(kind) * spread);
        let burst = profile.burst_amplitude.get(kind);
        let base = match kind {
            SensorKind::Acc => [0.0, GRAVITY, 0.0],
            SensorKind::Rot => ROT_BASELINE,
            _ => [0.0; 3],
        };
        for (i, &t) in times.iter().enumerate() {
            let env = envelope(i as f64 * dt_ms);
            let v: [f64; 3] =
                std::array::from_fn(|a| base[a] + tremor.sample(rng) + burst * env[a]);
            streams.push(SensorSample::new(t, kind, v[0], v[1], v[2]));
        }
    }
    streams
}

/// Generates one session's touch log and sensor streams.
pub fn generate_session(
    meta: SessionMeta,
    profile: &BehaviorProfile,
    duration_s: f64,
    n_gestures: usize,
    px_per_mm: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Session> {
    profile.validate()?;
    if n_gestures == 0 || duration_s.is_nan() || duration_s < 1.0 {
        return Err(Error::InvalidConfig(
            "need at least one gesture and one second".into(),
        ));
    }
    let touch = touch_stream(profile, duration_s, n_gestures, px_per_mm, meta.t0, rng);
    let sensors = sensor_streams(profile, duration_s, meta.t0, rng);
    Session::new(meta.id, meta.label, meta.age_group, touch, sensors)
}

/// All sessions of a config, children first. Session `i` draws from
/// substream `i` of the seed, so output is independent of thread count.
pub fn generate_dataset(cfg: &GenConfig) -> Result<Vec<Session>> {
    cfg.validate()?;
    let n = cfg.sessions_per_class;
    let young = (cfg.young_fraction * n as f64).round() as usize;
    (0..2 * n)
        .into_par_iter()
        .map(|i| {
            let (label, j) = if i < n {
                (Label::Child, i)
            } else {
                (Label::Adult, i - n)
            };
            let (profile, age_group, id) = match label {
                Label::Child => {
                    let age = if j < young {
                        AgeGroup::YoungChild
                    } else {
                        AgeGroup::OlderChild
                    };
                    (&cfg.profiles.child, age, format!("child_{j:03}"))
                }
                Label::Adult => (
                    &cfg.profiles.adult,
                    AgeGroup::Adult,
                    format!("adult_{j:03}"),
                ),
            };
            let mut rng = crate::classify::substream(cfg.seed, i as u64);
            let meta = SessionMeta {
                id,
                label,
                age_group,
                t0: BASE_EPOCH_MS,
            };
            generate_session(
                meta,
                profile,
                cfg.session_duration_s,
                cfg.gestures_per_session,
                cfg.px_per_mm,
                &mut rng,
            )
        })
        .collect()
}

/// Writes every session's logs and a `manifest.json` into `dir`; returns
/// the manifest path.
pub fn write_dataset(sessions: &[Session], dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let entries = sessions
        .par_iter()
        .map(|s| write_session(s, dir))
        .collect::<Result<Vec<SessionManifest>>>()?;
    let path = dir.join("manifest.json");
    let mut w = BufWriter::new(File::create(&path)?);
    serde_json::to_writer_pretty(&mut w, &entries)?;
    std::io::Write::write_all(&mut w, b"\n")?;
    Ok(path)
}
