//! Raw interaction data: touch events, motion-sensor samples and sessions.
//!
//! Both logs are JSONL, one record per line:
//!
//! ```text
//! {"t":100,"phase":"down","x":10,"y":20,"pressure":0.4,"size":0.1}
//! {"t":0,"sensor":"lacc","x":3,"y":4,"z":0}
//! ```
//!
//! Timestamps are integer milliseconds. Equal timestamps are allowed, a
//! decrease beyond the configured tolerance is an error.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Down,
    Move,
    Up,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TouchEvent {
    pub t: i64,
    pub phase: Phase,
    pub x: f64,
    pub y: f64,
    pub pressure: f64,
    pub size: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub app_id: Option<String>,
}

impl TouchEvent {
    pub fn new(t: i64, phase: Phase, x: f64, y: f64, pressure: f64, size: f64) -> Self {
        Self {
            t,
            phase,
            x,
            y,
            pressure,
            size,
            app_id: None,
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        for (name, v) in [
            ("x", self.x),
            ("y", self.y),
            ("pressure", self.pressure),
            ("size", self.size),
        ] {
            if !v.is_finite() {
                return Err(format!("{name} is not finite"));
            }
        }
        if self.x < 0.0 || self.y < 0.0 {
            return Err(format!("negative coordinate ({}, {})", self.x, self.y));
        }
        if !(0.0..=1.0).contains(&self.pressure) {
            return Err(format!("pressure {} outside [0, 1]", self.pressure));
        }
        if !(0.0..=1.0).contains(&self.size) {
            return Err(format!("size {} outside [0, 1]", self.size));
        }
        Ok(())
    }
}

/// The four motion sensors used for features, in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensorKind {
    Acc,
    Gyro,
    Lacc,
    Rot,
}

impl SensorKind {
    pub const ALL: [SensorKind; 4] = [
        SensorKind::Acc,
        SensorKind::Gyro,
        SensorKind::Lacc,
        SensorKind::Rot,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SensorKind::Acc => "acc",
            SensorKind::Gyro => "gyro",
            SensorKind::Lacc => "lacc",
            SensorKind::Rot => "rot",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == tag)
    }
}

impl fmt::Display for SensorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorSample {
    pub t: i64,
    pub sensor: SensorKind,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SensorSample {
    pub fn new(t: i64, sensor: SensorKind, x: f64, y: f64, z: f64) -> Self {
        Self { t, sensor, x, y, z }
    }

    /// Euclidean norm of the three axes, scaled to avoid overflow.
    pub fn magnitude(&self) -> f64 {
        let m = self.x.abs().max(self.y.abs()).max(self.z.abs());
        if m == 0.0 {
            return 0.0;
        }
        let (a, b, c) = (self.x / m, self.y / m, self.z / m);
        m * (a * a + b * b + c * c).sqrt()
    }
}

/// Per-sensor time-ordered sample lists, indexed by [`SensorKind::index`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SensorStreams {
    streams: [Vec<SensorSample>; 4],
}

impl SensorStreams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, kind: SensorKind) -> &[SensorSample] {
        &self.streams[kind.index()]
    }

    pub fn get_mut(&mut self, kind: SensorKind) -> &mut Vec<SensorSample> {
        &mut self.streams[kind.index()]
    }

    pub fn push(&mut self, sample: SensorSample) {
        self.streams[sample.sensor.index()].push(sample);
    }

    pub fn is_empty(&self) -> bool {
        self.streams.iter().all(Vec::is_empty)
    }

    pub fn len(&self) -> usize {
        self.streams.iter().map(Vec::len).sum()
    }

    /// Earliest and latest timestamp across all streams.
    pub fn time_range(&self) -> Option<(i64, i64)> {
        let first = self
            .streams
            .iter()
            .filter_map(|s| s.first())
            .map(|s| s.t)
            .min()?;
        let last = self
            .streams
            .iter()
            .filter_map(|s| s.last())
            .map(|s| s.t)
            .max()?;
        Some((first, last))
    }

    /// Samples of `kind` with `t` in `[start, end)`.
    pub fn slice(&self, kind: SensorKind, start: i64, end: i64) -> &[SensorSample] {
        let s = self.get(kind);
        let lo = s.partition_point(|x| x.t < start);
        let hi = s.partition_point(|x| x.t < end);
        &s[lo..hi.max(lo)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Child,
    Adult,
}

impl Label {
    pub fn is_child(self) -> bool {
        self == Label::Child
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Child => "child",
            Label::Adult => "adult",
        }
    }
}

impl std::str::FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "child" => Ok(Label::Child),
            "adult" => Ok(Label::Adult),
            other => Err(Error::InvalidSession(format!("unknown label `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgeGroup {
    /// Ages 3 to 8.
    YoungChild,
    /// Ages 9 to 12.
    OlderChild,
    Adult,
    Unknown,
}

impl AgeGroup {
    pub fn implied_label(self) -> Option<Label> {
        match self {
            AgeGroup::YoungChild | AgeGroup::OlderChild => Some(Label::Child),
            AgeGroup::Adult => Some(Label::Adult),
            AgeGroup::Unknown => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Session {
    pub id: String,
    pub label: Label,
    pub age_group: AgeGroup,
    pub touch_events: Vec<TouchEvent>,
    pub sensors: SensorStreams,
}

impl Session {
    pub fn new(
        id: impl Into<String>,
        label: Label,
        age_group: AgeGroup,
        touch_events: Vec<TouchEvent>,
        sensors: SensorStreams,
    ) -> Result<Self> {
        let id = id.into();
        if let Some(implied) = age_group.implied_label() {
            if implied != label {
                return Err(Error::InvalidSession(format!(
                    "session {id}: label {} contradicts age group {age_group:?}",
                    label.as_str()
                )));
            }
        }
        if touch_events.windows(2).any(|w| w[1].t < w[0].t) {
            return Err(Error::InvalidSession(format!(
                "session {id}: touch events out of order"
            )));
        }
        for kind in SensorKind::ALL {
            if sensors.get(kind).windows(2).any(|w| w[1].t < w[0].t) {
                return Err(Error::InvalidSession(format!(
                    "session {id}: {kind} stream out of order"
                )));
            }
        }
        Ok(Self {
            id,
            label,
            age_group,
            touch_events,
            sensors,
        })
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Largest tolerated backwards step between consecutive timestamps.
    pub order_tolerance_ms: i64,
}


pub fn parse_touch_log<R: BufRead>(reader: R) -> Result<Vec<TouchEvent>> {
    parse_touch_log_with(reader, ParseOptions::default())
}

pub fn parse_touch_log_with<R: BufRead>(reader: R, opts: ParseOptions) -> Result<Vec<TouchEvent>> {
    let mut events: Vec<TouchEvent> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let ev: TouchEvent = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            reason: e.to_string(),
        })?;
        ev.validate().map_err(|reason| Error::Parse {
            line: line_no,
            reason,
        })?;
        if let Some(prev) = events.last() {
            if ev.t < prev.t - opts.order_tolerance_ms {
                return Err(Error::Order {
                    line: line_no,
                    t: ev.t,
                    prev: prev.t,
                });
            }
        }
        events.push(ev);
    }
    // Tolerated backwards jitter still has to come out ordered.
    events.sort_by_key(|e| e.t);
    Ok(events)
}

/// Result of parsing a sensor log.
#[derive(Clone, Debug, Default)]
pub struct SensorLog {
    pub streams: SensorStreams,
    /// Lines that were parsed and kept.
    pub parsed: usize,
    /// Lines naming a sensor outside the four motion sensors, plus blank lines.
    pub skipped: usize,
}

#[derive(Deserialize)]
struct RawSensorLine {
    t: i64,
    sensor: String,
    x: f64,
    y: f64,
    z: f64,
}

pub fn parse_sensor_log<R: BufRead>(reader: R) -> Result<SensorLog> {
    parse_sensor_log_with(reader, ParseOptions::default())
}

pub fn parse_sensor_log_with<R: BufRead>(reader: R, opts: ParseOptions) -> Result<SensorLog> {
    let mut log = SensorLog::default();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            log.skipped += 1;
            continue;
        }
        let raw: RawSensorLine = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            reason: e.to_string(),
        })?;
        let Some(kind) = SensorKind::from_tag(&raw.sensor) else {
            log.skipped += 1;
            continue;
        };
        if !(raw.x.is_finite() && raw.y.is_finite() && raw.z.is_finite()) {
            return Err(Error::Parse {
                line: line_no,
                reason: "non-finite axis value".into(),
            });
        }
        let stream = log.streams.get_mut(kind);
        if let Some(prev) = stream.last() {
            if raw.t < prev.t - opts.order_tolerance_ms {
                return Err(Error::Order {
                    line: line_no,
                    t: raw.t,
                    prev: prev.t,
                });
            }
        }
        stream.push(SensorSample::new(raw.t, kind, raw.x, raw.y, raw.z));
        log.parsed += 1;
    }
    if log.skipped > 0 {
        tracing::warn!(
            skipped = log.skipped,
            "skipped non-motion sensor or blank lines"
        );
    }
    for kind in SensorKind::ALL {
        log.streams.get_mut(kind).sort_by_key(|s| s.t);
    }
    Ok(log)
}

pub fn write_touch_log<W: Write>(events: &[TouchEvent], mut w: W) -> Result<()> {
    for ev in events {
        serde_json::to_writer(&mut w, ev)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Writes all four streams interleaved by timestamp, ties in canonical
/// sensor order.
pub fn write_sensor_log<W: Write>(streams: &SensorStreams, mut w: W) -> Result<()> {
    let mut merged: Vec<&SensorSample> = SensorKind::ALL
        .iter()
        .flat_map(|&k| streams.get(k))
        .collect();
    merged.sort_by_key(|s| (s.t, s.sensor));
    for s in merged {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// One session entry of a dataset manifest. Log paths are relative to the
/// manifest's directory unless absolute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionManifest {
    pub id: String,
    pub label: Label,
    pub age_group: AgeGroup,
    pub touch: PathBuf,
    pub sensors: PathBuf,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ManifestDoc {
    Many(Vec<SessionManifest>),
    One(SessionManifest),
}

pub fn read_manifest(path: &Path) -> Result<Vec<SessionManifest>> {
    let doc: ManifestDoc = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    Ok(match doc {
        ManifestDoc::Many(v) => v,
        ManifestDoc::One(m) => vec![m],
    })
}

pub fn load_session(entry: &SessionManifest, base: &Path) -> Result<Session> {
    let resolve = |p: &Path| {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };
    let touch = parse_touch_log(BufReader::new(File::open(resolve(&entry.touch))?))?;
    let sensors = parse_sensor_log(BufReader::new(File::open(resolve(&entry.sensors))?))?;
    Session::new(
        entry.id.clone(),
        entry.label,
        entry.age_group,
        touch,
        sensors.streams,
    )
}

/// Loads every session listed in a manifest file.
pub fn load_dataset(manifest: &Path) -> Result<Vec<Session>> {
    let base = manifest.parent().unwrap_or(Path::new("."));
    read_manifest(manifest)?
        .iter()
        .map(|m| load_session(m, base))
        .collect()
}

/// Writes a session's two logs into `dir` and returns its manifest entry.
pub fn write_session(session: &Session, dir: &Path) -> Result<SessionManifest> {
    let touch = PathBuf::from(format!("{}.touch.jsonl", session.id));
    let sensors = PathBuf::from(format!("{}.sensors.jsonl", session.id));
    write_touch_log(
        &session.touch_events,
        BufWriter::new(File::create(dir.join(&touch))?),
    )?;
    write_sensor_log(
        &session.sensors,
        BufWriter::new(File::create(dir.join(&sensors))?),
    )?;
    Ok(SessionManifest {
        id: session.id.clone(),
        label: session.label,
        age_group: session.age_group,
        touch,
        sensors,
    })
}

#[derive(Clone, Debug, Default)]
pub struct FilterPolicy {
    /// Records at the head and tail of the touch log carrying this app id
    /// (the logger's own) are dropped.
    pub excluded_app_id: Option<String>,
}

/// Removes experimenter data from the ends of a session's touch log.
///
/// Coordinates stay on the raw events since stroke geometry needs them; the
/// feature extractors never emit them.
pub fn filter_session(session: &Session, policy: &FilterPolicy) -> Session {
    let mut out = session.clone();
    let Some(excluded) = policy.excluded_app_id.as_deref() else {
        return out;
    };
    let is_excluded = |e: &TouchEvent| e.app_id.as_deref() == Some(excluded);
    let events = &session.touch_events;
    let head = events.iter().take_while(|e| is_excluded(e)).count();
    let tail = events[head..]
        .iter()
        .rev()
        .take_while(|e| is_excluded(e))
        .count();
    out.touch_events = events[head..events.len() - tail].to_vec();
    out
}
