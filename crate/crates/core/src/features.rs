//! Named feature vectors shared by the touch and sensor extractors.

use std::io::{Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sensor::sensor_feature_names;
use crate::session::Label;
use crate::touch::{STROKE_FEATURES, TAP_FEATURES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureKind {
    #[serde(rename = "tap")]
    Tap,
    #[serde(rename = "stroke")]
    Stroke,
    #[serde(rename = "sensor")]
    Sensor,
    #[serde(rename = "tap+sensor")]
    TapSensor,
    #[serde(rename = "stroke+sensor")]
    StrokeSensor,
}

impl FeatureKind {
    /// Kind implied by a feature header, e.g. one read back from CSV.
    pub fn infer(names: &[String]) -> Option<Self> {
        let sensor_names = sensor_feature_names();
        let sensor = names.iter().any(|n| sensor_names.contains(n));
        let stroke = names.iter().any(|n| STROKE_FEATURES.contains(&n.as_str()));
        let tap = names.iter().any(|n| TAP_FEATURES.contains(&n.as_str()));
        match (tap, stroke, sensor) {
            (_, true, true) => Some(FeatureKind::StrokeSensor),
            (true, false, true) => Some(FeatureKind::TapSensor),
            (false, false, true) => Some(FeatureKind::Sensor),
            (_, true, false) => Some(FeatureKind::Stroke),
            (true, false, false) => Some(FeatureKind::Tap),
            (false, false, false) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub names: Arc<[String]>,
    pub values: Vec<f64>,
    pub label: Label,
    /// Session id.
    pub group: String,
    pub kind: FeatureKind,
}

impl FeatureVector {
    pub fn new(
        names: Arc<[String]>,
        values: Vec<f64>,
        label: Label,
        group: impl Into<String>,
        kind: FeatureKind,
    ) -> Self {
        debug_assert_eq!(names.len(), values.len());
        Self {
            names,
            values,
            label,
            group: group.into(),
            kind,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

pub fn shared_names<I, S>(names: I) -> Arc<[String]>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    names.into_iter().map(Into::into).collect::<Vec<_>>().into()
}

/// An ordered subset of feature names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMask {
    names: Vec<String>,
}

impl FeatureMask {
    pub fn new(names: Vec<String>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::EmptyMask);
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(Error::InvalidConfig(format!(
                "duplicate feature `{dup}` in mask"
            )));
        }
        Ok(Self { names })
    }

    /// Keeps the names of `all` accepted by `keep`, in their original order.
    pub fn from_predicate(all: &[String], keep: impl Fn(&str) -> bool) -> Result<Self> {
        Self::new(all.iter().filter(|n| keep(n)).cloned().collect())
    }

    /// One name per line; blank lines and `#` comments ignored.
    pub fn parse(text: &str) -> Result<Self> {
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_owned)
                .collect(),
        )
    }

    pub fn to_text(&self) -> String {
        let mut s = self.names.join("\n");
        s.push('\n');
        s
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Column indices of the mask within `names`.
    pub fn indices(&self, names: &[String]) -> Result<Vec<usize>> {
        self.names
            .iter()
            .map(|m| {
                names
                    .iter()
                    .position(|n| n == m)
                    .ok_or_else(|| Error::MissingFeature(m.clone()))
            })
            .collect()
    }

    pub fn shared_names(&self) -> Arc<[String]> {
        self.names.clone().into()
    }
}

/// Projects `v` onto the mask, in mask order.
pub fn apply_mask(v: &FeatureVector, mask: &FeatureMask) -> Result<FeatureVector> {
    let idx = mask.indices(&v.names)?;
    Ok(FeatureVector {
        names: mask.shared_names(),
        values: idx.iter().map(|&i| v.values[i]).collect(),
        label: v.label,
        group: v.group.clone(),
        kind: v.kind,
    })
}

/// Concatenates a touch vector and a sensor vector for the combined approach.
pub fn concat(
    touch: &FeatureVector,
    sensor: &FeatureVector,
    names: Arc<[String]>,
) -> FeatureVector {
    let kind = match touch.kind {
        FeatureKind::Tap => FeatureKind::TapSensor,
        _ => FeatureKind::StrokeSensor,
    };
    let mut values = touch.values.clone();
    values.extend_from_slice(&sensor.values);
    FeatureVector::new(names, values, touch.label, touch.group.clone(), kind)
}

/// Feature table as CSV: the feature names, then `label,group`; one row
/// per vector.
pub fn write_feature_csv<W: Write>(
    names: &[String],
    vectors: &[FeatureVector],
    w: W,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(names.iter().map(String::as_str).chain(["label", "group"]))?;
    for v in vectors {
        if v.names.as_ref() != names {
            return Err(Error::DimensionMismatch {
                expected: names.len(),
                got: v.len(),
            });
        }
        let mut record: Vec<String> = v.values.iter().map(f64::to_string).collect();
        record.push(v.label.as_str().to_string());
        record.push(v.group.clone());
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_feature_csv<R: Read>(r: R) -> Result<Vec<FeatureVector>> {
    let mut input = csv::Reader::from_reader(r);
    let header: Vec<String> = input.headers()?.iter().map(str::to_string).collect();
    let d = header.len().saturating_sub(2);
    if header.len() < 3 || header[d] != "label" || header[d + 1] != "group" {
        return Err(Error::Parse {
            line: 1,
            reason: "header must end with `label,group` after at least one feature".into(),
        });
    }
    let names = shared_names(header[..d].iter().cloned());
    let kind = FeatureKind::infer(&names).ok_or_else(|| Error::Parse {
        line: 1,
        reason: "header names no known feature".into(),
    })?;
    let mut out = Vec::new();
    for (i, record) in input.records().enumerate() {
        let record = record?;
        let line = i + 2;
        if record.len() != header.len() {
            return Err(Error::Parse {
                line,
                reason: format!("{} fields, expected {}", record.len(), header.len()),
            });
        }
        let values = record
            .iter()
            .take(d)
            .map(|f| {
                f.parse::<f64>().map_err(|e| Error::Parse {
                    line,
                    reason: format!("`{f}`: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let label = record[d].parse::<Label>().map_err(|e| Error::Parse {
            line,
            reason: e.to_string(),
        })?;
        out.push(FeatureVector::new(
            names.clone(),
            values,
            label,
            &record[d + 1],
            kind,
        ));
    }
    Ok(out)
}
