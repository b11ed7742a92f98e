//! Window statistics over motion-sensor axes and importance-based selection.
//!
//! Every window yields 8 statistics for each of 4 axes (x, y, z and the
//! per-sample magnitude) of the 4 motion sensors: 128 features named
//! `{sensor}_{axis}_{stat}`, e.g. `lacc_x_mean`.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::classify::{train_forest, Dataset, ForestParams};
use crate::error::{Error, Result};
use crate::features::{FeatureKind, FeatureMask, FeatureVector};
use crate::segment::SensorWindow;
use crate::session::{Label, SensorKind, SensorSample};

pub const AXES: [&str; 4] = ["x", "y", "z", "mag"];
pub const STATS: [&str; 8] = [
    "mean", "std", "var", "min", "max", "rmsd", "skewness", "kurtosis",
];
pub const SENSOR_FEATURE_COUNT: usize = 128;
pub const MIN_SAMPLES: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisStats {
    pub mean: f64,
    pub std: f64,
    pub var: f64,
    pub min: f64,
    pub max: f64,
    pub rmsd: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

impl AxisStats {
    pub fn to_array(&self) -> [f64; 8] {
        [
            self.mean,
            self.std,
            self.var,
            self.min,
            self.max,
            self.rmsd,
            self.skewness,
            self.kurtosis,
        ]
    }
}

/// Population moments of one axis series.
///
/// `rmsd` is the root-mean-square deviation from the mean, skewness and
/// kurtosis are the raw third and fourth standardized moments (no excess
/// correction). A constant series has skewness and kurtosis 0.
pub fn axis_stats(values: &[f64]) -> Result<AxisStats> {
    let n = values.len();
    if n < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            what: "axis series".into(),
            got: n,
            need: MIN_SAMPLES,
        });
    }
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if min == max {
        return Ok(AxisStats {
            mean: min,
            std: 0.0,
            var: 0.0,
            min,
            max,
            rmsd: 0.0,
            skewness: 0.0,
            kurtosis: 0.0,
        });
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let var = m2 / nf;
    let std = var.sqrt();
    let rmsd = (values.iter().map(|&v| (v - mean).powi(2)).sum::<f64>() / nf).sqrt();
    let (skewness, kurtosis) = if std == 0.0 {
        (0.0, 0.0)
    } else {
        (m3 / (nf * std.powi(3)), m4 / (nf * var * var))
    };
    Ok(AxisStats {
        mean,
        std,
        var,
        min,
        max,
        rmsd,
        skewness,
        kurtosis,
    })
}

pub fn sensor_feature_names() -> Arc<[String]> {
    static NAMES: OnceLock<Arc<[String]>> = OnceLock::new();
    NAMES
        .get_or_init(|| {
            let mut names = Vec::with_capacity(SENSOR_FEATURE_COUNT);
            for sensor in SensorKind::ALL {
                for axis in AXES {
                    for stat in STATS {
                        names.push(format!("{sensor}_{axis}_{stat}"));
                    }
                }
            }
            names.into()
        })
        .clone()
}

fn axis_values(samples: &[SensorSample], axis: usize) -> Vec<f64> {
    samples
        .iter()
        .map(|s| match axis {
            0 => s.x,
            1 => s.y,
            2 => s.z,
            _ => s.magnitude(),
        })
        .collect()
}

/// The 128 window statistics in canonical order.
pub fn window_values(w: &SensorWindow) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(SENSOR_FEATURE_COUNT);
    for sensor in SensorKind::ALL {
        let samples = w.samples.get(sensor);
        if samples.len() < MIN_SAMPLES {
            return Err(Error::TooFewSamples {
                what: format!("{sensor} in window"),
                got: samples.len(),
                need: MIN_SAMPLES,
            });
        }
        for axis in 0..AXES.len() {
            out.extend(axis_stats(&axis_values(samples, axis))?.to_array());
        }
    }
    Ok(out)
}

pub fn window_features(w: &SensorWindow, label: Label, group: &str) -> Result<FeatureVector> {
    Ok(FeatureVector::new(
        sensor_feature_names(),
        window_values(w)?,
        label,
        group,
        FeatureKind::Sensor,
    ))
}

/// Outcome of importance-based selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub mask: FeatureMask,
    /// Every input feature with its normalized importance, descending.
    pub ranking: Vec<(String, f64)>,
}

/// Fits a forest on `train` and keeps the `k` most important features.
pub fn select_top_k(train: &[FeatureVector], k: usize, seed: u64) -> Result<Selection> {
    select_top_k_with(
        train,
        k,
        &ForestParams {
            seed,
            ..ForestParams::default()
        },
    )
}

pub fn select_top_k_with(
    train: &[FeatureVector],
    k: usize,
    params: &ForestParams,
) -> Result<Selection> {
    let data = Dataset::from_vectors(train)?;
    select_from_dataset(&data, k, params)
}

pub(crate) fn select_from_dataset(
    data: &Dataset,
    k: usize,
    params: &ForestParams,
) -> Result<Selection> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    if !data.has_both_classes() {
        return Err(Error::SingleClass);
    }
    if k == 0 {
        return Err(Error::EmptyMask);
    }
    let forest = train_forest(data, params)?;
    let ranking = forest.feature_importance(data.names());
    let mask = FeatureMask::new(ranking.iter().take(k).map(|(n, _)| n.clone()).collect())?;
    Ok(Selection { mask, ranking })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::SensorStreams;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn one_two_three() {
        let s = axis_stats(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert!(close(s.std, (2.0f64 / 3.0).sqrt(), 1e-15));
        assert!(close(s.var, 2.0 / 3.0, 1e-15));
        assert_eq!((s.min, s.max), (1.0, 3.0));
        assert!(close(s.rmsd, 0.816496580927726, 1e-15));
        assert_eq!(s.skewness, 0.0);
        assert!(close(s.kurtosis, 1.5, 1e-12));
    }

    #[test]
    fn constant_series() {
        let s = axis_stats(&[5.0, 5.0, 5.0]).unwrap();
        assert_eq!(
            (s.std, s.rmsd, s.skewness, s.kurtosis),
            (0.0, 0.0, 0.0, 0.0)
        );
        let s = axis_stats(&[0.1; 7]).unwrap();
        assert_eq!((s.mean, s.kurtosis), (0.1, 0.0));
    }

    #[test]
    fn symmetric_series_has_zero_skew() {
        assert_eq!(
            axis_stats(&[-2.0, -1.0, 0.0, 1.0, 2.0]).unwrap().skewness,
            0.0
        );
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(
            axis_stats(&[1.0, 2.0]),
            Err(Error::TooFewSamples { got: 2, .. })
        ));
    }

    #[test]
    fn golden_header() {
        let names = sensor_feature_names();
        assert_eq!(names.len(), 128);
        assert_eq!(
            &names[..9],
            &[
                "acc_x_mean",
                "acc_x_std",
                "acc_x_var",
                "acc_x_min",
                "acc_x_max",
                "acc_x_rmsd",
                "acc_x_skewness",
                "acc_x_kurtosis",
                "acc_y_mean",
            ]
        );
        assert_eq!(names[64], "lacc_x_mean");
        assert_eq!(names[127], "rot_mag_kurtosis");
        let unique: std::collections::HashSet<_> = names.iter().collect();
        assert_eq!(unique.len(), 128);
    }

    fn window(lacc_x: &[f64]) -> SensorWindow {
        let mut samples = SensorStreams::new();
        for (i, &x) in lacc_x.iter().enumerate() {
            for kind in SensorKind::ALL {
                let (x, y, z) = if kind == SensorKind::Lacc {
                    (x, 4.0, 0.0)
                } else {
                    (3.0, 4.0, 0.0)
                };
                samples.push(SensorSample::new(i as i64 * 10, kind, x, y, z));
            }
        }
        SensorWindow {
            t_start: 0,
            t_end: 10 * lacc_x.len() as i64,
            samples,
            sparse: false,
        }
    }

    #[test]
    fn window_feature_lookup() {
        let v = window_features(&window(&[1.0, 2.0, 3.0]), Label::Child, "s").unwrap();
        assert_eq!(v.len(), 128);
        assert!(v.is_finite());
        assert_eq!(v.get("lacc_x_mean"), Some(2.0));
        assert!(close(v.get("lacc_x_kurtosis").unwrap(), 1.5, 1e-12));
        // (3, 4, 0) has magnitude 5.
        assert_eq!(v.get("acc_mag_mean"), Some(5.0));
        assert_eq!(v.get("acc_mag_std"), Some(0.0));
    }

    #[test]
    fn window_names_deficient_sensor() {
        let mut w = window(&[1.0, 2.0, 3.0]);
        w.samples.get_mut(SensorKind::Gyro).truncate(2);
        match window_values(&w) {
            Err(Error::TooFewSamples { what, got: 2, .. }) => assert!(what.contains("gyro")),
            other => panic!("unexpected {other:?}"),
        }
    }
}
