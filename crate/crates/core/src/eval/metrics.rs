//! ROC, AUC and EER with children as the positive class.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// AUC as the Mann-Whitney statistic: P(pos > neg) + ½·P(pos = neg), exact
/// under ties via mid-ranks.
pub fn auc(pos: &[f64], neg: &[f64]) -> Result<f64> {
    check_sides(pos, neg)?;
    let mut all: Vec<(f64, bool)> = pos
        .iter()
        .map(|&s| (s, true))
        .chain(neg.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        // 1-based ranks i+1..=j share their mean.
        let mid = (i + 1 + j) as f64 / 2.0;
        rank_sum += mid * all[i..j].iter().filter(|x| x.1).count() as f64;
        i = j;
    }
    let (np, nn) = (pos.len() as f64, neg.len() as f64);
    Ok((rank_sum - np * (np + 1.0) / 2.0) / (np * nn))
}

fn check_sides(pos: &[f64], neg: &[f64]) -> Result<()> {
    if pos.is_empty() {
        return Err(Error::EmptySide("positive"));
    }
    if neg.is_empty() {
        return Err(Error::EmptySide("negative"));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// Scores `>= threshold` are called child. The first point uses +∞.
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// ROC points by decreasing threshold, from (0, 0) to (1, 1).
#[derive(Clone, Debug, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
}

impl RocCurve {
    pub fn new(pos: &[f64], neg: &[f64]) -> Result<Self> {
        check_sides(pos, neg)?;
        let mut all: Vec<(f64, bool)> = pos
            .iter()
            .map(|&s| (s, true))
            .chain(neg.iter().map(|&s| (s, false)))
            .collect();
        all.sort_by(|a, b| b.0.total_cmp(&a.0));
        let (np, nn) = (pos.len() as f64, neg.len() as f64);

        let mut points = vec![RocPoint {
            threshold: f64::INFINITY,
            fpr: 0.0,
            tpr: 0.0,
        }];
        let (mut tp, mut fp) = (0usize, 0usize);
        let mut i = 0;
        while i < all.len() {
            let threshold = all[i].0;
            while i < all.len() && all[i].0 == threshold {
                if all[i].1 {
                    tp += 1;
                } else {
                    fp += 1;
                }
                i += 1;
            }
            points.push(RocPoint {
                threshold,
                fpr: fp as f64 / nn,
                tpr: tp as f64 / np,
            });
        }
        Ok(Self { points })
    }

    /// Trapezoidal area under the polyline.
    pub fn trapezoid_auc(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
            .sum()
    }

    /// Where FPR equals FNR, interpolated linearly along the polyline.
    pub fn eer(&self) -> f64 {
        let gap = |p: &RocPoint| p.fpr - (1.0 - p.tpr);
        for w in self.points.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let (ga, gb) = (gap(a), gap(b));
            if ga == 0.0 {
                return a.fpr;
            }
            if gb == 0.0 {
                return b.fpr;
            }
            if ga < 0.0 && gb > 0.0 {
                let t = -ga / (gb - ga);
                return a.fpr + t * (b.fpr - a.fpr);
            }
        }
        // The gap runs from -1 at (0,0) to +1 at (1,1), so a crossing exists.
        unreachable!("ROC polyline never crosses FPR = FNR")
    }

    /// `threshold,fpr,tpr` rows; the opening threshold is written as `inf`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "threshold,fpr,tpr")?;
        for p in &self.points {
            writeln!(w, "{},{},{}", p.threshold, p.fpr, p.tpr)?;
        }
        Ok(())
    }
}

pub fn roc_and_eer(pos: &[f64], neg: &[f64]) -> Result<(RocCurve, f64)> {
    let roc = RocCurve::new(pos, neg)?;
    let eer = roc.eer();
    Ok((roc, eer))
}
