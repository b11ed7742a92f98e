//! Score-level fusion of consecutive observations from one session.

use serde::{Deserialize, Serialize};

use crate::session::Label;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub scores: Vec<f64>,
    pub fused: f64,
}

impl Bundle {
    pub fn new(scores: Vec<f64>) -> Self {
        let fused = fuse(&scores);
        Self { scores, fused }
    }

    pub fn k(&self) -> usize {
        self.scores.len()
    }
}

/// Arithmetic mean, accumulated incrementally so that k copies of one
/// score fuse to exactly that score.
pub fn fuse(scores: &[f64]) -> f64 {
    if scores.is_empty() {
        return f64::NAN;
    }
    scores
        .iter()
        .enumerate()
        .fold(0.0, |m, (i, &s)| m + (s - m) / (i + 1) as f64)
}

/// Sliding windows of `k` consecutive scores, advancing by `stride`.
///
/// `scores` must come from a single session in chronological order. Fewer
/// than `k` scores yield no bundles.
pub fn make_bundles(scores: &[f64], k: usize, stride: usize) -> Vec<Bundle> {
    assert!(
        k >= 1 && stride >= 1,
        "bundle size and stride must be positive"
    );
    if scores.len() < k {
        return Vec::new();
    }
    (0..=scores.len() - k)
        .step_by(stride)
        .map(|i| Bundle::new(scores[i..i + k].to_vec()))
        .collect()
}

/// Fused scores only, for evaluation.
pub fn fused_scores(scores: &[f64], k: usize, stride: usize) -> Vec<f64> {
    make_bundles(scores, k, stride)
        .into_iter()
        .map(|b| b.fused)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub verdict: Label,
    pub fused: f64,
    pub threshold: f64,
}

/// Child iff `fused >= threshold`; ties go to the child verdict.
pub fn decide(fused: f64, threshold: f64) -> Decision {
    let verdict = if fused >= threshold {
        Label::Child
    } else {
        Label::Adult
    };
    Decision {
        verdict,
        fused,
        threshold,
    }
}
