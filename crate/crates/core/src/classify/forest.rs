use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{train_tree_on, Criterion, DecisionTree, MaxFeatures, TreeParams};
use super::Dataset;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub max_features: MaxFeatures,
    pub criterion: Criterion,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_estimators: 200,
            max_features: MaxFeatures::Log2,
            criterion: Criterion::Entropy,
            max_depth: None,
            min_leaf: 1,
            seed: 0,
        }
    }
}

impl ForestParams {
    fn tree_params(&self) -> TreeParams {
        TreeParams {
            criterion: self.criterion,
            max_depth: self.max_depth,
            min_leaf: self.min_leaf,
            max_features: self.max_features,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub n_estimators: usize,
    pub max_features: MaxFeatures,
    pub criterion: Criterion,
    pub seed: u64,
    pub n_features: usize,
    pub trees: Vec<DecisionTree>,
}

/// Independent generator for tree `index`; training order and thread count
/// don't affect which random numbers a tree sees.
pub(crate) fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Bagged ensemble: every tree grows on its own n-row bootstrap resample.
pub fn train_forest(data: &Dataset, params: &ForestParams) -> Result<Forest> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    if params.n_estimators == 0 {
        return Err(Error::InvalidConfig("n_estimators must be positive".into()));
    }
    let n = data.len();
    let tree_params = params.tree_params();
    let trees = (0..params.n_estimators)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(params.seed, t as u64);
            let rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            train_tree_on(data, rows, &tree_params, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Forest {
        n_estimators: params.n_estimators,
        max_features: params.max_features,
        criterion: params.criterion,
        seed: params.seed,
        n_features: data.n_features(),
        trees,
    })
}

impl Forest {
    /// Wraps hand-built trees, e.g. for fixtures.
    pub fn from_trees(n_features: usize, trees: Vec<DecisionTree>) -> Self {
        Self {
            n_estimators: trees.len(),
            max_features: MaxFeatures::Log2,
            criterion: Criterion::Entropy,
            seed: 0,
            n_features,
            trees,
        }
    }

    /// Mean of the per-tree leaf child fractions.
    pub fn score(&self, row: &[f64]) -> f64 {
        if self.trees.is_empty() {
            return 0.5;
        }
        self.trees.iter().map(|t| t.score(row)).sum::<f64>() / self.trees.len() as f64
    }

    /// Mean decrease in impurity per feature, each tree normalized then
    /// averaged and renormalized to sum to 1; descending, ties by name order
    /// of `names`.
    ///
    /// A forest without a single split spreads importance uniformly.
    pub fn feature_importance(&self, names: &[String]) -> Vec<(String, f64)> {
        let d = self.n_features;
        let mut total = vec![0.0; d];
        for tree in &self.trees {
            let raw = tree.raw_importance();
            let sum: f64 = raw.iter().sum();
            if sum > 0.0 {
                for (acc, v) in total.iter_mut().zip(raw) {
                    *acc += v / sum;
                }
            }
        }
        let sum: f64 = total.iter().sum();
        if sum > 0.0 {
            total.iter_mut().for_each(|v| *v /= sum);
        } else {
            total.iter_mut().for_each(|v| *v = 1.0 / d as f64);
        }
        let mut ranked: Vec<(String, f64)> = names.iter().cloned().zip(total).collect();
        // Stable sort keeps canonical order among equal scores.
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
        ranked
    }
}
