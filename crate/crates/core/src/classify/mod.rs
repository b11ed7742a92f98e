//! From-scratch classifiers emitting a child probability.
//!
//! Scores are oriented so that larger means "more likely a child".

mod forest;
mod linear;
mod model;
mod tree;

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub(crate) use forest::substream;
pub use forest::{train_forest, Forest, ForestParams};
pub use linear::{
    logistic_gradient, logistic_loss, train_linear, train_logistic_traced, LinearKind, LinearModel,
    LinearParams,
};
pub use model::{
    load_model, read_model, save_model, write_model, ModelBody, TrainedModel, FORMAT_VERSION,
};
pub use tree::{train_tree, train_tree_on, Criterion, DecisionTree, MaxFeatures, Node, TreeParams};

use crate::error::{Error, Result};
use crate::features::FeatureVector;

/// Row-major training matrix with boolean labels (`true` = child).
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    names: Arc<[String]>,
    values: Vec<f64>,
    labels: Vec<bool>,
}

impl Dataset {
    pub fn from_vectors(vectors: &[FeatureVector]) -> Result<Self> {
        let first = vectors.first().ok_or(Error::EmptyData)?;
        let d = first.len();
        let mut values = Vec::with_capacity(vectors.len() * d);
        for v in vectors {
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: v.len(),
                });
            }
            values.extend_from_slice(&v.values);
        }
        Ok(Self {
            names: first.names.clone(),
            values,
            labels: vectors.iter().map(|v| v.label.is_child()).collect(),
        })
    }

    pub fn from_rows(names: Vec<String>, rows: Vec<Vec<f64>>, labels: Vec<bool>) -> Result<Self> {
        Self::from_shared(names.into(), rows, labels)
    }

    pub fn from_shared(
        names: Arc<[String]>,
        rows: Vec<Vec<f64>>,
        labels: Vec<bool>,
    ) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::InvalidConfig(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let d = names.len();
        let mut values = Vec::with_capacity(rows.len() * d);
        for r in &rows {
            if r.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Ok(Self {
            names,
            values,
            labels,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn shared_names(&self) -> Arc<[String]> {
        self.names.clone()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.n_features();
        &self.values[i * d..(i + 1) * d]
    }

    pub fn value(&self, i: usize, f: usize) -> f64 {
        self.values[i * self.n_features() + f]
    }

    pub fn label(&self, i: usize) -> bool {
        self.labels[i]
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn has_both_classes(&self) -> bool {
        self.labels.iter().any(|&l| l) && self.labels.iter().any(|&l| !l)
    }

    /// Rows `idx`, in that order.
    pub fn subset(&self, idx: &[usize]) -> Self {
        let mut values = Vec::with_capacity(idx.len() * self.n_features());
        for &i in idx {
            values.extend_from_slice(self.row(i));
        }
        Self {
            names: self.names.clone(),
            values,
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Columns `cols`, in that order.
    pub fn project(&self, cols: &[usize]) -> Self {
        let names: Vec<String> = cols.iter().map(|&c| self.names[c].clone()).collect();
        let mut values = Vec::with_capacity(self.len() * cols.len());
        for i in 0..self.len() {
            let row = self.row(i);
            values.extend(cols.iter().map(|&c| row[c]));
        }
        Self {
            names: names.into(),
            values,
            labels: self.labels.clone(),
        }
    }
}

/// Child probability in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Score(f64);

impl Score {
    pub fn new(p_child: f64) -> Self {
        debug_assert!(
            (0.0..=1.0).contains(&p_child),
            "score {p_child} out of range"
        );
        Self(p_child.clamp(0.0, 1.0))
    }

    pub fn p_child(self) -> f64 {
        self.0
    }
}

/// A classifier configuration. The seed is supplied at training time so the
/// same spec can be trained per fold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassifierSpec {
    Forest {
        #[serde(default = "default_estimators")]
        n_estimators: usize,
        #[serde(default = "default_log2")]
        max_features: MaxFeatures,
        #[serde(default = "default_entropy")]
        criterion: Criterion,
        #[serde(default)]
        max_depth: Option<usize>,
        #[serde(default = "default_min_leaf")]
        min_leaf: usize,
    },
    Tree {
        #[serde(default = "default_entropy")]
        criterion: Criterion,
        #[serde(default)]
        max_depth: Option<usize>,
        #[serde(default = "default_min_leaf")]
        min_leaf: usize,
        #[serde(default = "default_all")]
        max_features: MaxFeatures,
    },
    Logistic {
        #[serde(default = "default_rate")]
        learning_rate: f64,
        #[serde(default = "default_logistic_epochs")]
        epochs: usize,
    },
    Perceptron {
        #[serde(default = "default_perceptron_rate")]
        learning_rate: f64,
        #[serde(default = "default_perceptron_epochs")]
        epochs: usize,
    },
}

fn default_estimators() -> usize {
    200
}
fn default_log2() -> MaxFeatures {
    MaxFeatures::Log2
}
fn default_all() -> MaxFeatures {
    MaxFeatures::All
}
fn default_entropy() -> Criterion {
    Criterion::Entropy
}
fn default_min_leaf() -> usize {
    1
}
fn default_rate() -> f64 {
    0.1
}
fn default_logistic_epochs() -> usize {
    300
}
fn default_perceptron_rate() -> f64 {
    1.0
}
fn default_perceptron_epochs() -> usize {
    100
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        Self::forest()
    }
}

impl ClassifierSpec {
    /// 200 trees, ⌈log2 d⌉ features per split, entropy.
    pub fn forest() -> Self {
        ClassifierSpec::Forest {
            n_estimators: 200,
            max_features: MaxFeatures::Log2,
            criterion: Criterion::Entropy,
            max_depth: None,
            min_leaf: 1,
        }
    }

    pub fn tree() -> Self {
        ClassifierSpec::Tree {
            criterion: Criterion::Entropy,
            max_depth: None,
            min_leaf: 1,
            max_features: MaxFeatures::All,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClassifierSpec::Forest { .. } => "forest",
            ClassifierSpec::Tree { .. } => "tree",
            ClassifierSpec::Logistic { .. } => "logistic",
            ClassifierSpec::Perceptron { .. } => "perceptron",
        }
    }

    pub fn train(&self, data: &Dataset, seed: u64) -> Result<TrainedModel> {
        let body = match *self {
            ClassifierSpec::Forest {
                n_estimators,
                max_features,
                criterion,
                max_depth,
                min_leaf,
            } => {
                let params = ForestParams {
                    n_estimators,
                    max_features,
                    criterion,
                    max_depth,
                    min_leaf,
                    seed,
                };
                ModelBody::Forest(train_forest(data, &params)?)
            }
            ClassifierSpec::Tree {
                criterion,
                max_depth,
                min_leaf,
                max_features,
            } => {
                let params = TreeParams {
                    criterion,
                    max_depth,
                    min_leaf,
                    max_features,
                };
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                ModelBody::Tree(train_tree(data, &params, &mut rng)?)
            }
            ClassifierSpec::Logistic {
                learning_rate,
                epochs,
            } => {
                let params = LinearParams {
                    kind: LinearKind::Logistic,
                    learning_rate,
                    epochs,
                    seed,
                };
                ModelBody::Logistic(train_linear(data, &params)?)
            }
            ClassifierSpec::Perceptron {
                learning_rate,
                epochs,
            } => {
                let params = LinearParams {
                    kind: LinearKind::Perceptron,
                    learning_rate,
                    epochs,
                    seed,
                };
                ModelBody::Perceptron(train_linear(data, &params)?)
            }
        };
        Ok(TrainedModel::new(data.names().to_vec(), body))
    }
}

/// Scores one feature vector.
pub fn predict_score(model: &TrainedModel, v: &FeatureVector) -> Result<Score> {
    model.score(&v.values)
}
