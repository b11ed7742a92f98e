use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

/// Splits must improve impurity by more than this.
const MIN_GAIN: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Entropy,
    Gini,
}

impl Criterion {
    pub fn impurity(self, child: usize, adult: usize) -> f64 {
        let n = (child + adult) as f64;
        if n == 0.0 {
            return 0.0;
        }
        let (p, q) = (child as f64 / n, adult as f64 / n);
        match self {
            Criterion::Entropy => {
                let h = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
                h(p) + h(q)
            }
            Criterion::Gini => 1.0 - p * p - q * q,
        }
    }
}

/// How many features each node considers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    /// ⌈log2 d⌉
    Log2,
    /// ⌈√d⌉
    Sqrt,
    All,
}

impl MaxFeatures {
    pub fn count(self, d: usize) -> usize {
        let k = match self {
            MaxFeatures::Log2 => (d as f64).log2().ceil() as usize,
            MaxFeatures::Sqrt => (d as f64).sqrt().ceil() as usize,
            MaxFeatures::All => d,
        };
        k.clamp(1, d.max(1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    pub criterion: Criterion,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub max_features: MaxFeatures,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            criterion: Criterion::Entropy,
            max_depth: None,
            min_leaf: 1,
            max_features: MaxFeatures::All,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        samples: usize,
        gain: f64,
    },
    Leaf {
        child: usize,
        adult: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub n_features: usize,
    /// Root at index 0.
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn leaf(n_features: usize, child: usize, adult: usize) -> Self {
        Self {
            n_features,
            nodes: vec![Node::Leaf { child, adult }],
        }
    }

    /// Child fraction of the leaf reached by `row`.
    pub fn score(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    at = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
                Node::Leaf { child, adult } => {
                    let n = child + adult;
                    return if n == 0 {
                        0.5
                    } else {
                        *child as f64 / n as f64
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    /// Impurity decrease per feature weighted by the fraction of the tree's
    /// training rows reaching each split. Unnormalized.
    pub fn raw_importance(&self) -> Vec<f64> {
        let mut imp = vec![0.0; self.n_features];
        let root = match &self.nodes[0] {
            Node::Split { samples, .. } => *samples as f64,
            Node::Leaf { .. } => return imp,
        };
        for node in &self.nodes {
            if let Node::Split {
                feature,
                samples,
                gain,
                ..
            } = node
            {
                imp[*feature] += *samples as f64 / root * gain;
            }
        }
        imp
    }
}

#[derive(Clone, Copy)]
struct SplitChoice {
    feature: usize,
    threshold: f64,
    gain: f64,
}

struct Builder<'a, R> {
    data: &'a Dataset,
    params: &'a TreeParams,
    mtry: usize,
    rng: &'a mut R,
    nodes: Vec<Node>,
    buf: Vec<(f64, bool)>,
    /// `k·log2 k` for every count up to the root size.
    xlogx: Vec<f64>,
}

impl<R: Rng> Builder<'_, R> {
    fn counts(&self, rows: &[usize]) -> (usize, usize) {
        let child = rows.iter().filter(|&&i| self.data.label(i)).count();
        (child, rows.len() - child)
    }

    /// Node size times its impurity.
    fn mass(&self, child: usize, adult: usize) -> f64 {
        let n = child + adult;
        match self.params.criterion {
            Criterion::Entropy => self.xlogx[n] - self.xlogx[child] - self.xlogx[adult],
            Criterion::Gini if n == 0 => 0.0,
            Criterion::Gini => n as f64 - (child * child + adult * adult) as f64 / n as f64,
        }
    }

    fn best_split(&mut self, rows: &[usize], child: usize, adult: usize) -> Option<SplitChoice> {
        let d = self.data.n_features();
        let mut features: Vec<usize> = if self.mtry >= d {
            (0..d).collect()
        } else {
            sample(self.rng, d, self.mtry).into_vec()
        };
        features.sort_unstable();

        let n = rows.len();
        let parent = self.mass(child, adult);
        let min_leaf = self.params.min_leaf.max(1);
        let mut best: Option<SplitChoice> = None;

        for f in features {
            self.buf.clear();
            self.buf.extend(
                rows.iter()
                    .map(|&i| (self.data.value(i, f), self.data.label(i))),
            );
            self.buf.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            let (mut lc, mut la) = (0usize, 0usize);
            for j in 0..n - 1 {
                if self.buf[j].1 {
                    lc += 1;
                } else {
                    la += 1;
                }
                let (lo, hi) = (self.buf[j].0, self.buf[j + 1].0);
                let left_n = j + 1;
                if lo == hi || left_n < min_leaf || n - left_n < min_leaf {
                    continue;
                }
                let gain =
                    (parent - self.mass(lc, la) - self.mass(child - lc, adult - la)) / n as f64;
                if gain > best.map_or(MIN_GAIN, |b| b.gain) {
                    let mut threshold = lo + (hi - lo) / 2.0;
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some(SplitChoice {
                        feature: f,
                        threshold,
                        gain,
                    });
                }
            }
        }
        best
    }

    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let (child, adult) = self.counts(&rows);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { child, adult });
        let depth_ok = self.params.max_depth.is_none_or(|m| depth < m);
        if child == 0 || adult == 0 || !depth_ok || rows.len() < 2 * self.params.min_leaf.max(1) {
            return id;
        }
        let Some(split) = self.best_split(&rows, child, adult) else {
            return id;
        };
        let samples = rows.len();
        let (l, r): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&i| self.data.value(i, split.feature) <= split.threshold);
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
            samples,
            gain: split.gain,
        };
        id
    }
}

/// Grows a tree greedily on the given rows of `data` (repeats allowed, as
/// in a bootstrap sample).
///
/// Thresholds are midpoints between consecutive distinct values. Among equal
/// gains the lowest feature index, then the lowest threshold, wins.
pub fn train_tree_on<R: Rng>(
    data: &Dataset,
    rows: Vec<usize>,
    params: &TreeParams,
    rng: &mut R,
) -> Result<DecisionTree> {
    if rows.is_empty() {
        return Err(Error::EmptyData);
    }
    let xlogx = match params.criterion {
        Criterion::Entropy => (0..=rows.len())
            .map(|k| {
                if k == 0 {
                    0.0
                } else {
                    k as f64 * (k as f64).log2()
                }
            })
            .collect(),
        Criterion::Gini => Vec::new(),
    };
    let mut builder = Builder {
        data,
        params,
        mtry: params.max_features.count(data.n_features()),
        rng,
        nodes: Vec::new(),
        buf: Vec::with_capacity(rows.len()),
        xlogx,
    };
    builder.build(rows, 0);
    Ok(DecisionTree {
        n_features: data.n_features(),
        nodes: builder.nodes,
    })
}

pub fn train_tree<R: Rng>(
    data: &Dataset,
    params: &TreeParams,
    rng: &mut R,
) -> Result<DecisionTree> {
    train_tree_on(data, (0..data.len()).collect(), params, rng)
}
