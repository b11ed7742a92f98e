use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::forest::substream;
use super::Dataset;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearKind {
    Logistic,
    Perceptron,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    pub kind: LinearKind,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl LinearParams {
    pub fn logistic() -> Self {
        Self {
            kind: LinearKind::Logistic,
            learning_rate: 0.1,
            epochs: 300,
            seed: 0,
        }
    }

    pub fn perceptron() -> Self {
        Self {
            kind: LinearKind::Perceptron,
            learning_rate: 1.0,
            epochs: 100,
            seed: 0,
        }
    }
}

/// Linear model over standardized features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub kind: LinearKind,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// Zero-variance training columns; their weight stays 0.
    pub frozen: Vec<bool>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn dot(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Mean cross-entropy of a logistic model on already standardized rows.
pub fn logistic_loss(weights: &[f64], bias: f64, rows: &[Vec<f64>], labels: &[bool]) -> f64 {
    let total: f64 = rows
        .iter()
        .zip(labels)
        .map(|(x, &y)| {
            let z = dot(weights, x) + bias;
            // -[y log σ(z) + (1-y) log(1-σ(z))]
            if y {
                softplus(-z)
            } else {
                softplus(z)
            }
        })
        .sum();
    total / rows.len() as f64
}

/// Gradient of [`logistic_loss`] with respect to the weights and bias.
pub fn logistic_gradient(
    weights: &[f64],
    bias: f64,
    rows: &[Vec<f64>],
    labels: &[bool],
) -> (Vec<f64>, f64) {
    let n = rows.len() as f64;
    let mut gw = vec![0.0; weights.len()];
    let mut gb = 0.0;
    for (x, &y) in rows.iter().zip(labels) {
        let err = sigmoid(dot(weights, x) + bias) - if y { 1.0 } else { 0.0 };
        for (g, xi) in gw.iter_mut().zip(x) {
            *g += err * xi;
        }
        gb += err;
    }
    gw.iter_mut().for_each(|g| *g /= n);
    (gw, gb / n)
}

impl LinearModel {
    pub fn standardize(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, &v)| {
                if self.frozen[j] {
                    0.0
                } else {
                    (v - self.means[j]) / self.stds[j]
                }
            })
            .collect()
    }

    pub fn margin(&self, row: &[f64]) -> f64 {
        dot(&self.weights, &self.standardize(row)) + self.bias
    }

    /// Sigmoid probability for logistic models, a hard 0/1 for perceptrons.
    pub fn score(&self, row: &[f64]) -> f64 {
        let z = self.margin(row);
        match self.kind {
            LinearKind::Logistic => sigmoid(z),
            LinearKind::Perceptron => {
                if z >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Trains a logistic model by full-batch gradient descent, returning the
/// model and the loss before every epoch plus the final loss.
pub fn train_logistic_traced(
    data: &Dataset,
    params: &LinearParams,
) -> Result<(LinearModel, Vec<f64>)> {
    let (mut model, rows, labels) = prepare(data, LinearKind::Logistic)?;
    let mut losses = Vec::with_capacity(params.epochs + 1);
    for _ in 0..params.epochs {
        losses.push(logistic_loss(&model.weights, model.bias, &rows, &labels));
        let (gw, gb) = logistic_gradient(&model.weights, model.bias, &rows, &labels);
        for (j, (w, g)) in model.weights.iter_mut().zip(gw).enumerate() {
            if !model.frozen[j] {
                *w -= params.learning_rate * g;
            }
        }
        model.bias -= params.learning_rate * gb;
    }
    losses.push(logistic_loss(&model.weights, model.bias, &rows, &labels));
    Ok((model, losses))
}

fn train_perceptron(data: &Dataset, params: &LinearParams) -> Result<LinearModel> {
    let (mut model, rows, labels) = prepare(data, LinearKind::Perceptron)?;
    let mut rng = substream(params.seed, 0);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        let mut mistakes = 0;
        for &i in &order {
            let predicted = dot(&model.weights, &rows[i]) + model.bias >= 0.0;
            if predicted != labels[i] {
                mistakes += 1;
                let sign = if labels[i] { 1.0 } else { -1.0 };
                for (j, w) in model.weights.iter_mut().enumerate() {
                    if !model.frozen[j] {
                        *w += params.learning_rate * sign * rows[i][j];
                    }
                }
                model.bias += params.learning_rate * sign;
            }
        }
        if mistakes == 0 {
            break;
        }
    }
    Ok(model)
}

fn prepare(data: &Dataset, kind: LinearKind) -> Result<(LinearModel, Vec<Vec<f64>>, Vec<bool>)> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    if !data.has_both_classes() {
        return Err(Error::SingleClass);
    }
    let (n, d) = (data.len(), data.n_features());
    let mut means = vec![0.0; d];
    let mut stds = vec![0.0; d];
    for j in 0..d {
        let m = (0..n).map(|i| data.value(i, j)).sum::<f64>() / n as f64;
        let var = (0..n).map(|i| (data.value(i, j) - m).powi(2)).sum::<f64>() / n as f64;
        means[j] = m;
        stds[j] = var.sqrt();
    }
    let frozen: Vec<bool> = stds.iter().map(|&s| !(s > 0.0 && s.is_finite())).collect();
    for (s, &f) in stds.iter_mut().zip(&frozen) {
        if f {
            *s = 1.0;
        }
    }
    let model = LinearModel {
        kind,
        weights: vec![0.0; d],
        bias: 0.0,
        means,
        stds,
        frozen,
    };
    let rows = (0..n).map(|i| model.standardize(data.row(i))).collect();
    let labels = (0..n).map(|i| data.label(i)).collect();
    Ok((model, rows, labels))
}

pub fn train_linear(data: &Dataset, params: &LinearParams) -> Result<LinearModel> {
    match params.kind {
        LinearKind::Logistic => train_logistic_traced(data, params).map(|(m, _)| m),
        LinearKind::Perceptron => train_perceptron(data, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn separable() -> Dataset {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 * 0.7 - 6.0]).collect();
        let labels = rows.iter().map(|r| r[0] > 0.5).collect();
        Dataset::from_rows(vec!["f".into()], rows, labels).unwrap()
    }

    fn accuracy(m: &LinearModel, data: &Dataset) -> f64 {
        (0..data.len())
            .filter(|&i| (m.score(data.row(i)) >= 0.5) == data.label(i))
            .count() as f64
            / data.len() as f64
    }

    #[test]
    fn perceptron_separates() {
        let data = separable();
        let m = train_linear(&data, &LinearParams::perceptron()).unwrap();
        assert_eq!(accuracy(&m, &data), 1.0);
        assert!(m.score(data.row(0)) == 0.0 || m.score(data.row(0)) == 1.0);
    }

    #[test]
    fn logistic_separates_and_loss_decreases() {
        let data = separable();
        let (m, losses) = train_logistic_traced(
            &data,
            &LinearParams {
                epochs: 100,
                ..LinearParams::logistic()
            },
        )
        .unwrap();
        assert_eq!(accuracy(&m, &data), 1.0);
        assert!(losses.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn zero_model_scores_half() {
        let m = LinearModel {
            kind: LinearKind::Logistic,
            weights: vec![0.0; 3],
            bias: 0.0,
            means: vec![0.0; 3],
            stds: vec![1.0; 3],
            frozen: vec![false; 3],
        };
        assert_eq!(m.score(&[4.0, -2.0, 9.0]), 0.5);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = substream(42, 0);
        let rows: Vec<Vec<f64>> = (0..15)
            .map(|_| (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let labels: Vec<bool> = (0..15).map(|_| rng.gen()).collect();
        let w: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = rng.gen_range(-1.0..1.0);
        let (gw, gb) = logistic_gradient(&w, b, &rows, &labels);
        let h = 1e-5;
        for j in 0..4 {
            let (mut up, mut down) = (w.clone(), w.clone());
            up[j] += h;
            down[j] -= h;
            let fd = (logistic_loss(&up, b, &rows, &labels)
                - logistic_loss(&down, b, &rows, &labels))
                / (2.0 * h);
            assert!((fd - gw[j]).abs() < 1e-6, "weight {j}: {fd} vs {}", gw[j]);
        }
        let fd = (logistic_loss(&w, b + h, &rows, &labels)
            - logistic_loss(&w, b - h, &rows, &labels))
            / (2.0 * h);
        assert!((fd - gb).abs() < 1e-6);
    }

    #[test]
    fn constant_column_is_frozen() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 3.0]).collect();
        let labels = (0..10).map(|i| i >= 5).collect();
        let data = Dataset::from_rows(vec!["x".into(), "c".into()], rows, labels).unwrap();
        for params in [LinearParams::logistic(), LinearParams::perceptron()] {
            let m = train_linear(&data, &params).unwrap();
            assert!(m.frozen[1]);
            assert_eq!(m.weights[1], 0.0);
            assert!(m.weights.iter().chain([&m.bias]).all(|w| w.is_finite()));
            assert!(m.score(&[2.0, 3.0]).is_finite());
        }
    }

    #[test]
    fn single_class_rejected() {
        let data = Dataset::from_rows(
            vec!["x".into()],
            vec![vec![1.0], vec![2.0]],
            vec![false, false],
        )
        .unwrap();
        assert!(matches!(
            train_linear(&data, &LinearParams::logistic()),
            Err(Error::SingleClass)
        ));
    }
}
