//! Versioned JSON model files:
//! `{"format_version":1,"kind":"forest","feature_names":[...],"model":{...}}`.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{DecisionTree, Forest, LinearModel, Score};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum ModelBody {
    Forest(Forest),
    Tree(DecisionTree),
    Logistic(LinearModel),
    Perceptron(LinearModel),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    pub feature_names: Vec<String>,
    pub body: ModelBody,
}

impl TrainedModel {
    pub fn new(feature_names: Vec<String>, body: ModelBody) -> Self {
        Self {
            feature_names,
            body,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.body {
            ModelBody::Forest(_) => "forest",
            ModelBody::Tree(_) => "tree",
            ModelBody::Logistic(_) => "logistic",
            ModelBody::Perceptron(_) => "perceptron",
        }
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn score(&self, row: &[f64]) -> Result<Score> {
        if row.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                got: row.len(),
            });
        }
        let p = match &self.body {
            ModelBody::Forest(f) => f.score(row),
            ModelBody::Tree(t) => t.score(row),
            ModelBody::Logistic(m) | ModelBody::Perceptron(m) => m.score(row),
        };
        Ok(Score::new(p))
    }

    /// Named importances for tree models; `None` for linear ones.
    pub fn feature_importance(&self) -> Option<Vec<(String, f64)>> {
        match &self.body {
            ModelBody::Forest(f) => Some(f.feature_importance(&self.feature_names)),
            ModelBody::Tree(t) => Some(
                Forest::from_trees(t.n_features, vec![t.clone()])
                    .feature_importance(&self.feature_names),
            ),
            _ => None,
        }
    }
}

#[derive(Serialize)]
struct EnvelopeOut<'a, T> {
    format_version: u64,
    kind: &'a str,
    feature_names: &'a [String],
    model: &'a T,
}

#[derive(Deserialize)]
struct Header {
    format_version: u64,
    kind: String,
}

#[derive(Deserialize)]
struct EnvelopeIn<T> {
    feature_names: Vec<String>,
    model: T,
}

pub fn write_model(model: &TrainedModel) -> Result<String> {
    fn wrap<T: Serialize>(m: &TrainedModel, body: &T) -> Result<String> {
        Ok(serde_json::to_string(&EnvelopeOut {
            format_version: FORMAT_VERSION,
            kind: m.kind(),
            feature_names: &m.feature_names,
            model: body,
        })?)
    }
    match &model.body {
        ModelBody::Forest(f) => wrap(model, f),
        ModelBody::Tree(t) => wrap(model, t),
        ModelBody::Logistic(l) | ModelBody::Perceptron(l) => wrap(model, l),
    }
}

pub fn read_model(text: &str) -> Result<TrainedModel> {
    let header: Header =
        serde_json::from_str(text).map_err(|e| Error::CorruptModel(e.to_string()))?;
    if header.format_version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: header.format_version,
            expected: FORMAT_VERSION,
        });
    }
    fn body<T: DeserializeOwned>(text: &str) -> Result<(Vec<String>, T)> {
        let env: EnvelopeIn<T> =
            serde_json::from_str(text).map_err(|e| Error::CorruptModel(e.to_string()))?;
        Ok((env.feature_names, env.model))
    }
    let (names, body) = match header.kind.as_str() {
        "forest" => body::<Forest>(text).map(|(n, b)| (n, ModelBody::Forest(b)))?,
        "tree" => body::<DecisionTree>(text).map(|(n, b)| (n, ModelBody::Tree(b)))?,
        "logistic" => body::<LinearModel>(text).map(|(n, b)| (n, ModelBody::Logistic(b)))?,
        "perceptron" => body::<LinearModel>(text).map(|(n, b)| (n, ModelBody::Perceptron(b)))?,
        other => return Err(Error::CorruptModel(format!("unknown model kind `{other}`"))),
    };
    let expected = match &body {
        ModelBody::Forest(f) => f.n_features,
        ModelBody::Tree(t) => t.n_features,
        ModelBody::Logistic(l) | ModelBody::Perceptron(l) => l.weights.len(),
    };
    if expected != names.len() {
        return Err(Error::CorruptModel(format!(
            "{} feature names for a {expected}-feature model",
            names.len()
        )));
    }
    Ok(TrainedModel::new(names, body))
}

pub fn save_model(model: &TrainedModel, path: &Path) -> Result<()> {
    fs::write(path, write_model(model)?)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    read_model(&fs::read_to_string(path)?)
}
