//! The three benchmark models: k-nearest neighbours, logistic regression and
//! a small feed-forward network. All are binary classifiers over encoded
//! features; ties (equal-distance votes, probability exactly 0.5) resolve
//! toward the smaller label for determinism.

mod knn;
mod logreg;
mod nn;

pub use knn::KnnModel;
pub use logreg::LogRegModel;
pub use nn::NnModel;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnSpec {
    pub k: usize,
}

impl Default for KnnSpec {
    fn default() -> Self {
        KnnSpec { k: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegSpec {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for LogRegSpec {
    fn default() -> Self {
        LogRegSpec {
            learning_rate: 0.1,
            epochs: 1500,
            l2: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NnSpec {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch: usize,
    pub learning_rate: f64,
}

impl Default for NnSpec {
    fn default() -> Self {
        NnSpec {
            hidden: vec![32],
            epochs: 50,
            batch: 32,
            learning_rate: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSpec {
    Knn(KnnSpec),
    Logreg(LogRegSpec),
    Nn(NnSpec),
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Knn(_) => "knn",
            ModelSpec::Logreg(_) => "logreg",
            ModelSpec::Nn(_) => "nn",
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            ModelSpec::Knn(s) => s.k >= 1,
            ModelSpec::Logreg(s) => s.learning_rate > 0.0 && s.epochs >= 1 && s.l2 >= 0.0,
            ModelSpec::Nn(s) => {
                s.learning_rate > 0.0
                    && s.epochs >= 1
                    && s.batch >= 1
                    && !s.hidden.is_empty()
                    && s.hidden.iter().all(|&h| h >= 1)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "invalid {} parameters",
                self.name()
            )))
        }
    }
}

#[derive(Debug, Clone)]
pub enum Model {
    Knn(KnnModel),
    LogReg(LogRegModel),
    Nn(NnModel),
}

pub(crate) fn validate_training_input(x: &Array2<f64>, y: &[u8]) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::Shape(format!(
            "{} feature rows vs {} labels",
            x.nrows(),
            y.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("features must be finite".into()));
    }
    if y.iter().any(|&l| l > 1) {
        return Err(Error::InvalidArgument(
            "labels must be binary (0 or 1)".into(),
        ));
    }
    let first = y[0];
    if y.iter().all(|&l| l == first) {
        return Err(Error::DegenerateLabels);
    }
    Ok(())
}

/// Trains a model. `seed` drives the network's initialization and batch
/// shuffling; k-NN and logistic regression are deterministic regardless.
pub fn train(spec: &ModelSpec, x: &Array2<f64>, y: &[u8], seed: u64) -> Result<Model> {
    spec.validate()?;
    validate_training_input(x, y)?;
    Ok(match spec {
        ModelSpec::Knn(s) => Model::Knn(KnnModel::fit(s, x, y)),
        ModelSpec::Logreg(s) => Model::LogReg(LogRegModel::fit(s, x, y)),
        ModelSpec::Nn(s) => Model::Nn(NnModel::fit(s, x, y, seed)),
    })
}

pub fn predict(model: &Model, x: &Array2<f64>) -> Result<Vec<u8>> {
    match model {
        Model::Knn(m) => m.predict(x),
        Model::LogReg(m) => m.predict(x),
        Model::Nn(m) => m.predict(x),
    }
}

/// Exact fraction of matching labels.
pub fn accuracy(predicted: &[u8], actual: &[u8]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(Error::InvalidArgument(format!(
            "label vectors differ in length: {} vs {}",
            predicted.len(),
            actual.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot compute accuracy of zero predictions".into(),
        ));
    }
    let correct = predicted.iter().zip(actual).filter(|(p, a)| p == a).count();
    Ok(correct as f64 / predicted.len() as f64)
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Numerically stable `ln(1 + e^z)`.
pub(crate) fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[1, 0, 1], &[1, 0, 1]).unwrap(), 1.0);
        assert_eq!(accuracy(&[1, 0, 1, 0], &[1, 1, 0, 0]).unwrap(), 0.5);
    }

    #[test]
    fn accuracy_rejects_bad_input() {
        assert!(accuracy(&[1], &[1, 0]).is_err());
        assert!(accuracy(&[], &[]).is_err());
    }

    #[test]
    fn accuracy_invariant_to_relabeling() {
        let p = [1u8, 0, 1, 1];
        let a = [1u8, 1, 0, 1];
        let flip = |v: &[u8]| v.iter().map(|&x| 1 - x).collect::<Vec<_>>();
        assert_eq!(
            accuracy(&p, &a).unwrap(),
            accuracy(&flip(&p), &flip(&a)).unwrap()
        );
    }

    #[test]
    fn single_class_labels_are_degenerate() {
        let x = Array2::zeros((3, 2));
        let y = vec![1u8, 1, 1];
        assert!(matches!(
            train(&ModelSpec::Knn(KnnSpec::default()), &x, &y, 0),
            Err(Error::DegenerateLabels)
        ));
    }

    #[test]
    fn non_finite_features_are_rejected() {
        let mut x = Array2::zeros((2, 1));
        x[(0, 0)] = f64::NAN;
        let y = vec![0u8, 1];
        assert!(train(&ModelSpec::Knn(KnnSpec::default()), &x, &y, 0).is_err());
    }
}
