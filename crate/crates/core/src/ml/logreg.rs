//! Logistic regression fitted by full-batch gradient descent on the
//! cross-entropy loss with L2 regularization (bias unregularized).

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

use super::{sigmoid, softplus, LogRegSpec};

#[derive(Debug, Clone)]
pub struct LogRegModel {
    pub weights: Array1<f64>,
    pub bias: f64,
    /// Loss at the start of every epoch plus the final value.
    pub loss_history: Vec<f64>,
}

impl LogRegModel {
    pub(super) fn fit(spec: &LogRegSpec, x: &Array2<f64>, y: &[u8]) -> Self {
        let n = x.nrows() as f64;
        let yf: Array1<f64> = y.iter().map(|&v| f64::from(v)).collect();
        let mut w = Array1::<f64>::zeros(x.ncols());
        let mut b = 0.0f64;
        let mut loss_history = Vec::with_capacity(spec.epochs + 1);
        for _ in 0..spec.epochs {
            let z = x.dot(&w) + b;
            loss_history.push(loss_from_logits(&z, &yf, &w, spec.l2));
            let residual = z.mapv(sigmoid) - &yf;
            let grad_w = x.t().dot(&residual) / n + spec.l2 * &w;
            let grad_b = residual.sum() / n;
            w.scaled_add(-spec.learning_rate, &grad_w);
            b -= spec.learning_rate * grad_b;
        }
        let z = x.dot(&w) + b;
        loss_history.push(loss_from_logits(&z, &yf, &w, spec.l2));
        LogRegModel {
            weights: w,
            bias: b,
            loss_history,
        }
    }

    pub fn probabilities(&self, x: &Array2<f64>) -> Result<Array1<f64>> {
        if x.ncols() != self.weights.len() {
            return Err(Error::Shape(format!(
                "test features have {} columns, training had {}",
                x.ncols(),
                self.weights.len()
            )));
        }
        Ok((x.dot(&self.weights) + self.bias).mapv(sigmoid))
    }

    pub fn predict(&self, x: &Array2<f64>) -> Result<Vec<u8>> {
        Ok(self
            .probabilities(x)?
            .iter()
            .map(|&p| u8::from(p > 0.5))
            .collect())
    }
}

fn loss_from_logits(z: &Array1<f64>, y: &Array1<f64>, w: &Array1<f64>, l2: f64) -> f64 {
    let n = z.len() as f64;
    let data: f64 = z
        .iter()
        .zip(y)
        .map(|(&z, &y)| softplus(z) - y * z)
        .sum::<f64>()
        / n;
    data + 0.5 * l2 * w.dot(w)
}

/// Cross-entropy + L2 loss at the given parameters.
pub fn loss(x: &Array2<f64>, y: &[u8], w: &Array1<f64>, b: f64, l2: f64) -> f64 {
    let yf: Array1<f64> = y.iter().map(|&v| f64::from(v)).collect();
    let z = x.dot(w) + b;
    loss_from_logits(&z, &yf, w, l2)
}

/// Analytic gradient of [`loss`] with respect to (weights, bias).
pub fn gradient(
    x: &Array2<f64>,
    y: &[u8],
    w: &Array1<f64>,
    b: f64,
    l2: f64,
) -> (Array1<f64>, f64) {
    let n = x.nrows() as f64;
    let yf: Array1<f64> = y.iter().map(|&v| f64::from(v)).collect();
    let residual = (x.dot(w) + b).mapv(sigmoid) - &yf;
    let grad_w = x.t().dot(&residual) / n + l2 * w;
    let grad_b = residual.sum() / n;
    (grad_w, grad_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn separable_two_points_reach_full_training_accuracy() {
        let x = array![[0.0], [1.0]];
        let y = vec![0u8, 1];
        let spec = LogRegSpec {
            learning_rate: 0.5,
            epochs: 2000,
            l2: 0.0,
        };
        let m = LogRegModel::fit(&spec, &x, &y);
        assert_eq!(m.predict(&x).unwrap(), y);
    }

    #[test]
    fn zero_weights_give_half_probability_and_label_zero() {
        let m = LogRegModel {
            weights: Array1::zeros(2),
            bias: 0.0,
            loss_history: vec![],
        };
        let x = array![[3.0, -1.0]];
        assert_eq!(m.probabilities(&x).unwrap()[0], 0.5);
        assert_eq!(m.predict(&x).unwrap(), vec![0]);
    }

    #[test]
    fn loss_is_non_increasing_at_default_rate() {
        let x = array![
            [0.1, 0.9],
            [0.8, 0.2],
            [0.2, 0.7],
            [0.9, 0.1],
            [0.4, 0.6],
            [0.7, 0.4]
        ];
        let y = vec![1u8, 0, 1, 0, 1, 0];
        let m = LogRegModel::fit(&LogRegSpec::default(), &x, &y);
        for pair in m.loss_history.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12, "loss increased: {pair:?}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let x = array![[0.3, -0.2], [0.5, 0.8], [-0.4, 0.1]];
        let y = vec![1u8, 0, 1];
        let w = array![0.2, -0.3];
        let b = 0.1;
        let l2 = 0.01;
        let (gw, gb) = gradient(&x, &y, &w, b, l2);
        let eps = 1e-5;
        for i in 0..w.len() {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[i] += eps;
            wm[i] -= eps;
            let numeric = (loss(&x, &y, &wp, b, l2) - loss(&x, &y, &wm, b, l2)) / (2.0 * eps);
            assert!((gw[i] - numeric).abs() / (gw[i].abs() + numeric.abs() + 1e-6) < 1e-4);
        }
        let numeric_b = (loss(&x, &y, &w, b + eps, l2) - loss(&x, &y, &w, b - eps, l2)) / (2.0 * eps);
        assert!((gb - numeric_b).abs() / (gb.abs() + numeric_b.abs() + 1e-6) < 1e-4);
    }

    #[test]
    fn empty_test_set_predicts_nothing() {
        let m = LogRegModel {
            weights: Array1::zeros(1),
            bias: 0.0,
            loss_history: vec![],
        };
        let empty = Array2::<f64>::zeros((0, 1));
        assert!(m.predict(&empty).unwrap().is_empty());
    }
}
