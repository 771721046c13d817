//! Feed-forward binary classifier: ReLU hidden layers, sigmoid output,
//! trained by seeded mini-batch gradient descent on cross-entropy.

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

use super::{sigmoid, softplus, NnSpec};

#[derive(Debug, Clone)]
struct Layer {
    /// `in_dim x out_dim`
    w: Array2<f64>,
    b: Array1<f64>,
}

#[derive(Debug, Clone)]
pub struct NnModel {
    layers: Vec<Layer>,
}

impl NnModel {
    /// Xavier-uniform initialization from the given seed; weights are read
    /// from one ChaCha stream, so identical seeds give identical models.
    pub fn init(input_dim: usize, hidden: &[usize], seed: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut dims = vec![input_dim];
        dims.extend_from_slice(hidden);
        dims.push(1);
        let layers = dims
            .windows(2)
            .map(|pair| {
                let (fan_in, fan_out) = (pair[0], pair[1]);
                let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let w = Array2::from_shape_fn((fan_in, fan_out), |_| rng.random_range(-a..a));
                Layer {
                    w,
                    b: Array1::zeros(fan_out),
                }
            })
            .collect();
        NnModel { layers }
    }

    pub(super) fn fit(spec: &NnSpec, x: &Array2<f64>, y: &[u8], seed: u64) -> Self {
        let mut model = NnModel::init(x.ncols(), &spec.hidden, seed);
        let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(1));
        let n = x.nrows();
        let mut order: Vec<usize> = (0..n).collect();
        for _ in 0..spec.epochs {
            order.shuffle(&mut rng);
            for chunk in order.chunks(spec.batch) {
                let xb = gather_rows(x, chunk);
                let yb: Vec<u8> = chunk.iter().map(|&i| y[i]).collect();
                let grads = model.gradients(&xb, &yb);
                for (layer, (gw, gb)) in model.layers.iter_mut().zip(grads) {
                    layer.w.scaled_add(-spec.learning_rate, &gw);
                    layer.b.scaled_add(-spec.learning_rate, &gb);
                }
            }
        }
        model
    }

    fn input_dim(&self) -> usize {
        self.layers[0].w.nrows()
    }

    /// Activations after every layer; the last one is the sigmoid output.
    fn forward(&self, x: &Array2<f64>) -> Vec<Array2<f64>> {
        let mut activations = Vec::with_capacity(self.layers.len());
        let mut a = x.clone();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = a.dot(&layer.w);
            for mut row in z.rows_mut() {
                row += &layer.b;
            }
            a = if i == last {
                z.mapv(sigmoid)
            } else {
                z.mapv(|v| v.max(0.0))
            };
            activations.push(a.clone());
        }
        activations
    }

    /// Pre-sigmoid logits of the final layer.
    fn logits(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut a = x.clone();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = a.dot(&layer.w);
            for mut row in z.rows_mut() {
                row += &layer.b;
            }
            a = if i == last { z } else { z.mapv(|v| v.max(0.0)) };
        }
        a
    }

    /// Mean binary cross-entropy on a batch.
    pub fn loss(&self, x: &Array2<f64>, y: &[u8]) -> f64 {
        let z = self.logits(x);
        let n = y.len() as f64;
        z.column(0)
            .iter()
            .zip(y)
            .map(|(&z, &y)| softplus(z) - f64::from(y) * z)
            .sum::<f64>()
            / n
    }

    /// Analytic gradients of [`NnModel::loss`], per layer as (dW, db).
    pub fn gradients(&self, x: &Array2<f64>, y: &[u8]) -> Vec<(Array2<f64>, Array1<f64>)> {
        let activations = self.forward(x);
        let n = y.len() as f64;
        let depth = self.layers.len();

        // delta of the output layer: (p - y) / n
        let output = &activations[depth - 1];
        let mut delta = Array2::<f64>::zeros(output.raw_dim());
        for (i, &label) in y.iter().enumerate() {
            delta[(i, 0)] = (output[(i, 0)] - f64::from(label)) / n;
        }

        let mut grads: Vec<(Array2<f64>, Array1<f64>)> = Vec::with_capacity(depth);
        for layer_idx in (0..depth).rev() {
            let input = if layer_idx == 0 {
                x
            } else {
                &activations[layer_idx - 1]
            };
            let gw = input.t().dot(&delta);
            let gb = delta.sum_axis(ndarray::Axis(0));
            if layer_idx > 0 {
                // backprop through the ReLU of the previous layer
                let mut next = delta.dot(&self.layers[layer_idx].w.t());
                next.zip_mut_with(&activations[layer_idx - 1], |d, &a| {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                });
                delta = next;
            }
            grads.push((gw, gb));
        }
        grads.reverse();
        grads
    }

    /// Flattened parameter vector (layer by layer, weights then bias).
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for layer in &self.layers {
            out.extend(layer.w.iter());
            out.extend(layer.b.iter());
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) {
        let mut it = params.iter();
        for layer in &mut self.layers {
            for v in layer.w.iter_mut() {
                *v = *it.next().expect("parameter count matches");
            }
            for v in layer.b.iter_mut() {
                *v = *it.next().expect("parameter count matches");
            }
        }
        assert!(it.next().is_none(), "parameter count matches");
    }

    /// Gradient in the same flat layout as [`NnModel::params`].
    pub fn gradient_flat(&self, x: &Array2<f64>, y: &[u8]) -> Vec<f64> {
        let mut out = Vec::new();
        for (gw, gb) in self.gradients(x, y) {
            out.extend(gw.iter());
            out.extend(gb.iter());
        }
        out
    }

    pub fn probabilities(&self, x: &Array2<f64>) -> Result<Array1<f64>> {
        if x.ncols() != self.input_dim() {
            return Err(Error::Shape(format!(
                "test features have {} columns, training had {}",
                x.ncols(),
                self.input_dim()
            )));
        }
        Ok(self.logits(x).column(0).mapv(sigmoid))
    }

    pub fn predict(&self, x: &Array2<f64>) -> Result<Vec<u8>> {
        Ok(self
            .probabilities(x)?
            .iter()
            .map(|&p| u8::from(p > 0.5))
            .collect())
    }
}

fn gather_rows(x: &Array2<f64>, indices: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((indices.len(), x.ncols()));
    for (slot, &i) in indices.iter().enumerate() {
        out.row_mut(slot).assign(&x.row(i));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn xor_data() -> (Array2<f64>, Vec<u8>) {
        (
            array![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]],
            vec![0, 1, 1, 0],
        )
    }

    #[test]
    fn learns_xor() {
        let (x, y) = xor_data();
        let spec = NnSpec {
            hidden: vec![8],
            epochs: 3000,
            batch: 4,
            learning_rate: 0.5,
        };
        let m = NnModel::fit(&spec, &x, &y, 13);
        assert_eq!(m.predict(&x).unwrap(), y);
    }

    #[test]
    fn same_seed_same_model() {
        let (x, y) = xor_data();
        let spec = NnSpec::default();
        let a = NnModel::fit(&spec, &x, &y, 9);
        let b = NnModel::fit(&spec, &x, &y, 9);
        assert_eq!(a.params(), b.params());
    }

    #[test]
    fn different_seeds_differ() {
        let (x, y) = xor_data();
        let spec = NnSpec::default();
        let a = NnModel::fit(&spec, &x, &y, 1);
        let b = NnModel::fit(&spec, &x, &y, 2);
        assert_ne!(a.params(), b.params());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let x = array![
            [0.31, -0.62, 0.44],
            [-0.21, 0.17, 0.93],
            [0.55, 0.38, -0.71],
            [-0.83, 0.26, 0.12],
            [0.64, -0.49, 0.58]
        ];
        let y = vec![1u8, 0, 1, 0, 1];
        let mut m = NnModel::init(3, &[4], 7);
        let params = m.params();
        let analytic = m.gradient_flat(&x, &y);
        let eps = 1e-5;
        for i in 0..params.len() {
            let mut plus = params.clone();
            let mut minus = params.clone();
            plus[i] += eps;
            minus[i] -= eps;
            m.set_params(&plus);
            let lp = m.loss(&x, &y);
            m.set_params(&minus);
            let lm = m.loss(&x, &y);
            let numeric = (lp - lm) / (2.0 * eps);
            let rel = (analytic[i] - numeric).abs() / (analytic[i].abs() + numeric.abs() + 1e-6);
            assert!(rel < 1e-4, "param {i}: analytic {} vs numeric {numeric}", analytic[i]);
        }
        m.set_params(&params);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let m = NnModel::init(3, &[2], 0);
        assert!(m.predict(&array![[1.0, 2.0]]).is_err());
    }
}
