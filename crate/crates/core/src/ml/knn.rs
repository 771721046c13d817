//! Brute-force k-nearest neighbours with Euclidean distance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use ndarray::Array2;

use crate::error::{Error, Result};

use super::KnnSpec;

/// Heap entry ordered by (distance, label) so that neighbour selection is
/// independent of training-row order.
#[derive(PartialEq)]
struct Neighbor {
    dist2: f64,
    label: u8,
}

impl Eq for Neighbor {}

impl PartialOrd for Neighbor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Neighbor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2
            .total_cmp(&other.dist2)
            .then(self.label.cmp(&other.label))
    }
}

#[derive(Debug, Clone)]
pub struct KnnModel {
    k: usize,
    x: Array2<f64>,
    y: Vec<u8>,
}

impl KnnModel {
    pub(super) fn fit(spec: &KnnSpec, x: &Array2<f64>, y: &[u8]) -> Self {
        KnnModel {
            k: spec.k,
            x: x.clone(),
            y: y.to_vec(),
        }
    }

    pub fn predict(&self, x: &Array2<f64>) -> Result<Vec<u8>> {
        if x.ncols() != self.x.ncols() {
            return Err(Error::Shape(format!(
                "test features have {} columns, training had {}",
                x.ncols(),
                self.x.ncols()
            )));
        }
        Ok(x.rows().into_iter().map(|row| self.predict_one(row.as_slice().expect("row-major"))).collect())
    }

    fn predict_one(&self, point: &[f64]) -> u8 {
        let k = self.k.min(self.y.len());
        let mut heap: BinaryHeap<Neighbor> = BinaryHeap::with_capacity(k + 1);
        let train = self.x.as_slice().expect("row-major");
        let dim = self.x.ncols();
        for (i, &label) in self.y.iter().enumerate() {
            let row = &train[i * dim..(i + 1) * dim];
            let bound = if heap.len() == k {
                heap.peek().map(|n| n.dist2).unwrap_or(f64::INFINITY)
            } else {
                f64::INFINITY
            };
            let mut dist2 = 0.0;
            for (a, b) in row.iter().zip(point) {
                let d = a - b;
                dist2 += d * d;
                if dist2 > bound {
                    break;
                }
            }
            let candidate = Neighbor { dist2, label };
            if heap.len() < k {
                heap.push(candidate);
            } else if let Some(top) = heap.peek() {
                if candidate.cmp(top) == Ordering::Less {
                    heap.pop();
                    heap.push(candidate);
                }
            }
        }
        let mut votes = [0usize; 2];
        for n in heap.iter() {
            votes[n.label as usize] += 1;
        }
        // majority, ties toward the smaller label
        if votes[1] > votes[0] {
            1
        } else {
            0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn fit(k: usize, x: &Array2<f64>, y: &[u8]) -> KnnModel {
        KnnModel::fit(&KnnSpec { k }, x, y)
    }

    #[test]
    fn nearest_neighbour_of_a_training_point_is_itself() {
        let x = array![[0.0, 0.0], [1.0, 1.0], [2.0, 0.0]];
        let y = vec![0, 1, 0];
        let m = fit(1, &x, &y);
        let preds = m.predict(&x).unwrap();
        assert_eq!(preds, y);
    }

    #[test]
    fn test_point_equal_to_training_point_gets_its_label() {
        let x = array![[0.0], [10.0]];
        let y = vec![0, 1];
        let m = fit(1, &x, &y);
        assert_eq!(m.predict(&array![[10.0]]).unwrap(), vec![1]);
    }

    #[test]
    fn majority_vote_ties_break_toward_smaller_label() {
        // two neighbours at equal distance with labels 0 and 1
        let x = array![[-1.0], [1.0]];
        let y = vec![1, 0];
        let m = fit(2, &x, &y);
        assert_eq!(m.predict(&array![[0.0]]).unwrap(), vec![0]);
    }

    #[test]
    fn empty_test_set_gives_empty_predictions() {
        let x = array![[0.0], [1.0]];
        let m = fit(1, &x, &[0, 1]);
        let empty = Array2::<f64>::zeros((0, 1));
        assert!(m.predict(&empty).unwrap().is_empty());
    }

    #[test]
    fn arity_mismatch_is_a_shape_error() {
        let x = array![[0.0, 1.0], [1.0, 0.0]];
        let m = fit(1, &x, &[0, 1]);
        assert!(m.predict(&array![[0.0]]).is_err());
    }

    #[test]
    fn prediction_invariant_to_training_row_order() {
        let x = array![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.5, 0.4]];
        let y = vec![0, 1, 1, 0, 1];
        let m1 = fit(3, &x, &y);
        // reverse the rows
        let rev_rows: Vec<f64> = x
            .rows()
            .into_iter()
            .rev()
            .flat_map(|r| r.to_vec())
            .collect();
        let xr = Array2::from_shape_vec((5, 2), rev_rows).unwrap();
        let yr: Vec<u8> = y.iter().rev().copied().collect();
        let m2 = fit(3, &xr, &yr);
        let probe = array![[0.3, 0.3], [0.9, 0.1], [0.5, 0.5]];
        assert_eq!(m1.predict(&probe).unwrap(), m2.predict(&probe).unwrap());
    }

    #[test]
    fn k_larger_than_training_set_uses_all_points() {
        let x = array![[0.0], [1.0], [2.0]];
        let y = vec![0, 1, 1];
        let m = fit(10, &x, &y);
        assert_eq!(m.predict(&array![[1.5]]).unwrap(), vec![1]);
    }
}
