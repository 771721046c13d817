//! Feature encoding: one-hot for categorical attributes, min-max scaling for
//! numeric ones, with statistics always taken from the training split.

use ndarray::Array2;

use crate::dataset::{AttrKind, Dataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub enum FeatureBlock {
    /// One column per training category; unseen values map to all zeros.
    OneHot {
        attribute: String,
        categories: Vec<String>,
        offset: usize,
    },
    /// `(v - min) / (max - min)`; a constant column maps to 0.
    MinMax {
        attribute: String,
        min: f64,
        max: f64,
        offset: usize,
    },
}

#[derive(Debug, Clone)]
pub struct Encoder {
    blocks: Vec<FeatureBlock>,
    /// The two label values, ascending; index is the class id.
    classes: [String; 2],
    target: String,
    width: usize,
}

impl Encoder {
    /// Learns the encoding from a training split. The split must be cleaned
    /// and its target must carry exactly two distinct values.
    pub fn fit(train: &Dataset) -> Result<Self> {
        if train.n() == 0 {
            return Err(Error::InvalidArgument(
                "cannot fit encoder on zero rows".into(),
            ));
        }
        if train.has_missing() {
            return Err(Error::InvalidArgument(
                "dataset must be cleaned before encoding".into(),
            ));
        }
        let ti = train.target_index();

        let mut classes: Vec<String> = train.column(ti).map(|s| s.to_string()).collect();
        classes.sort();
        classes.dedup();
        if classes.len() == 1 {
            return Err(Error::DegenerateLabels);
        }
        if classes.len() != 2 {
            return Err(Error::InvalidArgument(format!(
                "binary target expected, found {} classes",
                classes.len()
            )));
        }

        let mut blocks = Vec::new();
        let mut offset = 0usize;
        for (col, attr) in train.schema().iter().enumerate() {
            if col == ti {
                continue;
            }
            match attr.kind {
                AttrKind::Categorical => {
                    let mut categories: Vec<String> =
                        train.column(col).map(|s| s.to_string()).collect();
                    categories.sort();
                    categories.dedup();
                    let width = categories.len();
                    blocks.push(FeatureBlock::OneHot {
                        attribute: attr.name.clone(),
                        categories,
                        offset,
                    });
                    offset += width;
                }
                AttrKind::Integer | AttrKind::Continuous => {
                    let mut min = f64::INFINITY;
                    let mut max = f64::NEG_INFINITY;
                    for v in train.column(col) {
                        let x: f64 = v.parse().expect("numeric pattern validated");
                        min = min.min(x);
                        max = max.max(x);
                    }
                    blocks.push(FeatureBlock::MinMax {
                        attribute: attr.name.clone(),
                        min,
                        max,
                        offset,
                    });
                    offset += 1;
                }
            }
        }
        Ok(Encoder {
            blocks,
            classes: [classes[0].clone(), classes[1].clone()],
            target: train.target().to_string(),
            width: offset,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn blocks(&self) -> &[FeatureBlock] {
        &self.blocks
    }

    pub fn classes(&self) -> &[String; 2] {
        &self.classes
    }

    /// Encodes a dataset with the fitted statistics.
    pub fn transform(&self, d: &Dataset) -> Result<(Array2<f64>, Vec<u8>)> {
        if d.target() != self.target {
            return Err(Error::Shape(format!(
                "encoder fitted for target {:?}, dataset has {:?}",
                self.target,
                d.target()
            )));
        }
        let ti = d.target_index();
        let mut features = Array2::<f64>::zeros((d.n(), self.width));
        for block in &self.blocks {
            match block {
                FeatureBlock::OneHot {
                    attribute,
                    categories,
                    offset,
                } => {
                    let col = d.attr_index(attribute).ok_or_else(|| {
                        Error::Shape(format!("attribute {attribute:?} missing from dataset"))
                    })?;
                    for (i, v) in d.column(col).enumerate() {
                        if let Ok(slot) = categories.binary_search_by(|c| c.as_str().cmp(v)) {
                            features[(i, offset + slot)] = 1.0;
                        }
                        // unseen category: the block stays all zeros
                    }
                }
                FeatureBlock::MinMax {
                    attribute,
                    min,
                    max,
                    offset,
                } => {
                    let col = d.attr_index(attribute).ok_or_else(|| {
                        Error::Shape(format!("attribute {attribute:?} missing from dataset"))
                    })?;
                    let range = max - min;
                    for (i, v) in d.column(col).enumerate() {
                        let x: f64 = v.parse().map_err(|_| {
                            Error::InvalidArgument(format!(
                                "attribute {attribute:?} holds non-numeric value {v:?}"
                            ))
                        })?;
                        features[(i, *offset)] = if range > 0.0 { (x - min) / range } else { 0.0 };
                    }
                }
            }
        }
        let mut labels = Vec::with_capacity(d.n());
        for v in d.column(ti) {
            let id = self
                .classes
                .iter()
                .position(|c| c == v)
                .ok_or_else(|| Error::InvalidArgument(format!("unseen label {v:?}")))?;
            labels.push(id as u8);
        }
        Ok((features, labels))
    }
}

/// Fits on the training split and encodes both splits.
pub fn encode(
    train: &Dataset,
    test: &Dataset,
) -> Result<(Array2<f64>, Vec<u8>, Array2<f64>, Vec<u8>)> {
    let encoder = Encoder::fit(train)?;
    let (xtr, ytr) = encoder.transform(train)?;
    let (xte, yte) = encoder.transform(test)?;
    Ok((xtr, ytr, xte, yte))
}
