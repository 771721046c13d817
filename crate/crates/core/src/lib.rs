//! privbench-core: desk-scale benchmark of privacy-enhancing techniques.
//!
//! Compares k-anonymisation (generalization + suppression) with
//! Bayesian-network synthetic data by training k-NN, logistic-regression and
//! feed-forward models on each data variant while metering wall-clock time and
//! CPU/DRAM energy per pipeline stage.

pub mod anonymizer;
pub mod dataset;
pub mod encode;
pub mod energy;
pub mod error;
pub mod experiment;
pub mod hierarchy;
pub mod ml;
pub mod synthesizer;

pub use error::{Error, Result};
