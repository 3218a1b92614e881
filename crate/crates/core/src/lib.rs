//! Accurate fairness for tabular classifiers.
//!
//! * [`dataio`]: schemas, loading, normalization, splits and fair augmentation
//! * [`models`]: logistic regression, linear SVM and fully connected networks
//!   with exact gradients, losses and optimizers
//! * [`siamese`]: the Lagrangian trainer over similar sub-populations
//! * [`metrics`]: accuracy, group and individual fairness, and the fairness
//!   confusion matrix
//! * [`cli`]: the `afair` command line

pub mod cli;
pub mod dataio;
pub mod error;
pub mod metrics;
pub mod models;
pub mod siamese;

pub use error::{Error, Result};
