//! Differentiable classifiers written out by hand: logistic regression,
//! linear SVM and fully connected networks, with losses and optimizers.

mod checkpoint;
mod loss;
mod network;
mod optim;
mod output;

pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint};
pub use loss::{loss, loss_grad, loss_target, LossKind};
pub use network::{Architecture, ForwardCache, ModelParams, OutputActivation};
pub use optim::{OptimizerConfig, OptimizerKind, OptimizerState};
pub use output::{predict_label, unit_output, unit_output_slope, unit_target};

use crate::dataio::{Label, SchemaConfig};
use crate::error::Result;

/// Anything that maps a model input `(x, a)` to an output vector. Metrics
/// are written against this trait so hand-built lookup models can be audited
/// the same way as trained networks.
pub trait Classifier {
    fn output(&self, input: &[f64]) -> Result<Vec<f64>>;
    fn activation(&self) -> OutputActivation;

    fn predict(&self, input: &[f64]) -> Result<Label> {
        Ok(predict_label(&self.output(input)?, self.activation()))
    }
}

impl Classifier for ModelParams {
    fn output(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.forward(input)
    }

    fn activation(&self) -> OutputActivation {
        self.output_activation()
    }
}

/// Output width needed for the schema's label: one unit for binary labels,
/// one per class otherwise.
pub fn output_dim_for(schema: &SchemaConfig) -> usize {
    match schema.label_arity() {
        crate::dataio::LabelArity::Binary => 1,
        crate::dataio::LabelArity::Classes(k) => k,
    }
}
