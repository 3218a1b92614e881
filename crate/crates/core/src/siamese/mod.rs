//! Accurate-fairness constrained training. Every training record is
//! expanded into its similar sub-population; the members pass through one
//! shared-parameter model and the per-record Lagrangian
//!
//! ```text
//! L_AF = sum_j [ L(y, f(member_j)) + lambda_j * (D(y, f(member_j)) - K d(origin, member_j)) ]
//! ```
//!
//! is descended in the parameters and ascended (with projection onto
//! `lambda >= 0`) in the multipliers.

mod distance;
mod lagrange;
mod trainer;

pub use distance::{input_distance, mae, FairnessSpec, OutputDistanceMode};
pub use lagrange::{laf_eval, laf_loss, multiplier_step, slack, LafEval, LagrangeState};
pub use trainer::{
    train_baseline, train_siamese, EpochTrace, Reduction, TrainConfig, TrainOutcome,
};
