use serde::{Deserialize, Serialize};

use crate::dataio::{Label, Record};
use crate::error::{Error, Result};
use crate::models::{predict_label, unit_output, unit_output_slope, unit_target, OutputActivation};

/// What the output distance compares the ground truth against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputDistanceMode {
    /// The model output mapped onto [0, 1] (differentiable; used in training).
    #[default]
    Score,
    /// The one-hot encoding of the decoded label.
    Label,
}

/// Lipschitz factor `K` and the two distances of the accurate-fairness
/// constraint `D(y, f(x, a')) <= K * d((x, a), (x, a'))`. Both distances are
/// mean absolute errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FairnessSpec {
    pub k: f64,
    #[serde(default)]
    pub output_mode: OutputDistanceMode,
}

impl Default for FairnessSpec {
    fn default() -> Self {
        Self {
            k: 1.0,
            output_mode: OutputDistanceMode::Score,
        }
    }
}

impl FairnessSpec {
    pub fn new(k: f64) -> Self {
        Self {
            k,
            ..Self::default()
        }
    }

    pub fn label_exact(k: f64) -> Self {
        Self {
            k,
            output_mode: OutputDistanceMode::Label,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k.is_nan() || self.k < 0.0 {
            return Err(Error::config(format!(
                "Lipschitz factor K must be >= 0, got {}",
                self.k
            )));
        }
        Ok(())
    }

    /// Output distance `D(y, f)` between a label and a raw model output.
    pub fn output_distance(&self, y: Label, output: &[f64], activation: OutputActivation) -> f64 {
        let target = unit_target(y, output.len());
        let u = match self.output_mode {
            OutputDistanceMode::Score => unit_output(output, activation),
            OutputDistanceMode::Label => {
                unit_target(predict_label(output, activation), output.len())
            }
        };
        mae(&target, &u)
    }

    /// Gradient of the score-mode output distance with respect to the raw
    /// output; the sign at zero difference is taken as zero.
    pub fn output_distance_grad(
        &self,
        y: Label,
        output: &[f64],
        activation: OutputActivation,
    ) -> Vec<f64> {
        let target = unit_target(y, output.len());
        let u = unit_output(output, activation);
        let slope = unit_output_slope(output, activation);
        let n = output.len() as f64;
        u.iter()
            .zip(&target)
            .zip(&slope)
            .map(|((u, t), s)| {
                let d = u - t;
                let sign = if d > 0.0 {
                    1.0
                } else if d < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                sign * s / n
            })
            .collect()
    }
}

pub fn mae(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

/// Input distance `d` between two individuals over the full `(x, a)` vector.
pub fn input_distance(p: &Record, q: &Record) -> f64 {
    let n = p.x.len() + p.a.len();
    let s: f64 =
        p.x.iter()
            .zip(&q.x)
            .chain(p.a.iter().zip(&q.a))
            .map(|(u, v)| (u - v).abs())
            .sum();
    s / n as f64
}
