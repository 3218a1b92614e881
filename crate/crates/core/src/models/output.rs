//! Decoding model outputs into labels and onto a common unit scale.

use super::network::OutputActivation;
use crate::dataio::Label;

/// Decode a label: a single sigmoid output thresholds at 0.5, a margin at 0,
/// and several outputs take the argmax with ties to the lowest index.
pub fn predict_label(output: &[f64], activation: OutputActivation) -> Label {
    if output.len() == 1 {
        let threshold = match activation {
            OutputActivation::Sigmoid => 0.5,
            OutputActivation::Identity => 0.0,
        };
        return usize::from(output[0] >= threshold);
    }
    let mut best = 0;
    for (i, &v) in output.iter().enumerate().skip(1) {
        if v > output[best] {
            best = i;
        }
    }
    best
}

/// Encoding of `y` on the unit scale: the scalar label for single-output
/// models, a one-hot vector otherwise.
pub fn unit_target(y: Label, output_dim: usize) -> Vec<f64> {
    if output_dim == 1 {
        vec![y as f64]
    } else {
        (0..output_dim)
            .map(|c| if c == y { 1.0 } else { 0.0 })
            .collect()
    }
}

/// Map an output onto [0, 1]: sigmoid outputs pass through, a margin is
/// clipped to [-1, 1] and shifted to `(m + 1) / 2`.
pub fn unit_output(output: &[f64], activation: OutputActivation) -> Vec<f64> {
    match activation {
        OutputActivation::Sigmoid => output.to_vec(),
        OutputActivation::Identity => output
            .iter()
            .map(|m| (m.clamp(-1.0, 1.0) + 1.0) / 2.0)
            .collect(),
    }
}

/// Derivative of [`unit_output`] with respect to each raw output.
pub fn unit_output_slope(output: &[f64], activation: OutputActivation) -> Vec<f64> {
    match activation {
        OutputActivation::Sigmoid => vec![1.0; output.len()],
        OutputActivation::Identity => output
            .iter()
            .map(|m| if m.abs() < 1.0 { 0.5 } else { 0.0 })
            .collect(),
    }
}
