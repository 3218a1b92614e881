use serde::{Deserialize, Serialize};

use super::network::Architecture;
use crate::dataio::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Mse,
    Hinge,
}

impl LossKind {
    /// Hinge pairs with the SVM, mean squared error with everything else.
    pub fn for_architecture(arch: &Architecture) -> Self {
        match arch {
            Architecture::Svm => LossKind::Hinge,
            _ => LossKind::Mse,
        }
    }

    pub fn check_pairing(self, arch: &Architecture) -> Result<()> {
        match (self, arch) {
            (LossKind::Hinge, Architecture::Svm)
            | (LossKind::Mse, Architecture::Lr | Architecture::Fcnn { .. }) => Ok(()),
            _ => Err(Error::config(format!(
                "loss {self:?} cannot train architecture {}",
                arch.name()
            ))),
        }
    }
}

/// Encoding of `y` in the space the loss compares against: one-hot (or the
/// scalar label) for MSE, `{-1, +1}` for hinge.
pub fn loss_target(kind: LossKind, y: Label, output_dim: usize) -> Vec<f64> {
    match kind {
        LossKind::Mse => super::output::unit_target(y, output_dim),
        LossKind::Hinge => vec![if y == 1 { 1.0 } else { -1.0 }],
    }
}

pub fn loss(kind: LossKind, target: &[f64], output: &[f64]) -> f64 {
    match kind {
        LossKind::Mse => {
            target
                .iter()
                .zip(output)
                .map(|(t, o)| (t - o) * (t - o))
                .sum::<f64>()
                / output.len() as f64
        }
        LossKind::Hinge => (1.0 - target[0] * output[0]).max(0.0),
    }
}

/// Gradient of [`loss`] with respect to the output. The hinge subgradient at
/// the kink is zero.
pub fn loss_grad(kind: LossKind, target: &[f64], output: &[f64]) -> Vec<f64> {
    match kind {
        LossKind::Mse => {
            let n = output.len() as f64;
            target
                .iter()
                .zip(output)
                .map(|(t, o)| 2.0 * (o - t) / n)
                .collect()
        }
        LossKind::Hinge => {
            if target[0] * output[0] < 1.0 {
                vec![-target[0]]
            } else {
                vec![0.0]
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_values() {
        assert_eq!(loss(LossKind::Mse, &[1.0], &[1.0]), 0.0);
        let h1 = loss_target(LossKind::Hinge, 1, 1);
        assert_eq!(loss(LossKind::Hinge, &h1, &[2.0]), 0.0);
        let h0 = loss_target(LossKind::Hinge, 0, 1);
        assert_eq!(loss(LossKind::Hinge, &h0, &[0.5]), 1.5);
        let t = loss_target(LossKind::Mse, 0, 2);
        assert!((loss(LossKind::Mse, &t, &[0.8, 0.3]) - 0.065).abs() < 1e-15);
    }

    #[test]
    fn hinge_kink_subgradient_is_zero() {
        assert_eq!(loss_grad(LossKind::Hinge, &[1.0], &[1.0]), vec![0.0]);
        assert_eq!(loss_grad(LossKind::Hinge, &[-1.0], &[0.2]), vec![1.0]);
    }

    #[test]
    fn pairing_rules() {
        assert!(LossKind::Hinge.check_pairing(&Architecture::Svm).is_ok());
        assert!(LossKind::Hinge.check_pairing(&Architecture::Lr).is_err());
        assert!(LossKind::Mse.check_pairing(&Architecture::Svm).is_err());
        assert!(LossKind::Mse.check_pairing(&Architecture::fcnn3()).is_ok());
    }

    proptest! {
        #[test]
        fn losses_nonnegative(y in 0usize..3, o in proptest::collection::vec(-5.0f64..5.0, 3), m in -5.0f64..5.0, b in 0usize..2) {
            let t = loss_target(LossKind::Mse, y, 3);
            prop_assert!(loss(LossKind::Mse, &t, &o) >= 0.0);
            prop_assert_eq!(loss(LossKind::Mse, &t, &t), 0.0);
            let h = loss_target(LossKind::Hinge, b, 1);
            prop_assert!(loss(LossKind::Hinge, &h, &[m]) >= 0.0);
        }
    }
}
