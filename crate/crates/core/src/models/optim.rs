use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub lr: f64,
    #[serde(default = "default_beta1")]
    pub beta1: f64,
    #[serde(default = "default_beta2")]
    pub beta2: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-8
}

impl OptimizerConfig {
    pub fn sgd(lr: f64) -> Self {
        Self {
            kind: OptimizerKind::Sgd,
            lr,
            beta1: default_beta1(),
            beta2: default_beta2(),
            eps: default_eps(),
        }
    }

    pub fn adam(lr: f64) -> Self {
        Self {
            kind: OptimizerKind::Adam,
            ..Self::sgd(lr)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::config(format!(
                "learning rate must be > 0, got {}",
                self.lr
            )));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::config(format!("{name} must lie in [0, 1), got {b}")));
            }
        }
        if self.eps.is_nan() || self.eps <= 0.0 {
            return Err(Error::config("adam epsilon must be > 0"));
        }
        Ok(())
    }

    pub fn build(&self, num_params: usize) -> Result<OptimizerState> {
        self.validate()?;
        Ok(OptimizerState {
            config: *self,
            step: 0,
            m: if self.kind == OptimizerKind::Adam {
                vec![0.0; num_params]
            } else {
                Vec::new()
            },
            v: if self.kind == OptimizerKind::Adam {
                vec![0.0; num_params]
            } else {
                Vec::new()
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub config: OptimizerConfig,
    pub step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl OptimizerState {
    /// Apply one update in place. A non-finite gradient aborts before any
    /// parameter is touched.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if grads.len() != params.len() {
            return Err(Error::Dimension {
                expected: params.len(),
                got: grads.len(),
            });
        }
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!(
                "gradient of parameter {i} is {}",
                grads[i]
            )));
        }
        self.step += 1;
        let c = self.config;
        match c.kind {
            OptimizerKind::Sgd => {
                for (p, g) in params.iter_mut().zip(grads) {
                    *p -= c.lr * g;
                }
            }
            OptimizerKind::Adam => {
                if self.m.len() != params.len() {
                    return Err(Error::Dimension {
                        expected: self.m.len(),
                        got: params.len(),
                    });
                }
                let t = self.step as i32;
                let bc1 = 1.0 - c.beta1.powi(t);
                let bc2 = 1.0 - c.beta2.powi(t);
                for i in 0..params.len() {
                    let g = grads[i];
                    self.m[i] = c.beta1 * self.m[i] + (1.0 - c.beta1) * g;
                    self.v[i] = c.beta2 * self.v[i] + (1.0 - c.beta2) * g * g;
                    let m_hat = self.m[i] / bc1;
                    let v_hat = self.v[i] / bc2;
                    params[i] -= c.lr * m_hat / (v_hat.sqrt() + c.eps);
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_fixed_point() {
        for cfg in [OptimizerConfig::sgd(0.1), OptimizerConfig::adam(0.01)] {
            let mut st = cfg.build(3).unwrap();
            let mut p = vec![1.0, -2.0, 0.5];
            for _ in 0..5 {
                st.step(&mut p, &[0.0; 3]).unwrap();
            }
            assert_eq!(p, vec![1.0, -2.0, 0.5]);
            assert_eq!(st.step, 5);
        }
    }

    #[test]
    fn sgd_arithmetic() {
        let mut st = OptimizerConfig::sgd(0.1).build(1).unwrap();
        let mut p = vec![1.0];
        st.step(&mut p, &[0.5]).unwrap();
        assert!((p[0] - 0.95).abs() < 1e-15);
    }

    #[test]
    fn adam_first_step_is_about_lr() {
        // m_hat = g, v_hat = g^2 after bias correction: delta = -lr * g / (|g| + eps)
        let mut st = OptimizerConfig::adam(0.001).build(1).unwrap();
        let mut p = vec![0.0];
        st.step(&mut p, &[3.0]).unwrap();
        let expected = -0.001 * 3.0 / (3.0 + 1e-8);
        assert!((p[0] - expected).abs() < 1e-15);
        assert!((p[0] + 0.001).abs() < 1e-10);
    }

    #[test]
    fn non_finite_gradient_names_parameter() {
        let mut st = OptimizerConfig::adam(0.01).build(3).unwrap();
        let mut p = vec![0.0; 3];
        match st.step(&mut p, &[0.0, f64::NAN, 1.0]) {
            Err(Error::NonFinite(msg)) => assert!(msg.contains("parameter 1")),
            other => panic!("{other:?}"),
        }
        assert_eq!(p, vec![0.0; 3]);
        assert_eq!(st.step, 0);
    }

    #[test]
    fn rejects_bad_hyperparameters() {
        assert!(OptimizerConfig::sgd(0.0).validate().is_err());
        let mut c = OptimizerConfig::adam(0.1);
        c.beta2 = 1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn sgd_decreases_convex_quadratic_below_curvature_bound() {
        // f(p) = 0.5 * p^T diag(lambda) p, lambda_max = 4: any lr < 0.5 descends
        let lambda = [4.0, 1.0, 0.25];
        let f = |p: &[f64]| 0.5 * p.iter().zip(&lambda).map(|(x, l)| l * x * x).sum::<f64>();
        for lr in [0.05, 0.2, 0.45] {
            let mut st = OptimizerConfig::sgd(lr).build(3).unwrap();
            let mut p = vec![1.0, -1.0, 2.0];
            let before = f(&p);
            let g: Vec<f64> = p.iter().zip(&lambda).map(|(x, l)| l * x).collect();
            st.step(&mut p, &g).unwrap();
            assert!(f(&p) < before, "lr {lr}");
        }
    }
}
