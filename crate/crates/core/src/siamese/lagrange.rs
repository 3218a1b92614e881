use serde::{Deserialize, Serialize};

use super::distance::{input_distance, FairnessSpec};
use crate::dataio::{Label, Record, SubPopulation};
use crate::error::{Error, Result};
use crate::models::{loss, loss_grad, loss_target, Classifier, LossKind, ModelParams};

/// Constraint slack `D(y, f(member)) - K * d(origin, member)`; positive
/// means the member violates accurate fairness.
pub fn slack<C: Classifier>(
    member: &Record,
    origin: &Record,
    y: Label,
    model: &C,
    spec: &FairnessSpec,
) -> Result<f64> {
    let out = model.output(&member.input())?;
    Ok(spec.output_distance(y, &out, model.activation()) - spec.k * input_distance(origin, member))
}

/// Projected ascent on one multiplier. The partial derivative of the
/// Lagrangian with respect to `lambda` is exactly the slack.
pub fn multiplier_step(lambda: f64, slack: f64, rate: f64) -> f64 {
    (lambda + rate * slack).max(0.0)
}

/// Value of the accurate-fairness Lagrangian over one sub-population.
pub fn laf_loss(
    subpop: &SubPopulation,
    y: Label,
    model: &ModelParams,
    lambdas: &[f64],
    loss_kind: LossKind,
    spec: &FairnessSpec,
) -> Result<f64> {
    Ok(laf_eval(subpop, y, model, lambdas, loss_kind, spec, false)?.value)
}

/// Lagrangian value, per-member slacks, and (optionally) its parameter gradient.
#[derive(Debug, Clone)]
pub struct LafEval {
    pub value: f64,
    pub slacks: Vec<f64>,
    pub grad: Option<Vec<f64>>,
}

pub fn laf_eval(
    subpop: &SubPopulation,
    y: Label,
    model: &ModelParams,
    lambdas: &[f64],
    loss_kind: LossKind,
    spec: &FairnessSpec,
    with_grad: bool,
) -> Result<LafEval> {
    if lambdas.len() != subpop.len() {
        return Err(Error::Dimension {
            expected: subpop.len(),
            got: lambdas.len(),
        });
    }
    let act = model.output_activation();
    let target = loss_target(loss_kind, y, model.output_dim());
    let origin = subpop.origin();
    let mut grad = with_grad.then(|| vec![0.0; model.num_params()]);
    let mut value = 0.0;
    let mut slacks = Vec::with_capacity(subpop.len());
    for (member, &lambda) in subpop.members.iter().zip(lambdas) {
        let cache = model.forward_cached(&member.input())?;
        let out = cache.output();
        let s = spec.output_distance(y, out, act) - spec.k * input_distance(origin, member);
        value += loss(loss_kind, &target, out) + lambda * s;
        slacks.push(s);
        if let Some(g) = grad.as_mut() {
            let mut seed = loss_grad(loss_kind, &target, out);
            if lambda != 0.0 {
                for (sd, dd) in seed.iter_mut().zip(spec.output_distance_grad(y, out, act)) {
                    *sd += lambda * dd;
                }
            }
            model.backward_cached(&cache, &seed, g)?;
        }
    }
    Ok(LafEval {
        value,
        slacks,
        grad,
    })
}

/// Nonnegative multipliers, one vector per training record with one entry
/// per sub-population member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagrangeState {
    pub multipliers: Vec<Vec<f64>>,
}

impl LagrangeState {
    pub fn new(sizes: impl IntoIterator<Item = usize>, init: f64) -> Result<Self> {
        if init.is_nan() || init < 0.0 {
            return Err(Error::config(format!(
                "multiplier init must be >= 0, got {init}"
            )));
        }
        Ok(Self {
            multipliers: sizes.into_iter().map(|n| vec![init; n]).collect(),
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.multipliers.iter().flatten().copied()
    }

    pub fn min(&self) -> f64 {
        self.iter().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.iter().fold(0.0, f64::max)
    }

    pub fn mean(&self) -> f64 {
        let (s, n) = self.iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
        if n == 0 {
            0.0
        } else {
            s / n as f64
        }
    }
}
