use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::distance::FairnessSpec;
use super::lagrange::{laf_eval, multiplier_step, LagrangeState};
use crate::dataio::{augment, AugmentationStrategy, Dataset, SubPopulation};
use crate::error::{Error, Result};
use crate::models::{loss, loss_grad, loss_target, LossKind, ModelParams, OptimizerConfig};

/// How member terms of the Lagrangian are combined for the parameter step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    #[default]
    Sum,
    /// Divide by the sub-population size, so a plain gradient step has the
    /// same scale as one baseline step.
    Mean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub optimizer: OptimizerConfig,
    pub loss: LossKind,
    pub fairness: FairnessSpec,
    /// `None` trains on each record alone (no similar counterparts).
    pub augmentation: Option<AugmentationStrategy>,
    /// Seed of the per-epoch record shuffle.
    pub seed: u64,
    pub lambda_init: f64,
    /// Ascent rate for the multipliers; defaults to the optimizer's rate.
    pub lambda_lr: Option<f64>,
    /// Keep every multiplier at `lambda_init`.
    pub freeze_multipliers: bool,
    /// Stop once no parameter moved more than this across an epoch.
    pub tolerance: f64,
    pub reduction: Reduction,
}

impl TrainConfig {
    pub fn new(optimizer: OptimizerConfig, loss: LossKind) -> Self {
        Self {
            epochs: 100,
            optimizer,
            loss,
            fairness: FairnessSpec::default(),
            augmentation: Some(AugmentationStrategy::full()),
            seed: 0,
            lambda_init: 0.0,
            lambda_lr: None,
            freeze_multipliers: false,
            tolerance: 1e-6,
            reduction: Reduction::Sum,
        }
    }

    pub fn validate(&self, model: &ModelParams) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::config("epochs must be >= 1"));
        }
        self.optimizer.validate()?;
        self.fairness.validate()?;
        self.loss.check_pairing(&model.arch)?;
        if self.lambda_init.is_nan() || self.lambda_init < 0.0 {
            return Err(Error::config("lambda init must be >= 0"));
        }
        if let Some(r) = self.lambda_lr {
            if r.is_nan() || r < 0.0 {
                return Err(Error::config("lambda rate must be >= 0"));
            }
        }
        if let Some(a) = &self.augmentation {
            a.validate()?;
        }
        Ok(())
    }

    fn lambda_rate(&self) -> f64 {
        self.lambda_lr.unwrap_or(self.optimizer.lr)
    }
}

/// One line of the training trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochTrace {
    pub epoch: usize,
    /// Mean per-record objective (the Lagrangian for Siamese training).
    pub mean_loss: f64,
    /// Fraction of (record, member) constraints with positive slack.
    pub violation_rate: f64,
    pub lambda_mean: f64,
    pub lambda_max: f64,
    pub lambda_min: f64,
    /// Multiplier updates that produced a negative value (always 0).
    pub negative_lambdas: usize,
    /// Max-norm of the parameter change over the epoch.
    pub update_norm: f64,
}

impl EpochTrace {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("trace serializes")
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: ModelParams,
    pub trace: Vec<EpochTrace>,
    pub multipliers: LagrangeState,
    pub converged: bool,
}

fn check_input(train: &Dataset, model: &ModelParams) -> Result<()> {
    if model.input_dim() != train.schema.input_dim() {
        return Err(Error::Dimension {
            expected: train.schema.input_dim(),
            got: model.input_dim(),
        });
    }
    Ok(())
}

fn context(e: Error, epoch: usize, record: usize) -> Error {
    match e {
        Error::NonFinite(m) => Error::NonFinite(format!("epoch {epoch}, record {record}: {m}")),
        other => other,
    }
}

/// Siamese fairness training: for every record, forward all members of its
/// similar sub-population through the shared parameters, ascend each
/// member's multiplier by its slack (projected onto `lambda >= 0`) and
/// descend the parameters along the gradient of the Lagrangian. Both
/// updates are taken from the same point: the parameter gradient uses the
/// multipliers as they were before this record's ascent step.
pub fn train_siamese(
    train: &Dataset,
    model: ModelParams,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate(&model)?;
    check_input(train, &model)?;

    let subpops: Vec<SubPopulation> = match &config.augmentation {
        Some(strategy) => augment(train, strategy)?,
        None => train.records.iter().map(SubPopulation::singleton).collect(),
    };
    let mut lambdas =
        LagrangeState::new(subpops.iter().map(SubPopulation::len), config.lambda_init)?;
    let rate = config.lambda_rate();

    let mut model = model;
    let mut opt = config.optimizer.build(model.num_params())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut trace = Vec::new();
    let mut converged = false;

    for epoch in 1..=config.epochs {
        let start = model.clone();
        let mut order: Vec<usize> = (0..subpops.len()).collect();
        order.shuffle(&mut rng);

        let mut total = 0.0;
        let mut violations = 0usize;
        let mut constraints = 0usize;
        let mut negative = 0usize;
        for &i in &order {
            let sp = &subpops[i];
            let y = sp.origin().y;
            let eval = laf_eval(
                sp,
                y,
                &model,
                &lambdas.multipliers[i],
                config.loss,
                &config.fairness,
                true,
            )
            .map_err(|e| context(e, epoch, i))?;
            if !eval.value.is_finite() {
                return Err(Error::NonFinite(format!(
                    "epoch {epoch}, record {i}: Lagrangian is {}",
                    eval.value
                )));
            }
            total += eval.value;
            constraints += eval.slacks.len();
            violations += eval.slacks.iter().filter(|&&s| s > 0.0).count();

            if !config.freeze_multipliers {
                for (l, &s) in lambdas.multipliers[i].iter_mut().zip(&eval.slacks) {
                    *l = multiplier_step(*l, s, rate);
                    if *l < 0.0 {
                        negative += 1;
                    }
                }
            }
            let mut grad = eval.grad.expect("gradient requested");
            if config.reduction == Reduction::Mean && sp.len() > 1 {
                let scale = 1.0 / sp.len() as f64;
                grad.iter_mut().for_each(|g| *g *= scale);
            }
            opt.step(&mut model.params, &grad)
                .map_err(|e| context(e, epoch, i))?;
        }

        let update_norm = model.max_abs_diff(&start);
        trace.push(EpochTrace {
            epoch,
            mean_loss: total / subpops.len() as f64,
            violation_rate: violations as f64 / constraints as f64,
            lambda_mean: lambdas.mean(),
            lambda_max: lambdas.max(),
            lambda_min: lambdas.min(),
            negative_lambdas: negative,
            update_norm,
        });
        if update_norm < config.tolerance {
            converged = true;
            break;
        }
    }

    Ok(TrainOutcome {
        model,
        trace,
        multipliers: lambdas,
        converged,
    })
}

/// Plain loss minimization over the records themselves: the same shuffle,
/// optimizer and stopping rule as [`train_siamese`], with no counterparts
/// and no multipliers.
pub fn train_baseline(
    train: &Dataset,
    model: ModelParams,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate(&model)?;
    check_input(train, &model)?;

    let mut model = model;
    let mut opt = config.optimizer.build(model.num_params())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut trace = Vec::new();
    let mut converged = false;
    let n = train.len();

    for epoch in 1..=config.epochs {
        let start = model.clone();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);

        let mut total = 0.0;
        for &i in &order {
            let r = &train.records[i];
            let target = loss_target(config.loss, r.y, model.output_dim());
            let cache = model.forward_cached(&r.input())?;
            let l = loss(config.loss, &target, cache.output());
            if !l.is_finite() {
                return Err(Error::NonFinite(format!(
                    "epoch {epoch}, record {i}: loss is {l}"
                )));
            }
            total += l;
            let seed = loss_grad(config.loss, &target, cache.output());
            let mut grad = vec![0.0; model.num_params()];
            model.backward_cached(&cache, &seed, &mut grad)?;
            opt.step(&mut model.params, &grad)
                .map_err(|e| context(e, epoch, i))?;
        }

        let update_norm = model.max_abs_diff(&start);
        trace.push(EpochTrace {
            epoch,
            mean_loss: total / n as f64,
            violation_rate: 0.0,
            lambda_mean: 0.0,
            lambda_max: 0.0,
            lambda_min: 0.0,
            negative_lambdas: 0,
            update_norm,
        });
        if update_norm < config.tolerance {
            converged = true;
            break;
        }
    }

    Ok(TrainOutcome {
        model,
        trace,
        multipliers: LagrangeState {
            multipliers: Vec::new(),
        },
        converged,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::Rng;

    use super::*;
    use crate::dataio::{ColumnSpec, Record, SchemaConfig};
    use crate::metrics::{accuracy, fta_rate};
    use crate::models::Architecture;

    fn schema() -> Arc<SchemaConfig> {
        Arc::new(
            SchemaConfig::new(
                "t",
                vec![
                    ColumnSpec::numeric("x0"),
                    ColumnSpec::numeric("x1"),
                    ColumnSpec::sensitive("g", &["a", "b", "c"], "a"),
                    ColumnSpec::label("y", &["0", "1"], "1"),
                ],
            )
            .unwrap(),
        )
    }

    /// Label is `x0 + x1 > 1` with a margin; the sensitive column is noise.
    fn separable(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut records = Vec::new();
        while records.len() < n {
            let x = vec![rng.gen::<f64>(), rng.gen::<f64>()];
            let s = x[0] + x[1] - 1.0;
            if s.abs() < 0.1 {
                continue;
            }
            let a = vec![rng.gen_range(0..3) as f64 / 2.0];
            records.push(Record::new(x, a, usize::from(s > 0.0)));
        }
        Dataset::new(schema(), records).unwrap()
    }

    fn lr_config(epochs: usize) -> TrainConfig {
        let mut c = TrainConfig::new(OptimizerConfig::sgd(0.5), LossKind::Mse);
        c.epochs = epochs;
        c
    }

    fn lr_model(seed: u64) -> ModelParams {
        ModelParams::init(Architecture::Lr, 3, 1, seed).unwrap()
    }

    #[test]
    fn disabled_siamese_matches_baseline_bitwise() {
        let d = separable(60, 1);
        let mut c = TrainConfig::new(OptimizerConfig::adam(0.01), LossKind::Mse);
        c.epochs = 5;
        c.seed = 9;
        c.augmentation = None;
        c.freeze_multipliers = true;
        let m = ModelParams::init(Architecture::fcnn3(), 3, 1, 4).unwrap();
        let a = train_siamese(&d, m.clone(), &c).unwrap();
        let b = train_baseline(&d, m, &c).unwrap();
        let bits = |p: &ModelParams| p.params.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.model), bits(&b.model));
    }

    #[test]
    fn same_seed_same_parameters() {
        let d = separable(40, 2);
        let c = lr_config(3);
        let a = train_siamese(&d, lr_model(0), &c).unwrap();
        let b = train_siamese(&d, lr_model(0), &c).unwrap();
        assert_eq!(a.model, b.model);
        let a = train_baseline(&d, lr_model(0), &c).unwrap();
        let b = train_baseline(&d, lr_model(0), &c).unwrap();
        assert_eq!(a.model, b.model);
    }

    #[test]
    fn multipliers_stay_nonnegative() {
        let d = separable(40, 3);
        let mut c = lr_config(5);
        c.fairness = FairnessSpec::new(0.0);
        let out = train_siamese(&d, lr_model(1), &c).unwrap();
        assert!(out
            .trace
            .iter()
            .all(|t| t.negative_lambdas == 0 && t.lambda_min >= 0.0));
        assert!(out.multipliers.iter().all(|l| l >= 0.0));
        assert!(out.trace.last().unwrap().lambda_max > 0.0);
    }

    #[test]
    fn constant_label_is_learned() {
        let mut d = separable(30, 4);
        for r in &mut d.records {
            r.y = 1;
        }
        let out = train_baseline(&d, lr_model(2), &lr_config(20)).unwrap();
        assert_eq!(accuracy(&d, &out.model).unwrap(), 1.0);
    }

    #[test]
    fn lr_fits_planted_separator() {
        let d = separable(200, 5);
        let out = train_baseline(&d, lr_model(3), &lr_config(200)).unwrap();
        assert!(accuracy(&d, &out.model).unwrap() >= 0.99);
    }

    #[test]
    fn siamese_on_sensitive_independent_labels_is_fair_and_accurate() {
        let d = separable(200, 6);
        let out = train_siamese(&d, lr_model(4), &lr_config(100)).unwrap();
        assert_eq!(
            fta_rate(&d, &out.model, &AugmentationStrategy::full()).unwrap(),
            1.0
        );
        assert!(accuracy(&d, &out.model).unwrap() >= 0.95);
    }

    #[test]
    fn loose_constraints_stay_inactive() {
        let d = separable(40, 7);
        let mut c = lr_config(5);
        c.fairness = FairnessSpec::new(1e6);
        let out = train_siamese(&d, lr_model(5), &c).unwrap();
        // only the origin (d = 0) can ever be violated
        for l in &out.multipliers.multipliers {
            assert!(l[1..].iter().all(|&v| v == 0.0));
        }
        assert!(out
            .trace
            .iter()
            .all(|t| t.violation_rate <= 1.0 / 3.0 + 1e-12));
    }

    #[test]
    fn non_finite_loss_aborts() {
        let d = separable(20, 8);
        let mut m = lr_model(0);
        m.params[1] = f64::NAN;
        match train_siamese(&d, m, &lr_config(2)) {
            Err(Error::NonFinite(msg)) => assert!(msg.contains("epoch"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_configs_rejected() {
        let d = separable(10, 9);
        let mut c = lr_config(0);
        assert!(matches!(
            train_baseline(&d, lr_model(0), &c),
            Err(Error::Config(_))
        ));
        c.epochs = 1;
        c.lambda_init = -1.0;
        assert!(matches!(
            train_siamese(&d, lr_model(0), &c),
            Err(Error::Config(_))
        ));
        let wide = ModelParams::init(Architecture::Lr, 7, 1, 0).unwrap();
        assert!(matches!(
            train_baseline(&d, wide, &lr_config(1)),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn trace_lines_are_json() {
        let d = separable(10, 10);
        let out = train_siamese(&d, lr_model(0), &lr_config(2)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.trace[0].to_json_line()).unwrap();
        assert_eq!(v["epoch"], 1);
    }
}
