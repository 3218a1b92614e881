use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataio::{read_dataset, AugmentationStrategy, Dataset, SchemaConfig};
use crate::error::{Error, Result};
use crate::metrics::GroupSpec;
use crate::models::{Architecture, LossKind, OptimizerConfig, OptimizerKind};
use crate::siamese::{FairnessSpec, Reduction, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Baseline,
    Sf,
    Sf3,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::Sf => "sf",
            Method::Sf3 => "sf3",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AugmentChoice {
    Full,
    Extremes,
    /// Each record trains alone.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSection {
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    /// Defaults to sgd for `lr`, adam otherwise.
    #[serde(default)]
    pub optimizer: Option<OptimizerKind>,
    /// Defaults to 0.02 for sgd, 0.001 for adam.
    #[serde(default)]
    pub lr: Option<f64>,
    /// Defaults to hinge for `svm`, mse otherwise.
    #[serde(default)]
    pub loss: Option<LossKind>,
    #[serde(default = "default_k")]
    pub k_lipschitz: f64,
    /// Defaults to the method's own augmentation.
    #[serde(default)]
    pub augment: Option<AugmentChoice>,
    #[serde(default)]
    pub cap: Option<usize>,
    #[serde(default)]
    pub cap_seed: u64,
    #[serde(default)]
    pub lambda_init: f64,
    #[serde(default)]
    pub lambda_lr: Option<f64>,
    #[serde(default)]
    pub freeze_multipliers: bool,
    #[serde(default)]
    pub reduction: Reduction,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationSection {
    /// Sensitive column for group metrics; defaults to the first one.
    #[serde(default)]
    pub group: Option<String>,
    #[serde(default = "default_consistency_k")]
    pub consistency_k: usize,
    #[serde(default = "default_eval_augment")]
    pub augment: AugmentChoice,
}

fn default_epochs() -> usize {
    100
}
fn default_k() -> f64 {
    1.0
}
fn default_tolerance() -> f64 {
    1e-6
}
fn default_consistency_k() -> usize {
    5
}
fn default_eval_augment() -> AugmentChoice {
    AugmentChoice::Full
}
fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}
fn default_architecture() -> String {
    "fcnn3".into()
}

impl Default for TrainingSection {
    fn default() -> Self {
        toml::from_str("").expect("defaults deserialize")
    }
}

impl Default for EvaluationSection {
    fn default() -> Self {
        toml::from_str("").expect("defaults deserialize")
    }
}

/// A multi-seed experiment as written in its TOML file. Relative paths are
/// resolved against the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: PathBuf,
    pub train: PathBuf,
    pub test: PathBuf,
    #[serde(default = "default_architecture")]
    pub architecture: String,
    #[serde(default)]
    pub method: Method,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
    #[serde(default)]
    pub training: TrainingSection,
    #[serde(default)]
    pub evaluation: EvaluationSection,
}

/// Command line values that replace fields of the config file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Run a single seed instead of the configured list.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long = "k-lipschitz")]
    pub k_lipschitz: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    #[arg(long, value_enum)]
    pub augment: Option<AugmentChoice>,
    #[arg(long)]
    pub cap: Option<usize>,
    /// Replace the configured output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(format!("experiment config: {e}")))
    }

    /// Read the file, resolve its relative paths and apply `overrides`.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut c = Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut c.schema, &mut c.train, &mut c.test, &mut c.out_dir] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        c.apply(overrides);
        c.validate()?;
        Ok(c)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seeds = vec![s];
        }
        if let Some(e) = o.epochs {
            self.training.epochs = e;
        }
        if o.lr.is_some() {
            self.training.lr = o.lr;
        }
        if let Some(k) = o.k_lipschitz {
            self.training.k_lipschitz = k;
        }
        if let Some(m) = o.method {
            self.method = m;
        }
        if o.augment.is_some() {
            self.training.augment = o.augment;
        }
        if o.cap.is_some() {
            self.training.cap = o.cap;
        }
        if let Some(out) = &o.out {
            self.out_dir = out.clone();
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::config("seeds must not be empty"));
        }
        let mut s = self.seeds.clone();
        s.sort_unstable();
        s.dedup();
        if s.len() != self.seeds.len() {
            return Err(Error::config("seeds must be distinct"));
        }
        for (what, p) in [
            ("schema", &self.schema),
            ("train", &self.train),
            ("test", &self.test),
        ] {
            if !p.is_file() {
                return Err(Error::config(format!(
                    "{what} file `{}` does not exist",
                    p.display()
                )));
            }
        }
        self.architecture()?;
        self.strategy()?;
        Ok(())
    }

    pub fn architecture(&self) -> Result<Architecture> {
        Architecture::parse(&self.architecture)
    }

    pub fn schema(&self) -> Result<Arc<SchemaConfig>> {
        Ok(Arc::new(SchemaConfig::from_file(&self.schema)?))
    }

    pub fn load_split(&self) -> Result<(Dataset, Dataset)> {
        let schema = self.schema()?;
        Ok((
            read_dataset(&self.train, &schema)?,
            read_dataset(&self.test, &schema)?,
        ))
    }

    /// Training augmentation, `None` when records train alone.
    pub fn strategy(&self) -> Result<Option<AugmentationStrategy>> {
        let choice = match (self.method, self.training.augment) {
            (Method::Baseline, _) => return Ok(None),
            (_, Some(a)) => a,
            (Method::Sf, None) => AugmentChoice::Full,
            (Method::Sf3, None) => AugmentChoice::Extremes,
        };
        let mut s = match choice {
            AugmentChoice::Full => AugmentationStrategy::full(),
            AugmentChoice::Extremes => AugmentationStrategy::extremes(),
            AugmentChoice::None => return Ok(None),
        };
        if let Some(cap) = self.training.cap {
            s = s.with_cap(cap, self.training.cap_seed);
        }
        s.validate()?;
        Ok(Some(s))
    }

    pub fn eval_strategy(&self) -> Result<AugmentationStrategy> {
        match self.evaluation.augment {
            AugmentChoice::Full => Ok(AugmentationStrategy::full()),
            AugmentChoice::Extremes => Ok(AugmentationStrategy::extremes()),
            AugmentChoice::None => Err(Error::config("evaluation needs an augmentation")),
        }
    }

    pub fn fairness(&self) -> FairnessSpec {
        FairnessSpec::new(self.training.k_lipschitz)
    }

    pub fn group(&self, schema: &SchemaConfig) -> Result<GroupSpec> {
        let column = match &self.evaluation.group {
            Some(g) => g.clone(),
            None => schema.sensitive()[0].name.clone(),
        };
        GroupSpec::from_schema(schema, &column)
    }

    /// Training configuration for one seed.
    pub fn train_config(&self, seed: u64) -> Result<TrainConfig> {
        let arch = self.architecture()?;
        let t = &self.training;
        let kind = t.optimizer.unwrap_or(match arch {
            Architecture::Lr => OptimizerKind::Sgd,
            _ => OptimizerKind::Adam,
        });
        let optimizer = match kind {
            OptimizerKind::Sgd => OptimizerConfig::sgd(t.lr.unwrap_or(0.02)),
            OptimizerKind::Adam => OptimizerConfig::adam(t.lr.unwrap_or(1e-3)),
        };
        let mut c = TrainConfig::new(
            optimizer,
            t.loss.unwrap_or(LossKind::for_architecture(&arch)),
        );
        c.epochs = t.epochs;
        c.fairness = self.fairness();
        c.augmentation = self.strategy()?;
        c.seed = seed;
        c.lambda_init = t.lambda_init;
        c.lambda_lr = t.lambda_lr;
        c.freeze_multipliers = t.freeze_multipliers;
        c.tolerance = t.tolerance;
        c.reduction = t.reduction;
        Ok(c)
    }

    /// SHA-256 of the resolved configuration.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    /// `{method}_seed{seed}`, the stem shared by a seed's output files.
    pub fn run_name(&self, seed: u64) -> String {
        format!("{}_seed{seed}", self.method.name())
    }

    pub fn checkpoint_path(&self, seed: u64) -> PathBuf {
        self.out_dir
            .join("checkpoints")
            .join(format!("{}.ckpt", self.run_name(seed)))
    }

    pub fn trace_path(&self, seed: u64) -> PathBuf {
        self.out_dir
            .join("traces")
            .join(format!("{}.jsonl", self.run_name(seed)))
    }

    pub fn report_path(&self, seed: u64) -> PathBuf {
        self.out_dir
            .join("reports")
            .join(format!("{}.txt", self.run_name(seed)))
    }
}
