#![allow(dead_code)]

pub mod grad;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use afair::dataio::{
    load_dataset, normalize, parse_dataset, split, AugmentationStrategy, Dataset, SchemaConfig,
};
use afair::metrics::{build_report, GroupSpec, MetricsReport, ReportContext};
use afair::models::{Architecture, LossKind, ModelParams, OptimizerConfig};
use afair::siamese::{
    train_baseline, train_siamese, FairnessSpec, Reduction, TrainConfig, TrainOutcome,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Environment variable naming a local copy of UCI `german.data`.
pub const GERMAN_ENV: &str = "AFAIR_GERMAN_CREDIT";

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn german_schema() -> Arc<SchemaConfig> {
    Arc::new(SchemaConfig::from_file(&repo_root().join("data/german.schema.toml")).unwrap())
}

pub fn adult_schema() -> Arc<SchemaConfig> {
    Arc::new(SchemaConfig::from_file(&repo_root().join("data/adult.schema.toml")).unwrap())
}

fn pick<'a>(rng: &mut ChaCha8Rng, codes: &[&'a str], score: f64) -> &'a str {
    // higher score drifts towards later codes
    let u: f64 = rng.gen();
    let t = (score * 0.35 + u).clamp(0.0, 0.999_999);
    codes[(t * codes.len() as f64) as usize]
}

fn logistic(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.gen_range(1e-9..1.0 - 1e-9);
    (u / (1.0 - u)).ln()
}

/// A stand-in for German Credit in the original `german.data` layout: 1000
/// rows, A-coded categoricals, roughly 70% good credit, with a latent
/// creditworthiness driving most attributes and a weak direct sex and age
/// effect on the label.
pub fn german_surrogate_text(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for _ in 0..1000 {
        let z = 0.7 * logistic(&mut rng);
        let male = rng.gen::<f64>() < 0.69;
        let personal = if male {
            [
                "A93", "A93", "A93", "A93", "A93", "A93", "A91", "A94", "A94",
            ][rng.gen_range(0..9)]
        } else if rng.gen::<f64>() < 0.97 {
            "A92"
        } else {
            "A95"
        };
        let age = (19.0 + (-rng.gen::<f64>().ln()) * 13.0 + 2.0 * z)
            .round()
            .clamp(19.0, 75.0) as i64;
        let duration = (21.0 - 6.0 * z + 10.0 * (rng.gen::<f64>() - 0.5))
            .round()
            .clamp(4.0, 72.0) as i64;
        let amount = (duration as f64 * (90.0 + 160.0 * rng.gen::<f64>()))
            .round()
            .clamp(250.0, 18424.0) as i64;
        let purpose = [
            "A40", "A41", "A42", "A43", "A44", "A45", "A46", "A48", "A49", "A410",
        ][rng.gen_range(0..10)];
        let fields = [
            pick(&mut rng, &["A11", "A12", "A13", "A14"], z).to_string(),
            duration.to_string(),
            pick(&mut rng, &["A30", "A31", "A32", "A33", "A34"], z).to_string(),
            purpose.to_string(),
            amount.to_string(),
            pick(&mut rng, &["A61", "A62", "A63", "A64", "A65"], z).to_string(),
            pick(
                &mut rng,
                &["A71", "A72", "A73", "A74", "A75"],
                z + (age as f64 - 35.0) / 20.0,
            )
            .to_string(),
            rng.gen_range(1..=4).to_string(),
            personal.to_string(),
            ["A101", "A101", "A101", "A101", "A102", "A103"][rng.gen_range(0..6)].to_string(),
            rng.gen_range(1..=4).to_string(),
            pick(&mut rng, &["A124", "A123", "A122", "A121"], z).to_string(),
            age.to_string(),
            ["A141", "A142", "A143", "A143", "A143"][rng.gen_range(0..5)].to_string(),
            pick(&mut rng, &["A153", "A151", "A152"], z).to_string(),
            rng.gen_range(1..=4).to_string(),
            ["A171", "A172", "A173", "A173", "A174"][rng.gen_range(0..5)].to_string(),
            rng.gen_range(1..=2).to_string(),
            ["A191", "A192"][rng.gen_range(0..2)].to_string(),
            if rng.gen::<f64>() < 0.96 {
                "A201"
            } else {
                "A202"
            }
            .to_string(),
        ];
        let logit = 1.2 + 3.0 * z + if male { 0.1 } else { -0.1 } + 0.005 * (age as f64 - 35.0);
        let good = rng.gen::<f64>() < 1.0 / (1.0 + (-logit).exp());
        out.push_str(&fields.join(" "));
        out.push_str(if good { " 1\n" } else { " 2\n" });
    }
    out
}

/// The German Credit data and where it came from: the file named by
/// [`GERMAN_ENV`] when set, the seeded surrogate otherwise.
pub fn german() -> (Dataset, &'static str) {
    let schema = german_schema();
    match std::env::var_os(GERMAN_ENV) {
        Some(p) => (load_dataset(Path::new(&p), &schema).unwrap(), "uci"),
        None => (
            parse_dataset(german_surrogate_text(2024).as_bytes(), &schema).unwrap(),
            "surrogate",
        ),
    }
}

/// Split, then scale both parts with the training set's ranges.
pub fn prepare(data: &Dataset, seed: u64) -> (Dataset, Dataset) {
    let (train, test) = split(data, 0.2, seed).unwrap();
    let (train, scaler) = normalize(&train);
    (train, scaler.transform(&test))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
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

pub struct Setup {
    pub arch: Architecture,
    pub config: TrainConfig,
}

impl Setup {
    pub fn fcnn3(epochs: usize) -> Self {
        let mut config = TrainConfig::new(OptimizerConfig::adam(1e-3), LossKind::Mse);
        config.epochs = epochs;
        Self {
            arch: Architecture::fcnn3(),
            config,
        }
    }

    pub fn lr(epochs: usize) -> Self {
        let mut config = TrainConfig::new(OptimizerConfig::sgd(0.02), LossKind::Mse);
        config.epochs = epochs;
        config.reduction = Reduction::Mean;
        Self {
            arch: Architecture::Lr,
            config,
        }
    }
}

pub fn train(train: &Dataset, setup: &Setup, method: Method, seed: u64) -> TrainOutcome {
    let mut c = setup.config.clone();
    c.seed = seed;
    let out_dim = afair::models::output_dim_for(&train.schema);
    let model =
        ModelParams::init(setup.arch.clone(), train.schema.input_dim(), out_dim, seed).unwrap();
    match method {
        Method::Baseline => train_baseline(train, model, &c).unwrap(),
        Method::Sf => {
            c.augmentation = Some(AugmentationStrategy::full());
            train_siamese(train, model, &c).unwrap()
        }
        Method::Sf3 => {
            c.augmentation = Some(AugmentationStrategy::extremes());
            train_siamese(train, model, &c).unwrap()
        }
    }
}

/// Report over the test set with full augmentation as the fairness oracle.
pub fn report(
    test: &Dataset,
    model: &ModelParams,
    group_column: &str,
    method: Method,
    seed: u64,
) -> MetricsReport {
    let ctx = ReportContext {
        dataset: test.schema.name.clone(),
        model: model.arch.name(),
        method: method.name().into(),
        seed,
        fingerprint: String::new(),
        group: GroupSpec::from_schema(&test.schema, group_column).unwrap(),
        fairness: FairnessSpec::default(),
        strategy: AugmentationStrategy::full(),
        consistency_k: 5,
    };
    build_report(test, model, &ctx).unwrap()
}

pub fn mean(v: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = v.into_iter().collect();
    v.iter().sum::<f64>() / v.len() as f64
}
