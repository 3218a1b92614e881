//! The `afair` command line: prepare data, train baseline and Siamese
//! models over several seeds, evaluate them and emit trade-off points.

mod aggregate;
mod config;
mod tradeoff;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde_json::json;
use sha2::{Digest, Sha256};

pub use aggregate::{aggregate, mean_std, Aggregate, AggregateRow, Basis};
pub use config::{
    AugmentChoice, EvaluationSection, ExperimentConfig, Method, Overrides, TrainingSection,
};
pub use tradeoff::{tradeoff, Tradeoff, TradeoffPoint};

use crate::dataio::{
    augment, load_dataset, normalize, split, synth_ctrip_with_noise, write_dataset, SchemaConfig,
    SubPopulation, DEFAULT_HABIT_NOISE,
};
use crate::error::{Error, Result};
use crate::metrics::{build_report, MetricsReport, ReportContext};
use crate::models::{load_checkpoint, output_dim_for, save_checkpoint, ModelParams};
use crate::siamese::{train_baseline, train_siamese};

#[derive(Debug, Parser)]
#[command(
    name = "afair",
    version,
    about = "Accurate fairness training and evaluation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean, split and min-max scale a raw data file.
    Prepare {
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Output directory for train.csv, test.csv and scaler.json.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.2)]
        test_fraction: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Train one model per seed and write checkpoints and traces.
    Train {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Evaluate the checkpoints of every seed and aggregate the reports.
    Evaluate {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Collect (ACC, FTA) points from report tables.
    Tradeoff {
        /// Per-seed report CSV files written by `evaluate`.
        #[arg(long, num_args = 1.., required = true)]
        reports: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic hotel-service data set and its schema.
    SynthCtrip {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_HABIT_NOISE)]
        noise: f64,
    },
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Prepare {
            schema,
            input,
            out,
            test_fraction,
            seed,
        } => prepare(&schema, &input, &out, test_fraction, seed),
        Command::Train { config, overrides } => {
            let c = ExperimentConfig::load(&config, &overrides)?;
            train(&c).map(|_| ())
        }
        Command::Evaluate { config, overrides } => {
            let c = ExperimentConfig::load(&config, &overrides)?;
            let agg = evaluate(&c)?;
            print!("{}", agg.to_text());
            Ok(())
        }
        Command::Tradeoff { reports, out } => {
            let mut all = Vec::new();
            for p in &reports {
                all.extend(read_report_csv(p)?);
            }
            let t = tradeoff(&all)?;
            write_file(&out, t.to_csv().as_bytes())
        }
        Command::SynthCtrip {
            out,
            n,
            seed,
            noise,
        } => synth_ctrip_cmd(&out, n, seed, noise),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn file_sha256(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Split the raw file, fit the scaler on the training part only and write
/// `train.csv`, `test.csv`, `scaler.json` and a copy of the schema.
pub fn prepare(
    schema_path: &Path,
    input: &Path,
    out: &Path,
    test_fraction: f64,
    seed: u64,
) -> Result<()> {
    let schema = Arc::new(SchemaConfig::from_file(schema_path)?);
    let raw = load_dataset(input, &schema)?;
    let (train, test) = split(&raw, test_fraction, seed)?;
    let (train, scaler) = normalize(&train);
    let test = scaler.transform(&test);
    create_dir(out)?;
    write_dataset(&train, &out.join("train.csv"))?;
    write_dataset(&test, &out.join("test.csv"))?;
    let scaler_json = serde_json::to_string_pretty(&scaler).expect("scaler serializes");
    write_file(&out.join("scaler.json"), scaler_json.as_bytes())?;
    write_file(&out.join("schema.toml"), schema.to_toml_string().as_bytes())
}

/// Train every configured seed. Returns the trained models in seed order.
pub fn train(c: &ExperimentConfig) -> Result<Vec<ModelParams>> {
    let (train_set, _) = c.load_split()?;
    let arch = c.architecture()?;
    let schema = &train_set.schema;
    let max_members = match c.strategy()? {
        Some(s) => augment(&train_set, &s)?
            .iter()
            .map(SubPopulation::len)
            .max()
            .unwrap_or(1),
        None => 1,
    };
    create_dir(&c.out_dir.join("checkpoints"))?;
    let mut models = Vec::new();
    let mut runs = Vec::new();
    for &seed in &c.seeds {
        let tc = c.train_config(seed)?;
        let init = ModelParams::init(
            arch.clone(),
            schema.input_dim(),
            output_dim_for(schema),
            seed,
        )?;
        let outcome = match c.method {
            Method::Baseline => train_baseline(&train_set, init, &tc)?,
            Method::Sf | Method::Sf3 => train_siamese(&train_set, init, &tc)?,
        };
        save_checkpoint(&outcome.model, &c.checkpoint_path(seed))?;
        let trace: String = outcome
            .trace
            .iter()
            .map(|t| t.to_json_line() + "\n")
            .collect();
        write_file(&c.trace_path(seed), trace.as_bytes())?;
        runs.push(json!({
            "seed": seed,
            "checkpoint": c.checkpoint_path(seed),
            "trace": c.trace_path(seed),
            "epochs_run": outcome.trace.len(),
            "converged": outcome.converged,
        }));
        models.push(outcome.model);
    }
    let manifest = json!({
        "fingerprint": c.fingerprint(),
        "version": env!("CARGO_PKG_VERSION"),
        "config": c,
        "train_sha256": file_sha256(&c.train)?,
        "test_sha256": file_sha256(&c.test)?,
        "max_members": max_members,
        "runs": runs,
    });
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(
        &c.out_dir.join(format!("{}.manifest.json", c.method.name())),
        text.as_bytes(),
    )?;
    Ok(models)
}

fn report_context(c: &ExperimentConfig, schema: &SchemaConfig, seed: u64) -> Result<ReportContext> {
    Ok(ReportContext {
        dataset: schema.name.clone(),
        model: c.architecture()?.name(),
        method: c.method.name().into(),
        seed,
        fingerprint: c.fingerprint(),
        group: c.group(schema)?,
        fairness: c.fairness(),
        strategy: c.eval_strategy()?,
        consistency_k: c.evaluation.consistency_k,
    })
}

/// Report for one in-memory model on the configured test set.
pub fn evaluate_model(
    c: &ExperimentConfig,
    model: &ModelParams,
    seed: u64,
) -> Result<MetricsReport> {
    let (_, test) = c.load_split()?;
    check_model(model, &test.schema)?;
    build_report(&test, model, &report_context(c, &test.schema, seed)?)
}

fn check_model(model: &ModelParams, schema: &SchemaConfig) -> Result<()> {
    if model.input_dim() != schema.input_dim() {
        return Err(Error::Dimension {
            expected: schema.input_dim(),
            got: model.input_dim(),
        });
    }
    if model.output_dim() != output_dim_for(schema) {
        return Err(Error::Dimension {
            expected: output_dim_for(schema),
            got: model.output_dim(),
        });
    }
    Ok(())
}

/// Evaluate every seed's checkpoint, write per-seed reports, the report
/// table and the aggregate.
pub fn evaluate(c: &ExperimentConfig) -> Result<Aggregate> {
    let (_, test) = c.load_split()?;
    let mut reports = Vec::new();
    for &seed in &c.seeds {
        let model = load_checkpoint(&c.checkpoint_path(seed))?;
        check_model(&model, &test.schema)?;
        let r = build_report(&test, &model, &report_context(c, &test.schema, seed)?)?;
        write_file(&c.report_path(seed), r.to_kv_text().as_bytes())?;
        reports.push(r);
    }
    let method = c.method.name();
    write_report_csv(&c.out_dir.join(format!("{method}_reports.csv")), &reports)?;
    let agg = aggregate(&reports)?;
    write_file(
        &c.out_dir.join(format!("{method}_aggregate.csv")),
        agg.to_csv().as_bytes(),
    )?;
    write_file(
        &c.out_dir.join(format!("{method}_aggregate.txt")),
        agg.to_text().as_bytes(),
    )?;
    Ok(agg)
}

pub fn write_report_csv(path: &Path, reports: &[MetricsReport]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(f);
    let io = |e: csv::Error| Error::io(path, std::io::Error::other(e.to_string()));
    w.write_record(MetricsReport::csv_header()).map_err(io)?;
    for r in reports {
        w.write_record(r.csv_row()).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_report_csv(path: &Path) -> Result<Vec<MetricsReport>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(f);
    let bad = |e: csv::Error| Error::SchemaMismatch(format!("{}: {e}", path.display()));
    let header: Vec<String> = r.headers().map_err(bad)?.iter().map(String::from).collect();
    r.records()
        .map(|rec| {
            let row: Vec<String> = rec.map_err(bad)?.iter().map(String::from).collect();
            MetricsReport::from_csv_row(&header, &row)
        })
        .collect()
}

/// Write `ctrip.csv` and `ctrip.schema.toml` under `out`.
pub fn synth_ctrip_cmd(out: &Path, n: usize, seed: u64, noise: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::config("n must be >= 1"));
    }
    if !(0.0..=1.0).contains(&noise) {
        return Err(Error::config(format!(
            "noise must lie in [0, 1], got {noise}"
        )));
    }
    let ds = synth_ctrip_with_noise(n, seed, noise)?;
    create_dir(out)?;
    write_dataset(&ds, &out.join("ctrip.csv"))?;
    write_file(
        &out.join("ctrip.schema.toml"),
        ds.schema.to_toml_string().as_bytes(),
    )
}

/// Parse arguments, run, and map the outcome to a process exit code.
pub fn main_exit_code<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => {
            let _ = std::io::stdout().flush();
            0
        }
        Err(e) => {
            eprintln!("afair: {e}");
            e.exit_code()
        }
    }
}
