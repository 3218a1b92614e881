use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::confusion::{fair_prf, tally, FairnessConfusionCounts};
use super::evaluate_subpops;
use super::group::{group_metrics_from, GroupSpec};
use super::individual::{af_from, consistency_from, fta_from};
use crate::dataio::{AugmentationStrategy, Dataset};
use crate::error::{Error, Result};
use crate::models::Classifier;
use crate::siamese::FairnessSpec;

/// Everything besides the model and data that a report depends on.
#[derive(Debug, Clone)]
pub struct ReportContext {
    pub dataset: String,
    pub model: String,
    pub method: String,
    pub seed: u64,
    pub fingerprint: String,
    pub group: GroupSpec,
    pub fairness: FairnessSpec,
    pub strategy: AugmentationStrategy,
    pub consistency_k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub dataset: String,
    pub model: String,
    pub method: String,
    pub seed: u64,
    pub fingerprint: String,
    pub k_lipschitz: f64,
    pub n: usize,
    pub acc: f64,
    pub spd: f64,
    pub eod: f64,
    pub avod: f64,
    pub spd_iv: f64,
    pub eod_iv: f64,
    pub avod_iv: f64,
    pub con: f64,
    pub fta: f64,
    pub tfr: f64,
    pub tbr: f64,
    pub ffr: f64,
    pub fbr: f64,
    pub f_recall: f64,
    pub f_precision: f64,
    pub f_f1: f64,
    pub af_rate: f64,
    pub counts: FairnessConfusionCounts,
}

/// Rate rows in table order.
pub const METRIC_ROWS: [&str; 17] = [
    "acc",
    "spd",
    "eod",
    "avod",
    "spd_iv",
    "eod_iv",
    "avod_iv",
    "con",
    "fta",
    "tfr",
    "tbr",
    "ffr",
    "fbr",
    "f_recall",
    "f_precision",
    "f_f1",
    "af_rate",
];

pub fn build_report<C: Classifier>(
    test: &Dataset,
    model: &C,
    ctx: &ReportContext,
) -> Result<MetricsReport> {
    ctx.fairness.validate()?;
    let schema = &test.schema;
    let subs = evaluate_subpops(test, model, &ctx.strategy)?;

    let origin_preds: Vec<_> = subs.iter().map(|s| s.labels[0]).collect();
    let correct = origin_preds
        .iter()
        .zip(&test.records)
        .filter(|(p, r)| **p == r.y)
        .count();
    let counts = tally(&subs);
    debug_assert_eq!(correct, counts.true_fair + counts.true_biased);

    let g = group_metrics_from(&test.records, &origin_preds, schema, &ctx.group)?;
    let union: Vec<_> = subs
        .iter()
        .flat_map(|s| s.subpop.members.iter().cloned())
        .collect();
    let union_preds: Vec<_> = subs.iter().flat_map(|s| s.labels.iter().copied()).collect();
    let giv = group_metrics_from(&union, &union_preds, schema, &ctx.group)?;

    let prf = fair_prf(&counts);
    let n = test.len();
    Ok(MetricsReport {
        dataset: ctx.dataset.clone(),
        model: ctx.model.clone(),
        method: ctx.method.clone(),
        seed: ctx.seed,
        fingerprint: ctx.fingerprint.clone(),
        k_lipschitz: ctx.fairness.k,
        n,
        acc: correct as f64 / n as f64,
        spd: g.spd,
        eod: g.eod,
        avod: g.avod,
        spd_iv: giv.spd,
        eod_iv: giv.eod,
        avod_iv: giv.avod,
        con: consistency_from(test, &origin_preds, ctx.consistency_k)?,
        fta: fta_from(&subs),
        tfr: counts.tfr(),
        tbr: counts.tbr(),
        ffr: counts.ffr(),
        fbr: counts.fbr(),
        f_recall: prf.recall,
        f_precision: prf.precision,
        f_f1: prf.f1,
        af_rate: af_from(&subs, model, &ctx.fairness),
        counts,
    })
}

impl MetricsReport {
    pub fn metric(&self, name: &str) -> Option<f64> {
        Some(match name {
            "acc" => self.acc,
            "spd" => self.spd,
            "eod" => self.eod,
            "avod" => self.avod,
            "spd_iv" => self.spd_iv,
            "eod_iv" => self.eod_iv,
            "avod_iv" => self.avod_iv,
            "con" => self.con,
            "fta" => self.fta,
            "tfr" => self.tfr,
            "tbr" => self.tbr,
            "ffr" => self.ffr,
            "fbr" => self.fbr,
            "f_recall" => self.f_recall,
            "f_precision" => self.f_precision,
            "f_f1" => self.f_f1,
            "af_rate" => self.af_rate,
            _ => return None,
        })
    }

    /// Key/value pairs in a fixed order.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut v: Vec<(&'static str, String)> = vec![
            ("dataset", self.dataset.clone()),
            ("model", self.model.clone()),
            ("method", self.method.clone()),
            ("seed", self.seed.to_string()),
            ("fingerprint", self.fingerprint.clone()),
            ("k_lipschitz", self.k_lipschitz.to_string()),
            ("n", self.n.to_string()),
        ];
        for name in METRIC_ROWS {
            v.push((name, self.metric(name).unwrap().to_string()));
        }
        v.push(("n_true_fair", self.counts.true_fair.to_string()));
        v.push(("n_true_biased", self.counts.true_biased.to_string()));
        v.push(("n_false_fair", self.counts.false_fair.to_string()));
        v.push(("n_false_biased", self.counts.false_biased.to_string()));
        v
    }

    pub fn to_kv_text(&self) -> String {
        self.pairs()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn from_kv_text(text: &str) -> Result<Self> {
        let mut map = HashMap::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once(" = ")
                .ok_or_else(|| Error::SchemaMismatch(format!("malformed report line `{line}`")))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Self::from_map(&map)
    }

    pub fn csv_header() -> Vec<&'static str> {
        let mut h = vec![
            "dataset",
            "model",
            "method",
            "seed",
            "fingerprint",
            "k_lipschitz",
            "n",
        ];
        h.extend(METRIC_ROWS);
        h.extend([
            "n_true_fair",
            "n_true_biased",
            "n_false_fair",
            "n_false_biased",
        ]);
        h
    }

    pub fn csv_row(&self) -> Vec<String> {
        self.pairs().into_iter().map(|(_, v)| v).collect()
    }

    pub fn from_csv_row(header: &[String], row: &[String]) -> Result<Self> {
        let map = header.iter().cloned().zip(row.iter().cloned()).collect();
        Self::from_map(&map)
    }

    fn from_map(map: &HashMap<String, String>) -> Result<Self> {
        fn get<'a>(map: &'a HashMap<String, String>, k: &str) -> Result<&'a str> {
            map.get(k)
                .map(String::as_str)
                .ok_or_else(|| Error::SchemaMismatch(format!("report is missing `{k}`")))
        }
        fn num<T: std::str::FromStr>(map: &HashMap<String, String>, k: &str) -> Result<T> {
            get(map, k)?
                .parse()
                .map_err(|_| Error::SchemaMismatch(format!("report field `{k}` is not a number")))
        }
        let counts = FairnessConfusionCounts {
            true_fair: num(map, "n_true_fair")?,
            true_biased: num(map, "n_true_biased")?,
            false_fair: num(map, "n_false_fair")?,
            false_biased: num(map, "n_false_biased")?,
        };
        Ok(Self {
            dataset: get(map, "dataset")?.to_string(),
            model: get(map, "model")?.to_string(),
            method: get(map, "method")?.to_string(),
            seed: num(map, "seed")?,
            fingerprint: get(map, "fingerprint")?.to_string(),
            k_lipschitz: num(map, "k_lipschitz")?,
            n: num(map, "n")?,
            acc: num(map, "acc")?,
            spd: num(map, "spd")?,
            eod: num(map, "eod")?,
            avod: num(map, "avod")?,
            spd_iv: num(map, "spd_iv")?,
            eod_iv: num(map, "eod_iv")?,
            avod_iv: num(map, "avod_iv")?,
            con: num(map, "con")?,
            fta: num(map, "fta")?,
            tfr: num(map, "tfr")?,
            tbr: num(map, "tbr")?,
            ffr: num(map, "ffr")?,
            fbr: num(map, "fbr")?,
            f_recall: num(map, "f_recall")?,
            f_precision: num(map, "f_precision")?,
            f_f1: num(map, "f_f1")?,
            af_rate: num(map, "af_rate")?,
            counts,
        })
    }
}
