use crate::error::{Error, Result};
use crate::metrics::{fair_prf, FairnessConfusionCounts, MetricsReport, METRIC_ROWS};

/// How an aggregate row's central value was formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Recomputed from confusion counts summed over seeds, so the partition
    /// and ACC/FTA identities hold on the aggregate itself.
    Pooled,
    /// Mean of the per-seed values.
    PerSeed,
}

impl Basis {
    fn name(self) -> &'static str {
        match self {
            Basis::Pooled => "pooled",
            Basis::PerSeed => "per-seed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub metric: &'static str,
    pub value: f64,
    /// Population standard deviation (divide by n) of the per-seed values.
    pub std: f64,
    pub basis: Basis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub method: String,
    pub seeds: usize,
    pub counts: FairnessConfusionCounts,
    pub rows: Vec<AggregateRow>,
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn pooled(counts: &FairnessConfusionCounts, metric: &str) -> Option<f64> {
    let total = counts.total() as f64;
    let prf = fair_prf(counts);
    Some(match metric {
        "acc" => (counts.true_fair + counts.true_biased) as f64 / total,
        "fta" => (counts.true_fair + counts.false_fair) as f64 / total,
        "tfr" => counts.tfr(),
        "tbr" => counts.tbr(),
        "ffr" => counts.ffr(),
        "fbr" => counts.fbr(),
        "f_precision" => prf.precision,
        "f_recall" => prf.recall,
        "f_f1" => prf.f1,
        _ => return None,
    })
}

pub fn aggregate(reports: &[MetricsReport]) -> Result<Aggregate> {
    let first = reports
        .first()
        .ok_or_else(|| Error::config("nothing to aggregate"))?;
    let counts = reports
        .iter()
        .fold(FairnessConfusionCounts::default(), |acc, r| {
            acc.merge(&r.counts)
        });
    let rows = METRIC_ROWS
        .iter()
        .map(|&metric| {
            let values: Vec<f64> = reports.iter().map(|r| r.metric(metric).unwrap()).collect();
            let (mean, std) = mean_std(&values);
            match pooled(&counts, metric) {
                Some(value) => AggregateRow {
                    metric,
                    value,
                    std,
                    basis: Basis::Pooled,
                },
                None => AggregateRow {
                    metric,
                    value: mean,
                    std,
                    basis: Basis::PerSeed,
                },
            }
        })
        .collect();
    Ok(Aggregate {
        method: first.method.clone(),
        seeds: reports.len(),
        counts,
        rows,
    })
}

impl Aggregate {
    pub fn get(&self, metric: &str) -> Option<&AggregateRow> {
        self.rows.iter().find(|r| r.metric == metric)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,mean,std,basis\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.metric,
                r.value,
                r.std,
                r.basis.name()
            ));
        }
        for (name, v) in [
            ("n_true_fair", self.counts.true_fair),
            ("n_true_biased", self.counts.true_biased),
            ("n_false_fair", self.counts.false_fair),
            ("n_false_biased", self.counts.false_biased),
        ] {
            out.push_str(&format!("{name},{v},0,pooled\n"));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("method {} over {} seed(s)\n", self.method, self.seeds);
        for r in &self.rows {
            out.push_str(&format!(
                "{:<12} {:.3} ± {:.3}  ({})\n",
                r.metric,
                r.value,
                r.std,
                r.basis.name()
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(acc: f64, counts: [usize; 4]) -> MetricsReport {
        let [tf, tb, ff, fb] = counts;
        let text = format!(
            "dataset = d\nmodel = lr\nmethod = sf\nseed = 0\nfingerprint = x\nk_lipschitz = 1\nn = 10\n\
             acc = {acc}\nspd = 0\neod = 0\navod = 0\nspd_iv = 0\neod_iv = 0\navod_iv = 0\ncon = 1\nfta = 0\n\
             tfr = 0\ntbr = 0\nffr = 0\nfbr = 0\nf_recall = 0\nf_precision = 0\nf_f1 = 0\naf_rate = 0\n\
             n_true_fair = {tf}\nn_true_biased = {tb}\nn_false_fair = {ff}\nn_false_biased = {fb}\n"
        );
        MetricsReport::from_kv_text(&text).unwrap()
    }

    #[test]
    fn population_std() {
        let (m, s) = mean_std(&[0.8, 0.9]);
        assert!((m - 0.85).abs() < 1e-12);
        assert!((s - 0.05).abs() < 1e-12);
        assert_eq!(mean_std(&[0.3]).1, 0.0);
    }

    #[test]
    fn pooled_rows_satisfy_identities() {
        let a = aggregate(&[report(0.7, [5, 2, 2, 1]), report(0.5, [3, 2, 4, 1])]).unwrap();
        let v = |m: &str| a.get(m).unwrap().value;
        assert_eq!(a.counts.total(), 20);
        assert!((v("tfr") + v("tbr") + v("ffr") + v("fbr") - 1.0).abs() < 1e-12);
        assert!((v("acc") - (v("tfr") + v("tbr"))).abs() < 1e-12);
        assert!((v("fta") - (v("tfr") + v("ffr"))).abs() < 1e-12);
        assert_eq!(a.get("acc").unwrap().basis, Basis::Pooled);
        assert_eq!(a.get("spd").unwrap().basis, Basis::PerSeed);
        // std is always over the per-seed values
        assert!((a.get("acc").unwrap().std - 0.1).abs() < 1e-12);
    }

    #[test]
    fn single_seed_has_zero_std() {
        let a = aggregate(&[report(0.7, [5, 2, 2, 1])]).unwrap();
        assert!(a.rows.iter().all(|r| r.std == 0.0));
        assert!(a.to_csv().starts_with("metric,mean,std,basis\nacc,"));
    }
}
