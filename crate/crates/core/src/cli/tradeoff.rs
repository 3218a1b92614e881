use crate::error::{Error, Result};
use crate::metrics::MetricsReport;

#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffPoint {
    pub method: String,
    pub seed: u64,
    pub acc: f64,
    pub fta: f64,
    /// Strictly higher ACC and strictly higher FTA than the baseline mean.
    /// Always false for baseline points.
    pub dominates_baseline: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tradeoff {
    pub baseline_acc: f64,
    pub baseline_fta: f64,
    pub points: Vec<TradeoffPoint>,
}

pub fn tradeoff(reports: &[MetricsReport]) -> Result<Tradeoff> {
    let (base, mitigated): (Vec<&MetricsReport>, Vec<&MetricsReport>) =
        reports.iter().partition(|r| r.method == "baseline");
    if base.is_empty() || mitigated.is_empty() {
        return Err(Error::config(
            "tradeoff needs at least one baseline and one mitigated report",
        ));
    }
    let mean =
        |f: fn(&MetricsReport) -> f64| base.iter().map(|r| f(r)).sum::<f64>() / base.len() as f64;
    let baseline_acc = mean(|r| r.acc);
    let baseline_fta = mean(|r| r.fta);
    let points = reports
        .iter()
        .map(|r| TradeoffPoint {
            method: r.method.clone(),
            seed: r.seed,
            acc: r.acc,
            fta: r.fta,
            dominates_baseline: r.method != "baseline"
                && r.acc > baseline_acc
                && r.fta > baseline_fta,
        })
        .collect();
    Ok(Tradeoff {
        baseline_acc,
        baseline_fta,
        points,
    })
}

impl Tradeoff {
    /// `kind,method,seed,acc,fta,dominates_baseline`, the baseline mean
    /// marker first.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,method,seed,acc,fta,dominates_baseline\n");
        out.push_str(&format!(
            "baseline_mean,baseline,,{},{},false\n",
            self.baseline_acc, self.baseline_fta
        ));
        for p in &self.points {
            out.push_str(&format!(
                "point,{},{},{},{},{}\n",
                p.method, p.seed, p.acc, p.fta, p.dominates_baseline
            ));
        }
        out
    }
}
