use serde::{Deserialize, Serialize};

use super::{evaluate_subpops, SubpopPredictions};
use crate::dataio::{AugmentationStrategy, Dataset, Label, SubPopulation};
use crate::error::Result;
use crate::models::Classifier;

/// Cell of the fairness confusion matrix: accuracy of the origin's
/// prediction crossed with consistency over its sub-population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FairnessOutcome {
    TrueFair,
    TrueBiased,
    FalseFair,
    FalseBiased,
}

/// Classify from decoded labels; `labels[0]` belongs to the origin.
pub fn classify_labels(labels: &[Label], y: Label) -> FairnessOutcome {
    let origin = labels[0];
    let consistent = labels.iter().all(|&l| l == origin);
    match (origin == y, consistent) {
        (true, true) => FairnessOutcome::TrueFair,
        (true, false) => FairnessOutcome::TrueBiased,
        (false, true) => FairnessOutcome::FalseFair,
        (false, false) => FairnessOutcome::FalseBiased,
    }
}

pub fn classify_prediction<C: Classifier>(
    subpop: &SubPopulation,
    y: Label,
    model: &C,
) -> Result<FairnessOutcome> {
    let labels = subpop
        .members
        .iter()
        .map(|m| model.predict(&m.input()))
        .collect::<Result<Vec<_>>>()?;
    Ok(classify_labels(&labels, y))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FairnessConfusionCounts {
    pub true_fair: usize,
    pub true_biased: usize,
    pub false_fair: usize,
    pub false_biased: usize,
}

impl FairnessConfusionCounts {
    pub fn record(&mut self, outcome: FairnessOutcome) {
        match outcome {
            FairnessOutcome::TrueFair => self.true_fair += 1,
            FairnessOutcome::TrueBiased => self.true_biased += 1,
            FairnessOutcome::FalseFair => self.false_fair += 1,
            FairnessOutcome::FalseBiased => self.false_biased += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.true_fair + self.true_biased + self.false_fair + self.false_biased
    }

    fn rate(&self, c: usize) -> f64 {
        if self.total() == 0 {
            0.0
        } else {
            c as f64 / self.total() as f64
        }
    }

    pub fn tfr(&self) -> f64 {
        self.rate(self.true_fair)
    }
    pub fn tbr(&self) -> f64 {
        self.rate(self.true_biased)
    }
    pub fn ffr(&self) -> f64 {
        self.rate(self.false_fair)
    }
    pub fn fbr(&self) -> f64 {
        self.rate(self.false_biased)
    }

    /// Pool counts from several evaluations.
    pub fn merge(&self, other: &Self) -> Self {
        Self {
            true_fair: self.true_fair + other.true_fair,
            true_biased: self.true_biased + other.true_biased,
            false_fair: self.false_fair + other.false_fair,
            false_biased: self.false_biased + other.false_biased,
        }
    }
}

pub(crate) fn tally(preds: &[SubpopPredictions]) -> FairnessConfusionCounts {
    let mut c = FairnessConfusionCounts::default();
    for p in preds {
        c.record(classify_labels(&p.labels, p.y));
    }
    c
}

pub fn fairness_confusion<C: Classifier>(
    test: &Dataset,
    model: &C,
    strategy: &AugmentationStrategy,
) -> Result<FairnessConfusionCounts> {
    Ok(tally(&evaluate_subpops(test, model, strategy)?))
}

/// Fair-precision, fair-recall and fair-F1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FairPrf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

impl FairPrf {
    /// Each ratio is 0 when its denominator is 0.
    pub fn from_rates(tfr: f64, tbr: f64, ffr: f64) -> Self {
        let precision = ratio(tfr, tfr + tbr);
        let recall = ratio(tfr, tfr + ffr);
        let f1 = ratio(2.0 * precision * recall, precision + recall);
        Self {
            precision,
            recall,
            f1,
        }
    }
}

pub fn fair_prf(counts: &FairnessConfusionCounts) -> FairPrf {
    FairPrf::from_rates(
        counts.true_fair as f64,
        counts.true_biased as f64,
        counts.false_fair as f64,
    )
}
