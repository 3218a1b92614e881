//! Evaluation metrics: accuracy, group fairness over the records and over
//! their augmented union, individual fairness (FTA, consistency), the
//! fairness confusion matrix and accurate-fairness rates.

mod confusion;
mod group;
mod individual;
mod report;

pub use confusion::{
    classify_labels, classify_prediction, fair_prf, fairness_confusion, FairPrf,
    FairnessConfusionCounts, FairnessOutcome,
};
pub use group::{augmented_union, group_metrics, GroupMetrics, GroupSpec};
pub use individual::{accuracy, af_rate, consistency, fta_rate};
pub use report::{build_report, MetricsReport, ReportContext, METRIC_ROWS};

use crate::dataio::{augment, AugmentationStrategy, Dataset, Label, SubPopulation};
use crate::error::{Error, Result};
use crate::models::Classifier;

/// Raw outputs and decoded labels for every member of one sub-population.
#[derive(Debug, Clone)]
pub(crate) struct SubpopPredictions {
    pub subpop: SubPopulation,
    pub y: Label,
    pub outputs: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
}

pub(crate) fn evaluate_subpops<C: Classifier>(
    test: &Dataset,
    model: &C,
    strategy: &AugmentationStrategy,
) -> Result<Vec<SubpopPredictions>> {
    if test.is_empty() {
        return Err(Error::EmptyDataset(String::new()));
    }
    augment(test, strategy)?
        .into_iter()
        .map(|sp| {
            let outputs = sp
                .members
                .iter()
                .map(|m| model.output(&m.input()))
                .collect::<Result<Vec<_>>>()?;
            let labels = outputs
                .iter()
                .map(|o| crate::models::predict_label(o, model.activation()))
                .collect();
            Ok(SubpopPredictions {
                y: sp.origin().y,
                subpop: sp,
                outputs,
                labels,
            })
        })
        .collect()
}
