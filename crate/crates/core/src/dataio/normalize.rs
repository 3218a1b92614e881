use serde::{Deserialize, Serialize};

use super::dataset::Dataset;

/// Per-feature min-max scaling parameters fitted on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(dataset: &Dataset) -> Self {
        let d = dataset.schema.num_features();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for r in &dataset.records {
            for (j, &v) in r.x.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Self { min, max }
    }

    /// Scale one value of feature `j`; constant features map to 0 and
    /// out-of-range values are clamped into [0, 1].
    pub fn scale(&self, j: usize, v: f64) -> f64 {
        let range = self.max[j] - self.min[j];
        if range <= 0.0 {
            return 0.0;
        }
        ((v - self.min[j]) / range).clamp(0.0, 1.0)
    }

    pub fn transform(&self, dataset: &Dataset) -> Dataset {
        let mut out = dataset.clone();
        for r in &mut out.records {
            for (j, v) in r.x.iter_mut().enumerate() {
                *v = self.scale(j, *v);
            }
        }
        out
    }
}

/// Min-max scale every non-sensitive feature using statistics of this
/// dataset. Sensitive attributes are already on the unit interval.
pub fn normalize(dataset: &Dataset) -> (Dataset, MinMaxScaler) {
    let scaler = MinMaxScaler::fit(dataset);
    (scaler.transform(dataset), scaler)
}
