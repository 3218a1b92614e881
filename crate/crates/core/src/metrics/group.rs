use serde::{Deserialize, Serialize};

use crate::dataio::{augment, AugmentationStrategy, Dataset, Label, Record, SchemaConfig};
use crate::error::{Error, Result};
use crate::models::Classifier;

/// Privileged-vs-rest partition on one sensitive column, with the label
/// counted as the positive outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub column: String,
    /// Index into the column's domain.
    pub privileged: usize,
    pub positive_label: Label,
}

impl GroupSpec {
    /// Group on `column` using the schema's declared privileged value and
    /// positive label.
    pub fn from_schema(schema: &SchemaConfig, column: &str) -> Result<Self> {
        let idx = schema
            .sensitive_index(column)
            .ok_or_else(|| Error::config(format!("`{column}` is not a sensitive column")))?;
        Ok(Self {
            column: column.to_string(),
            privileged: schema.sensitive()[idx].privileged,
            positive_label: schema.positive_label(),
        })
    }

    pub fn with_privileged(mut self, schema: &SchemaConfig, value: &str) -> Result<Self> {
        let idx = self.sensitive_position(schema)?;
        self.privileged = schema.sensitive()[idx]
            .values
            .iter()
            .position(|v| v == value)
            .ok_or_else(|| {
                Error::config(format!("`{value}` not in domain of `{}`", self.column))
            })?;
        Ok(self)
    }

    fn sensitive_position(&self, schema: &SchemaConfig) -> Result<usize> {
        let idx = schema
            .sensitive_index(&self.column)
            .ok_or_else(|| Error::config(format!("`{}` is not a sensitive column", self.column)))?;
        if self.privileged >= schema.sensitive()[idx].arity() {
            return Err(Error::config("privileged value outside domain"));
        }
        if self.positive_label >= schema.label_classes().len() {
            return Err(Error::config("positive label outside label domain"));
        }
        Ok(idx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupMetrics {
    pub spd: f64,
    pub eod: f64,
    pub avod: f64,
}

/// Every member of every sub-population, each carrying its origin's label.
pub fn augmented_union(test: &Dataset, strategy: &AugmentationStrategy) -> Result<Vec<Record>> {
    Ok(augment(test, strategy)?
        .into_iter()
        .flat_map(|sp| sp.members)
        .collect())
}

#[derive(Default)]
struct Tally {
    n: usize,
    pred_pos: usize,
    pos: usize,
    true_pos: usize,
    neg: usize,
    false_pos: usize,
}

fn rate(num: usize, den: usize, group: &str, missing: &'static str) -> Result<f64> {
    if den == 0 {
        return Err(Error::UndefinedRate {
            group: group.to_string(),
            missing,
        });
    }
    Ok(num as f64 / den as f64)
}

pub(crate) fn group_metrics_from(
    records: &[Record],
    preds: &[Label],
    schema: &SchemaConfig,
    group: &GroupSpec,
) -> Result<GroupMetrics> {
    let col = group.sensitive_position(schema)?;
    let dom = &schema.sensitive()[col];
    let mut t = [Tally::default(), Tally::default()];
    for (r, &p) in records.iter().zip(preds) {
        let g = usize::from(dom.decode(r.a[col]) == group.privileged);
        let s = &mut t[g];
        let pred_pos = p == group.positive_label;
        s.n += 1;
        s.pred_pos += usize::from(pred_pos);
        if r.y == group.positive_label {
            s.pos += 1;
            s.true_pos += usize::from(pred_pos);
        } else {
            s.neg += 1;
            s.false_pos += usize::from(pred_pos);
        }
    }
    let names = ["unprivileged", "privileged"];
    for (g, name) in names.iter().enumerate() {
        if t[g].n == 0 {
            return Err(Error::EmptyGroup(format!(
                "{} group of `{}`",
                name, group.column
            )));
        }
    }
    let label = |g: usize| format!("{} ({})", group.column, names[g]);
    let ppr = |g: usize| t[g].pred_pos as f64 / t[g].n as f64;
    let tpr = |g: usize| rate(t[g].true_pos, t[g].pos, &label(g), "positives");
    let fpr = |g: usize| rate(t[g].false_pos, t[g].neg, &label(g), "negatives");

    let spd = (ppr(1) - ppr(0)).abs();
    let tpr_gap = (tpr(1)? - tpr(0)?).abs();
    let fpr_gap = (fpr(1)? - fpr(0)?).abs();
    Ok(GroupMetrics {
        spd,
        eod: tpr_gap,
        avod: 0.5 * (fpr_gap + tpr_gap),
    })
}

/// Statistical parity, equal-opportunity and average-odds differences
/// between the privileged group and everyone else.
pub fn group_metrics<C: Classifier>(
    records: &[Record],
    schema: &SchemaConfig,
    model: &C,
    group: &GroupSpec,
) -> Result<GroupMetrics> {
    let preds = records
        .iter()
        .map(|r| model.predict(&r.input()))
        .collect::<Result<Vec<_>>>()?;
    group_metrics_from(records, &preds, schema, group)
}
