use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::schema::SchemaConfig;
use crate::error::{Error, Result};

/// Class index into the schema's label domain.
pub type Label = usize;

/// One labeled individual: non-sensitive features `x`, sensitive attributes
/// `a` (each on the unit interval), and ground-truth class `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub x: Vec<f64>,
    pub a: Vec<f64>,
    pub y: Label,
}

impl Record {
    pub fn new(x: Vec<f64>, a: Vec<f64>, y: Label) -> Self {
        Self { x, a, y }
    }

    /// The model input `(x, a)`.
    pub fn input(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.x.len() + self.a.len());
        v.extend_from_slice(&self.x);
        v.extend_from_slice(&self.a);
        v
    }

    pub fn sensitive_indices(&self, schema: &SchemaConfig) -> Vec<usize> {
        schema
            .sensitive()
            .iter()
            .zip(&self.a)
            .map(|(d, &v)| d.decode(v))
            .collect()
    }

    pub fn conforms(&self, schema: &SchemaConfig) -> Result<()> {
        if self.x.len() != schema.num_features() {
            return Err(Error::Dimension {
                expected: schema.num_features(),
                got: self.x.len(),
            });
        }
        if self.a.len() != schema.num_sensitive() {
            return Err(Error::Dimension {
                expected: schema.num_sensitive(),
                got: self.a.len(),
            });
        }
        if self.x.iter().chain(&self.a).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("record feature".into()));
        }
        if self.y >= schema.label_classes().len() {
            return Err(Error::SchemaMismatch(format!(
                "label index {} out of range",
                self.y
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: Arc<SchemaConfig>,
    pub records: Vec<Record>,
}

impl Dataset {
    pub fn new(schema: Arc<SchemaConfig>, records: Vec<Record>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyDataset(String::new()));
        }
        for r in &records {
            r.conforms(&schema)?;
        }
        Ok(Self { schema, records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Fraction of records whose label equals `label`.
    pub fn base_rate(&self, label: Label) -> f64 {
        self.records.iter().filter(|r| r.y == label).count() as f64 / self.len() as f64
    }
}
