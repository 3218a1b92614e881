use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnRole {
    Sensitive,
    Nonsensitive,
    Label,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelArity {
    Binary,
    Classes(usize),
}

impl LabelArity {
    pub fn num_classes(self) -> usize {
        match self {
            LabelArity::Binary => 2,
            LabelArity::Classes(k) => k,
        }
    }
}

/// One column declaration as it appears in a schema file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    pub role: ColumnRole,
    /// Ordered value domain. Required for sensitive and label columns unless
    /// `range` is given; optional for categorical features.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Vec<String>>,
    /// Inclusive integer range, shorthand for a numeric sensitive domain.
    /// Values outside the range are clamped to its ends.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<[i64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub privileged: Option<String>,
    /// Label columns only: the class treated as positive by group metrics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive: Option<String>,
    /// Raw token -> canonical domain value rewrites applied before lookup.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub map: BTreeMap<String, String>,
}

impl ColumnSpec {
    pub fn numeric(name: &str) -> Self {
        Self::bare(name, ColumnKind::Numeric, ColumnRole::Nonsensitive)
    }

    pub fn categorical(name: &str) -> Self {
        Self::bare(name, ColumnKind::Categorical, ColumnRole::Nonsensitive)
    }

    pub fn sensitive<S: AsRef<str>>(name: &str, domain: &[S], privileged: &str) -> Self {
        let mut c = Self::bare(name, ColumnKind::Categorical, ColumnRole::Sensitive);
        c.domain = Some(domain.iter().map(|s| s.as_ref().to_string()).collect());
        c.privileged = Some(privileged.to_string());
        c
    }

    pub fn sensitive_range(name: &str, lo: i64, hi: i64, privileged: i64) -> Self {
        let mut c = Self::bare(name, ColumnKind::Numeric, ColumnRole::Sensitive);
        c.range = Some([lo, hi]);
        c.privileged = Some(privileged.to_string());
        c
    }

    pub fn label<S: AsRef<str>>(name: &str, classes: &[S], positive: &str) -> Self {
        let mut c = Self::bare(name, ColumnKind::Categorical, ColumnRole::Label);
        c.domain = Some(classes.iter().map(|s| s.as_ref().to_string()).collect());
        c.positive = Some(positive.to_string());
        c
    }

    pub fn with_map(mut self, from: &str, to: &str) -> Self {
        self.map.insert(from.to_string(), to.to_string());
        self
    }

    fn bare(name: &str, kind: ColumnKind, role: ColumnRole) -> Self {
        Self {
            name: name.to_string(),
            kind,
            role,
            domain: None,
            range: None,
            privileged: None,
            positive: None,
            map: BTreeMap::new(),
        }
    }

    /// Effective ordered domain (expanding `range`).
    pub fn values(&self) -> Option<Vec<String>> {
        if let Some(d) = &self.domain {
            return Some(d.clone());
        }
        self.range
            .map(|[lo, hi]| (lo..=hi).map(|v| v.to_string()).collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaFile {
    #[serde(default = "default_name")]
    name: String,
    #[serde(default = "default_delimiter")]
    delimiter: String,
    #[serde(default = "default_true")]
    header: bool,
    #[serde(default = "default_missing")]
    missing: Vec<String>,
    columns: Vec<ColumnSpec>,
}

fn default_name() -> String {
    "dataset".into()
}
fn default_delimiter() -> String {
    ",".into()
}
fn default_true() -> bool {
    true
}
fn default_missing() -> Vec<String> {
    vec!["?".into(), "".into(), "NA".into()]
}

/// Validated description of a tabular dataset: which columns are sensitive
/// attributes, which are ordinary features, and which one is the label.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaConfig {
    pub name: String,
    pub delimiter: u8,
    pub has_header: bool,
    pub missing_tokens: Vec<String>,
    pub columns: Vec<ColumnSpec>,
    sensitive: Vec<SensitiveDomain>,
    nonsensitive: Vec<usize>,
    label_column: usize,
    label_classes: Vec<String>,
    positive_label: usize,
}

/// Resolved domain of one sensitive column.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitiveDomain {
    pub column: usize,
    pub name: String,
    pub values: Vec<String>,
    pub privileged: usize,
    numeric_range: Option<[i64; 2]>,
}

impl SensitiveDomain {
    pub fn arity(&self) -> usize {
        self.values.len()
    }

    /// Position of a domain index on the unit interval.
    pub fn encode(&self, index: usize) -> f64 {
        if self.arity() <= 1 {
            0.0
        } else {
            index as f64 / (self.arity() - 1) as f64
        }
    }

    pub fn decode(&self, value: f64) -> usize {
        if self.arity() <= 1 {
            0
        } else {
            let idx = (value * (self.arity() - 1) as f64).round();
            (idx.max(0.0) as usize).min(self.arity() - 1)
        }
    }

    pub(crate) fn lookup(&self, token: &str) -> Option<usize> {
        if let Some([lo, hi]) = self.numeric_range {
            let v: f64 = token.parse().ok()?;
            if !v.is_finite() {
                return None;
            }
            let v = (v.round() as i64).clamp(lo, hi);
            return Some((v - lo) as usize);
        }
        self.values.iter().position(|v| v == token)
    }
}

impl SchemaConfig {
    pub fn new(name: &str, columns: Vec<ColumnSpec>) -> Result<Self> {
        Self::build(name.to_string(), b',', true, default_missing(), columns)
    }

    pub fn with_format(mut self, delimiter: u8, has_header: bool) -> Self {
        self.delimiter = delimiter;
        self.has_header = has_header;
        self
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: SchemaFile =
            toml::from_str(text).map_err(|e| Error::config(format!("schema: {e}")))?;
        let delimiter = match file.delimiter.as_str() {
            "\\t" | "\t" | "tab" => b'\t',
            d if d.len() == 1 => d.as_bytes()[0],
            d => {
                return Err(Error::config(format!(
                    "delimiter must be one byte, got {d:?}"
                )))
            }
        };
        Self::build(
            file.name,
            delimiter,
            file.header,
            file.missing,
            file.columns,
        )
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> String {
        let file = SchemaFile {
            name: self.name.clone(),
            delimiter: if self.delimiter == b'\t' {
                "tab".into()
            } else {
                (self.delimiter as char).to_string()
            },
            header: self.has_header,
            missing: self.missing_tokens.clone(),
            columns: self.columns.clone(),
        };
        toml::to_string(&file).expect("schema serializes")
    }

    fn build(
        name: String,
        delimiter: u8,
        has_header: bool,
        missing_tokens: Vec<String>,
        columns: Vec<ColumnSpec>,
    ) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for c in &columns {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::config(format!("duplicate column `{}`", c.name)));
            }
        }

        let labels: Vec<usize> = (0..columns.len())
            .filter(|&i| columns[i].role == ColumnRole::Label)
            .collect();
        if labels.len() != 1 {
            return Err(Error::config(format!(
                "exactly one label column required, found {}",
                labels.len()
            )));
        }
        let label_column = labels[0];
        let label_spec = &columns[label_column];
        let label_classes = label_spec
            .values()
            .ok_or_else(|| Error::config(format!("label `{}` needs a domain", label_spec.name)))?;
        if label_classes.len() < 2 {
            return Err(Error::config("label needs at least two classes"));
        }
        let positive_label = match &label_spec.positive {
            Some(p) => label_classes
                .iter()
                .position(|c| c == p)
                .ok_or_else(|| Error::config(format!("positive label `{p}` not in domain")))?,
            None => 1,
        };

        let mut sensitive = Vec::new();
        for (i, c) in columns.iter().enumerate() {
            if c.role != ColumnRole::Sensitive {
                continue;
            }
            let values = c.values().ok_or_else(|| {
                Error::config(format!(
                    "sensitive column `{}` needs a domain or range",
                    c.name
                ))
            })?;
            if values.is_empty() {
                return Err(Error::config(format!(
                    "sensitive column `{}` has an empty domain",
                    c.name
                )));
            }
            if let Some([lo, hi]) = c.range {
                if lo > hi {
                    return Err(Error::config(format!("column `{}`: empty range", c.name)));
                }
            }
            let privileged = match &c.privileged {
                Some(p) => values.iter().position(|v| v == p).ok_or_else(|| {
                    Error::config(format!(
                        "privileged value `{p}` not in domain of `{}`",
                        c.name
                    ))
                })?,
                None => {
                    return Err(Error::config(format!(
                        "sensitive column `{}` needs `privileged`",
                        c.name
                    )))
                }
            };
            sensitive.push(SensitiveDomain {
                column: i,
                name: c.name.clone(),
                values,
                privileged,
                numeric_range: if c.domain.is_none() { c.range } else { None },
            });
        }
        if sensitive.is_empty() {
            return Err(Error::config("at least one sensitive column required"));
        }

        let nonsensitive = (0..columns.len())
            .filter(|&i| columns[i].role == ColumnRole::Nonsensitive)
            .collect();

        Ok(Self {
            name,
            delimiter,
            has_header,
            missing_tokens,
            columns,
            sensitive,
            nonsensitive,
            label_column,
            label_classes,
            positive_label,
        })
    }

    pub fn sensitive(&self) -> &[SensitiveDomain] {
        &self.sensitive
    }

    pub fn sensitive_index(&self, name: &str) -> Option<usize> {
        self.sensitive.iter().position(|s| s.name == name)
    }

    /// Column indices of the non-sensitive features, in schema order.
    pub fn nonsensitive_columns(&self) -> &[usize] {
        &self.nonsensitive
    }

    pub fn label_column(&self) -> usize {
        self.label_column
    }

    pub fn label_classes(&self) -> &[String] {
        &self.label_classes
    }

    pub fn positive_label(&self) -> usize {
        self.positive_label
    }

    pub fn label_arity(&self) -> LabelArity {
        match self.label_classes.len() {
            2 => LabelArity::Binary,
            k => LabelArity::Classes(k),
        }
    }

    pub fn num_features(&self) -> usize {
        self.nonsensitive.len()
    }

    pub fn num_sensitive(&self) -> usize {
        self.sensitive.len()
    }

    /// Width of the model input vector `(x, a)`.
    pub fn input_dim(&self) -> usize {
        self.num_features() + self.num_sensitive()
    }

    pub fn sensitive_arities(&self) -> Vec<usize> {
        self.sensitive.iter().map(SensitiveDomain::arity).collect()
    }

    /// Number of members in a fully enumerated similar sub-population.
    pub fn full_subpopulation_size(&self) -> usize {
        self.sensitive_arities().iter().product()
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }
}
