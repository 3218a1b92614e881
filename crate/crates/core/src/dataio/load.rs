use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use super::dataset::{Dataset, Record};
use super::schema::{ColumnKind, ColumnRole, SchemaConfig};
use crate::error::{Error, Result};

/// Load a delimiter-separated file. Rows holding any missing token are
/// dropped; categorical features become indices; numeric features stay raw.
pub fn load_dataset(path: &Path, schema: &Arc<SchemaConfig>) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(file, schema).map_err(|e| match e {
        Error::EmptyDataset(_) => Error::EmptyDataset(format!(": {}", path.display())),
        Error::SchemaMismatch(m) => Error::SchemaMismatch(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_dataset<R: Read>(reader: R, schema: &Arc<SchemaConfig>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .has_headers(schema.has_header)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);

    // position of every schema column inside a file row
    let positions: Vec<usize> = if schema.has_header {
        let header = rdr
            .headers()
            .map_err(|e| Error::SchemaMismatch(format!("unreadable header: {e}")))?
            .clone();
        schema
            .columns
            .iter()
            .map(|c| {
                header.iter().position(|h| h == c.name).ok_or_else(|| {
                    Error::SchemaMismatch(format!("column `{}` missing from header", c.name))
                })
            })
            .collect::<Result<_>>()?
    } else {
        (0..schema.columns.len()).collect()
    };

    let first_line = if schema.has_header { 2 } else { 1 };
    let mut rows: Vec<(usize, Vec<String>)> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = first_line + i;
        let rec = rec.map_err(|e| Error::Parse {
            row: line,
            column: String::new(),
            message: e.to_string(),
        })?;
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        let mut fields = Vec::with_capacity(positions.len());
        for (&p, c) in positions.iter().zip(&schema.columns) {
            let v = rec.get(p).ok_or_else(|| Error::Parse {
                row: line,
                column: c.name.clone(),
                message: format!("row has {} fields", rec.len()),
            })?;
            fields.push(v.to_string());
        }
        if fields
            .iter()
            .any(|f| schema.missing_tokens.iter().any(|m| m == f))
        {
            continue;
        }
        rows.push((line, fields));
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset(String::new()));
    }

    let canonical = |col: usize, token: &str| -> String {
        schema.columns[col]
            .map
            .get(token)
            .cloned()
            .unwrap_or_else(|| token.to_string())
    };

    // categorical features without a declared domain are indexed by sorted token
    let cat_domains: Vec<Option<Vec<String>>> = schema
        .columns
        .iter()
        .enumerate()
        .map(|(ci, c)| {
            if c.role != ColumnRole::Nonsensitive || c.kind != ColumnKind::Categorical {
                return None;
            }
            Some(c.domain.clone().unwrap_or_else(|| {
                rows.iter()
                    .map(|(_, f)| canonical(ci, &f[ci]))
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect()
            }))
        })
        .collect();

    let mut records = Vec::with_capacity(rows.len());
    for (line, fields) in &rows {
        let err = |col: usize, message: String| Error::Parse {
            row: *line,
            column: schema.columns[col].name.clone(),
            message,
        };

        let mut x = Vec::with_capacity(schema.num_features());
        for &ci in schema.nonsensitive_columns() {
            let tok = canonical(ci, &fields[ci]);
            let v = match &cat_domains[ci] {
                Some(domain) => domain
                    .iter()
                    .position(|d| *d == tok)
                    .ok_or_else(|| err(ci, format!("`{tok}` not in declared domain")))?
                    as f64,
                None => {
                    let v: f64 = tok
                        .parse()
                        .map_err(|_| err(ci, format!("`{tok}` is not numeric")))?;
                    if !v.is_finite() {
                        return Err(err(ci, format!("`{tok}` is not finite")));
                    }
                    v
                }
            };
            x.push(v);
        }

        let mut a = Vec::with_capacity(schema.num_sensitive());
        for dom in schema.sensitive() {
            let tok = canonical(dom.column, &fields[dom.column]);
            let idx = dom
                .lookup(&tok)
                .ok_or_else(|| err(dom.column, format!("`{tok}` not in sensitive domain")))?;
            a.push(dom.encode(idx));
        }

        let lc = schema.label_column();
        let tok = canonical(lc, &fields[lc]);
        let y = schema
            .label_classes()
            .iter()
            .position(|c| *c == tok)
            .ok_or_else(|| err(lc, format!("`{tok}` is not a label class")))?;

        records.push(Record { x, a, y });
    }

    Dataset::new(Arc::clone(schema), records)
}
