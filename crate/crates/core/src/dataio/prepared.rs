//! Comma-separated dumps of cleaned data: features as decimal numbers,
//! sensitive attributes and labels as their domain tokens.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use super::augment::SubPopulation;
use super::dataset::{Dataset, Record};
use super::load::load_dataset;
use super::schema::{ColumnKind, ColumnRole, SchemaConfig};
use crate::error::{Error, Result};

impl SchemaConfig {
    /// The schema as seen by files written with [`write_dataset`]: comma
    /// separated with a header, every feature numeric, no token rewrites.
    pub fn prepared_view(&self) -> SchemaConfig {
        let mut s = self.clone().with_format(b',', true);
        for c in &mut s.columns {
            if c.role == ColumnRole::Nonsensitive {
                c.kind = ColumnKind::Numeric;
                c.domain = None;
            }
            c.map.clear();
        }
        s
    }
}

fn header(schema: &SchemaConfig) -> Vec<String> {
    let mut h: Vec<String> = schema
        .nonsensitive_columns()
        .iter()
        .map(|&i| schema.columns[i].name.clone())
        .collect();
    h.extend(schema.sensitive().iter().map(|d| d.name.clone()));
    h.push(schema.columns[schema.label_column()].name.clone());
    h
}

fn row(schema: &SchemaConfig, r: &Record) -> Vec<String> {
    let mut out: Vec<String> = r.x.iter().map(|v| v.to_string()).collect();
    for (d, &v) in schema.sensitive().iter().zip(&r.a) {
        out.push(d.values[d.decode(v)].clone());
    }
    out.push(schema.label_classes()[r.y].clone());
    out
}

fn write_rows<W: Write>(
    w: W,
    mut header: Vec<String>,
    rows: impl Iterator<Item = Vec<String>>,
) -> std::result::Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(&header)?;
    header.clear();
    for r in rows {
        wtr.write_record(&r)?;
    }
    wtr.flush()?;
    Ok(())
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

pub fn write_dataset(dataset: &Dataset, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let s = &dataset.schema;
    write_rows(f, header(s), dataset.records.iter().map(|r| row(s, r)))
        .map_err(|e| csv_err(path, e))
}

/// Dump of the augmented union with an `origin_row` provenance column.
pub fn write_augmented(
    schema: &SchemaConfig,
    subpops: &[SubPopulation],
    path: &Path,
) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut h = header(schema);
    h.push("origin_row".into());
    let rows = subpops.iter().enumerate().flat_map(|(i, sp)| {
        sp.members.iter().map(move |m| {
            let mut r = row(schema, m);
            r.push(i.to_string());
            r
        })
    });
    write_rows(f, h, rows).map_err(|e| csv_err(path, e))
}

pub fn read_dataset(path: &Path, schema: &SchemaConfig) -> Result<Dataset> {
    let view = Arc::new(schema.prepared_view());
    let ds = load_dataset(path, &view)?;
    Dataset::new(Arc::new(schema.clone()), ds.records)
}
