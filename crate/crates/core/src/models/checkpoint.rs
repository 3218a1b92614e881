//! Checkpoint layout:
//!
//! ```text
//! b"AFAIRCK1"                magic
//! u32 little-endian          header length in bytes
//! header (UTF-8)             "arch=<name>\nsizes=<in>,...,<out>\nparams=<count>\n"
//! count x f64 little-endian  parameters, layer by layer: weights row-major, then biases
//! ```

use std::path::Path;

use super::network::{Architecture, ModelParams};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"AFAIRCK1";

pub fn encode_checkpoint(model: &ModelParams) -> Vec<u8> {
    let sizes: Vec<String> = model.sizes().iter().map(|s| s.to_string()).collect();
    let header = format!(
        "arch={}\nsizes={}\nparams={}\n",
        model.arch.name(),
        sizes.join(","),
        model.num_params()
    );
    let mut out = Vec::with_capacity(12 + header.len() + 8 * model.num_params());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(header.as_bytes());
    for p in &model.params {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<ModelParams> {
    let bad = |m: &str| Error::Checkpoint(m.to_string());
    if bytes.len() < 12 || &bytes[..8] != MAGIC {
        return Err(bad("missing magic"));
    }
    let hlen = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let header = bytes
        .get(12..12 + hlen)
        .ok_or_else(|| bad("truncated header"))?;
    let header = std::str::from_utf8(header).map_err(|_| bad("header is not UTF-8"))?;

    let mut arch = None;
    let mut sizes = None;
    let mut count = None;
    for line in header.lines() {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| bad("malformed header line"))?;
        match k {
            "arch" => arch = Some(Architecture::parse(v).map_err(|e| bad(&e.to_string()))?),
            "sizes" => {
                sizes = Some(
                    v.split(',')
                        .map(|s| s.parse::<usize>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| bad("bad sizes"))?,
                )
            }
            "params" => count = Some(v.parse::<usize>().map_err(|_| bad("bad params count"))?),
            _ => return Err(bad(&format!("unknown header key `{k}`"))),
        }
    }
    let (arch, sizes, count) = match (arch, sizes, count) {
        (Some(a), Some(s), Some(c)) => (a, s, c),
        _ => return Err(bad("incomplete header")),
    };
    let body = &bytes[12 + hlen..];
    if body.len() != 8 * count {
        return Err(bad(&format!(
            "expected {} parameter bytes, found {}",
            8 * count,
            body.len()
        )));
    }
    let params = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    ModelParams::from_parts(arch, sizes, params)
}

pub fn save_checkpoint(model: &ModelParams, path: &Path) -> Result<()> {
    std::fs::write(path, encode_checkpoint(model)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<ModelParams> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes)
}
