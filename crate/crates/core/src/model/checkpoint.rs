//! Checkpoint layout: an 8-byte little-endian header length, a JSON header
//! `{"format", "dtype", "shapes"}`, then each weight matrix as row-major
//! little-endian `f64`.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::sage::SageModel;
use crate::error::{Error, Result};

const FORMAT: &str = "aggforge-sage-v1";

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    dtype: String,
    shapes: Vec<(usize, usize)>,
}

pub fn encode_checkpoint(model: &SageModel) -> Result<Vec<u8>> {
    let header = Header {
        format: FORMAT.into(),
        dtype: "f64".into(),
        shapes: model.weights().iter().map(|w| w.dim()).collect(),
    };
    let json = serde_json::to_vec(&header)?;
    let mut out = Vec::with_capacity(8 + json.len() + model.weights().iter().map(|w| w.len() * 8).sum::<usize>());
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for w in model.weights() {
        for v in w.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<SageModel> {
    let short = || Error::Format("checkpoint is truncated".into());
    let len_bytes: [u8; 8] = bytes.get(..8).ok_or_else(short)?.try_into().expect("8 bytes");
    let len = usize::try_from(u64::from_le_bytes(len_bytes)).map_err(|_| short())?;
    let json = bytes.get(8..8usize.checked_add(len).ok_or_else(short)?).ok_or_else(short)?;
    let header: Header = serde_json::from_slice(json)?;
    if header.format != FORMAT || header.dtype != "f64" {
        return Err(Error::Format(format!("unsupported checkpoint {} / {}", header.format, header.dtype)));
    }
    let mut rest = &bytes[8 + len..];
    let mut weights = Vec::with_capacity(header.shapes.len());
    for (r, c) in header.shapes {
        let n = r.checked_mul(c).and_then(|n| n.checked_mul(8)).ok_or_else(short)?;
        let blob = rest.get(..n).ok_or_else(short)?;
        let data = blob
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
            .collect();
        weights.push(Array2::from_shape_vec((r, c), data).expect("shape matches"));
        rest = &rest[n..];
    }
    if !rest.is_empty() {
        return Err(Error::Format(format!("{} trailing bytes in checkpoint", rest.len())));
    }
    SageModel::from_weights(weights)
}

pub fn save_checkpoint(path: &Path, model: &SageModel) -> Result<()> {
    fs::write(path, encode_checkpoint(model)?)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<SageModel> {
    decode_checkpoint(&fs::read(path)?)
}
