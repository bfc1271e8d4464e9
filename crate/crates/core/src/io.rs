//! File formats: edge lists, raw feature matrices with JSON sidecars, labels.
//!
//! Edge list: one `src dst` decimal pair per line, `#` comment lines ignored.
//! Our writer adds a `# vertices N` comment so trailing isolated vertices
//! survive a round trip; files without it get `max id + 1` vertices.
//!
//! Features: raw little-endian elements in `<name>.bin` plus a sidecar
//! `<name>.json` of the form `{"rows":R,"cols":D,"dtype":"f32"|"f64"|"i64"}`.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::element::{Dtype, Element};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeList {
    pub num_vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

pub fn parse_edge_list<R: Read>(reader: R) -> Result<EdgeList> {
    let mut edges = Vec::new();
    let mut declared: Option<usize> = None;
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(n) = comment.trim().strip_prefix("vertices") {
                declared = n.trim().parse().ok();
            }
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<usize> {
            tok.ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: "expected `src dst`".into(),
            })?
            .parse()
            .map_err(|e| Error::Parse {
                line: i + 1,
                msg: format!("{e}"),
            })
        };
        let src = parse(it.next())?;
        let dst = parse(it.next())?;
        if it.next().is_some() {
            return Err(Error::Parse {
                line: i + 1,
                msg: "trailing tokens".into(),
            });
        }
        edges.push((src, dst));
    }
    let inferred = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
    let num_vertices = declared.map_or(inferred, |n| n.max(inferred));
    Ok(EdgeList { num_vertices, edges })
}

pub fn read_edge_list(path: &Path) -> Result<EdgeList> {
    parse_edge_list(fs::File::open(path)?)
}

pub fn write_edge_list<W: Write>(edges: &[(usize, usize)], num_vertices: usize, w: W) -> Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "# vertices {num_vertices}")?;
    for &(u, v) in edges {
        writeln!(w, "{u} {v}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_edge_list(path: &Path, edges: &[(usize, usize)], num_vertices: usize) -> Result<()> {
    write_edge_list(edges, num_vertices, fs::File::create(path)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSidecar {
    pub rows: usize,
    pub cols: usize,
    pub dtype: Dtype,
}

pub fn sidecar_path(bin: &Path) -> PathBuf {
    bin.with_extension("json")
}

pub fn encode_features<T: Element>(m: &FeatureMatrix<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(m.data().len() * T::DTYPE.size_bytes());
    for &x in m.data() {
        x.write_le(&mut out);
    }
    out
}

pub fn decode_features<T: Element>(meta: FeatureSidecar, bytes: &[u8]) -> Result<FeatureMatrix<T>> {
    if meta.dtype != T::DTYPE {
        return Err(Error::Format(format!(
            "feature file holds {}, requested {}",
            meta.dtype.name(),
            T::DTYPE.name()
        )));
    }
    let size = T::DTYPE.size_bytes();
    if bytes.len() != meta.rows * meta.cols * size {
        return Err(Error::Format(format!(
            "feature payload is {} bytes, sidecar implies {}",
            bytes.len(),
            meta.rows * meta.cols * size
        )));
    }
    let data = bytes.chunks_exact(size).map(T::read_le).collect();
    FeatureMatrix::from_vec(meta.rows, meta.cols, data)
}

/// Writes `<path>` (raw payload) and its `.json` sidecar.
pub fn save_features<T: Element>(path: &Path, m: &FeatureMatrix<T>) -> Result<()> {
    fs::write(path, encode_features(m))?;
    let meta = FeatureSidecar {
        rows: m.rows(),
        cols: m.dim(),
        dtype: T::DTYPE,
    };
    fs::write(sidecar_path(path), serde_json::to_vec(&meta)?)?;
    Ok(())
}

pub fn read_sidecar(path: &Path) -> Result<FeatureSidecar> {
    Ok(serde_json::from_slice(&fs::read(sidecar_path(path))?)?)
}

pub fn load_features<T: Element>(path: &Path) -> Result<FeatureMatrix<T>> {
    let meta = read_sidecar(path)?;
    decode_features(meta, &fs::read(path)?)
}

/// Loads any stored dtype and converts to `f64`.
pub fn load_features_as_f64(path: &Path) -> Result<FeatureMatrix<f64>> {
    let meta = read_sidecar(path)?;
    let bytes = fs::read(path)?;
    Ok(match meta.dtype {
        Dtype::F32 => decode_features::<f32>(meta, &bytes)?.map(|x| x as f64),
        Dtype::F64 => decode_features::<f64>(meta, &bytes)?,
        Dtype::I64 => decode_features::<i64>(meta, &bytes)?.map(|x| x as f64),
    })
}

/// One label per line in vertex order; `-1` marks an unlabeled vertex.
pub fn save_labels(path: &Path, labels: &[Option<usize>]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for l in labels {
        match l {
            Some(c) => writeln!(w, "{c}")?,
            None => writeln!(w, "-1")?,
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_labels(path: &Path) -> Result<Vec<Option<usize>>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            let v: i64 = l.trim().parse().map_err(|e| Error::Parse {
                line: i + 1,
                msg: format!("{e}"),
            })?;
            Ok((v >= 0).then_some(v as usize))
        })
        .collect()
}
