//! Seeded synthetic graphs and features.
//!
//! Undirected generators either duplicate each edge into both directions or,
//! without duplication, emit one randomly oriented directed edge. Barabási–
//! Albert edges point from the newly attached vertex to its targets.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::element::{Dtype, Element};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphKind {
    ErdosRenyi { n: usize, p: f64 },
    BarabasiAlbert { n: usize, m: usize },
    Sbm { blocks: Vec<usize>, p_in: f64, p_out: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    #[serde(flatten)]
    pub kind: GraphKind,
    #[serde(default)]
    pub seed: u64,
    /// Emit every undirected edge as two directed edges.
    #[serde(default)]
    pub duplicate: bool,
}

#[derive(Clone, Debug)]
pub struct GeneratedGraph {
    pub num_vertices: usize,
    pub edges: Vec<(usize, usize)>,
    /// Ground-truth block labels (SBM only).
    pub labels: Option<Vec<usize>>,
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("{name}={p} is not a probability")));
    }
    Ok(())
}

impl GenSpec {
    pub fn new(kind: GraphKind, seed: u64, duplicate: bool) -> Self {
        GenSpec { kind, seed, duplicate }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            GraphKind::ErdosRenyi { p, .. } => check_prob("p", *p),
            GraphKind::BarabasiAlbert { n, m } => {
                if *m == 0 || *m >= *n {
                    return Err(Error::InvalidParameter(format!(
                        "barabasi_albert needs 1 <= m < n (n={n}, m={m})"
                    )));
                }
                Ok(())
            }
            GraphKind::Sbm { blocks, p_in, p_out } => {
                if blocks.is_empty() {
                    return Err(Error::InvalidParameter("sbm needs at least one block".into()));
                }
                check_prob("p_in", *p_in)?;
                check_prob("p_out", *p_out)
            }
        }
    }

    pub fn generate(&self) -> Result<GeneratedGraph> {
        self.validate()?;
        let mut rng = rng_from_seed(self.seed);
        let mut undirected = Vec::new();
        let (n, labels) = match &self.kind {
            GraphKind::ErdosRenyi { n, p } => {
                gnp_pairs(*n, *p, &mut rng, &mut undirected);
                (*n, None)
            }
            GraphKind::BarabasiAlbert { n, m } => {
                barabasi_albert(*n, *m, &mut rng, &mut undirected);
                (*n, None)
            }
            GraphKind::Sbm { blocks, p_in, p_out } => {
                let labels: Vec<usize> = blocks
                    .iter()
                    .enumerate()
                    .flat_map(|(b, &size)| std::iter::repeat_n(b, size))
                    .collect();
                let n = labels.len();
                for u in 0..n {
                    for v in u + 1..n {
                        let p = if labels[u] == labels[v] { *p_in } else { *p_out };
                        if rng.random::<f64>() < p {
                            undirected.push((v, u));
                        }
                    }
                }
                (n, Some(labels))
            }
        };

        let mut edges = Vec::with_capacity(undirected.len() * if self.duplicate { 2 } else { 1 });
        let oriented = matches!(self.kind, GraphKind::BarabasiAlbert { .. });
        for (a, b) in undirected {
            if self.duplicate {
                edges.push((a, b));
                edges.push((b, a));
            } else if oriented || rng.random::<bool>() {
                edges.push((a, b));
            } else {
                edges.push((b, a));
            }
        }
        Ok(GeneratedGraph {
            num_vertices: n,
            edges,
            labels,
        })
    }
}

/// G(n, p) over unordered pairs by geometric skipping (Batagelj–Brandes).
/// Pairs come out as `(v, w)` with `w < v`.
fn gnp_pairs(n: usize, p: f64, rng: &mut ChaCha8Rng, out: &mut Vec<(usize, usize)>) {
    if p <= 0.0 || n < 2 {
        return;
    }
    if p >= 1.0 {
        for v in 1..n {
            for w in 0..v {
                out.push((v, w));
            }
        }
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut v: usize = 1;
    let mut w: i64 = -1;
    while v < n {
        let r: f64 = rng.random();
        w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            out.push((v, w as usize));
        }
    }
}

/// Preferential attachment: each new vertex links to `m` distinct earlier
/// vertices drawn from the degree-weighted pool. Yields `m * (n - m)` pairs
/// `(new, target)`.
fn barabasi_albert(n: usize, m: usize, rng: &mut ChaCha8Rng, out: &mut Vec<(usize, usize)>) {
    let mut targets: Vec<usize> = (0..m).collect();
    let mut pool: Vec<usize> = Vec::with_capacity(2 * m * n);
    for s in m..n {
        for &t in &targets {
            out.push((s, t));
        }
        pool.extend_from_slice(&targets);
        pool.extend(std::iter::repeat_n(s, m));
        targets.clear();
        while targets.len() < m {
            let &t = pool.choose(rng).expect("pool is non-empty");
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
    }
}

/// Seeded features: uniform(-1, 1) for floating-point types. Integer types
/// would truncate that range to zero, so they draw uniformly from
/// `-100..=100` instead.
pub fn random_features<T: Element>(rows: usize, d: usize, seed: u64) -> FeatureMatrix<T> {
    let mut rng = rng_from_seed(seed);
    let data = (0..rows * d)
        .map(|_| match T::DTYPE {
            Dtype::I64 => T::from_f64(rng.random_range(-100i64..=100) as f64),
            Dtype::F32 | Dtype::F64 => T::from_f64(rng.random_range(-1.0..1.0)),
        })
        .collect();
    FeatureMatrix::from_vec(rows, d, data).expect("shape matches")
}
