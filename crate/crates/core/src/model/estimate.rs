use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopSpec {
    pub num_vertices: f64,
    pub avg_degree: f64,
    pub feat_dim: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkEstimate {
    /// Billions of operations per hop.
    pub per_hop: Vec<f64>,
    pub total: f64,
}

/// Aggregation work per hop: vertices × average degree × feature width.
pub fn estimate_work(hops: &[HopSpec]) -> WorkEstimate {
    let per_hop: Vec<f64> = hops
        .iter()
        .map(|h| h.num_vertices * h.avg_degree * h.feat_dim / 1e9)
        .collect();
    let total = per_hop.iter().sum();
    WorkEstimate { per_hop, total }
}

/// Peak element counts for a three-layer model over `n` vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryEstimate {
    pub weights: u128,
    pub input: u128,
    pub aggregation: u128,
    pub mlp: u128,
    pub total: u128,
}

pub fn estimate_memory(n: u64, f: u64, h1: u64, h2: u64, l: u64) -> MemoryEstimate {
    let (n, f, h1, h2, l) = (n as u128, f as u128, h1 as u128, h2 as u128, l as u128);
    let weights = f * h1 + h1 * h2 + h2 * l;
    let input = n * f;
    let aggregation = n * (f + h1 + h2);
    let mlp = n * (h1 + h2 + l);
    MemoryEstimate {
        weights,
        input,
        aggregation,
        mlp,
        total: weights + input + aggregation + mlp,
    }
}
