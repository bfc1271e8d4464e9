//! Analytic memory-traffic model for the blocked kernel.
//!
//! Two regimes per block: if the block's distinct active sources fit in the
//! cache, each is read once; otherwise every edge re-reads its source row.
//! The output is read and written once per block pass. This is a proxy for
//! hardware counters and is not calibrated against any particular machine.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::element::Element;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::graph::CsrGraph;
use crate::kernel::blocked::{ap_blocked, SchedSpec};
use crate::kernel::blocking::BlockPlan;
use crate::ops::OperatorSpec;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrafficReport {
    pub bytes_read_fv: u64,
    pub bytes_rw_fo: u64,
    pub bytes_read_fe: u64,
    pub total_io: u64,
    /// Edge-level feature reads divided by feature bytes actually fetched.
    pub reuse_fv: f64,
}

/// Per-block occupancy: `(distinct active sources, distinct touched destinations, nnz)`.
pub fn block_occupancy(plan: &BlockPlan) -> Vec<(usize, usize, usize)> {
    let mut seen = vec![usize::MAX; plan.num_vertices()];
    plan.blocks()
        .iter()
        .enumerate()
        .map(|(b, block)| {
            let mut sources = 0;
            let mut dests = 0;
            for v in 0..block.num_vertices() {
                let nbrs = block.in_neighbors(v);
                if !nbrs.is_empty() {
                    dests += 1;
                }
                for &u in nbrs {
                    if seen[u] != b {
                        seen[u] = b;
                        sources += 1;
                    }
                }
            }
            (sources, dests, block.num_edges())
        })
        .collect()
}

pub fn estimate_traffic(
    plan: &BlockPlan,
    d: usize,
    elem_bytes: usize,
    cache_bytes: usize,
    uses_fe: bool,
) -> TrafficReport {
    let row = (d * elem_bytes) as u64;
    let mut fv = 0u64;
    let mut fo = 0u64;
    for (sources, dests, nnz) in block_occupancy(plan) {
        let working_set = sources as u64 * row;
        fv += if working_set <= cache_bytes as u64 {
            working_set
        } else {
            nnz as u64 * row
        };
        fo += 2 * dests as u64 * row;
    }
    let edge_reads = plan.num_edges() as u64 * row;
    let fe = if uses_fe { edge_reads } else { 0 };
    let reuse_fv = if fv == 0 { 1.0 } else { edge_reads as f64 / fv as f64 };
    TrafficReport {
        bytes_read_fv: fv,
        bytes_rw_fo: fo,
        bytes_read_fe: fe,
        total_io: fv + fo + fe,
        reuse_fv,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    pub n_blocks: usize,
    pub block_size: usize,
    pub traffic: TrafficReport,
    pub wall_time_ns: u128,
}

/// Runs the blocked kernel once per block size and models its traffic.
/// Rows come back in ascending block-count order.
pub fn sweep_blocks<T: Element>(
    g: &CsrGraph,
    fv: &FeatureMatrix<T>,
    fe: Option<&FeatureMatrix<T>>,
    spec: OperatorSpec,
    sizes: &[usize],
    cache_bytes: usize,
    sched: SchedSpec,
) -> Result<Vec<SweepRow>> {
    if sizes.is_empty() {
        return Err(Error::InvalidParameter("block-size list is empty".into()));
    }
    let uses_fe = spec.binary.needs_edge_features();
    let mut rows = Vec::with_capacity(sizes.len());
    for &b in sizes {
        let plan = BlockPlan::new(g, b)?;
        let start = Instant::now();
        let out = ap_blocked(&plan, fv, fe, spec, sched)?;
        let wall_time_ns = start.elapsed().as_nanos();
        drop(out);
        rows.push(SweepRow {
            n_blocks: plan.num_blocks(),
            block_size: b,
            traffic: estimate_traffic(&plan, fv.dim(), T::DTYPE.size_bytes(), cache_bytes, uses_fe),
            wall_time_ns,
        });
    }
    rows.sort_by(|a, b| a.n_blocks.cmp(&b.n_blocks).then(b.block_size.cmp(&a.block_size)));
    Ok(rows)
}

pub const SWEEP_CSV_HEADER: &str =
    "n_B,bytes_read_fV,bytes_rw_fO,bytes_read_fE,total_io,reuse_fV,wall_time_ns";

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut w: W) -> Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for r in rows {
        let t = &r.traffic;
        writeln!(
            w,
            "{},{},{},{},{},{:.6},{}",
            r.n_blocks, t.bytes_read_fv, t.bytes_rw_fo, t.bytes_read_fe, t.total_io, t.reuse_fv, r.wall_time_ns
        )?;
    }
    Ok(())
}
