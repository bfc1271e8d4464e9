//! Blocked aggregation with dynamic chunk scheduling.
//!
//! Blocks are processed in order. Inside a block, contiguous chunks of
//! destination rows are claimed from a shared atomic cursor by a pool of
//! workers, so each output row has exactly one writer per block. For one
//! (block, row) pair the row is loaded into an accumulator once, every
//! block-local in-edge is folded into it, and it is stored once. Because the
//! fold order is fixed as block-major then CSR order, the result does not
//! depend on the worker count or chunk size.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Barrier, Mutex};

use serde::{Deserialize, Serialize};

use crate::element::Element;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::graph::CsrGraph;
use crate::kernel::blocking::BlockPlan;
use crate::ops::{check_inputs, zero_empty_rows, OperatorSpec};

pub const DEFAULT_CHUNK: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchedSpec {
    pub workers: usize,
    /// Contiguous destination rows handed out per claim.
    pub chunk: usize,
}

impl SchedSpec {
    pub fn new(workers: usize, chunk: usize) -> Result<Self> {
        let s = SchedSpec { workers, chunk };
        s.validate()?;
        Ok(s)
    }

    pub fn serial() -> Self {
        SchedSpec {
            workers: 1,
            chunk: DEFAULT_CHUNK,
        }
    }

    pub fn with_workers(workers: usize) -> Self {
        SchedSpec {
            workers,
            chunk: DEFAULT_CHUNK,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.workers == 0 || self.chunk == 0 {
            return Err(Error::InvalidSchedule {
                workers: self.workers,
                chunk: self.chunk,
            });
        }
        Ok(())
    }
}

impl Default for SchedSpec {
    fn default() -> Self {
        Self::serial()
    }
}

/// Picks `B` so that one block of vertex features fills half the cache.
pub fn default_block_size(d: usize, elem_bytes: usize, cache_bytes: usize) -> usize {
    let row = (d * elem_bytes).max(1);
    (cache_bytes / 2 / row).max(1)
}

pub fn ap_blocked<T: Element>(
    plan: &BlockPlan,
    fv: &FeatureMatrix<T>,
    fe: Option<&FeatureMatrix<T>>,
    spec: OperatorSpec,
    sched: SchedSpec,
) -> Result<FeatureMatrix<T>> {
    let mut out = ap_blocked_raw(plan, fv, fe, spec, sched)?;
    zero_empty_rows(&mut out, |v| plan.in_degree()[v] > 0);
    Ok(out)
}

/// Like [`ap_blocked`] but rows without in-edges keep the reduction
/// identity. The distributed engine needs the raw partials so that an empty
/// local neighborhood does not masquerade as a zero-valued contribution.
pub(crate) fn ap_blocked_raw<T: Element>(
    plan: &BlockPlan,
    fv: &FeatureMatrix<T>,
    fe: Option<&FeatureMatrix<T>>,
    spec: OperatorSpec,
    sched: SchedSpec,
) -> Result<FeatureMatrix<T>> {
    sched.validate()?;
    let d = check_inputs(plan.num_vertices(), plan.num_edges(), fv, fe, spec)?;
    let n = plan.num_vertices();
    let mut out = FeatureMatrix::filled(n, d, spec.reduce.identity());
    if n == 0 || d == 0 {
        return Ok(out);
    }
    let fe = fe.filter(|_| spec.binary.needs_edge_features());
    let kernel = RowKernel { fv, fe, spec, d };

    let num_chunks = n.div_ceil(sched.chunk);
    let workers = sched.workers.min(num_chunks);
    if workers == 1 {
        let mut acc = vec![T::zero(); d];
        for block in plan.blocks() {
            kernel
                .run_rows(block, 0, out.data_mut(), &mut acc)
                .map_err(|(_, e)| e)?;
        }
        return Ok(out);
    }

    let slices: Vec<Mutex<&mut [T]>> = out
        .data_mut()
        .chunks_mut(sched.chunk * d)
        .map(Mutex::new)
        .collect();
    let cursors: Vec<AtomicUsize> = plan.blocks().iter().map(|_| AtomicUsize::new(0)).collect();
    let barrier = Barrier::new(workers);
    let abort = AtomicBool::new(false);
    let failure: Mutex<Option<(usize, usize, Error)>> = Mutex::new(None);

    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| {
                let mut acc = vec![T::zero(); d];
                for (b, block) in plan.blocks().iter().enumerate() {
                    while !abort.load(Ordering::Relaxed) {
                        let c = cursors[b].fetch_add(1, Ordering::Relaxed);
                        if c >= num_chunks {
                            break;
                        }
                        let mut rows = slices[c].lock().expect("chunk lock poisoned");
                        if let Err((row, e)) = kernel.run_rows(block, c * sched.chunk, &mut rows, &mut acc) {
                            abort.store(true, Ordering::Relaxed);
                            let mut slot = failure.lock().expect("failure lock poisoned");
                            if slot.as_ref().is_none_or(|(bb, rr, _)| (b, row) < (*bb, *rr)) {
                                *slot = Some((b, row, e));
                            }
                        }
                    }
                    barrier.wait();
                }
            });
        }
    });
    drop(slices);

    match failure.into_inner().expect("failure lock poisoned") {
        Some((_, _, e)) => Err(e),
        None => Ok(out),
    }
}

struct RowKernel<'a, T> {
    fv: &'a FeatureMatrix<T>,
    fe: Option<&'a FeatureMatrix<T>>,
    spec: OperatorSpec,
    d: usize,
}

impl<T: Element> RowKernel<'_, T> {
    /// Folds the block's in-edges into the rows held by `rows`, whose first
    /// row is destination `first_row`. On failure returns the failing row.
    fn run_rows(
        &self,
        block: &CsrGraph,
        first_row: usize,
        rows: &mut [T],
        acc: &mut [T],
    ) -> std::result::Result<(), (usize, Error)> {
        let d = self.d;
        for (r, out_row) in rows.chunks_mut(d).enumerate() {
            let v = first_row + r;
            let nbrs = block.in_neighbors(v);
            if nbrs.is_empty() {
                continue;
            }
            acc.copy_from_slice(out_row);
            for (&u, &e) in nbrs.iter().zip(block.in_edge_ids(v)) {
                self.spec
                    .accumulate(acc, self.fv.row(u), self.fe.map(|fe| fe.row(e)))
                    .map_err(|err| (v, err))?;
            }
            out_row.copy_from_slice(acc);
        }
        Ok(())
    }
}
