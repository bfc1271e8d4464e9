use ndarray::Array2;

use crate::drpa::{Algo, Cluster};
use crate::error::Result;
use crate::features::FeatureMatrix;
use crate::graph::CsrGraph;
use crate::kernel::{ap_blocked, BlockPlan, SchedSpec};
use crate::ops::OperatorSpec;

pub(crate) fn to_matrix(a: &Array2<f64>) -> FeatureMatrix<f64> {
    FeatureMatrix::from_vec(a.nrows(), a.ncols(), a.iter().copied().collect()).expect("shape matches")
}

pub(crate) fn to_array(m: FeatureMatrix<f64>) -> Array2<f64> {
    let shape = (m.rows(), m.dim());
    Array2::from_shape_vec(shape, m.into_vec()).expect("shape matches")
}

/// What the model sees of one part of the graph: its rows, the
/// normalisation denominators and which rows own a loss term.
#[derive(Clone, Debug)]
pub struct PartView {
    /// Global vertex of each row.
    pub vertices: Vec<usize>,
    /// `in_degree + 1` per row.
    pub denom: Vec<f64>,
    /// Rows whose loss term is counted here.
    pub owned: Vec<bool>,
    plan_t: BlockPlan,
}

#[derive(Debug)]
enum Backend {
    Single(BlockPlan),
    Distributed { cluster: Box<Cluster<f64>>, algo: Algo },
}

/// Aggregation backend for the model: either the whole graph in one
/// process, or a cluster of ranks running one of the distributed schemes.
#[derive(Debug)]
pub struct GraphContext {
    parts: Vec<PartView>,
    backend: Backend,
    sched: SchedSpec,
}

fn denominators(deg: &[usize]) -> Vec<f64> {
    deg.iter().map(|&d| (d + 1) as f64).collect()
}

impl GraphContext {
    pub fn single(g: &CsrGraph, sched: SchedSpec, block_size: Option<usize>) -> Result<Self> {
        let b = block_size.unwrap_or(g.num_vertices()).max(1);
        let plan = BlockPlan::new(g, b)?;
        let part = PartView {
            vertices: (0..g.num_vertices()).collect(),
            denom: denominators(&g.in_degrees()),
            owned: vec![true; g.num_vertices()],
            plan_t: BlockPlan::new(&g.transpose(), b)?,
        };
        Ok(GraphContext {
            parts: vec![part],
            backend: Backend::Single(plan),
            sched,
        })
    }

    /// `0c` normalises by the partition-local in-degree, matching its
    /// local-only aggregate; the synchronising schemes use the whole-graph
    /// in-degree.
    pub fn distributed(cluster: Cluster<f64>, algo: Algo) -> Result<Self> {
        let sched = cluster.options().sched;
        let parts = cluster
            .ranks()
            .iter()
            .zip(cluster.owned())
            .zip(cluster.global_in_degrees())
            .map(|((rank, owned), global_deg)| {
                let deg = match algo {
                    Algo::ZeroComm => rank.graph().in_degrees(),
                    Algo::Cd0 | Algo::CdR => global_deg.clone(),
                };
                Ok(PartView {
                    vertices: rank.vertices().to_vec(),
                    denom: denominators(&deg),
                    owned: owned.clone(),
                    plan_t: BlockPlan::new(&rank.graph().transpose(), rank.plan().block_size())?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GraphContext {
            parts,
            backend: Backend::Distributed {
                cluster: Box::new(cluster),
                algo,
            },
            sched,
        })
    }

    pub fn parts(&self) -> &[PartView] {
        &self.parts
    }

    pub fn cluster(&self) -> Option<&Cluster<f64>> {
        match &self.backend {
            Backend::Single(_) => None,
            Backend::Distributed { cluster, .. } => Some(cluster),
        }
    }

    /// Splits a global matrix into per-part row blocks.
    pub fn split(&self, global: &Array2<f64>) -> Vec<Array2<f64>> {
        self.parts
            .iter()
            .map(|p| global.select(ndarray::Axis(0), &p.vertices))
            .collect()
    }

    /// Neighbor sum for every part.
    pub fn aggregate(&mut self, epoch: usize, layer: usize, inputs: &[Array2<f64>]) -> Result<Vec<Array2<f64>>> {
        let spec = OperatorSpec::copy_sum();
        let mats: Vec<_> = inputs.iter().map(to_matrix).collect();
        let out = match &mut self.backend {
            Backend::Single(plan) => vec![ap_blocked(plan, &mats[0], None, spec, self.sched)?],
            Backend::Distributed { cluster, algo } => cluster.run_epoch_aggregate(*algo, epoch, layer, spec, &mats)?,
        };
        Ok(out.into_iter().map(to_array).collect())
    }

    /// Adjoint of [`aggregate`](Self::aggregate): routes each destination's
    /// gradient back to its sources. Under `cd-0` the per-clone gradients
    /// are first summed over all clones, mirroring the forward broadcast;
    /// `0c` and delayed `cd-r` keep gradient flow local.
    pub fn aggregate_transposed(&mut self, epoch: usize, channel: usize, grads: &[Array2<f64>]) -> Result<Vec<Array2<f64>>> {
        let mut mats: Vec<_> = grads.iter().map(to_matrix).collect();
        if let Backend::Distributed { cluster, algo } = &mut self.backend {
            let synced = match algo {
                Algo::Cd0 => true,
                Algo::CdR => cluster.schedule().r == 0,
                Algo::ZeroComm => false,
            };
            if synced {
                mats = cluster.sync_sum(epoch, channel, mats)?;
            }
        }
        self.parts
            .iter()
            .zip(&mats)
            .map(|(p, m)| Ok(to_array(ap_blocked(&p.plan_t, m, None, OperatorSpec::copy_sum(), self.sched)?)))
            .collect()
    }

    /// Elements sent by all ranks in `epoch`; zero for a single process.
    pub fn elements_sent(&self, epoch: usize) -> usize {
        self.cluster()
            .map_or(0, |c| crate::drpa::elements_sent_in_epoch(&c.comm_report(), epoch))
    }
}
