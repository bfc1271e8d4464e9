use std::collections::BTreeMap;
use std::ops::Range;
use std::sync::Arc;

use super::message::{AggMessage, MsgKind, PayloadEntry};
use crate::element::Element;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::graph::CsrGraph;
use crate::kernel::{ap_blocked_raw, BlockPlan, SchedSpec};
use crate::ops::{OperatorSpec, ReduceOp};

/// Where the clones of one split vertex live, as (rank, partition row).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeRoute {
    pub global_id: usize,
    pub root: (usize, usize),
    pub leaves: Vec<(usize, usize)>,
}

/// Per-rank rows being aggregated in the current epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct Work<T> {
    pub data: FeatureMatrix<T>,
    pub live: Vec<bool>,
}

impl<T: Element> Work<T> {
    pub fn all_live(data: FeatureMatrix<T>) -> Self {
        let live = vec![true; data.rows()];
        Work { data, live }
    }

    /// Rows without any contribution become zero.
    pub fn finalize(mut self) -> FeatureMatrix<T> {
        for (v, &l) in self.live.iter().enumerate() {
            if !l {
                self.data.row_mut(v).fill(T::zero());
            }
        }
        self.data
    }
}

pub(crate) type MailboxKey = (MsgKind, usize, usize);

/// One simulated rank: its partition, blocking plan, optional edge features,
/// split-tree roles and inbound mailboxes.
#[derive(Debug)]
pub struct RankState<T> {
    pub(crate) rank: usize,
    pub(crate) vertices: Vec<usize>,
    pub(crate) graph: CsrGraph,
    pub(crate) plan: BlockPlan,
    pub(crate) fe: Option<FeatureMatrix<T>>,
    pub(crate) routes: Arc<Vec<TreeRoute>>,
    /// `(tree, row)` for every tree this rank holds a leaf of, by tree.
    pub(crate) leaf_of: Vec<(usize, usize)>,
    /// `(tree, row)` for every tree this rank is the root of, by tree.
    pub(crate) root_of: Vec<(usize, usize)>,
    /// Keyed by (kind, channel, deliver epoch).
    pub(crate) mailbox: BTreeMap<MailboxKey, Vec<AggMessage<T>>>,
}

fn in_range(list: &[(usize, usize)], trees: Range<usize>) -> &[(usize, usize)] {
    let lo = list.partition_point(|&(t, _)| t < trees.start);
    let hi = list.partition_point(|&(t, _)| t < trees.end);
    &list[lo..hi]
}

fn row_of(list: &[(usize, usize)], tree: usize) -> Option<usize> {
    list.binary_search_by_key(&tree, |&(t, _)| t).ok().map(|i| list[i].1)
}

impl<T: Element> RankState<T> {
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Global IDs of this rank's rows, ascending.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn graph(&self) -> &CsrGraph {
        &self.graph
    }

    pub fn plan(&self) -> &BlockPlan {
        &self.plan
    }

    pub fn num_rows(&self) -> usize {
        self.vertices.len()
    }

    pub fn leaf_trees(&self) -> impl Iterator<Item = usize> + '_ {
        self.leaf_of.iter().map(|&(t, _)| t)
    }

    pub fn root_trees(&self) -> impl Iterator<Item = usize> + '_ {
        self.root_of.iter().map(|&(t, _)| t)
    }

    /// Aggregation over this partition's edges only. Rows with no local
    /// in-edge hold the reduction identity and are marked not live.
    pub fn local_partials(&self, input: &FeatureMatrix<T>, spec: OperatorSpec, sched: SchedSpec) -> Result<Work<T>> {
        let data = ap_blocked_raw(&self.plan, input, self.fe.as_ref(), spec, sched)?;
        let live = self.plan.in_degree().iter().map(|&d| d > 0).collect();
        Ok(Work { data, live })
    }

    /// Local aggregation with empty rows zeroed; the `0c` result.
    pub fn local_aggregate(&self, input: &FeatureMatrix<T>, spec: OperatorSpec, sched: SchedSpec) -> Result<FeatureMatrix<T>> {
        Ok(self.local_partials(input, spec, sched)?.finalize())
    }

    fn pack(
        &self,
        kind: MsgKind,
        channel: usize,
        epoch: usize,
        work: &Work<T>,
        entries: impl Iterator<Item = (usize, usize, usize)>,
    ) -> Vec<AggMessage<T>> {
        let mut by_dst: BTreeMap<usize, Vec<PayloadEntry<T>>> = BTreeMap::new();
        for (dst, tree, row) in entries {
            by_dst.entry(dst).or_default().push(PayloadEntry {
                tree,
                live: work.live[row],
                values: work.data.row(row).to_vec(),
            });
        }
        by_dst
            .into_iter()
            .map(|(dst_rank, mut payload)| {
                payload.sort_by_key(|e| e.tree);
                AggMessage {
                    src_rank: self.rank,
                    dst_rank,
                    kind,
                    channel,
                    send_epoch: epoch,
                    payload,
                }
            })
            .collect()
    }

    /// Partial rows of this rank's leaf clones in `trees`, one message per
    /// root rank.
    pub fn gather_leaves(&self, trees: Range<usize>, channel: usize, epoch: usize, work: &Work<T>) -> Vec<AggMessage<T>> {
        let entries = in_range(&self.leaf_of, trees)
            .iter()
            .map(|&(t, row)| (self.routes[t].root.0, t, row));
        self.pack(MsgKind::LeafToRoot, channel, epoch, work, entries)
    }

    /// Folds delivered leaf partials into the root rows.
    pub fn scatter_reduce_roots(&self, msgs: &[AggMessage<T>], reduce: ReduceOp, work: &mut Work<T>) -> Result<()> {
        for msg in msgs {
            for e in &msg.payload {
                let row = row_of(&self.root_of, e.tree).ok_or(Error::UnknownTree {
                    tree: e.tree,
                    src_rank: msg.src_rank,
                })?;
                if e.values.len() != work.data.dim() {
                    return Err(Error::LengthMismatch {
                        expected: work.data.dim(),
                        got: e.values.len(),
                    });
                }
                if e.live {
                    reduce.fold_row(work.data.row_mut(row), &e.values);
                    work.live[row] = true;
                }
            }
        }
        Ok(())
    }

    /// Final root rows for `trees`, one message per leaf rank.
    pub fn gather_roots(&self, trees: Range<usize>, channel: usize, epoch: usize, work: &Work<T>) -> Vec<AggMessage<T>> {
        let routes = &self.routes;
        let entries = in_range(&self.root_of, trees).iter().flat_map(|&(t, row)| {
            routes[t].leaves.iter().map(move |&(dst, _)| (dst, t, row))
        });
        self.pack(MsgKind::RootToLeaf, channel, epoch, work, entries)
    }

    /// Overwrites leaf rows with the delivered root rows.
    pub fn scatter_leaves(&self, msgs: &[AggMessage<T>], work: &mut Work<T>) -> Result<()> {
        for msg in msgs {
            for e in &msg.payload {
                let row = row_of(&self.leaf_of, e.tree).ok_or(Error::UnknownTree {
                    tree: e.tree,
                    src_rank: msg.src_rank,
                })?;
                if e.values.len() != work.data.dim() {
                    return Err(Error::LengthMismatch {
                        expected: work.data.dim(),
                        got: e.values.len(),
                    });
                }
                work.data.row_mut(row).copy_from_slice(&e.values);
                work.live[row] = e.live;
            }
        }
        Ok(())
    }
}
