use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::comm::{CommRecord, Delivery};
use super::message::{AggMessage, MsgKind};
use super::rank::{RankState, TreeRoute, Work};
use super::schedule::{make_schedule, DrpaSchedule};
use crate::element::Element;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::kernel::{BlockPlan, SchedSpec};
use crate::ops::{OperatorSpec, ReduceOp};
use crate::partition::{
    build_split_trees, build_vertex_map, libra_partition, PartitionSet, SplitForest, VertexMap, DEFAULT_SLACK,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algo {
    /// Local aggregation only.
    #[serde(rename = "0c")]
    ZeroComm,
    /// Complete synchronisation every epoch.
    #[serde(rename = "cd-0")]
    Cd0,
    /// Synchronisation delayed by `r` epochs, one bin per epoch.
    #[serde(rename = "cd-r")]
    CdR,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::ZeroComm => "0c",
            Algo::Cd0 => "cd-0",
            Algo::CdR => "cd-r",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "0c" => Ok(Algo::ZeroComm),
            "cd-0" => Ok(Algo::Cd0),
            "cd-r" => Ok(Algo::CdR),
            _ => Err(Error::InvalidParameter(format!("unknown algorithm `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub k: usize,
    pub algo: Algo,
    #[serde(default)]
    pub r: usize,
    #[serde(default)]
    pub seed: u64,
}

/// How ranks are stepped between collectives. Both give bitwise-identical
/// results.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    #[default]
    Sequential,
    /// One scoped thread per rank.
    Threaded,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ClusterOptions {
    /// Source block size for every rank's kernel; `None` means one block.
    pub block_size: Option<usize>,
    pub sched: SchedSpec,
    pub execution: Execution,
}

fn par_map<A: Send, R: Send>(exec: Execution, items: Vec<A>, f: impl Fn(A) -> R + Sync) -> Vec<R> {
    match exec {
        Execution::Sequential => items.into_iter().map(f).collect(),
        Execution::Threaded => {
            let f = &f;
            std::thread::scope(|s| {
                let handles: Vec<_> = items.into_iter().map(|a| s.spawn(move || f(a))).collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("rank worker panicked"))
                    .collect()
            })
        }
    }
}

/// An in-process cluster: one [`RankState`] per partition, connected only
/// through mailboxes filled by [`Cluster::alltoall`].
#[derive(Debug)]
pub struct Cluster<T> {
    config: ClusterConfig,
    options: ClusterOptions,
    num_vertices: usize,
    num_edges: usize,
    ranks: Vec<RankState<T>>,
    edge_ids: Vec<Vec<usize>>,
    owned: Vec<Vec<bool>>,
    global_deg: Vec<Vec<usize>>,
    routes: Arc<Vec<TreeRoute>>,
    schedule: DrpaSchedule,
    log: BTreeMap<(usize, usize, usize, MsgKind), (usize, usize)>,
    trace: Vec<Delivery>,
    next_epoch: BTreeMap<usize, usize>,
}

impl<T: Element> Cluster<T> {
    pub fn new(
        ps: &PartitionSet,
        vm: &VertexMap,
        forest: &SplitForest,
        config: ClusterConfig,
        options: ClusterOptions,
    ) -> Result<Self> {
        if config.k != ps.k {
            return Err(Error::InvalidPartition(format!(
                "cluster has {} ranks but the partition set has {} parts",
                config.k, ps.k
            )));
        }
        let locate = |local: usize| -> Result<(usize, usize)> {
            let (p, _) = vm
                .lookup(local)
                .ok_or_else(|| Error::InvalidPartition(format!("local id {local} is unmapped")))?;
            Ok((p, local - vm.ranges[p].0))
        };
        let routes = forest
            .trees
            .iter()
            .map(|t| {
                Ok(TreeRoute {
                    global_id: t.global_id,
                    root: locate(t.root_local)?,
                    leaves: t.leaves_local.iter().map(|&l| locate(l)).collect::<Result<_>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let routes = Arc::new(routes);

        let mut leaf_of = vec![Vec::new(); ps.k];
        let mut root_of = vec![Vec::new(); ps.k];
        for (t, route) in routes.iter().enumerate() {
            root_of[route.root.0].push((t, route.root.1));
            for &(p, row) in &route.leaves {
                leaf_of[p].push((t, row));
            }
        }

        let deg = ps.global_in_degrees();
        let mut seen = vec![false; ps.num_vertices];
        let mut owned = Vec::with_capacity(ps.k);
        let mut global_deg = Vec::with_capacity(ps.k);
        let mut ranks = Vec::with_capacity(ps.k);
        for (p, (part, (leaves, roots))) in ps.parts.iter().zip(leaf_of.into_iter().zip(root_of)).enumerate() {
            owned.push(
                part.vertices
                    .iter()
                    .map(|&v| !std::mem::replace(&mut seen[v], true))
                    .collect(),
            );
            global_deg.push(part.vertices.iter().map(|&v| deg[v]).collect());
            let b = options.block_size.unwrap_or(part.vertices.len()).max(1);
            ranks.push(RankState {
                rank: p,
                vertices: part.vertices.clone(),
                graph: part.local.clone(),
                plan: BlockPlan::new(&part.local, b)?,
                fe: None,
                routes: Arc::clone(&routes),
                leaf_of: leaves,
                root_of: roots,
                mailbox: BTreeMap::new(),
            });
        }

        Ok(Cluster {
            config,
            options,
            num_vertices: ps.num_vertices,
            num_edges: ps.num_edges,
            ranks,
            edge_ids: ps.parts.iter().map(|p| p.edge_ids.clone()).collect(),
            owned,
            global_deg,
            schedule: make_schedule(routes.len(), config.r),
            routes,
            log: BTreeMap::new(),
            trace: Vec::new(),
            next_epoch: BTreeMap::new(),
        })
    }

    /// Partitions `edges` with the default slack, builds the vertex map and
    /// a forest seeded by `config.seed`, then the cluster.
    pub fn from_edges(
        edges: &[(usize, usize)],
        num_vertices: usize,
        config: ClusterConfig,
        options: ClusterOptions,
    ) -> Result<Self> {
        let ps = libra_partition(edges, num_vertices, config.k, DEFAULT_SLACK)?;
        let vm = build_vertex_map(&ps);
        let forest = build_split_trees(&vm, config.seed);
        Self::new(&ps, &vm, &forest, config, options)
    }

    pub fn config(&self) -> &ClusterConfig {
        &self.config
    }

    pub fn options(&self) -> &ClusterOptions {
        &self.options
    }

    pub fn k(&self) -> usize {
        self.ranks.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn ranks(&self) -> &[RankState<T>] {
        &self.ranks
    }

    pub fn routes(&self) -> &[TreeRoute] {
        &self.routes
    }

    pub fn schedule(&self) -> &DrpaSchedule {
        &self.schedule
    }

    /// For each rank, whether each row is the lowest-rank clone of its vertex.
    pub fn owned(&self) -> &[Vec<bool>] {
        &self.owned
    }

    /// For each rank, the whole-graph in-degree of each row's vertex.
    pub fn global_in_degrees(&self) -> &[Vec<usize>] {
        &self.global_deg
    }

    /// Distributes a global edge-feature matrix to the ranks holding each edge.
    pub fn set_edge_features(&mut self, fe: &FeatureMatrix<T>) -> Result<()> {
        if fe.rows() != self.num_edges {
            return Err(Error::DimensionMismatch(format!(
                "edge features have {} rows, graph has {} edges",
                fe.rows(),
                self.num_edges
            )));
        }
        for (rank, ids) in self.ranks.iter_mut().zip(&self.edge_ids) {
            rank.fe = Some(fe.gather_rows(ids));
        }
        Ok(())
    }

    /// Copies each rank's rows out of a global matrix.
    pub fn scatter_global(&self, global: &FeatureMatrix<T>) -> Result<Vec<FeatureMatrix<T>>> {
        if global.rows() != self.num_vertices {
            return Err(Error::DimensionMismatch(format!(
                "global matrix has {} rows, graph has {} vertices",
                global.rows(),
                self.num_vertices
            )));
        }
        Ok(self.ranks.iter().map(|r| global.gather_rows(&r.vertices)).collect())
    }

    /// Global matrix taking each vertex's row from its lowest-rank clone;
    /// vertices on no rank are zero.
    pub fn assemble(&self, per_rank: &[FeatureMatrix<T>]) -> Result<FeatureMatrix<T>> {
        self.check_shapes(per_rank)?;
        let d = per_rank.first().map_or(0, |m| m.dim());
        let mut out = FeatureMatrix::zeros(self.num_vertices, d);
        for ((rank, m), owned) in self.ranks.iter().zip(per_rank).zip(&self.owned) {
            for (row, &v) in rank.vertices.iter().enumerate() {
                if owned[row] {
                    out.row_mut(v).copy_from_slice(m.row(row));
                }
            }
        }
        Ok(out)
    }

    /// Whether every clone of every split vertex holds the same bits.
    pub fn clones_agree(&self, per_rank: &[FeatureMatrix<T>]) -> bool {
        self.routes.iter().all(|t| {
            let root = per_rank[t.root.0].row(t.root.1);
            t.leaves.iter().all(|&(p, row)| {
                per_rank[p]
                    .row(row)
                    .iter()
                    .zip(root)
                    .all(|(a, b)| a.to_bits_u64() == b.to_bits_u64())
            })
        })
    }

    fn check_shapes(&self, per_rank: &[FeatureMatrix<T>]) -> Result<()> {
        if per_rank.len() != self.k() {
            return Err(Error::LengthMismatch {
                expected: self.k(),
                got: per_rank.len(),
            });
        }
        for (rank, m) in self.ranks.iter().zip(per_rank) {
            if m.rows() != rank.num_rows() {
                return Err(Error::DimensionMismatch(format!(
                    "rank {} holds {} rows, input has {}",
                    rank.rank,
                    rank.num_rows(),
                    m.rows()
                )));
            }
        }
        if per_rank.windows(2).any(|w| w[0].dim() != w[1].dim()) {
            return Err(Error::DimensionMismatch("ranks disagree on feature width".into()));
        }
        Ok(())
    }

    /// Enqueues each message in its destination mailbox for `deliver_epoch`.
    pub fn alltoall(&mut self, msgs: Vec<AggMessage<T>>, deliver_epoch: usize) -> Result<()> {
        let k = self.k();
        for msg in msgs {
            if msg.dst_rank >= k {
                return Err(Error::RankOutOfRange { rank: msg.dst_rank, k });
            }
            if msg.src_rank >= k {
                return Err(Error::RankOutOfRange { rank: msg.src_rank, k });
            }
            if msg.src_rank == msg.dst_rank {
                return Err(Error::InvalidParameter(format!("rank {} sent a message to itself", msg.src_rank)));
            }
            self.log
                .entry((msg.send_epoch, msg.src_rank, msg.channel, msg.kind))
                .or_default()
                .0 += msg.elements();
            self.ranks[msg.dst_rank]
                .mailbox
                .entry((msg.kind, msg.channel, deliver_epoch))
                .or_default()
                .push(msg);
        }
        Ok(())
    }

    /// Removes and returns every rank's messages due at `epoch`, in
    /// `(src_rank, tree)` order.
    pub fn drain(&mut self, kind: MsgKind, channel: usize, epoch: usize) -> Vec<Vec<AggMessage<T>>> {
        let mut out = Vec::with_capacity(self.k());
        for rank in &mut self.ranks {
            let mut msgs = rank.mailbox.remove(&(kind, channel, epoch)).unwrap_or_default();
            msgs.sort_by_key(|m| m.src_rank);
            for m in &msgs {
                self.log.entry((epoch, rank.rank, channel, kind)).or_default().1 += m.elements();
                self.trace.push(Delivery {
                    kind,
                    channel,
                    src_rank: m.src_rank,
                    dst_rank: m.dst_rank,
                    send_epoch: m.send_epoch,
                    consume_epoch: epoch,
                    entries: m.payload.len(),
                });
            }
            out.push(msgs);
        }
        out
    }

    fn touch_log(&mut self, epoch: usize, channel: usize) {
        for rank in 0..self.k() {
            for kind in [MsgKind::LeafToRoot, MsgKind::RootToLeaf] {
                self.log.entry((epoch, rank, channel, kind)).or_default();
            }
        }
    }

    fn partials(&self, inputs: &[FeatureMatrix<T>], spec: OperatorSpec) -> Result<Vec<Work<T>>> {
        let sched = self.options.sched;
        par_map(self.options.execution, self.ranks.iter().zip(inputs).collect(), |(rank, x)| {
            rank.local_partials(x, spec, sched)
        })
        .into_iter()
        .collect()
    }

    /// Full leaf→root reduce and root→leaf broadcast over every tree, all
    /// delivered within `epoch`.
    fn sync_all(&mut self, epoch: usize, channel: usize, reduce: ReduceOp, works: &mut [Work<T>]) -> Result<()> {
        let exec = self.options.execution;
        let trees = 0..self.routes.len();

        let msgs = par_map(exec, self.ranks.iter().zip(works.iter()).collect(), |(rank, w)| {
            rank.gather_leaves(trees.clone(), channel, epoch, w)
        });
        self.alltoall(msgs.into_iter().flatten().collect(), epoch)?;

        let inbox = self.drain(MsgKind::LeafToRoot, channel, epoch);
        let items: Vec<_> = self.ranks.iter().zip(works.iter_mut()).zip(inbox).collect();
        let msgs = par_map(exec, items, |((rank, w), m)| {
            rank.scatter_reduce_roots(&m, reduce, w)?;
            Ok(rank.gather_roots(trees.clone(), channel, epoch, w))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        self.alltoall(msgs.into_iter().flatten().collect(), epoch)?;

        let inbox = self.drain(MsgKind::RootToLeaf, channel, epoch);
        let items: Vec<_> = self.ranks.iter().zip(works.iter_mut()).zip(inbox).collect();
        par_map(exec, items, |((rank, w), m)| rank.scatter_leaves(&m, w))
            .into_iter()
            .collect()
    }

    /// One aggregation step on `layer` at `epoch`. `inputs` holds every
    /// rank's rows.
    ///
    /// * `0c`: local aggregation only.
    /// * `cd-0`: local aggregation, then leaf partials are reduced into the
    ///   roots and the results broadcast back, all within the epoch.
    /// * `cd-r`: bin `epoch mod r` is gathered from the leaves and delivered
    ///   `r` epochs later; from epoch `r` delivered partials are reduced into
    ///   the current root rows and the roots sent on, again `r` epochs
    ///   ahead; from epoch `2r` delivered roots overwrite leaf rows. Epochs
    ///   must be run in order starting at 0 on every layer; `r = 0` is `cd-0`.
    pub fn run_epoch_aggregate(
        &mut self,
        algo: Algo,
        epoch: usize,
        layer: usize,
        spec: OperatorSpec,
        inputs: &[FeatureMatrix<T>],
    ) -> Result<Vec<FeatureMatrix<T>>> {
        self.check_shapes(inputs)?;
        self.touch_log(epoch, layer);
        let r = self.schedule.r;
        let mut works = match algo {
            Algo::ZeroComm => self.partials(inputs, spec)?,
            Algo::Cd0 => {
                let mut works = self.partials(inputs, spec)?;
                self.sync_all(epoch, layer, spec.reduce, &mut works)?;
                works
            }
            Algo::CdR if r == 0 => {
                let mut works = self.partials(inputs, spec)?;
                self.sync_all(epoch, layer, spec.reduce, &mut works)?;
                works
            }
            Algo::CdR => self.delayed_step(epoch, layer, spec, inputs)?,
        };
        Ok(works.drain(..).map(Work::finalize).collect())
    }

    fn delayed_step(
        &mut self,
        epoch: usize,
        layer: usize,
        spec: OperatorSpec,
        inputs: &[FeatureMatrix<T>],
    ) -> Result<Vec<Work<T>>> {
        let expected = self.next_epoch.get(&layer).copied().unwrap_or(0);
        if epoch != expected {
            return Err(Error::OutOfOrderEpoch {
                layer,
                expected,
                got: epoch,
            });
        }
        self.next_epoch.insert(layer, epoch + 1);

        let exec = self.options.execution;
        let r = self.schedule.r;
        let bin = self.schedule.bin_for_epoch(epoch);
        let mut works = self.partials(inputs, spec)?;

        let msgs = par_map(exec, self.ranks.iter().zip(works.iter()).collect(), |(rank, w)| {
            rank.gather_leaves(bin.clone(), layer, epoch, w)
        });
        self.alltoall(msgs.into_iter().flatten().collect(), epoch + r)?;

        if epoch >= r {
            let inbox = self.drain(MsgKind::LeafToRoot, layer, epoch);
            let items: Vec<_> = self.ranks.iter().zip(works.iter_mut()).zip(inbox).collect();
            let msgs = par_map(exec, items, |((rank, w), m)| {
                rank.scatter_reduce_roots(&m, spec.reduce, w)?;
                Ok(rank.gather_roots(bin.clone(), layer, epoch, w))
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            self.alltoall(msgs.into_iter().flatten().collect(), epoch + r)?;
        }

        if epoch >= 2 * r {
            let inbox = self.drain(MsgKind::RootToLeaf, layer, epoch);
            let items: Vec<_> = self.ranks.iter().zip(works.iter_mut()).zip(inbox).collect();
            par_map(exec, items, |((rank, w), m)| rank.scatter_leaves(&m, w))
                .into_iter()
                .collect::<Result<()>>()?;
        }
        Ok(works)
    }

    /// Sums every split vertex's rows across its clones and leaves the total
    /// at every clone. Used for gradient exchange.
    pub fn sync_sum(&mut self, epoch: usize, channel: usize, rows: Vec<FeatureMatrix<T>>) -> Result<Vec<FeatureMatrix<T>>> {
        self.check_shapes(&rows)?;
        self.touch_log(epoch, channel);
        let mut works: Vec<Work<T>> = rows.into_iter().map(Work::all_live).collect();
        self.sync_all(epoch, channel, ReduceOp::Sum, &mut works)?;
        Ok(works.into_iter().map(|w| w.data).collect())
    }

    /// Counters for every (epoch, rank, channel, kind) touched so far.
    pub fn comm_report(&self) -> Vec<CommRecord> {
        self.log
            .iter()
            .map(|(&(epoch, rank, layer, kind), &(sent, recv))| CommRecord {
                epoch,
                rank,
                layer,
                kind,
                elements_sent: sent,
                elements_received: recv,
            })
            .collect()
    }

    pub fn delivery_trace(&self) -> &[Delivery] {
        &self.trace
    }

    /// Messages still waiting in mailboxes.
    pub fn pending_messages(&self) -> usize {
        self.ranks.iter().flat_map(|r| r.mailbox.values()).map(Vec::len).sum()
    }
}

/// Element-wise sum of one vector per rank, reduced in rank order.
pub fn allreduce_sum<T: Element>(vectors: &[Vec<T>]) -> Result<Vec<T>> {
    let Some(first) = vectors.first() else {
        return Err(Error::InvalidParameter("allreduce over zero ranks".into()));
    };
    let mut acc = first.clone();
    for v in &vectors[1..] {
        if v.len() != acc.len() {
            return Err(Error::LengthMismatch {
                expected: acc.len(),
                got: v.len(),
            });
        }
        for (a, &x) in acc.iter_mut().zip(v) {
            *a = a.add(x);
        }
    }
    Ok(acc)
}
