use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::context::GraphContext;
use super::loss::loss_grad;
use super::sage::SageModel;
use crate::drpa::{Algo, Cluster, ClusterConfig, ClusterOptions, CommRecord, Execution};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::graph::CsrGraph;
use crate::kernel::SchedSpec;
use crate::partition::{build_split_trees, build_vertex_map, libra_partition, DEFAULT_SLACK};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrainAlgo {
    #[serde(rename = "single")]
    Single,
    #[serde(rename = "0c")]
    ZeroComm,
    #[serde(rename = "cd-0")]
    Cd0,
    #[serde(rename = "cd-r")]
    CdR,
}

impl TrainAlgo {
    pub fn distributed(self) -> Option<Algo> {
        match self {
            TrainAlgo::Single => None,
            TrainAlgo::ZeroComm => Some(Algo::ZeroComm),
            TrainAlgo::Cd0 => Some(Algo::Cd0),
            TrainAlgo::CdR => Some(Algo::CdR),
        }
    }
}

impl fmt::Display for TrainAlgo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.distributed().map_or("single", Algo::name))
    }
}

impl FromStr for TrainAlgo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(TrainAlgo::Single),
            _ => Ok(match s.parse::<Algo>()? {
                Algo::ZeroComm => TrainAlgo::ZeroComm,
                Algo::Cd0 => TrainAlgo::Cd0,
                Algo::CdR => TrainAlgo::CdR,
            }),
        }
    }
}

fn default_one() -> usize {
    1
}
fn default_lr() -> f64 {
    0.01
}
fn default_wd() -> f64 {
    5e-4
}
fn default_epochs() -> usize {
    20
}
fn default_hidden() -> Vec<usize> {
    vec![16, 16]
}
fn default_slack() -> f64 {
    DEFAULT_SLACK
}

/// Training run settings. In distributed runs each labeled vertex's loss is
/// counted once, at its lowest-rank clone; vertices without edges belong to
/// no partition and so take no part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub algo: TrainAlgo,
    #[serde(default = "default_one")]
    pub k: usize,
    #[serde(default)]
    pub r: usize,
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default = "default_wd")]
    pub wd: f64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default)]
    pub seed: u64,
    /// Hidden layer widths; the default gives a three-layer model.
    #[serde(default = "default_hidden")]
    pub hidden: Vec<usize>,
    /// Output classes; inferred from the labels when absent.
    #[serde(default)]
    pub classes: Option<usize>,
    #[serde(default = "default_slack")]
    pub slack: f64,
    #[serde(default = "default_one")]
    pub workers: usize,
    #[serde(default)]
    pub block_size: Option<usize>,
    #[serde(default)]
    pub threaded: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            algo: TrainAlgo::Single,
            k: 1,
            r: 0,
            lr: default_lr(),
            wd: default_wd(),
            epochs: default_epochs(),
            seed: 0,
            hidden: default_hidden(),
            classes: None,
            slack: DEFAULT_SLACK,
            workers: 1,
            block_size: None,
            threaded: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.algo == TrainAlgo::Single && self.k != 1 {
            return bad(format!("single-process training needs k=1, got k={}", self.k));
        }
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if !(self.lr.is_finite() && self.lr >= 0.0) || !(self.wd.is_finite() && self.wd >= 0.0) {
            return bad(format!("lr={} wd={} must be finite and non-negative", self.lr, self.wd));
        }
        if self.hidden.contains(&0) || self.workers == 0 || self.block_size == Some(0) {
            return bad("widths, workers and block size must be positive".into());
        }
        Ok(())
    }

    fn sched(&self) -> SchedSpec {
        SchedSpec::with_workers(self.workers)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub loss: f64,
    pub train_acc: f64,
    pub elements_sent: usize,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct TrainReport {
    pub metrics: Vec<EpochMetrics>,
    pub model: SageModel,
    /// Mean epoch time over epochs 1–10 (1-based).
    pub avg_epoch_secs_1_10: Option<f64>,
    /// Mean epoch time over epochs 10–20 (1-based), the window used once
    /// delayed communication has reached steady state.
    pub avg_epoch_secs_10_20: Option<f64>,
    pub comm: Vec<CommRecord>,
}

pub const METRICS_CSV_HEADER: &str = "epoch,loss,train_acc,elements_sent";

pub fn write_metrics_csv<W: Write>(metrics: &[EpochMetrics], mut w: W) -> Result<()> {
    writeln!(w, "{METRICS_CSV_HEADER}")?;
    for m in metrics {
        writeln!(w, "{},{},{},{}", m.epoch, m.loss, m.train_acc, m.elements_sent)?;
    }
    Ok(())
}

fn window_mean(metrics: &[EpochMetrics], first: usize, last: usize) -> Option<f64> {
    let xs: Vec<f64> = metrics
        .iter()
        .filter(|m| (first..=last).contains(&(m.epoch + 1)))
        .map(|m| m.seconds)
        .collect();
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Builds the aggregation backend described by `cfg`.
pub fn build_context(cfg: &TrainConfig, edges: &[(usize, usize)], num_vertices: usize) -> Result<GraphContext> {
    cfg.validate()?;
    match cfg.algo.distributed() {
        None => GraphContext::single(&CsrGraph::from_edges(edges, num_vertices)?, cfg.sched(), cfg.block_size),
        Some(algo) => {
            let ps = libra_partition(edges, num_vertices, cfg.k, cfg.slack)?;
            let vm = build_vertex_map(&ps);
            let forest = build_split_trees(&vm, cfg.seed);
            let config = ClusterConfig {
                k: cfg.k,
                algo,
                r: cfg.r,
                seed: cfg.seed,
            };
            let options = ClusterOptions {
                block_size: cfg.block_size,
                sched: cfg.sched(),
                execution: if cfg.threaded { Execution::Threaded } else { Execution::Sequential },
            };
            GraphContext::distributed(Cluster::new(&ps, &vm, &forest, config, options)?, algo)
        }
    }
}

/// Full-batch training: forward, loss, backward, gradient allreduce and an
/// SGD step per epoch.
pub fn train(
    cfg: &TrainConfig,
    edges: &[(usize, usize)],
    num_vertices: usize,
    features: &FeatureMatrix<f64>,
    labels: &[Option<usize>],
) -> Result<TrainReport> {
    if features.rows() != num_vertices || labels.len() != num_vertices {
        return Err(Error::DimensionMismatch(format!(
            "{} vertices, {} feature rows, {} labels",
            num_vertices,
            features.rows(),
            labels.len()
        )));
    }
    let classes = match cfg.classes {
        Some(c) => c,
        None => labels.iter().flatten().max().map_or(0, |&m| m + 1),
    };
    let mut dims = vec![features.dim()];
    dims.extend(&cfg.hidden);
    dims.push(classes);
    let mut model = SageModel::new(&dims, cfg.seed)?;

    let mut ctx = build_context(cfg, edges, num_vertices)?;
    let x_global = Array2::from_shape_vec((num_vertices, features.dim()), features.data().to_vec())
        .expect("shape matches");
    let x = ctx.split(&x_global);
    let part_labels: Vec<Vec<Option<usize>>> = ctx
        .parts()
        .iter()
        .map(|p| p.vertices.iter().map(|&v| labels[v]).collect())
        .collect();
    let owned: Vec<Vec<bool>> = ctx.parts().iter().map(|p| p.owned.clone()).collect();

    let mut metrics = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let start = Instant::now();
        let logits = model.forward(&mut ctx, epoch, &x)?;
        let out = loss_grad(&logits, &part_labels, &owned)?;
        let grads = model.backward(&mut ctx, &out.dlogits, false)?;
        model.sgd_step(&grads.weights, cfg.lr, cfg.wd)?;
        metrics.push(EpochMetrics {
            epoch,
            loss: out.loss,
            train_acc: out.accuracy(),
            elements_sent: ctx.elements_sent(epoch),
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(TrainReport {
        avg_epoch_secs_1_10: window_mean(&metrics, 1, 10),
        avg_epoch_secs_10_20: window_mean(&metrics, 10, 20),
        comm: ctx.cluster().map(|c| c.comm_report()).unwrap_or_default(),
        metrics,
        model,
    })
}
