use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use aggforge::element::{Dtype, Element};
use aggforge::gen::{random_features, GenSpec};
use aggforge::io::{
    load_features, load_features_as_f64, load_labels, read_edge_list, read_sidecar, save_edge_list, save_features,
    save_labels, sidecar_path,
};
use aggforge::kernel::{
    ap_blocked, default_block_size, plan_blocks, sweep_blocks, write_sweep_csv, SchedSpec, DEFAULT_CHUNK,
};
use aggforge::model::{estimate_memory, estimate_work, save_checkpoint, write_metrics_csv, HopSpec, TrainConfig};
use aggforge::ops::ap_reference;
use aggforge::partition::{
    build_split_trees, build_vertex_map, libra_partition, partition_stats, write_partition_dir, DEFAULT_SLACK,
};
use aggforge::{CsrGraph, FeatureMatrix, OperatorSpec};
use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::config::Overlay;
use crate::manifest::Run;
use crate::Common;

/// Raised when `--check` finds a mismatch; maps to exit code 3.
#[derive(Debug)]
pub struct VerificationFailed(pub String);

impl fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "verification failed: {}", self.0)
    }
}

impl std::error::Error for VerificationFailed {}

fn out_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

fn f32_default() -> Dtype {
    Dtype::F32
}
fn f64_default() -> Dtype {
    Dtype::F64
}
fn sixteen() -> usize {
    16
}

// ---- gen ----

#[derive(Args)]
pub struct GenArgs {
    #[command(flatten)]
    common: Common,
    /// erdos_renyi | barabasi_albert | sbm
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    m: Option<usize>,
    /// SBM block sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    blocks: Option<Vec<usize>>,
    #[arg(long)]
    p_in: Option<f64>,
    #[arg(long)]
    p_out: Option<f64>,
    /// Emit every undirected edge as two directed edges.
    #[arg(long)]
    duplicate: bool,
    /// Feature width.
    #[arg(long)]
    feature_dim: Option<usize>,
    /// f32 | f64 | i64
    #[arg(long)]
    dtype: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct GenConfig {
    #[serde(flatten)]
    spec: GenSpec,
    #[serde(default = "sixteen")]
    feature_dim: usize,
    #[serde(default = "f32_default")]
    dtype: Dtype,
}

pub fn gen(a: GenArgs) -> Result<()> {
    let mut o = Overlay::load(a.common.config.as_deref())?;
    o.set("kind", a.kind)?
        .set("n", a.n)?
        .set("p", a.p)?
        .set("m", a.m)?
        .set("blocks", a.blocks)?
        .set("p_in", a.p_in)?
        .set("p_out", a.p_out)?
        .set("seed", a.common.seed)?
        .set("feature_dim", a.feature_dim)?
        .set("dtype", a.dtype)?
        .switch("duplicate", a.duplicate);
    let cfg: GenConfig = o.build()?;
    let g = cfg.spec.generate()?;

    let dir = &a.common.out;
    out_dir(dir)?;
    let mut run = Run::new("gen", &cfg)?;
    let edges = dir.join("edges.txt");
    save_edge_list(&edges, &g.edges, g.num_vertices)?;
    run.output(&edges);

    let feats = dir.join("features.bin");
    let seed = cfg.spec.seed.wrapping_add(1);
    match cfg.dtype {
        Dtype::F32 => save_features(&feats, &random_features::<f32>(g.num_vertices, cfg.feature_dim, seed))?,
        Dtype::F64 => save_features(&feats, &random_features::<f64>(g.num_vertices, cfg.feature_dim, seed))?,
        Dtype::I64 => save_features(&feats, &random_features::<i64>(g.num_vertices, cfg.feature_dim, seed))?,
    }
    run.output(&feats);
    run.output(&sidecar_path(&feats));

    if let Some(labels) = &g.labels {
        let path = dir.join("labels.txt");
        save_labels(&path, &labels.iter().map(|&l| Some(l)).collect::<Vec<_>>())?;
        run.output(&path);
    }
    run.finish(dir)?;
    println!("{} vertices, {} edges -> {}", g.num_vertices, g.edges.len(), dir.display());
    Ok(())
}

// ---- partition ----

#[derive(Args)]
pub struct PartitionArgs {
    #[command(flatten)]
    common: Common,
    /// Edge list to partition.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    slack: Option<f64>,
}

fn default_slack() -> f64 {
    DEFAULT_SLACK
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartitionConfig {
    graph: PathBuf,
    k: usize,
    #[serde(default = "default_slack")]
    slack: f64,
    #[serde(default)]
    seed: u64,
}

pub fn partition(a: PartitionArgs) -> Result<()> {
    let mut o = Overlay::load(a.common.config.as_deref())?;
    o.set("graph", a.graph)?
        .set("k", a.k)?
        .set("slack", a.slack)?
        .set("seed", a.common.seed)?;
    let cfg: PartitionConfig = o.build()?;
    let el = read_edge_list(&cfg.graph).with_context(|| format!("reading {}", cfg.graph.display()))?;

    let ps = libra_partition(&el.edges, el.num_vertices, cfg.k, cfg.slack)?;
    let vm = build_vertex_map(&ps);
    let forest = build_split_trees(&vm, cfg.seed);
    let stats = partition_stats(&ps);

    let dir = &a.common.out;
    out_dir(dir)?;
    let mut run = Run::new("partition", &cfg)?;
    run.input(&cfg.graph);
    write_partition_dir(dir, &ps, &vm, &forest)?;
    run.output(&dir.join("meta.json"));
    for p in 0..ps.k {
        run.output(&dir.join(format!("part-{p}/edges.txt")));
        run.output(&dir.join(format!("part-{p}/l2g.txt")));
    }
    let stats_path = dir.join("stats.json");
    fs::write(&stats_path, serde_json::to_vec_pretty(&stats)?)?;
    run.output(&stats_path);
    run.finish(dir)?;
    println!("{}", serde_json::to_string(&stats)?);
    Ok(())
}

// ---- aggregate ----

#[derive(Args)]
pub struct AggregateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Vertex features (`.bin` with a `.json` sidecar); random when omitted.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Edge features, required by every binary operator but copylhs;
    /// random when omitted.
    #[arg(long)]
    edge_features: Option<PathBuf>,
    /// Width of random features.
    #[arg(long)]
    dim: Option<usize>,
    /// Element type of random features.
    #[arg(long)]
    dtype: Option<String>,
    /// `<binary>,<reduce>`, e.g. `copylhs,sum`.
    #[arg(long)]
    spec: Option<String>,
    /// Source block sizes to sweep, comma separated.
    #[arg(long, value_delimiter = ',')]
    block_sizes: Option<Vec<usize>>,
    #[arg(long)]
    cache_bytes: Option<usize>,
    #[arg(long, env = "AGGFORGE_WORKERS")]
    workers: Option<usize>,
    #[arg(long)]
    chunk: Option<usize>,
    /// Also time the unblocked reference loop.
    #[arg(long)]
    baseline: bool,
    /// Compare every blocked result with the reference; exit 3 on mismatch.
    #[arg(long)]
    check: bool,
}

fn default_spec() -> String {
    "copylhs,sum".into()
}
fn default_cache() -> usize {
    1 << 20
}
fn one() -> usize {
    1
}
fn default_chunk() -> usize {
    DEFAULT_CHUNK
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AggregateConfig {
    graph: PathBuf,
    #[serde(default)]
    features: Option<PathBuf>,
    #[serde(default)]
    edge_features: Option<PathBuf>,
    #[serde(default = "sixteen")]
    dim: usize,
    #[serde(default = "f64_default")]
    dtype: Dtype,
    #[serde(default = "default_spec")]
    spec: String,
    #[serde(default)]
    block_sizes: Option<Vec<usize>>,
    #[serde(default = "default_cache")]
    cache_bytes: usize,
    #[serde(default = "one")]
    workers: usize,
    #[serde(default = "default_chunk")]
    chunk: usize,
    #[serde(default)]
    baseline: bool,
    #[serde(default)]
    check: bool,
    #[serde(default)]
    seed: u64,
}

/// Mismatch tolerance against the reference: exact for integers, and for
/// floats `|a - b| <= tol * max(1, |b|)` since blocking changes the order
/// of floating-point reduction.
fn close<T: Element>(a: &FeatureMatrix<T>, b: &FeatureMatrix<T>) -> bool {
    let tol = match T::DTYPE {
        Dtype::I64 => return a.bitwise_eq(b),
        Dtype::F32 => 1e-4,
        Dtype::F64 => 1e-10,
    };
    a.rows() == b.rows()
        && a.dim() == b.dim()
        && a.data().iter().zip(b.data()).all(|(&x, &y)| {
            let (x, y) = (x.to_f64(), y.to_f64());
            x == y || (x.is_nan() && y.is_nan()) || (x - y).abs() <= tol * y.abs().max(1.0)
        })
}

fn aggregate_typed<T: Element>(cfg: &AggregateConfig, g: &CsrGraph, dir: &Path, run: &mut Run) -> Result<()> {
    let spec: OperatorSpec = cfg.spec.parse()?;
    let fv: FeatureMatrix<T> = match &cfg.features {
        Some(path) => {
            run.input(path);
            run.input(&sidecar_path(path));
            load_features(path)?
        }
        None => random_features(g.num_vertices(), cfg.dim, cfg.seed),
    };
    let fe: Option<FeatureMatrix<T>> = match (&cfg.edge_features, spec.binary.needs_edge_features()) {
        (Some(path), _) => {
            run.input(path);
            run.input(&sidecar_path(path));
            Some(load_features(path)?)
        }
        (None, true) => Some(random_features(g.num_edges(), fv.dim(), cfg.seed.wrapping_add(1))),
        (None, false) => None,
    };
    let elem = T::DTYPE.size_bytes();
    let sizes = cfg
        .block_sizes
        .clone()
        .unwrap_or_else(|| vec![default_block_size(fv.dim(), elem, cfg.cache_bytes)]);
    let sched = SchedSpec::new(cfg.workers, cfg.chunk)?;

    let rows = sweep_blocks(g, &fv, fe.as_ref(), spec, &sizes, cfg.cache_bytes, sched)?;
    let mut outputs = Vec::with_capacity(sizes.len());
    for &b in &sizes {
        outputs.push((b, ap_blocked(&plan_blocks(g, b)?, &fv, fe.as_ref(), spec, sched)?));
    }

    let csv = dir.join("sweep.csv");
    let mut buf = Vec::new();
    write_sweep_csv(&rows, &mut buf)?;
    let mut mismatch = None;
    if cfg.baseline || cfg.check {
        let start = Instant::now();
        let reference = ap_reference(g, &fv, fe.as_ref(), spec)?;
        let ns = start.elapsed().as_nanos();
        run.time("baseline_secs", Some(ns as f64 * 1e-9));
        if cfg.baseline {
            use std::io::Write;
            writeln!(buf, "baseline,,,,,,{ns}")?;
        }
        if cfg.check {
            mismatch = outputs.iter().find(|(_, out)| !close(out, &reference)).map(|(b, _)| *b);
        }
    }
    fs::write(&csv, buf)?;
    run.output(&csv);

    let out_path = dir.join("aggregate.bin");
    save_features(&out_path, &outputs[0].1)?;
    run.output(&out_path);
    run.output(&sidecar_path(&out_path));

    for r in &rows {
        println!("n_B={} total_io={} reuse={:.3}", r.n_blocks, r.traffic.total_io, r.traffic.reuse_fv);
    }
    if let Some(b) = mismatch {
        run.fail_verification();
        return Err(VerificationFailed(format!("block size {b} disagrees with the reference")).into());
    }
    if cfg.check {
        println!("check passed");
    }
    Ok(())
}

pub fn aggregate(a: AggregateArgs) -> Result<()> {
    let mut o = Overlay::load(a.common.config.as_deref())?;
    o.set("graph", a.graph)?
        .set("features", a.features)?
        .set("edge_features", a.edge_features)?
        .set("dim", a.dim)?
        .set("dtype", a.dtype)?
        .set("spec", a.spec)?
        .set("block_sizes", a.block_sizes)?
        .set("cache_bytes", a.cache_bytes)?
        .set("workers", a.workers)?
        .set("chunk", a.chunk)?
        .set("seed", a.common.seed)?
        .switch("baseline", a.baseline)
        .switch("check", a.check);
    let cfg: AggregateConfig = o.build()?;
    if cfg.block_sizes.as_ref().is_some_and(|s| s.is_empty()) {
        bail!("no block sizes given");
    }
    let el = read_edge_list(&cfg.graph).with_context(|| format!("reading {}", cfg.graph.display()))?;
    let dtype = match &cfg.features {
        Some(path) => read_sidecar(path).with_context(|| format!("reading sidecar of {}", path.display()))?.dtype,
        None => cfg.dtype,
    };
    let n = match &cfg.features {
        Some(path) => el.num_vertices.max(read_sidecar(path)?.rows),
        None => el.num_vertices,
    };
    let g = CsrGraph::from_edges(&el.edges, n)?;

    let dir = a.common.out.clone();
    out_dir(&dir)?;
    let mut run = Run::new("aggregate", &cfg)?;
    run.input(&cfg.graph);
    let result = match dtype {
        Dtype::F32 => aggregate_typed::<f32>(&cfg, &g, &dir, &mut run),
        Dtype::F64 => aggregate_typed::<f64>(&cfg, &g, &dir, &mut run),
        Dtype::I64 => aggregate_typed::<i64>(&cfg, &g, &dir, &mut run),
    };
    match result {
        Err(e) if !e.is::<VerificationFailed>() => Err(e),
        other => {
            run.finish(&dir)?;
            other
        }
    }
}

// ---- train ----

#[derive(Args)]
pub struct TrainArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Vertex features (`.bin` with a `.json` sidecar).
    #[arg(long)]
    features: Option<PathBuf>,
    /// One label per line, `-1` for unlabeled.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// single | 0c | cd-0 | cd-r
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    wd: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Hidden widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    hidden: Option<Vec<usize>>,
    #[arg(long, env = "AGGFORGE_WORKERS")]
    workers: Option<usize>,
    /// Step ranks on separate threads.
    #[arg(long)]
    threaded: bool,
}

#[derive(Serialize)]
struct TrainSnapshot<'a> {
    graph: &'a Path,
    features: &'a Path,
    labels: &'a Path,
    #[serde(flatten)]
    train: &'a TrainConfig,
}

#[derive(Serialize)]
struct TrainSummary {
    epochs: usize,
    final_loss: Option<f64>,
    final_train_acc: Option<f64>,
    total_elements_sent: usize,
    avg_epoch_secs_1_10: Option<f64>,
    avg_epoch_secs_10_20: Option<f64>,
}

fn path_field(o: &mut Overlay, key: &str) -> Result<PathBuf> {
    match o.take(key) {
        Some(v) => serde_json::from_value(v).with_context(|| format!("`{key}` must be a path")),
        None => bail!("missing `{key}` (flag or config)"),
    }
}

pub fn train(a: TrainArgs) -> Result<()> {
    let mut o = Overlay::load(a.common.config.as_deref())?;
    o.set("graph", a.graph)?
        .set("features", a.features)?
        .set("labels", a.labels)?
        .set("algo", a.algo)?
        .set("k", a.k)?
        .set("r", a.r)?
        .set("lr", a.lr)?
        .set("wd", a.wd)?
        .set("epochs", a.epochs)?
        .set("hidden", a.hidden)?
        .set("workers", a.workers)?
        .set("seed", a.common.seed)?
        .switch("threaded", a.threaded);
    let graph = path_field(&mut o, "graph")?;
    let features = path_field(&mut o, "features")?;
    let labels_path = path_field(&mut o, "labels")?;
    if !o.contains("algo") {
        o.set("algo", Some("single"))?;
    }
    let cfg: TrainConfig = o.build()?;
    cfg.validate()?;

    let el = read_edge_list(&graph).with_context(|| format!("reading {}", graph.display()))?;
    let feats = load_features_as_f64(&features).with_context(|| format!("reading {}", features.display()))?;
    let labels = load_labels(&labels_path).with_context(|| format!("reading {}", labels_path.display()))?;
    let n = el.num_vertices.max(feats.rows());
    if labels.len() != n {
        bail!("{} labels for {} vertices", labels.len(), n);
    }

    let dir = a.common.out.clone();
    out_dir(&dir)?;
    let mut run = Run::new(
        "train",
        &TrainSnapshot {
            graph: &graph,
            features: &features,
            labels: &labels_path,
            train: &cfg,
        },
    )?;
    for p in [&graph, &features, &sidecar_path(&features), &labels_path] {
        run.input(p);
    }

    let report = aggforge::model::train(&cfg, &el.edges, n, &feats, &labels)?;

    let metrics = dir.join("metrics.csv");
    let mut buf = Vec::new();
    write_metrics_csv(&report.metrics, &mut buf)?;
    fs::write(&metrics, buf)?;
    run.output(&metrics);

    let ckpt = dir.join("model.ckpt");
    save_checkpoint(&ckpt, &report.model)?;
    run.output(&ckpt);

    if cfg.algo.distributed().is_some() {
        let comm = dir.join("comm.csv");
        let mut buf = Vec::new();
        aggforge::drpa::write_comm_csv(&report.comm, &mut buf)?;
        fs::write(&comm, buf)?;
        run.output(&comm);
    }

    let last = report.metrics.last();
    let summary = TrainSummary {
        epochs: report.metrics.len(),
        final_loss: last.map(|m| m.loss),
        final_train_acc: last.map(|m| m.train_acc),
        total_elements_sent: report.metrics.iter().map(|m| m.elements_sent).sum(),
        avg_epoch_secs_1_10: report.avg_epoch_secs_1_10,
        avg_epoch_secs_10_20: report.avg_epoch_secs_10_20,
    };
    let summary_path = dir.join("summary.json");
    fs::write(&summary_path, serde_json::to_vec_pretty(&summary)?)?;
    run.output(&summary_path);
    run.time("avg_epoch_secs_1_10", report.avg_epoch_secs_1_10);
    run.time("avg_epoch_secs_10_20", report.avg_epoch_secs_10_20);
    run.finish(&dir)?;
    println!("{}", serde_json::to_string(&summary)?);
    Ok(())
}

// ---- estimate ----

#[derive(Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    common: Common,
    /// One aggregation hop as `vertices,avg_degree,feat_dim`; repeatable.
    #[arg(long = "hop")]
    hops: Vec<String>,
    /// `N,f,h1,h2,l` for the memory estimator.
    #[arg(long)]
    memory: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EstimateConfig {
    #[serde(default)]
    work: Option<Vec<(f64, f64, f64)>>,
    #[serde(default)]
    memory: Option<(u64, u64, u64, u64, u64)>,
}

fn numbers<T: std::str::FromStr>(s: &str, want: usize) -> Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<T>().with_context(|| format!("bad number `{t}` in `{s}`")))
        .collect::<Result<Vec<_>>>()?;
    if v.len() != want {
        bail!("`{s}` needs {want} comma-separated values");
    }
    Ok(v)
}

pub fn estimate(a: EstimateArgs) -> Result<()> {
    let mut o = Overlay::load(a.common.config.as_deref())?;
    if !a.hops.is_empty() {
        let hops = a
            .hops
            .iter()
            .map(|h| numbers::<f64>(h, 3).map(|v| (v[0], v[1], v[2])))
            .collect::<Result<Vec<_>>>()?;
        o.set("work", Some(hops))?;
    }
    if let Some(m) = &a.memory {
        let v = numbers::<u64>(m, 5)?;
        o.set("memory", Some((v[0], v[1], v[2], v[3], v[4])))?;
    }
    let cfg: EstimateConfig = o.build()?;
    if cfg.work.is_none() && cfg.memory.is_none() {
        bail!("nothing to estimate: give --hop and/or --memory");
    }
    if let Some(hops) = &cfg.work {
        if hops.iter().any(|&(n, d, f)| !(n >= 0.0 && d >= 0.0 && f >= 0.0)) {
            bail!("hop values must be non-negative");
        }
    }

    let work = cfg.work.as_ref().map(|hops| {
        let specs: Vec<HopSpec> = hops
            .iter()
            .map(|&(num_vertices, avg_degree, feat_dim)| HopSpec {
                num_vertices,
                avg_degree,
                feat_dim,
            })
            .collect();
        estimate_work(&specs)
    });
    let memory = cfg.memory.map(|(n, f, h1, h2, l)| estimate_memory(n, f, h1, h2, l));
    let report = serde_json::json!({ "work": work, "memory": memory });

    let dir = &a.common.out;
    out_dir(dir)?;
    let mut run = Run::new("estimate", &cfg)?;
    let path = dir.join("estimate.json");
    fs::write(&path, serde_json::to_vec_pretty(&report)?)?;
    run.output(&path);
    run.finish(dir)?;
    println!("{report}");
    Ok(())
}
