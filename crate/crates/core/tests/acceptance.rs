//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL` line
//! (run with `--nocapture` to see them) and fails when its criterion does.
//! Tolerances and runtime budgets are pinned below.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use aggforge::drpa::{Algo, Cluster, ClusterConfig, ClusterOptions, CommRecord, MsgKind};
use aggforge::gen::{random_features, GenSpec, GraphKind};
use aggforge::kernel::{ap_blocked, estimate_traffic, plan_blocks, SchedSpec};
use aggforge::model::{
    estimate_memory, estimate_work, loss_grad, train, GraphContext, HopSpec, SageModel, TrainAlgo, TrainConfig,
};
use aggforge::ops::ap_reference;
use aggforge::partition::{libra_partition, replication_factor};
use aggforge::{BinaryOp, CsrGraph, Element, FeatureMatrix, OperatorSpec, ReduceOp};
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const F32_SUM_REL: f64 = 1e-6;
const F64_SUM_REL: f64 = 1e-10;
const GRAD_EPS: f64 = 1e-5;
const GRAD_REL: f64 = 1e-4;
/// Denominator floor for the gradient check's relative error, so that
/// entries whose true value is ~0 are judged by absolute error instead.
const GRAD_REL_FLOOR: f64 = 1e-6;
const LOSS_REL: f64 = 1e-8;
const TABLE_ABS: f64 = 0.01;

fn report(n: usize, name: &str, start: Instant, budget: Option<Duration>, outcome: Result<String, String>) {
    let elapsed = start.elapsed();
    let outcome = match (outcome, budget) {
        (Ok(_), Some(b)) if elapsed > b => Err(format!("took {elapsed:.2?}, budget {b:?}")),
        (o, _) => o,
    };
    let (status, detail) = match &outcome {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    println!("criterion {n:>2} ({name}): {status} [{elapsed:.2?}] {detail}");
    if let Err(d) = outcome {
        panic!("criterion {n} failed: {d}");
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Bernoulli(p) directed graph without self loops, edges in shuffled order
/// so CSR neighbor order differs from source order.
fn random_graph(r: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && r.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges.shuffle(r);
    edges
}

fn int_matrix(r: &mut ChaCha8Rng, rows: usize, d: usize, nonzero: bool) -> FeatureMatrix<i64> {
    let data = (0..rows * d)
        .map(|_| loop {
            let x = r.random_range(-1000i64..=1000);
            if !nonzero || x != 0 {
                break x;
            }
        })
        .collect();
    FeatureMatrix::from_vec(rows, d, data).unwrap()
}

fn float_matrix<T: Element>(r: &mut ChaCha8Rng, rows: usize, d: usize, lo: f64, hi: f64) -> FeatureMatrix<T> {
    let data = (0..rows * d).map(|_| T::from_f64(r.random_range(lo..hi))).collect();
    FeatureMatrix::from_vec(rows, d, data).unwrap()
}

fn max_rel<T: Element>(a: &FeatureMatrix<T>, b: &FeatureMatrix<T>) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            let (x, y) = (x.to_f64(), y.to_f64());
            if x == y {
                0.0
            } else {
                (x - y).abs() / y.abs().max(f64::MIN_POSITIVE)
            }
        })
        .fold(0.0, f64::max)
}

#[test]
fn criterion_01_kernel_oracle_equivalence() {
    let start = Instant::now();
    let outcome = (|| {
        let mut r = rng(101);
        let mut worst_f32: f64 = 0.0;
        for i in 0..200 {
            let n = r.random_range(1..=200);
            let p = r.random_range(0.01..=0.5);
            let edges = random_graph(&mut r, n, p);
            let g = CsrGraph::from_edges(&edges, n).unwrap();
            let d = 3;
            let fv = int_matrix(&mut r, n, d, false);
            let fe = int_matrix(&mut r, edges.len(), d, true);
            let fv32: FeatureMatrix<f32> = float_matrix(&mut r, n, d, 0.5, 1.5);
            let want32 = ap_reference(&g, &fv32, None, OperatorSpec::copy_sum()).unwrap();
            let wants: Vec<_> = OperatorSpec::all()
                .map(|spec| (spec, ap_reference(&g, &fv, Some(&fe), spec).unwrap()))
                .collect();
            for b in [1, 7, 64, n] {
                let plan = plan_blocks(&g, b).unwrap();
                for (spec, want) in &wants {
                    let got = ap_blocked(&plan, &fv, Some(&fe), *spec, SchedSpec::serial()).unwrap();
                    if !got.bitwise_eq(want) {
                        return Err(format!("instance {i} (n={n}) {spec} B={b}: integer mismatch"));
                    }
                }
                let got32 = ap_blocked(&plan, &fv32, None, OperatorSpec::copy_sum(), SchedSpec::serial()).unwrap();
                worst_f32 = worst_f32.max(max_rel(&got32, &want32));
            }
        }
        if worst_f32 > F32_SUM_REL {
            return Err(format!("f32 sum rel error {worst_f32:.3e} > {F32_SUM_REL:e}"));
        }
        Ok(format!("200 graphs x 18 ops x 4 block sizes bitwise; f32 max rel {worst_f32:.2e}"))
    })();
    report(1, "kernel oracle equivalence", start, Some(Duration::from_secs(60)), outcome);
}

#[test]
fn criterion_02_scheduler_determinism() {
    let start = Instant::now();
    let outcome = (|| {
        let mut r = rng(202);
        for i in 0..20 {
            let n = r.random_range(50..=300);
            let p = r.random_range(0.02..0.3);
            let edges = random_graph(&mut r, n, p);
            let g = CsrGraph::from_edges(&edges, n).unwrap();
            let fv: FeatureMatrix<f32> = float_matrix(&mut r, n, 8, -1.0, 1.0);
            let fe: FeatureMatrix<f32> = float_matrix(&mut r, edges.len(), 8, -1.0, 1.0);
            let spec = OperatorSpec::new(BinaryOp::Mul, ReduceOp::Sum);
            let plan = plan_blocks(&g, r.random_range(1..=n)).unwrap();
            let mut hashes = BTreeSet::new();
            for workers in [1, 2, 8] {
                for chunk in [1, 64] {
                    let sched = SchedSpec::new(workers, chunk).unwrap();
                    hashes.insert(ap_blocked(&plan, &fv, Some(&fe), spec, sched).unwrap().content_hash());
                }
            }
            if hashes.len() != 1 {
                return Err(format!("instance {i}: {} distinct output hashes", hashes.len()));
            }
        }
        Ok("20 instances x 6 schedules, one hash each".into())
    })();
    report(2, "scheduler determinism", start, Some(Duration::from_secs(10)), outcome);
}

#[test]
fn criterion_03_partition_soundness() {
    let start = Instant::now();
    let outcome = (|| {
        let graphs = [
            ("ba", GenSpec::new(GraphKind::BarabasiAlbert { n: 5000, m: 4 }, 1, true)),
            (
                "sbm",
                GenSpec::new(
                    GraphKind::Sbm {
                        blocks: vec![400, 300, 300],
                        p_in: 0.02,
                        p_out: 0.002,
                    },
                    2,
                    true,
                ),
            ),
        ];
        for (name, spec) in graphs {
            let g = spec.generate().unwrap();
            let m = g.edges.len();
            for k in [2, 4, 8] {
                let ps = libra_partition(&g.edges, g.num_vertices, k, 1.1).unwrap();
                let mut seen = vec![0u8; m];
                for part in &ps.parts {
                    for (&e, &edge) in part.edge_ids.iter().zip(&part.edges) {
                        seen[e] += 1;
                        if g.edges[e] != edge {
                            return Err(format!("{name} k={k}: edge {e} altered"));
                        }
                    }
                }
                if seen.iter().any(|&c| c != 1) {
                    return Err(format!("{name} k={k}: an edge is not assigned exactly once"));
                }
                let cap = (1.1 * m as f64 / k as f64).ceil() as usize;
                let max_load = ps.parts.iter().map(|p| p.edges.len()).max().unwrap();
                if max_load > cap {
                    return Err(format!("{name} k={k}: load {max_load} > {cap}"));
                }
                let rf = replication_factor(&ps);
                if !(1.0..=k as f64).contains(&rf) {
                    return Err(format!("{name} k={k}: rf {rf}"));
                }
                if libra_partition(&g.edges, g.num_vertices, k, 1.1).unwrap() != ps {
                    return Err(format!("{name} k={k}: rerun differs"));
                }
            }
        }
        Ok("BA(5000,4) and SBM(1000), k in {2,4,8}".into())
    })();
    report(3, "partition soundness", start, Some(Duration::from_secs(30)), outcome);
}

/// Fifty small random instances shared by criteria 4 and 5.
fn cluster_instances() -> Vec<(usize, Vec<(usize, usize)>)> {
    let mut r = rng(404);
    (0..50)
        .map(|_| {
            let n = r.random_range(10..=60);
            let p = r.random_range(0.03..0.2);
            (n, random_graph(&mut r, n, p))
        })
        .collect()
}

fn cluster<T: Element>(edges: &[(usize, usize)], n: usize, k: usize, algo: Algo, r: usize) -> Cluster<T> {
    let config = ClusterConfig { k, algo, r, seed: 7 };
    Cluster::from_edges(edges, n, config, ClusterOptions::default()).unwrap()
}

#[test]
fn criterion_04_cd0_fidelity() {
    let start = Instant::now();
    let outcome = (|| {
        let mut r = rng(405);
        let mut worst: f64 = 0.0;
        for (i, (n, edges)) in cluster_instances().into_iter().enumerate() {
            let g = CsrGraph::from_edges(&edges, n).unwrap();
            let fv = int_matrix(&mut r, n, 2, false);
            let fe = int_matrix(&mut r, edges.len(), 2, true);
            let fv64: FeatureMatrix<f64> = float_matrix(&mut r, n, 4, -1.0, 1.0);
            let want64 = ap_reference(&g, &fv64, None, OperatorSpec::copy_sum()).unwrap();
            for k in [2, 3, 4] {
                let mut c = cluster::<i64>(&edges, n, k, Algo::Cd0, 0);
                c.set_edge_features(&fe).unwrap();
                let inputs = c.scatter_global(&fv).unwrap();
                for (e, spec) in OperatorSpec::all().enumerate() {
                    let out = c.run_epoch_aggregate(Algo::Cd0, e, 0, spec, &inputs).unwrap();
                    if !c.clones_agree(&out) {
                        return Err(format!("instance {i} k={k} {spec}: clones disagree"));
                    }
                    if !c.assemble(&out).unwrap().bitwise_eq(&ap_reference(&g, &fv, Some(&fe), spec).unwrap()) {
                        return Err(format!("instance {i} k={k} {spec}: differs from reference"));
                    }
                }
                let mut c = cluster::<f64>(&edges, n, k, Algo::Cd0, 0);
                let out = c
                    .run_epoch_aggregate(Algo::Cd0, 0, 0, OperatorSpec::copy_sum(), &c.scatter_global(&fv64).unwrap())
                    .unwrap();
                if !c.clones_agree(&out) {
                    return Err(format!("instance {i} k={k} f64: clones disagree"));
                }
                worst = worst.max(max_rel(&c.assemble(&out).unwrap(), &want64));
            }
        }
        if worst > F64_SUM_REL {
            return Err(format!("f64 sum rel error {worst:.3e} > {F64_SUM_REL:e}"));
        }
        Ok(format!("50 graphs x k in {{2,3,4}} x 18 ops bitwise; f64 max rel {worst:.2e}"))
    })();
    report(4, "cd-0 fidelity", start, Some(Duration::from_secs(60)), outcome);
}

#[test]
fn criterion_05_zero_delay_degeneracy() {
    let start = Instant::now();
    let outcome = (|| {
        let mut r = rng(505);
        let specs: Vec<_> = OperatorSpec::all().collect();
        for (i, (n, edges)) in cluster_instances().into_iter().enumerate() {
            let fv = int_matrix(&mut r, n, 2, false);
            let fe = int_matrix(&mut r, edges.len(), 2, true);
            let k = 2 + i % 3;
            let mut a = cluster::<i64>(&edges, n, k, Algo::Cd0, 0);
            let mut b = cluster::<i64>(&edges, n, k, Algo::CdR, 0);
            a.set_edge_features(&fe).unwrap();
            b.set_edge_features(&fe).unwrap();
            let inputs = a.scatter_global(&fv).unwrap();
            for e in 0..3 {
                let spec = specs[(i + e) % specs.len()];
                let x = a.run_epoch_aggregate(Algo::Cd0, e, 0, spec, &inputs).unwrap();
                let y = b.run_epoch_aggregate(Algo::CdR, e, 0, spec, &inputs).unwrap();
                if x.iter().zip(&y).any(|(x, y)| !x.bitwise_eq(y)) {
                    return Err(format!("instance {i} epoch {e}: outputs differ"));
                }
            }
            if a.comm_report() != b.comm_report() {
                return Err(format!("instance {i}: comm counters differ"));
            }
        }
        Ok("50 instances, 3 epochs each, identical rows and counters".into())
    })();
    report(5, "cd-r degeneracy at r=0", start, None, outcome);
}

fn volume(log: &[CommRecord], epoch: usize, layer: usize, kind: MsgKind) -> usize {
    log.iter()
        .filter(|c| c.epoch == epoch && c.layer == layer && c.kind == kind)
        .map(|c| c.elements_sent)
        .sum()
}

#[test]
fn criterion_06_staleness_and_volume_laws() {
    let start = Instant::now();
    let outcome = (|| {
        let (r, d, k, n) = (5, 3, 4, 120);
        let mut g = rng(606);
        let edges = random_graph(&mut g, n, 0.05);
        let fv = int_matrix(&mut g, n, d, false);
        let spec = OperatorSpec::copy_sum();

        let mut cdr = cluster::<i64>(&edges, n, k, Algo::CdR, r);
        let trees = cdr.routes().len();
        if trees < 20 {
            return Err(format!("only {trees} split trees"));
        }
        let leaves: Vec<usize> = cdr.routes().iter().map(|t| t.leaves.len()).collect();
        let inputs = cdr.scatter_global(&fv).unwrap();
        let epochs = 4 * r;
        for e in 0..epochs {
            cdr.run_epoch_aggregate(Algo::CdR, e, 0, spec, &inputs).unwrap();
        }
        let trace = cdr.delivery_trace();
        if trace.is_empty() {
            return Err("no deliveries traced".into());
        }
        for t in trace {
            let guard = match t.kind {
                MsgKind::LeafToRoot => r,
                MsgKind::RootToLeaf => 2 * r,
            };
            if t.consume_epoch != t.send_epoch + r || t.consume_epoch < guard {
                return Err(format!("delivery {t:?} breaks the delay law"));
            }
        }
        let log = cdr.comm_report();
        for e in 0..epochs {
            let bin: usize = cdr.schedule().bin_for_epoch(e).map(|t| leaves[t] * d).sum();
            let up = volume(&log, e, 0, MsgKind::LeafToRoot);
            let down = volume(&log, e, 0, MsgKind::RootToLeaf);
            let want_down = if e >= r { bin } else { 0 };
            if up != bin || down != want_down {
                return Err(format!("cd-r epoch {e}: sent {up}/{down}, bin volume {bin}"));
            }
        }

        let all: usize = leaves.iter().sum::<usize>() * d;
        let mut cd0 = cluster::<i64>(&edges, n, k, Algo::Cd0, 0);
        let mut zc = cluster::<i64>(&edges, n, k, Algo::ZeroComm, 0);
        for layer in 0..2 {
            cd0.run_epoch_aggregate(Algo::Cd0, 0, layer, spec, &inputs).unwrap();
            zc.run_epoch_aggregate(Algo::ZeroComm, 0, layer, spec, &inputs).unwrap();
        }
        let log = cd0.comm_report();
        for layer in 0..2 {
            let up = volume(&log, 0, layer, MsgKind::LeafToRoot);
            if up != all {
                return Err(format!("cd-0 layer {layer}: LeafToRoot {up}, expected {all}"));
            }
        }
        if zc.comm_report().iter().any(|c| c.elements_sent != 0) {
            return Err("0c sent data".into());
        }
        Ok(format!("{trees} trees, {} deliveries at send+{r}", trace.len()))
    })();
    report(6, "staleness and volume laws", start, None, outcome);
}

#[test]
fn criterion_07_work_table() {
    let start = Instant::now();
    let outcome = (|| {
        let hops = |rows: &[(f64, f64, f64)]| -> Vec<HopSpec> {
            rows.iter()
                .map(|&(num_vertices, avg_degree, feat_dim)| HopSpec {
                    num_vertices,
                    avg_degree,
                    feat_dim,
                })
                .collect()
        };
        let full1 = estimate_work(&hops(&[(2449029.0, 51.5, 100.0), (2449029.0, 51.5, 256.0), (2449029.0, 51.5, 256.0)]));
        let full16 = estimate_work(&hops(&[(596499.0, 51.5, 100.0), (596499.0, 51.5, 256.0), (596499.0, 51.5, 256.0)]));
        let mini = estimate_work(&hops(&[(233692.0, 5.0, 100.0), (30214.0, 10.0, 256.0), (2000.0, 15.0, 256.0)]));
        let checks = [
            (full1.per_hop[0], 12.61),
            (full1.per_hop[1], 32.29),
            (full1.total, 77.19),
            (full16.per_hop[0], 3.07),
            (full16.per_hop[1], 7.86),
            (full16.total, 18.80),
            (mini.per_hop[0], 0.116),
            (mini.per_hop[1], 0.077),
            (mini.per_hop[2], 0.007),
        ];
        for (got, want) in checks {
            if (got - want).abs() > TABLE_ABS {
                return Err(format!("{got:.4} vs table {want}"));
            }
        }
        Ok("9 table values within 0.01".into())
    })();
    report(7, "work-table reproduction", start, None, outcome);
}

fn dense(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| r.random_range(-1.0..1.0))
}

#[test]
fn criterion_08_gradient_check() {
    let start = Instant::now();
    let outcome = (|| {
        let mut r = rng(808);
        let n = 12;
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let edges = random_graph(&mut r, n, 0.25);
            let g = CsrGraph::from_edges(&edges, n).unwrap();
            let mut ctx = GraphContext::single(&g, SchedSpec::serial(), None).unwrap();
            let x = dense(&mut r, n, 3);
            let labels: Vec<Option<usize>> = (0..n).map(|_| Some(r.random_range(0..3))).collect();
            let owned = vec![vec![true; n]];
            let mut model = SageModel::new(&[3, 5, 4, 3], r.random()).unwrap();

            let mut loss = |m: &mut SageModel, x: &Array2<f64>| {
                let logits = m.forward(&mut ctx, 0, &[x.clone()]).unwrap();
                loss_grad(&logits, &[labels.clone()], &owned).unwrap()
            };
            let out = loss(&mut model, &x);
            let mut ctx2 = GraphContext::single(&g, SchedSpec::serial(), None).unwrap();
            model.forward(&mut ctx2, 0, &[x.clone()]).unwrap();
            let grads = model.backward(&mut ctx2, &out.dlogits, true).unwrap();

            let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(GRAD_REL_FLOOR);
            for l in 0..model.num_layers() {
                for idx in 0..model.weights()[l].len() {
                    let mut at = |delta: f64| {
                        let mut w = model.weights().to_vec();
                        *w[l].iter_mut().nth(idx).unwrap() += delta;
                        loss(&mut SageModel::from_weights(w).unwrap(), &x).loss
                    };
                    let num = (at(GRAD_EPS) - at(-GRAD_EPS)) / (2.0 * GRAD_EPS);
                    worst = worst.max(rel(*grads.weights[l].iter().nth(idx).unwrap(), num));
                }
            }
            let dx = &grads.input.as_ref().unwrap()[0];
            for ((i, j), &ana) in dx.indexed_iter() {
                let mut at = |delta: f64| {
                    let mut xp = x.clone();
                    xp[(i, j)] += delta;
                    loss(&mut model.clone(), &xp).loss
                };
                let num = (at(GRAD_EPS) - at(-GRAD_EPS)) / (2.0 * GRAD_EPS);
                worst = worst.max(rel(ana, num));
            }
        }
        if worst >= GRAD_REL {
            return Err(format!("max relative error {worst:.3e}"));
        }
        Ok(format!("10 instances, max relative error {worst:.2e}"))
    })();
    report(8, "gradient check", start, Some(Duration::from_secs(30)), outcome);
}

#[test]
fn criterion_09_distributed_training_fidelity() {
    let start = Instant::now();
    let outcome = (|| {
        let spec = GenSpec::new(
            GraphKind::Sbm {
                blocks: vec![100, 100],
                p_in: 0.1,
                p_out: 0.01,
            },
            9,
            true,
        );
        let g = spec.generate().unwrap();
        let n = g.num_vertices;
        let present: BTreeSet<usize> = g.edges.iter().flat_map(|&(u, v)| [u, v]).collect();
        let labels: Vec<Option<usize>> = g
            .labels
            .unwrap()
            .into_iter()
            .enumerate()
            .map(|(v, l)| present.contains(&v).then_some(l))
            .collect();
        let x = random_features::<f64>(n, 16, 10);
        let base = TrainConfig {
            epochs: 20,
            seed: 11,
            ..TrainConfig::default()
        };
        let single = train(&base, &g.edges, n, &x, &labels).unwrap();
        let mut worst: f64 = 0.0;
        for k in [2, 3] {
            let cfg = TrainConfig {
                algo: TrainAlgo::Cd0,
                k,
                ..base.clone()
            };
            let dist = train(&cfg, &g.edges, n, &x, &labels).unwrap();
            for (a, b) in single.metrics.iter().zip(&dist.metrics) {
                worst = worst.max((a.loss - b.loss).abs() / a.loss.abs());
            }
            if dist.metrics.len() != 20 {
                return Err(format!("k={k}: {} epochs", dist.metrics.len()));
            }
        }
        if worst > LOSS_REL {
            return Err(format!("loss rel deviation {worst:.3e}"));
        }
        Ok(format!("k in {{2,3}}, 20 epochs, max loss rel deviation {worst:.2e}"))
    })();
    report(9, "distributed-training fidelity", start, Some(Duration::from_secs(60)), outcome);
}

/// Modeled total traffic for each block count, f32 rows of width 64 and a
/// 1 MiB cache.
fn traffic_curve(edges: &[(usize, usize)], n: usize) -> Vec<(usize, u64)> {
    let g = CsrGraph::from_edges(edges, n).unwrap();
    [1, 2, 4, 8, 16, 32, 64]
        .into_iter()
        .map(|nb| {
            let plan = plan_blocks(&g, n.div_ceil(nb)).unwrap();
            (nb, estimate_traffic(&plan, 64, 4, 1 << 20, false).total_io)
        })
        .collect()
}

fn argmin(curve: &[(usize, u64)]) -> usize {
    curve.iter().min_by_key(|&&(nb, io)| (io, nb)).unwrap().0
}

#[test]
fn criterion_10_traffic_model_shape() {
    let start = Instant::now();
    let er = GenSpec::new(GraphKind::ErdosRenyi { n: 2000, p: 0.05 }, 1, true).generate().unwrap();
    let ba = GenSpec::new(GraphKind::BarabasiAlbert { n: 2000, m: 2 }, 1, true).generate().unwrap();
    let er_curve = traffic_curve(&er.edges, 2000);
    let ba_curve = traffic_curve(&ba.edges, 2000);
    let (er_min, ba_min) = (argmin(&er_curve), argmin(&ba_curve));
    let detail = format!("ER argmin n_B={er_min} {er_curve:?}; BA argmin n_B={ba_min} {ba_curve:?}");
    let interior = er_min != 1 && er_min != 64;
    let outcome = match (interior, ba_min == 1) {
        (true, true) => Ok(detail),
        (false, _) => Err(format!("ER minimum is not interior; {detail}")),
        (true, false) => Err(format!("BA minimum is not at n_B=1; {detail}")),
    };
    report(10, "traffic-model shape", start, None, outcome);
}

#[test]
fn criterion_11_memory_estimator() {
    let start = Instant::now();
    let outcome = (|| {
        let mut r = rng(1111);
        for _ in 0..100 {
            let n: u64 = r.random_range(0..200_000_000);
            let [f, h1, h2, l]: [u64; 4] = std::array::from_fn(|_| r.random_range(1..4096));
            let (nn, ff, a, b, c) = (n as u128, f as u128, h1 as u128, h2 as u128, l as u128);
            let weights = ff * a + a * b + b * c;
            let input = nn * ff;
            let aggregation = nn * ff + nn * a + nn * b;
            let mlp = nn * a + nn * b + nn * c;
            let m = estimate_memory(n, f, h1, h2, l);
            let got = (m.weights, m.input, m.aggregation, m.mlp, m.total);
            let want = (weights, input, aggregation, mlp, weights + input + aggregation + mlp);
            if got != want {
                return Err(format!("({n},{f},{h1},{h2},{l}): {got:?} vs {want:?}"));
            }
        }
        Ok("100 random tuples exact".into())
    })();
    report(11, "memory-estimator exactness", start, None, outcome);
}
