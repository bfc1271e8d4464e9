use std::collections::BTreeSet;

use aggforge::drpa::{Algo, Cluster, ClusterConfig, ClusterOptions};
use aggforge::ops::ap_reference;
use aggforge::partition::{build_split_trees, build_vertex_map, libra_partition, replication_factor};
use aggforge::{CsrGraph, FeatureMatrix, OperatorSpec};
use proptest::prelude::*;

fn graph_strategy(max_n: usize, max_m: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (1..=max_n).prop_flat_map(move |n| (Just(n), prop::collection::vec((0..n, 0..n), 0..=max_m)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn partitioning_invariants(
        (n, edges) in graph_strategy(50, 300),
        k in 1usize..7,
        slack in 1.0f64..2.0,
        seed in any::<u64>(),
    ) {
        let ps = libra_partition(&edges, n, k, slack).unwrap();
        let cap = (slack * edges.len() as f64 / k as f64).ceil() as usize;

        // every edge exactly once, unchanged
        let mut seen = vec![0; edges.len()];
        for part in &ps.parts {
            prop_assert!(part.edges.len() <= cap);
            for (&e, &edge) in part.edge_ids.iter().zip(&part.edges) {
                seen[e] += 1;
                prop_assert_eq!(edges[e], edge);
            }
            prop_assert_eq!(part.local.num_edges(), part.edges.len());
        }
        prop_assert!(seen.iter().all(|&c| c == 1));

        let rf = replication_factor(&ps);
        prop_assert!((1.0..=k as f64).contains(&rf));

        // presence matches the endpoints actually assigned
        for (p, part) in ps.parts.iter().enumerate() {
            let ends: BTreeSet<usize> = part.edges.iter().flat_map(|&(u, v)| [u, v]).collect();
            prop_assert_eq!(ends.iter().copied().collect::<Vec<_>>(), part.vertices.clone());
            for &v in &part.vertices {
                prop_assert!(ps.presence[v].contains(&p));
            }
        }

        // one tree per split vertex, covering exactly its clones
        let vm = build_vertex_map(&ps);
        let forest = build_split_trees(&vm, seed);
        let split = ps.split_vertices();
        prop_assert_eq!(forest.trees.len(), split.len());
        for (tree, &v) in forest.trees.iter().zip(&split) {
            prop_assert_eq!(tree.global_id, v);
            let mut members: Vec<usize> = tree.leaves_local.clone();
            members.push(tree.root_local);
            members.sort_unstable();
            prop_assert_eq!(members.len(), ps.presence[v].len());
            for &l in &members {
                prop_assert_eq!(vm.lookup(l).map(|(_, g)| g), Some(v));
            }
        }
    }

    /// Synchronous distributed aggregation reassembles to the single-process
    /// result for any partitioning, and every clone ends up identical.
    #[test]
    fn cd0_reassembles_reference(
        (n, edges) in graph_strategy(40, 200),
        k in 1usize..6,
        spec in prop::sample::select(OperatorSpec::all().filter(|s| !s.binary.needs_edge_features()).collect::<Vec<_>>()),
        seed in any::<u64>(),
    ) {
        let fv = FeatureMatrix::from_vec(n, 2, (0..2 * n as i64).map(|i| (i * 37) % 23 - 11).collect()).unwrap();
        let want = ap_reference(&CsrGraph::from_edges(&edges, n).unwrap(), &fv, None, spec).unwrap();
        let config = ClusterConfig { k, algo: Algo::Cd0, r: 0, seed };
        let mut c: Cluster<i64> = Cluster::from_edges(&edges, n, config, ClusterOptions::default()).unwrap();
        let inputs = c.scatter_global(&fv).unwrap();
        let out = c.run_epoch_aggregate(Algo::Cd0, 0, 0, spec, &inputs).unwrap();
        prop_assert!(c.clones_agree(&out));
        prop_assert!(c.assemble(&out).unwrap().bitwise_eq(&want));
    }
}
