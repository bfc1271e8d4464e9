use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::libra::PartitionSet;

/// Cluster-wide local IDs: partition `p` owns the half-open range
/// `ranges[p]`, and inside it vertices are ordered by ascending global ID.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexMap {
    pub ranges: Vec<(usize, usize)>,
    /// Global ID of every local ID.
    pub l2g: Vec<usize>,
    /// `(global, local IDs of its clones in partition order)` for every
    /// vertex held by two or more partitions, ascending by global ID.
    pub clone_lists: Vec<(usize, Vec<usize>)>,
}

impl VertexMap {
    pub fn num_local(&self) -> usize {
        self.l2g.len()
    }

    /// Partition and global ID of a local ID.
    pub fn lookup(&self, local: usize) -> Option<(usize, usize)> {
        if local >= self.l2g.len() {
            return None;
        }
        let p = self.ranges.partition_point(|&(_, hi)| hi <= local);
        Some((p, self.l2g[local]))
    }

    /// Local ID of `global` inside partition `p`.
    pub fn local_of(&self, p: usize, global: usize) -> Option<usize> {
        let (lo, hi) = *self.ranges.get(p)?;
        self.l2g[lo..hi].binary_search(&global).ok().map(|i| lo + i)
    }

    pub fn clones_of(&self, global: usize) -> Option<&[usize]> {
        self.clone_lists
            .binary_search_by_key(&global, |(g, _)| *g)
            .ok()
            .map(|i| self.clone_lists[i].1.as_slice())
    }
}

pub fn build_vertex_map(ps: &PartitionSet) -> VertexMap {
    let mut ranges = Vec::with_capacity(ps.k);
    let mut l2g = Vec::new();
    for part in &ps.parts {
        let lo = l2g.len();
        l2g.extend_from_slice(&part.vertices);
        ranges.push((lo, l2g.len()));
    }
    let clone_lists = (0..ps.num_vertices)
        .filter(|&v| ps.presence[v].len() >= 2)
        .map(|v| {
            let locals = ps.presence[v]
                .iter()
                .map(|&p| ranges[p].0 + ps.parts[p].local_index(v).expect("present"))
                .collect();
            (v, locals)
        })
        .collect();
    VertexMap {
        ranges,
        l2g,
        clone_lists,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitTree {
    pub global_id: usize,
    pub root_local: usize,
    pub leaves_local: Vec<usize>,
}

/// One single-level synchronisation tree per split vertex; tree IDs are
/// positions in `trees`, which follows ascending global ID.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitForest {
    pub seed: u64,
    pub trees: Vec<SplitTree>,
}

fn root_rng(seed: u64, global: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (global as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub fn build_split_trees(vm: &VertexMap, seed: u64) -> SplitForest {
    let trees = vm
        .clone_lists
        .iter()
        .map(|(g, clones)| {
            let r = root_rng(seed, *g).random_range(0..clones.len());
            let mut leaves_local = clones.clone();
            let root_local = leaves_local.remove(r);
            SplitTree {
                global_id: *g,
                root_local,
                leaves_local,
            }
        })
        .collect();
    SplitForest { seed, trees }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::libra_partition;

    fn g3() -> PartitionSet {
        libra_partition(&[(0, 2), (1, 2), (2, 0)], 3, 2, 1.1).unwrap()
    }

    #[test]
    fn g3_vertex_map() {
        let vm = build_vertex_map(&g3());
        assert_eq!(vm.ranges, vec![(0, 3), (3, 5)]);
        assert_eq!(vm.l2g, vec![0, 1, 2, 0, 2]);
        assert_eq!(vm.clones_of(2), Some(&[2, 4][..]));
        assert_eq!(vm.clones_of(0), Some(&[0, 3][..]));
        assert_eq!(vm.clones_of(1), None);
        assert_eq!(vm.lookup(4), Some((1, 2)));
        assert_eq!(vm.lookup(2), Some((0, 2)));
        assert_eq!(vm.lookup(5), None);
        assert_eq!(vm.local_of(1, 0), Some(3));
        assert_eq!(vm.local_of(1, 1), None);
    }

    #[test]
    fn empty_partition_gets_empty_range() {
        let ps = libra_partition(&[(0, 1)], 2, 3, 1.0).unwrap();
        let vm = build_vertex_map(&ps);
        assert_eq!(vm.ranges, vec![(0, 2), (2, 2), (2, 2)]);
        assert_eq!(vm.lookup(1), Some((0, 1)));
    }

    #[test]
    fn forest_is_seeded_and_covers_clones() {
        let vm = build_vertex_map(&g3());
        let f = build_split_trees(&vm, 7);
        assert_eq!(f.trees.len(), 2);
        assert_eq!(f.trees[0].global_id, 0);
        assert_eq!(f.trees[1].global_id, 2);
        for (t, (_, clones)) in f.trees.iter().zip(&vm.clone_lists) {
            let mut all = t.leaves_local.clone();
            all.push(t.root_local);
            all.sort_unstable();
            assert_eq!(&all, clones);
        }
        assert_eq!(f, build_split_trees(&vm, 7));
    }

    #[test]
    fn three_clones_give_one_root_two_leaves() {
        // Vertex 0 ends up in all three partitions.
        let ps = libra_partition(&[(0, 1), (0, 2), (0, 3)], 4, 3, 1.0).unwrap();
        let vm = build_vertex_map(&ps);
        let f = build_split_trees(&vm, 1);
        let t = &f.trees[0];
        assert_eq!(t.global_id, 0);
        assert_eq!(t.leaves_local.len(), 2);
    }

    #[test]
    fn roots_vary_with_seed() {
        let vm = build_vertex_map(&g3());
        let roots: std::collections::HashSet<usize> =
            (0..64).map(|s| build_split_trees(&vm, s).trees[0].root_local).collect();
        assert_eq!(roots.len(), 2);
    }
}
