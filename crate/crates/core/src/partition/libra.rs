use crate::error::{Error, Result};
use crate::graph::CsrGraph;

/// One edge partition. Vertex indices in `local` are positions in
/// `vertices`, which is sorted by global ID.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    /// Assigned edges in global vertex IDs, in assignment order.
    pub edges: Vec<(usize, usize)>,
    /// Position of each assigned edge in the input edge list.
    pub edge_ids: Vec<usize>,
    /// Global IDs of the vertices present in this partition, ascending.
    pub vertices: Vec<usize>,
    /// Partition-local destination-major graph; its edge ids index `edges`.
    pub local: CsrGraph,
}

impl Partition {
    /// Position of a global vertex in this partition, if present.
    pub fn local_index(&self, global: usize) -> Option<usize> {
        self.vertices.binary_search(&global).ok()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionSet {
    pub k: usize,
    pub slack: f64,
    pub capacity: usize,
    pub num_vertices: usize,
    pub num_edges: usize,
    pub parts: Vec<Partition>,
    /// For every global vertex, the ascending list of partitions holding it.
    pub presence: Vec<Vec<usize>>,
    pub load: Vec<usize>,
}

pub const DEFAULT_SLACK: f64 = 1.1;

/// Greedy vertex-cut edge partitioning.
///
/// Edges are streamed in input order. Each goes to the least-loaded
/// partition that already holds one of its endpoints and is below capacity,
/// preferring partitions that hold both endpoints. When no such partition
/// exists the globally least-loaded one is used. Ties go to the lowest index
/// and capacity is `ceil(slack * |E| / k)`.
pub fn libra_partition(
    edges: &[(usize, usize)],
    num_vertices: usize,
    k: usize,
    slack: f64,
) -> Result<PartitionSet> {
    if k == 0 {
        return Err(Error::InvalidPartition("k must be at least 1".into()));
    }
    if slack.is_nan() || slack < 1.0 {
        return Err(Error::InvalidPartition(format!("slack {slack} must be >= 1")));
    }
    if num_vertices == 0 && !edges.is_empty() {
        return Err(Error::InvalidPartition("edges given for an empty vertex set".into()));
    }
    for (index, &(src, dst)) in edges.iter().enumerate() {
        if src >= num_vertices || dst >= num_vertices {
            return Err(Error::EdgeOutOfRange {
                index,
                src,
                dst,
                num_vertices,
            });
        }
    }

    let capacity = (slack * edges.len() as f64 / k as f64).ceil() as usize;
    let mut load = vec![0usize; k];
    let mut presence: Vec<Vec<usize>> = vec![Vec::new(); num_vertices];
    let mut assigned: Vec<Vec<usize>> = vec![Vec::new(); k];

    let least_loaded = |cands: &mut dyn Iterator<Item = usize>, load: &[usize]| {
        cands.min_by_key(|&p| (load[p], p))
    };

    for (e, &(u, v)) in edges.iter().enumerate() {
        let open = |p: &usize| load[*p] < capacity;
        let both = least_loaded(
            &mut presence[u]
                .iter()
                .copied()
                .filter(|p| presence[v].binary_search(p).is_ok())
                .filter(open),
            &load,
        );
        let target = both
            .or_else(|| {
                least_loaded(
                    &mut presence[u].iter().chain(&presence[v]).copied().filter(open),
                    &load,
                )
            })
            .unwrap_or_else(|| least_loaded(&mut (0..k), &load).expect("k >= 1"));

        load[target] += 1;
        assigned[target].push(e);
        for w in [u, v] {
            if let Err(pos) = presence[w].binary_search(&target) {
                presence[w].insert(pos, target);
            }
        }
    }

    let parts = assigned
        .into_iter()
        .map(|edge_ids| build_partition(edges, edge_ids))
        .collect::<Result<Vec<_>>>()?;

    Ok(PartitionSet {
        k,
        slack,
        capacity,
        num_vertices,
        num_edges: edges.len(),
        parts,
        presence,
        load,
    })
}

fn build_partition(all_edges: &[(usize, usize)], edge_ids: Vec<usize>) -> Result<Partition> {
    let edges: Vec<(usize, usize)> = edge_ids.iter().map(|&e| all_edges[e]).collect();
    let mut vertices: Vec<usize> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    vertices.sort_unstable();
    vertices.dedup();
    let idx = |g: usize| vertices.binary_search(&g).expect("endpoint is present");
    let local_edges: Vec<(usize, usize)> = edges.iter().map(|&(u, v)| (idx(u), idx(v))).collect();
    let local = CsrGraph::from_edges(&local_edges, vertices.len())?;
    Ok(Partition {
        edges,
        edge_ids,
        vertices,
        local,
    })
}

impl PartitionSet {
    /// Global vertices present in at least two partitions, ascending.
    pub fn split_vertices(&self) -> Vec<usize> {
        (0..self.num_vertices)
            .filter(|&v| self.presence[v].len() >= 2)
            .collect()
    }

    /// In-degree of every global vertex over the whole edge set.
    pub fn global_in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_vertices];
        for part in &self.parts {
            for &(_, v) in &part.edges {
                deg[v] += 1;
            }
        }
        deg
    }
}

/// Average number of partitions holding each vertex with at least one
/// incident edge. An edgeless input reports 1.
pub fn replication_factor(ps: &PartitionSet) -> f64 {
    let (copies, present) = ps
        .presence
        .iter()
        .filter(|p| !p.is_empty())
        .fold((0usize, 0usize), |(c, n), p| (c + p.len(), n + 1));
    if present == 0 {
        1.0
    } else {
        copies as f64 / present as f64
    }
}

/// `max load / (|E| / k)`.
pub fn edge_balance(ps: &PartitionSet) -> Result<f64> {
    if ps.num_edges == 0 {
        return Err(Error::EmptyEdgeSet);
    }
    let max = ps.load.iter().copied().max().unwrap_or(0);
    Ok(max as f64 * ps.k as f64 / ps.num_edges as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    const G3: [(usize, usize); 3] = [(0, 2), (1, 2), (2, 0)];

    #[test]
    fn g3_two_way_trace() {
        let ps = libra_partition(&G3, 3, 2, 1.1).unwrap();
        assert_eq!(ps.capacity, 2);
        assert_eq!(ps.parts[0].edges, vec![(0, 2), (1, 2)]);
        assert_eq!(ps.parts[1].edges, vec![(2, 0)]);
        assert_eq!(ps.load, vec![2, 1]);
        assert_eq!(ps.split_vertices(), vec![0, 2]);
        assert!((replication_factor(&ps) - 5.0 / 3.0).abs() < 1e-12);
        assert!((edge_balance(&ps).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(ps.parts[1].vertices, vec![0, 2]);
        assert_eq!(ps.parts[1].local.in_neighbors(0), &[1]);
    }

    #[test]
    fn single_partition_takes_everything() {
        let edges = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)];
        let ps = libra_partition(&edges, 4, 1, 1.1).unwrap();
        assert_eq!(ps.parts[0].edges.len(), 5);
        assert_eq!(replication_factor(&ps), 1.0);
        assert_eq!(edge_balance(&ps).unwrap(), 1.0);
    }

    #[test]
    fn prefers_partition_holding_both_endpoints() {
        // p0 holds {0,1}, p1 holds {2,3}; edge (1,2) has one endpoint in
        // each, edge (3,2) has both in p1.
        let edges = [(0, 1), (2, 3), (1, 2), (3, 2)];
        let ps = libra_partition(&edges, 4, 2, 2.0).unwrap();
        assert_eq!(ps.parts[0].edges, vec![(0, 1), (1, 2)]);
        assert_eq!(ps.parts[1].edges, vec![(2, 3), (3, 2)]);
    }

    #[test]
    fn isolated_vertices_are_absent() {
        let ps = libra_partition(&[(0, 1)], 5, 2, 1.1).unwrap();
        assert!(ps.presence[4].is_empty());
        assert_eq!(replication_factor(&ps), 1.0);
    }

    #[test]
    fn argument_errors() {
        assert!(libra_partition(&G3, 3, 0, 1.1).is_err());
        assert!(libra_partition(&G3, 0, 2, 1.1).is_err());
        assert!(libra_partition(&G3, 3, 2, 0.9).is_err());
        assert!(matches!(libra_partition(&[(0, 7)], 3, 2, 1.1), Err(Error::EdgeOutOfRange { .. })));
        let empty = libra_partition(&[], 3, 2, 1.1).unwrap();
        assert!(matches!(edge_balance(&empty), Err(Error::EmptyEdgeSet)));
    }
}
