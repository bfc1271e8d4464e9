use crate::error::{Error, Result};
use crate::graph::CsrGraph;

/// Source-vertex cache blocking of a destination-major graph.
///
/// Block `i` keeps the edges whose source lies in `[i*B, min((i+1)*B, |V|))`.
/// Destination indexing is unchanged, so every block has `|V|` rows.
#[derive(Clone, Debug)]
pub struct BlockPlan {
    block_size: usize,
    blocks: Vec<CsrGraph>,
    num_vertices: usize,
    num_edges: usize,
    in_degree: Vec<usize>,
}

impl BlockPlan {
    pub fn new(g: &CsrGraph, block_size: usize) -> Result<Self> {
        if block_size == 0 {
            return Err(Error::InvalidBlockSize);
        }
        let n = g.num_vertices();
        let num_blocks = n.div_ceil(block_size).max(1);

        let mut row_ptrs = vec![vec![0usize; n + 1]; num_blocks];
        for v in 0..n {
            for &u in g.in_neighbors(v) {
                row_ptrs[u / block_size][v + 1] += 1;
            }
        }
        for rp in &mut row_ptrs {
            for v in 0..n {
                rp[v + 1] += rp[v];
            }
        }
        let mut cols: Vec<Vec<usize>> = row_ptrs.iter().map(|rp| vec![0; rp[n]]).collect();
        let mut ids: Vec<Vec<usize>> = cols.clone();
        let mut cursor = row_ptrs.clone();
        for v in 0..n {
            for (&u, &e) in g.in_neighbors(v).iter().zip(g.in_edge_ids(v)) {
                let b = u / block_size;
                let slot = cursor[b][v];
                cols[b][slot] = u;
                ids[b][slot] = e;
                cursor[b][v] += 1;
            }
        }
        let blocks = row_ptrs
            .into_iter()
            .zip(cols.into_iter().zip(ids))
            .map(|(rp, (c, i))| CsrGraph::from_raw_unchecked(n, rp, c, i))
            .collect();

        Ok(BlockPlan {
            block_size,
            blocks,
            num_vertices: n,
            num_edges: g.num_edges(),
            in_degree: g.in_degrees(),
        })
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[CsrGraph] {
        &self.blocks
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    /// In-degree of each destination in the unblocked graph.
    pub fn in_degree(&self) -> &[usize] {
        &self.in_degree
    }

    /// Half-open source range covered by block `i`.
    pub fn source_range(&self, i: usize) -> std::ops::Range<usize> {
        let lo = i * self.block_size;
        lo.min(self.num_vertices)..((i + 1) * self.block_size).min(self.num_vertices)
    }
}

pub fn plan_blocks(g: &CsrGraph, block_size: usize) -> Result<BlockPlan> {
    BlockPlan::new(g, block_size)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g3() -> CsrGraph {
        CsrGraph::from_edges(&[(0, 2), (1, 2), (2, 0)], 3).unwrap()
    }

    fn block_edges(b: &CsrGraph) -> Vec<(usize, usize)> {
        b.edges().map(|(u, v, _)| (u, v)).collect()
    }

    #[test]
    fn block_count_is_ceiling() {
        let g = CsrGraph::empty(100);
        assert_eq!(plan_blocks(&g, 32).unwrap().num_blocks(), 4);
        assert_eq!(plan_blocks(&g, 100).unwrap().num_blocks(), 1);
        assert_eq!(plan_blocks(&g, 1).unwrap().num_blocks(), 100);
    }

    #[test]
    fn g3_split_by_source() {
        let plan = plan_blocks(&g3(), 2).unwrap();
        assert_eq!(plan.num_blocks(), 2);
        assert_eq!(block_edges(&plan.blocks()[0]), vec![(0, 2), (1, 2)]);
        assert_eq!(block_edges(&plan.blocks()[1]), vec![(2, 0)]);
        assert_eq!(plan.source_range(1), 2..3);
    }

    #[test]
    fn large_block_is_identity() {
        let plan = plan_blocks(&g3(), 10).unwrap();
        assert_eq!(plan.num_blocks(), 1);
        assert_eq!(plan.blocks()[0], g3());
    }

    #[test]
    fn zero_block_size_rejected() {
        assert!(matches!(plan_blocks(&g3(), 0), Err(Error::InvalidBlockSize)));
    }

    #[test]
    fn empty_vertex_set_has_one_empty_block() {
        let plan = plan_blocks(&CsrGraph::empty(0), 4).unwrap();
        assert_eq!(plan.num_blocks(), 1);
        assert_eq!(plan.blocks()[0].num_edges(), 0);
    }
}
