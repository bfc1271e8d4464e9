//! Destination-major CSR graphs.
//!
//! Row `v` lists the sources `u` of every edge `u -> v`, so aggregation pulls
//! from in-neighbors. Source-major views are obtained with [`CsrGraph::transpose`].

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsrGraph {
    num_vertices: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    edge_id: Vec<usize>,
}

impl CsrGraph {
    pub fn empty(num_vertices: usize) -> Self {
        CsrGraph {
            num_vertices,
            row_ptr: vec![0; num_vertices + 1],
            col_idx: Vec::new(),
            edge_id: Vec::new(),
        }
    }

    /// Builds a graph from `(src, dst)` pairs. Within each row sources keep
    /// their input order and `edge_id` records the position in `edges`.
    pub fn from_edges(edges: &[(usize, usize)], num_vertices: usize) -> Result<Self> {
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
        Ok(Self::from_indexed_edges(
            num_vertices,
            edges.iter().enumerate().map(|(e, &(s, d))| (s, d, e)),
            edges.len(),
        ))
    }

    /// Counting sort by destination. Callers guarantee indices are in range.
    fn from_indexed_edges<I>(num_vertices: usize, edges: I, num_edges: usize) -> Self
    where
        I: Iterator<Item = (usize, usize, usize)> + Clone,
    {
        let mut row_ptr = vec![0usize; num_vertices + 1];
        for (_, dst, _) in edges.clone() {
            row_ptr[dst + 1] += 1;
        }
        for v in 0..num_vertices {
            row_ptr[v + 1] += row_ptr[v];
        }
        let mut cursor = row_ptr.clone();
        let mut col_idx = vec![0usize; num_edges];
        let mut edge_id = vec![0usize; num_edges];
        for (src, dst, e) in edges {
            let slot = cursor[dst];
            col_idx[slot] = src;
            edge_id[slot] = e;
            cursor[dst] += 1;
        }
        CsrGraph {
            num_vertices,
            row_ptr,
            col_idx,
            edge_id,
        }
    }

    /// Assembles a graph from raw arrays, checking every structural invariant.
    pub fn from_parts(
        num_vertices: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        edge_id: Vec<usize>,
    ) -> Result<Self> {
        let m = col_idx.len();
        if row_ptr.len() != num_vertices + 1
            || row_ptr[0] != 0
            || row_ptr[num_vertices] != m
            || row_ptr.windows(2).any(|w| w[0] > w[1])
        {
            return Err(Error::Format("malformed row_ptr".into()));
        }
        if edge_id.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                got: edge_id.len(),
            });
        }
        if col_idx.iter().any(|&u| u >= num_vertices) {
            return Err(Error::Format("col_idx entry out of range".into()));
        }
        let mut seen = vec![false; m];
        for &e in &edge_id {
            if e >= m || std::mem::replace(&mut seen[e], true) {
                return Err(Error::Format("edge_id is not a permutation".into()));
            }
        }
        Ok(CsrGraph {
            num_vertices,
            row_ptr,
            col_idx,
            edge_id,
        })
    }

    /// Block and partition subgraphs carry a subset of their parent's edge
    /// ids, so they skip the permutation check in [`CsrGraph::from_parts`].
    pub(crate) fn from_raw_unchecked(
        num_vertices: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        edge_id: Vec<usize>,
    ) -> CsrGraph {
        debug_assert_eq!(row_ptr.len(), num_vertices + 1);
        debug_assert_eq!(col_idx.len(), edge_id.len());
        CsrGraph {
            num_vertices,
            row_ptr,
            col_idx,
            edge_id,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn edge_ids(&self) -> &[usize] {
        &self.edge_id
    }

    /// Sources of the edges into `v`.
    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[v]..self.row_ptr[v + 1]]
    }

    pub fn in_edge_ids(&self, v: usize) -> &[usize] {
        &self.edge_id[self.row_ptr[v]..self.row_ptr[v + 1]]
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.row_ptr[v + 1] - self.row_ptr[v]
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        self.row_ptr.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// `(src, dst, edge_id)` in CSR order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.num_vertices).flat_map(move |v| {
            let span = self.row_ptr[v]..self.row_ptr[v + 1];
            self.col_idx[span.clone()]
                .iter()
                .zip(&self.edge_id[span])
                .map(move |(&u, &e)| (u, v, e))
        })
    }

    /// Edge list ordered by edge id, i.e. the original input order.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut out = vec![(0, 0); self.num_edges()];
        for (u, v, e) in self.edges() {
            out[e] = (u, v);
        }
        out
    }

    /// Reverses every edge. Edge ids are preserved and rows of the result are
    /// ordered by edge id, so `g.transpose().transpose() == g` whenever `g`
    /// came from [`CsrGraph::from_edges`].
    pub fn transpose(&self) -> CsrGraph {
        let by_id = self.edge_list();
        Self::from_indexed_edges(
            self.num_vertices,
            by_id.iter().enumerate().map(|(e, &(u, v))| (v, u, e)),
            self.num_edges(),
        )
    }
}

pub fn build_csr(edges: &[(usize, usize)], num_vertices: usize) -> Result<CsrGraph> {
    CsrGraph::from_edges(edges, num_vertices)
}

pub fn in_degrees(g: &CsrGraph) -> Vec<usize> {
    g.in_degrees()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g3() -> CsrGraph {
        CsrGraph::from_edges(&[(0, 2), (1, 2), (2, 0)], 3).unwrap()
    }

    #[test]
    fn builds_destination_major_rows() {
        let g = g3();
        assert_eq!(g.row_ptr(), &[0, 1, 1, 3]);
        assert_eq!(g.col_idx(), &[2, 0, 1]);
        assert_eq!(g.edge_ids(), &[2, 0, 1]);
    }

    #[test]
    fn empty_graph() {
        let g = CsrGraph::from_edges(&[], 4).unwrap();
        assert_eq!(g.row_ptr(), &[0, 0, 0, 0, 0]);
        assert!(g.col_idx().is_empty());
        assert_eq!(g.in_degrees(), vec![0, 0, 0, 0]);
        assert_eq!(g.transpose(), g);
    }

    #[test]
    fn rejects_out_of_range_edge() {
        let err = CsrGraph::from_edges(&[(5, 0)], 3).unwrap_err();
        match err {
            Error::EdgeOutOfRange { index, src, dst, .. } => {
                assert_eq!((index, src, dst), (0, 5, 0));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn transpose_of_g3() {
        let t = g3().transpose();
        // reversed pairs (2,0),(2,1),(0,2) grouped by destination
        assert_eq!(t.in_neighbors(0), &[2]);
        assert_eq!(t.in_neighbors(1), &[2]);
        assert_eq!(t.in_neighbors(2), &[0]);
        assert_eq!(t.in_edge_ids(0), &[0]);
        assert_eq!(t.in_edge_ids(1), &[1]);
        assert_eq!(t.in_edge_ids(2), &[2]);
        assert_eq!(t.transpose(), g3());
    }

    #[test]
    fn self_loop_is_fixed_point() {
        let g = CsrGraph::from_edges(&[(1, 1)], 2).unwrap();
        assert_eq!(g.transpose(), g);
    }

    #[test]
    fn degrees() {
        assert_eq!(g3().in_degrees(), vec![1, 0, 2]);
        assert_eq!(CsrGraph::from_edges(&[], 2).unwrap().in_degrees(), vec![0, 0]);
        let k3: Vec<_> = (0..3)
            .flat_map(|u| (0..3).filter(move |&v| v != u).map(move |v| (u, v)))
            .collect();
        assert_eq!(CsrGraph::from_edges(&k3, 3).unwrap().in_degrees(), vec![2, 2, 2]);
    }

    #[test]
    fn from_parts_validates() {
        assert!(CsrGraph::from_parts(3, vec![0, 1, 1, 3], vec![2, 0, 1], vec![2, 0, 1]).is_ok());
        assert!(CsrGraph::from_parts(3, vec![0, 2, 1, 3], vec![2, 0, 1], vec![2, 0, 1]).is_err());
        assert!(CsrGraph::from_parts(3, vec![0, 1, 1, 3], vec![2, 0, 1], vec![2, 2, 1]).is_err());
        assert!(CsrGraph::from_parts(3, vec![0, 1, 1, 3], vec![3, 0, 1], vec![2, 0, 1]).is_err());
    }
}
