//! On-disk partition directory:
//!
//! ```text
//! <dir>/meta.json          k, slack, seed, ranges, rf, balance, split trees
//! <dir>/part-<p>/edges.txt assigned edges in cluster-wide local IDs
//! <dir>/part-<p>/l2g.txt   `local global` per line
//! ```

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::libra::PartitionSet;
use super::setup::{SplitForest, SplitTree, VertexMap};
use super::stats::partition_stats;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionMeta {
    pub k: usize,
    pub slack: f64,
    pub seed: u64,
    pub ranges: Vec<(usize, usize)>,
    pub rf: f64,
    pub balance: f64,
    pub trees: Vec<SplitTree>,
}

pub fn write_partition_dir(
    dir: &Path,
    ps: &PartitionSet,
    vm: &VertexMap,
    forest: &SplitForest,
) -> Result<PartitionMeta> {
    fs::create_dir_all(dir)?;
    for (p, part) in ps.parts.iter().enumerate() {
        let pdir = dir.join(format!("part-{p}"));
        fs::create_dir_all(&pdir)?;
        let (lo, hi) = vm.ranges[p];

        let mut w = BufWriter::new(fs::File::create(pdir.join("edges.txt"))?);
        writeln!(w, "# local ids [{lo}, {hi})")?;
        for &(u, v) in &part.edges {
            let lu = lo + part.local_index(u).expect("endpoint present");
            let lv = lo + part.local_index(v).expect("endpoint present");
            writeln!(w, "{lu} {lv}")?;
        }
        w.flush()?;

        let mut w = BufWriter::new(fs::File::create(pdir.join("l2g.txt"))?);
        for (l, &g) in (lo..hi).zip(&vm.l2g[lo..hi]) {
            writeln!(w, "{l} {g}")?;
        }
        w.flush()?;
    }

    let stats = partition_stats(ps);
    let meta = PartitionMeta {
        k: ps.k,
        slack: ps.slack,
        seed: forest.seed,
        ranges: vm.ranges.clone(),
        rf: stats.rf,
        balance: stats.balance,
        trees: forest.trees.clone(),
    };
    fs::write(dir.join("meta.json"), serde_json::to_vec_pretty(&meta)?)?;
    Ok(meta)
}

pub fn read_partition_meta(dir: &Path) -> Result<PartitionMeta> {
    Ok(serde_json::from_slice(&fs::read(dir.join("meta.json"))?)?)
}
