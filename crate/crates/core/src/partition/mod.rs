//! Vertex-cut edge partitioning and the per-partition bookkeeping the
//! distributed engine needs: cluster-wide local IDs, clone lists and
//! randomized single-level split trees.

mod layout;
mod libra;
mod setup;
mod stats;

pub use layout::{read_partition_meta, write_partition_dir, PartitionMeta};
pub use libra::{edge_balance, libra_partition, replication_factor, Partition, PartitionSet, DEFAULT_SLACK};
pub use setup::{build_split_trees, build_vertex_map, SplitForest, SplitTree, VertexMap};
pub use stats::{partition_stats, PartitionStats};
