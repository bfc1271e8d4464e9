//! Distributed aggregation over an in-process cluster of ranks, one per
//! edge partition.
//!
//! Each rank aggregates over its own edges. Split vertices then synchronise
//! through single-level trees: leaves send partials to the root, the root
//! reduces them and sends the result back. `0c` skips synchronisation,
//! `cd-0` completes it within the epoch, and `cd-r` spreads trees over `r`
//! bins and delivers every message `r` epochs after it is sent.

mod cluster;
mod comm;
mod message;
mod rank;
mod schedule;

pub use cluster::{allreduce_sum, Algo, Cluster, ClusterConfig, ClusterOptions, Execution};
pub use comm::{elements_sent_in_epoch, write_comm_csv, CommRecord, Delivery, COMM_CSV_HEADER};
pub use message::{AggMessage, MsgKind, PayloadEntry};
pub use rank::{RankState, TreeRoute, Work};
pub use schedule::{make_schedule, DrpaSchedule};
