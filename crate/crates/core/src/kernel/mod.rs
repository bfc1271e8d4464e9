//! Optimized aggregation primitive: source blocking, dynamic scheduling and
//! the accumulate-then-store inner kernel, plus the traffic model.

mod blocked;
mod blocking;
mod traffic;

pub use blocked::{ap_blocked, default_block_size, SchedSpec, DEFAULT_CHUNK};
pub(crate) use blocked::ap_blocked_raw;
pub use blocking::{plan_blocks, BlockPlan};
pub use traffic::{
    block_occupancy, estimate_traffic, sweep_blocks, write_sweep_csv, SweepRow, TrafficReport,
    SWEEP_CSV_HEADER,
};
