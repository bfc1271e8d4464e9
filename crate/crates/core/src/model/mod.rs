//! GraphSAGE with the GCN aggregator, trained full-batch on one process or
//! over the distributed engine, plus closed-form work and memory estimators.

mod checkpoint;
mod context;
mod estimate;
mod loss;
mod sage;
mod train;

pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint};
pub use context::{GraphContext, PartView};
pub use estimate::{estimate_memory, estimate_work, HopSpec, MemoryEstimate, WorkEstimate};
pub use loss::{loss_grad, LossOutput};
pub use sage::{gcn_normalize, Gradients, SageModel};
pub use train::{
    build_context, train, write_metrics_csv, EpochMetrics, TrainAlgo, TrainConfig, TrainReport, METRICS_CSV_HEADER,
};
