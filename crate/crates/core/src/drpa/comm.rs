use std::io::Write;

use serde::{Deserialize, Serialize};

use super::message::MsgKind;
use crate::error::Result;

/// Elements moved by one rank on one channel in one epoch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommRecord {
    pub epoch: usize,
    pub rank: usize,
    pub layer: usize,
    pub kind: MsgKind,
    pub elements_sent: usize,
    /// Counted in the epoch the message is consumed.
    pub elements_received: usize,
}

/// One delivered message: when it was sent and when it was consumed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delivery {
    pub kind: MsgKind,
    pub channel: usize,
    pub src_rank: usize,
    pub dst_rank: usize,
    pub send_epoch: usize,
    pub consume_epoch: usize,
    pub entries: usize,
}

pub const COMM_CSV_HEADER: &str = "epoch,rank,layer,kind,elements_sent,elements_received";

pub fn write_comm_csv<W: Write>(records: &[CommRecord], mut w: W) -> Result<()> {
    writeln!(w, "{COMM_CSV_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.epoch,
            r.rank,
            r.layer,
            r.kind.name(),
            r.elements_sent,
            r.elements_received
        )?;
    }
    Ok(())
}

/// Total elements sent in `epoch` across ranks, channels and kinds.
pub fn elements_sent_in_epoch(records: &[CommRecord], epoch: usize) -> usize {
    records.iter().filter(|r| r.epoch == epoch).map(|r| r.elements_sent).sum()
}
