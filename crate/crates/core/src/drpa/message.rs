use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MsgKind {
    LeafToRoot,
    RootToLeaf,
}

impl MsgKind {
    pub fn name(self) -> &'static str {
        match self {
            MsgKind::LeafToRoot => "leaf_to_root",
            MsgKind::RootToLeaf => "root_to_leaf",
        }
    }
}

/// One clone's row inside a message.
#[derive(Clone, Debug, PartialEq)]
pub struct PayloadEntry<T> {
    pub tree: usize,
    /// Whether the row holds at least one real contribution, as opposed to
    /// the reduction identity of an empty neighborhood.
    pub live: bool,
    pub values: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggMessage<T> {
    pub src_rank: usize,
    pub dst_rank: usize,
    pub kind: MsgKind,
    /// Aggregation channel; forward layers use their index, backward
    /// exchanges are offset past them.
    pub channel: usize,
    pub send_epoch: usize,
    /// Entries in ascending tree order.
    pub payload: Vec<PayloadEntry<T>>,
}

impl<T> AggMessage<T> {
    pub fn elements(&self) -> usize {
        self.payload.iter().map(|e| e.values.len()).sum()
    }
}
