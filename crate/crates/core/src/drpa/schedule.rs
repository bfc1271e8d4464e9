use std::ops::Range;

use serde::{Deserialize, Serialize};

/// Round-robin bins of split-tree indices for delayed synchronisation.
///
/// With delay `r >= 1`, `k = floor(trees / r)`; bin `i` holds trees
/// `[i*k, (i+1)*k)` and the last bin also takes the remainder. With `r = 0`
/// there is a single bin holding every tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrpaSchedule {
    pub r: usize,
    pub bins: Vec<Range<usize>>,
}

pub fn make_schedule(num_trees: usize, r: usize) -> DrpaSchedule {
    if r == 0 {
        return DrpaSchedule {
            r,
            bins: vec![0..num_trees],
        };
    }
    let k = num_trees / r;
    let bins = (0..r)
        .map(|i| if i + 1 == r { i * k..num_trees } else { i * k..(i + 1) * k })
        .collect();
    DrpaSchedule { r, bins }
}

impl DrpaSchedule {
    /// The bin synchronised at `epoch`.
    pub fn bin_for_epoch(&self, epoch: usize) -> Range<usize> {
        self.bins[if self.r == 0 { 0 } else { epoch % self.r }].clone()
    }

    pub fn num_trees(&self) -> usize {
        self.bins.last().map_or(0, |b| b.end)
    }
}
