use serde::{Deserialize, Serialize};

use super::libra::{edge_balance, replication_factor, PartitionSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionStats {
    pub k: usize,
    pub rf: f64,
    /// Max load over mean load; 1.0 for an empty edge set.
    pub balance: f64,
    /// Per partition, percentage of its vertices that are split.
    pub split_pct: Vec<f64>,
}

pub fn partition_stats(ps: &PartitionSet) -> PartitionStats {
    let split_pct = ps
        .parts
        .iter()
        .map(|part| {
            if part.vertices.is_empty() {
                return 0.0;
            }
            let split = part.vertices.iter().filter(|&&v| ps.presence[v].len() >= 2).count();
            100.0 * split as f64 / part.vertices.len() as f64
        })
        .collect();
    PartitionStats {
        k: ps.k,
        rf: replication_factor(ps),
        balance: edge_balance(ps).unwrap_or(1.0),
        split_pct,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::libra_partition;

    #[test]
    fn g3_split_percentages() {
        let ps = libra_partition(&[(0, 2), (1, 2), (2, 0)], 3, 2, 1.1).unwrap();
        let s = partition_stats(&ps);
        assert!((s.split_pct[0] - 200.0 / 3.0).abs() < 1e-9);
        assert_eq!(s.split_pct[1], 100.0);
        let json = serde_json::to_value(&s).unwrap();
        let mut keys: Vec<_> = json.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["balance", "k", "rf", "split_pct"]);
    }

    #[test]
    fn single_partition_has_no_splits() {
        let ps = libra_partition(&[(0, 1), (1, 2)], 3, 1, 1.1).unwrap();
        assert_eq!(partition_stats(&ps).split_pct, vec![0.0]);
    }
}
