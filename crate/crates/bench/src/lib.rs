//! Workloads shared by the benchmarks.

use graphmask_core::synthetic::synthetic_dataset;
use graphmask_core::{assign_levels, LeveledGraph};

/// `n` leveled synthetic graphs of at most seven triples.
pub fn leveled_graphs(n: usize, seed: u64) -> Vec<(String, LeveledGraph)> {
    synthetic_dataset(n, 7, seed)
        .entries()
        .iter()
        .map(|e| (e.entry_id.clone(), assign_levels(&e.graph)))
        .collect()
}
