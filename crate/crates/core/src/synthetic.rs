//! Seeded random graphs and datasets for property tests and benchmarks.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{KnowledgeGraph, Triple};
use crate::ingest::{Dataset, DatasetEntry, Split};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Every entity but the root has exactly one parent.
    Tree,
    /// Edges only go from lower to higher rank; several parents allowed.
    Dag,
    /// Unconstrained edges, including cycles and self-loops.
    Cyclic,
}

impl Shape {
    pub const ALL: [Shape; 3] = [Shape::Tree, Shape::Dag, Shape::Cyclic];
}

const RELATIONS: &[&str] = &["location", "country", "is Part Of", "leader Name", "r"];

fn label(i: usize) -> String {
    // Some labels carry commas and dots, as real entity names do.
    match i % 4 {
        0 => format!("Entity {i}"),
        1 => format!("Place {i}, Inc."),
        2 => format!("e{i}"),
        _ => format!("Person {i} Jr."),
    }
}

/// A random graph over at most `max_nodes` entities with `triples` edges (fewer
/// if the shape cannot hold that many distinct triples). Triple order is
/// shuffled.
pub fn random_graph<R: Rng>(rng: &mut R, shape: Shape, max_nodes: usize, triples: usize) -> KnowledgeGraph {
    let nodes = max_nodes.max(2);
    let mut names: Vec<usize> = (0..nodes).collect();
    names.shuffle(rng);
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    let mut push = |h: usize, t: usize, rng: &mut R, edges: &mut Vec<Triple>| {
        let r = RELATIONS[rng.random_range(0..RELATIONS.len())];
        if seen.insert((h, r, t)) {
            edges.push(Triple::new(label(names[h]), r, label(names[t])).expect("labels are valid"));
        }
    };
    match shape {
        Shape::Tree => {
            for child in 1..nodes.min(triples + 1) {
                let parent = rng.random_range(0..child);
                push(parent, child, rng, &mut edges);
            }
        }
        Shape::Dag | Shape::Cyclic => {
            let mut attempts = 0;
            while edges.len() < triples && attempts < triples * 20 {
                attempts += 1;
                let (a, b) = (rng.random_range(0..nodes), rng.random_range(0..nodes));
                match shape {
                    Shape::Dag if a == b => continue,
                    Shape::Dag => push(a.min(b), a.max(b), rng, &mut edges),
                    _ => push(a, b, rng, &mut edges),
                }
            }
        }
    }
    if edges.is_empty() {
        push(0, 1, rng, &mut edges);
    }
    edges.shuffle(rng);
    KnowledgeGraph::new(edges).expect("generator never repeats a triple")
}

/// `n` training entries with 1 to `max_triples` triples each, mixed shapes.
pub fn synthetic_dataset(n: usize, max_triples: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..n)
        .map(|i| {
            let triples = rng.random_range(1..=max_triples.max(1));
            let shape = Shape::ALL[rng.random_range(0..Shape::ALL.len())];
            let graph = random_graph(&mut rng, shape, triples + 1, triples);
            DatasetEntry {
                entry_id: format!("syn-{i:07}"),
                graph,
                references: vec![format!("Synthetic description {i}.")],
                split: Split::Train,
                category: Some(format!("cat{}", i % 16)),
            }
        })
        .collect();
    Dataset::new("synthetic", entries).expect("ids are unique")
}
