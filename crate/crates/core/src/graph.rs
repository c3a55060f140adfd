//! Triples, knowledge graphs and level assignment.
//!
//! A level marker is attached to every triple: the shortest directed distance
//! of the triple's tail entity from the nearest root, where a root is an entity
//! that never appears as a tail.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

/// Substrings that may not occur inside a label because they would make the
/// linearised form ambiguous.
const RESERVED: &[&str] = &["[", "]", "<X>", "<Y>", "<Z>", ", S | ", ", P | ", ", O | "];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph has no triples")]
    EmptyGraph,
    #[error("duplicate triple at index {index}")]
    DuplicateTriple { index: usize },
    #[error("malformed triple: {field} {reason}")]
    MalformedTriple { field: &'static str, reason: String },
}

/// One directed labelled edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    head: String,
    relation: String,
    tail: String,
}

impl Triple {
    /// Builds a triple from untrimmed fields. Every field is trimmed and must be
    /// non-empty and free of the reserved delimiter sequences.
    pub fn new(
        head: impl AsRef<str>,
        relation: impl AsRef<str>,
        tail: impl AsRef<str>,
    ) -> Result<Self, GraphError> {
        Ok(Self {
            head: check_label("head", head.as_ref())?,
            relation: check_label("relation", relation.as_ref())?,
            tail: check_label("tail", tail.as_ref())?,
        })
    }

    pub fn head(&self) -> &str {
        &self.head
    }

    pub fn relation(&self) -> &str {
        &self.relation
    }

    pub fn tail(&self) -> &str {
        &self.tail
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.head, self.relation, self.tail)
    }
}

fn check_label(field: &'static str, raw: &str) -> Result<String, GraphError> {
    let label = raw.trim();
    if label.is_empty() {
        return Err(GraphError::MalformedTriple {
            field,
            reason: "is empty".into(),
        });
    }
    if let Some(bad) = RESERVED.iter().find(|r| label.contains(*r)) {
        return Err(GraphError::MalformedTriple {
            field,
            reason: format!("contains reserved sequence {bad:?}: {label:?}"),
        });
    }
    Ok(label.to_string())
}

/// An ordered, duplicate-free list of triples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeGraph {
    triples: Vec<Triple>,
    /// Entity labels in order of first appearance.
    entities: Vec<String>,
}

impl KnowledgeGraph {
    pub fn new(triples: Vec<Triple>) -> Result<Self, GraphError> {
        if triples.is_empty() {
            return Err(GraphError::EmptyGraph);
        }
        let mut seen = HashSet::with_capacity(triples.len());
        for (index, t) in triples.iter().enumerate() {
            if !seen.insert(t) {
                return Err(GraphError::DuplicateTriple { index });
            }
        }
        let mut entities = Vec::new();
        let mut known = HashSet::new();
        for t in &triples {
            for e in [&t.head, &t.tail] {
                if known.insert(e.as_str()) {
                    entities.push(e.clone());
                }
            }
        }
        Ok(Self { triples, entities })
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }
}

/// Shorthand for [`KnowledgeGraph::new`].
pub fn build_graph(triples: Vec<Triple>) -> Result<KnowledgeGraph, GraphError> {
    KnowledgeGraph::new(triples)
}

/// A graph with one level marker per triple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeveledGraph {
    graph: KnowledgeGraph,
    levels: Vec<u32>,
    roots: BTreeSet<String>,
}

impl LeveledGraph {
    /// Pairs a graph with externally supplied levels, e.g. ones recovered from a
    /// linearised string. Levels must align with the triples and be positive.
    pub fn from_parts(
        graph: KnowledgeGraph,
        levels: Vec<u32>,
        roots: BTreeSet<String>,
    ) -> Option<Self> {
        if levels.len() != graph.len() || levels.contains(&0) {
            return None;
        }
        Some(Self {
            graph,
            levels,
            roots,
        })
    }

    pub fn graph(&self) -> &KnowledgeGraph {
        &self.graph
    }

    pub fn triples(&self) -> &[Triple] {
        self.graph.triples()
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn roots(&self) -> &BTreeSet<String> {
        &self.roots
    }

    pub fn max_level(&self) -> u32 {
        self.levels.iter().copied().max().unwrap_or(0)
    }

    /// Triple indices sorted by `(level, input index)`.
    pub fn linear_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.levels.len()).collect();
        order.sort_by_key(|&i| (self.levels[i], i));
        order
    }
}

/// Index-based view of a graph used by root finding and BFS.
struct Adjacency<'a> {
    index: HashMap<&'a str, usize>,
    labels: &'a [String],
    out_edges: Vec<Vec<usize>>,
    in_degree: Vec<usize>,
}

impl<'a> Adjacency<'a> {
    fn new(graph: &'a KnowledgeGraph) -> Self {
        let labels = graph.entities();
        let index: HashMap<&str, usize> = labels
            .iter()
            .enumerate()
            .map(|(i, e)| (e.as_str(), i))
            .collect();
        let mut out_edges = vec![Vec::new(); labels.len()];
        let mut in_degree = vec![0; labels.len()];
        for t in graph.triples() {
            let (h, d) = (index[t.head()], index[t.tail()]);
            out_edges[h].push(d);
            in_degree[d] += 1;
        }
        Self {
            index,
            labels,
            out_edges,
            in_degree,
        }
    }

    fn root_indices(&self) -> Vec<usize> {
        let n = self.labels.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (h, outs) in self.out_edges.iter().enumerate() {
            for &d in outs {
                let (a, b) = (find(&mut parent, h), find(&mut parent, d));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }

        let mut roots = Vec::new();
        let mut components: Vec<Vec<usize>> = vec![Vec::new(); n];
        for v in 0..n {
            let c = find(&mut parent, v);
            components[c].push(v);
        }
        for members in components.iter().filter(|m| !m.is_empty()) {
            let parentless: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&v| self.in_degree[v] == 0)
                .collect();
            if parentless.is_empty() {
                // Fully cyclic component: highest out-degree, then smallest label.
                let hub = members
                    .iter()
                    .copied()
                    .min_by(|&a, &b| {
                        self.out_edges[b]
                            .len()
                            .cmp(&self.out_edges[a].len())
                            .then_with(|| self.labels[a].cmp(&self.labels[b]))
                    })
                    .expect("component is non-empty");
                roots.push(hub);
            } else {
                roots.extend(parentless);
            }
        }
        roots.sort_unstable();
        roots
    }

    /// Multi-source BFS distances; `None` for unreachable entities.
    fn distances(&self, roots: &[usize]) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.labels.len()];
        let mut queue = VecDeque::new();
        for &r in roots {
            dist[r] = Some(0);
            queue.push_back(r);
        }
        while let Some(v) = queue.pop_front() {
            let next = dist[v].map(|d| d + 1);
            for &w in &self.out_edges[v] {
                if dist[w].is_none() {
                    dist[w] = next;
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

/// Entities with no incoming edge. A weakly connected component in which every
/// entity has a parent contributes its highest out-degree entity instead (ties
/// broken by the lexicographically smallest label).
pub fn find_roots(graph: &KnowledgeGraph) -> BTreeSet<String> {
    let adj = Adjacency::new(graph);
    adj.root_indices()
        .into_iter()
        .map(|i| adj.labels[i].clone())
        .collect()
}

/// Assigns each triple the BFS distance of its tail from the root set.
///
/// Tails that cannot be reached get `distance(head) + 1` when the head is
/// reachable and `1` otherwise. A tail that is itself a root (only possible for
/// fallback roots of cyclic components) is clamped to level 1.
pub fn assign_levels(graph: &KnowledgeGraph) -> LeveledGraph {
    let adj = Adjacency::new(graph);
    let roots = adj.root_indices();
    let dist = adj.distances(&roots);
    let levels = graph
        .triples()
        .iter()
        .map(|t| {
            let level = match dist[adj.index[t.tail()]] {
                Some(d) => d,
                None => dist[adj.index[t.head()]].map_or(1, |d| d + 1),
            };
            level.max(1)
        })
        .collect();
    LeveledGraph {
        graph: graph.clone(),
        levels,
        roots: roots.into_iter().map(|i| adj.labels[i].clone()).collect(),
    }
}
