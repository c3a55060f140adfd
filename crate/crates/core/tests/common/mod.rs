//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use graphmask_core::{KnowledgeGraph, Triple};

const INF: u32 = u32::MAX / 4;

/// Levels from all-pairs shortest paths (Floyd-Warshall) and the root rules:
/// parentless entities, or per fully cyclic weak component the entity with the
/// most outgoing edges (smallest label on ties).
pub fn brute_force_levels(g: &KnowledgeGraph) -> (Vec<u32>, BTreeSet<String>) {
    let names: Vec<&str> = g.entities().iter().map(String::as_str).collect();
    let idx: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let n = names.len();
    let mut dist = vec![vec![INF; n]; n];
    let mut linked = vec![vec![false; n]; n];
    let mut indeg = vec![0; n];
    let mut outdeg = vec![0; n];
    for i in 0..n {
        dist[i][i] = 0;
        linked[i][i] = true;
    }
    for t in g.triples() {
        let (h, d) = (idx[t.head()], idx[t.tail()]);
        if h != d {
            dist[h][d] = 1;
        }
        linked[h][d] = true;
        linked[d][h] = true;
        indeg[d] += 1;
        outdeg[h] += 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if dist[i][k] + dist[k][j] < dist[i][j] {
                    dist[i][j] = dist[i][k] + dist[k][j];
                }
                if linked[i][k] && linked[k][j] {
                    linked[i][j] = true;
                }
            }
        }
    }
    let mut roots = BTreeSet::new();
    let mut done = vec![false; n];
    for v in 0..n {
        if done[v] {
            continue;
        }
        let comp: Vec<usize> = (0..n).filter(|&u| linked[v][u]).collect();
        for &u in &comp {
            done[u] = true;
        }
        let parentless: Vec<usize> = comp.iter().copied().filter(|&u| indeg[u] == 0).collect();
        if parentless.is_empty() {
            let best = comp
                .iter()
                .copied()
                .max_by(|&a, &b| outdeg[a].cmp(&outdeg[b]).then(names[b].cmp(names[a])))
                .unwrap();
            roots.insert(best);
        } else {
            roots.extend(parentless);
        }
    }
    let depth = |e: usize| roots.iter().map(|&r| dist[r][e]).min().unwrap();
    let levels = g
        .triples()
        .iter()
        .map(|t| {
            let (h, d) = (idx[t.head()], idx[t.tail()]);
            if depth(d) < INF {
                depth(d).max(1)
            } else if depth(h) < INF {
                depth(h) + 1
            } else {
                1
            }
        })
        .collect();
    (levels, roots.into_iter().map(|i| names[i].to_string()).collect())
}

/// Fewest block moves plus word edits over every reachable rearrangement of
/// `hyp` (breadth-first over shifts, each shift costs 1).
pub fn exhaustive_ter_edits(hyp: &[&str], reference: &[&str]) -> usize {
    use std::collections::{HashSet, VecDeque};
    let start: Vec<&str> = hyp.to_vec();
    let mut seen: HashSet<Vec<&str>> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    let mut best = usize::MAX;
    while let Some((words, shifts)) = queue.pop_front() {
        best = best.min(shifts + levenshtein(&words, reference));
        if shifts + 1 >= best {
            continue;
        }
        let n = words.len();
        for s in 0..n {
            for len in 1..=n - s {
                let block = &words[s..s + len];
                let mut rest: Vec<&str> = words[..s].to_vec();
                rest.extend_from_slice(&words[s + len..]);
                for pos in 0..=rest.len() {
                    let mut next = rest[..pos].to_vec();
                    next.extend_from_slice(block);
                    next.extend_from_slice(&rest[pos..]);
                    if seen.insert(next.clone()) {
                        queue.push_back((next, shifts + 1));
                    }
                }
            }
        }
    }
    best
}

pub fn levenshtein(a: &[&str], b: &[&str]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 0..=a.len() {
        d[i][0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

/// True if no relation-masked triple shares an entity with a triple-masked one.
pub fn disjoint(masked_triples: &[&Triple], masked_relations: &[&Triple]) -> bool {
    masked_relations.iter().all(|t| {
        masked_triples.iter().all(|m| {
            let ents = [m.head(), m.tail()];
            !ents.contains(&t.head()) && !ents.contains(&t.tail())
        })
    })
}

pub fn baths() -> KnowledgeGraph {
    let t = |h: &str, r: &str, d: &str| Triple::new(h, r, d).unwrap();
    KnowledgeGraph::new(vec![
        t("Asser Levy Public Baths", "location", "New York City"),
        t("New York City", "country", "United States"),
        t("New York City", "is Part Of", "Manhattan"),
        t("Manhattan", "leader Name", "Cyrus Vance Jr."),
        t("Manhattan", "is Part Of", "New York"),
    ])
    .unwrap()
}

pub const BATHS_LINEARIZED: &str = "[S | Asser Levy Public Baths, P | location, O | New York City, 1], [S | New York City, P | country, O | United States, 2], [S | New York City, P | is Part Of, O | Manhattan, 2], [S | Manhattan, P | leader Name, O | Cyrus Vance Jr., 3], [S | Manhattan, P | is Part Of, O | New York, 3]";

/// Masked inputs and targets for the three strategies on the Baths graph,
/// one element masked per graph.
pub const GOLDEN_ROWS: [(&str, &str, &str); 3] = [
    (
        "triple",
        "[<X>, 1], [S | New York City, P | country, O | United States, 2], [S | New York City, P | is Part Of, O | Manhattan, 2], [S | Manhattan, P | leader Name, O | Cyrus Vance Jr., 3], [S | Manhattan, P | is Part Of, O | New York, 3]",
        "<X> [S | Asser Levy Public Baths, P | location, O | New York City] <Z>",
    ),
    (
        "relation",
        "[S | Asser Levy Public Baths, P | location, O | New York City, 1], [S | New York City, <Y>, O | United States, 2], [S | New York City, P | is Part Of, O | Manhattan, 2], [S | Manhattan, P | leader Name, O | Cyrus Vance Jr., 3], [S | Manhattan, P | is Part Of, O | New York, 3]",
        "<Y> P | country <Z>",
    ),
    (
        "triple_relation",
        "[<X>, 1], [S | New York City, P | country, O | United States, 2], [S | New York City, P | is Part Of, O | Manhattan, 2], [S | Manhattan, <Y>, O | Cyrus Vance Jr., 3], [S | Manhattan, P | is Part Of, O | New York, 3]",
        "<X> [S | Asser Levy Public Baths, P | location, O | New York City] <Y> P | leader Name <Z>",
    ),
];

/// Seeds under which one-element-per-graph masking picks the rows above.
pub const GOLDEN_SEEDS: [u64; 3] = [2, 5, 7];
