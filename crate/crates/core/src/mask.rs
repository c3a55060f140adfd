//! Graph-masking corruption strategies and the pre-training corpus writer.
//!
//! Every example is a pair of strings. The input is the linearised graph with
//! masked triples replaced by `[<X>, {level}]` and masked relations replaced by
//! `<Y>`. The target lists the masked content, `<X> [S | h, P | r, O | t]`
//! segments first and then `<Y> P | r` segments, each group in linearised
//! order, followed by `<Z>`.
//!
//! Randomness comes from [`ChaCha8Rng`] seeded with a 64-bit value. Corpus
//! entries get their seed from SHA-256 over the global seed and the entry id,
//! so output does not depend on iteration order or thread count.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::{assign_levels, LeveledGraph};
use crate::ingest::Dataset;
use crate::linearize::{
    push_level, push_triple_body, LinearizeOptions, END_SENTINEL, RELATION_SENTINEL,
    TRIPLE_SENTINEL,
};

pub const PRNG_NAME: &str = "ChaCha8Rng";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Triple,
    Relation,
    TripleRelation,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Triple => "triple",
            Strategy::Relation => "relation",
            Strategy::TripleRelation => "triple_relation",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "triple" => Ok(Strategy::Triple),
            "relation" => Ok(Strategy::Relation),
            "triple_relation" => Ok(Strategy::TripleRelation),
            other => Err(format!(
                "unknown strategy {other:?} (expected triple, relation or triple_relation)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskPolicy {
    /// Mask one element per level rather than one per graph.
    pub per_level: bool,
    /// Graphs with fewer triples are rejected with [`MaskError::GraphTooSmall`].
    pub min_triples: usize,
}

impl Default for MaskPolicy {
    fn default() -> Self {
        Self {
            per_level: true,
            min_triples: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MaskError {
    #[error("graph has {triples} triples, fewer than the required {required}")]
    GraphTooSmall { triples: usize, required: usize },
    #[error("{sentinel} count differs: {in_input} in input, {in_target} in target")]
    SentinelMismatch {
        sentinel: &'static str,
        in_input: usize,
        in_target: usize,
    },
    #[error("malformed target: {0}")]
    MalformedTarget(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskedExample {
    pub input_text: String,
    pub target_text: String,
    pub strategy: Strategy,
    pub entry_id: String,
    pub seed: u64,
}

/// Which triples lose their whole group (`<X>`) and which lose only their
/// relation (`<Y>`). Indices refer to input order of the graph's triples.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MaskPlan {
    pub triples: Vec<usize>,
    pub relations: Vec<usize>,
}

impl MaskPlan {
    /// Renders the corrupted input and the target for `lg`.
    pub fn render(&self, lg: &LeveledGraph, opts: &LinearizeOptions) -> (String, String) {
        let mut input = String::new();
        let mut x_target = Vec::new();
        let mut y_target = Vec::new();
        for (k, i) in lg.linear_order().into_iter().enumerate() {
            let t = &lg.triples()[i];
            let level = opts.include_level_markers.then(|| lg.levels()[i]);
            if k > 0 {
                input.push_str(", ");
            }
            input.push('[');
            if self.triples.contains(&i) {
                input.push_str(TRIPLE_SENTINEL);
                let mut seg = format!("{TRIPLE_SENTINEL} [");
                push_triple_body(&mut seg, t);
                seg.push(']');
                x_target.push(seg);
            } else if self.relations.contains(&i) {
                input.push_str("S | ");
                input.push_str(t.head());
                input.push_str(", ");
                input.push_str(RELATION_SENTINEL);
                input.push_str(", O | ");
                input.push_str(t.tail());
                y_target.push(format!("{RELATION_SENTINEL} P | {}", t.relation()));
            } else {
                push_triple_body(&mut input, t);
            }
            push_level(&mut input, level);
            input.push(']');
        }
        let mut target = x_target;
        target.append(&mut y_target);
        target.push(END_SENTINEL.to_string());
        (input, target.join(" "))
    }
}

/// Candidates grouped by level, in linearised order. With `per_level` off all
/// candidates form a single group.
fn candidate_groups(
    lg: &LeveledGraph,
    per_level: bool,
    keep: impl Fn(usize) -> bool,
) -> Vec<Vec<usize>> {
    let mut by_level: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for i in lg.linear_order().into_iter().filter(|&i| keep(i)) {
        let key = if per_level { lg.levels()[i] } else { 0 };
        by_level.entry(key).or_default().push(i);
    }
    by_level.into_values().collect()
}

fn pick<R: Rng>(rng: &mut R, group: &[usize]) -> usize {
    group[rng.random_range(0..group.len())]
}

fn check_size(lg: &LeveledGraph, required: usize) -> Result<(), MaskError> {
    let triples = lg.triples().len();
    if triples < required {
        return Err(MaskError::GraphTooSmall { triples, required });
    }
    Ok(())
}

/// Chooses which elements to mask for `strategy`, drawing from `rng`.
pub fn plan<R: Rng>(
    lg: &LeveledGraph,
    strategy: Strategy,
    policy: &MaskPolicy,
    rng: &mut R,
) -> Result<MaskPlan, MaskError> {
    let mut plan = MaskPlan::default();
    match strategy {
        Strategy::Triple => {
            check_size(lg, policy.min_triples)?;
            for g in candidate_groups(lg, policy.per_level, |_| true) {
                plan.triples.push(pick(rng, &g));
            }
        }
        Strategy::Relation => {
            check_size(lg, policy.min_triples)?;
            for g in candidate_groups(lg, policy.per_level, |_| true) {
                plan.relations.push(pick(rng, &g));
            }
        }
        Strategy::TripleRelation => {
            check_size(lg, policy.min_triples.max(2))?;
            let all = candidate_groups(lg, false, |_| true).concat();
            let m = pick(rng, &all);
            plan.triples.push(m);
            let masked = &lg.triples()[m];
            let touches = |e: &str| e == masked.head() || e == masked.tail();
            let eligible = |i: usize| {
                let t = &lg.triples()[i];
                i != m && !touches(t.head()) && !touches(t.tail())
            };
            for g in candidate_groups(lg, policy.per_level, eligible) {
                plan.relations.push(pick(rng, &g));
            }
        }
    }
    Ok(plan)
}

/// Applies one strategy with its own seeded generator.
pub fn mask(
    lg: &LeveledGraph,
    strategy: Strategy,
    policy: &MaskPolicy,
    opts: &LinearizeOptions,
    seed: u64,
) -> Result<MaskedExample, MaskError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (input_text, target_text) = plan(lg, strategy, policy, &mut rng)?.render(lg, opts);
    Ok(MaskedExample {
        input_text,
        target_text,
        strategy,
        entry_id: String::new(),
        seed,
    })
}

pub fn mask_triple(
    lg: &LeveledGraph,
    policy: &MaskPolicy,
    opts: &LinearizeOptions,
    seed: u64,
) -> Result<MaskedExample, MaskError> {
    mask(lg, Strategy::Triple, policy, opts, seed)
}

pub fn mask_relation(
    lg: &LeveledGraph,
    policy: &MaskPolicy,
    opts: &LinearizeOptions,
    seed: u64,
) -> Result<MaskedExample, MaskError> {
    mask(lg, Strategy::Relation, policy, opts, seed)
}

pub fn mask_triple_relation(
    lg: &LeveledGraph,
    policy: &MaskPolicy,
    opts: &LinearizeOptions,
    seed: u64,
) -> Result<MaskedExample, MaskError> {
    mask(lg, Strategy::TripleRelation, policy, opts, seed)
}

struct TargetSegments<'a> {
    triples: Vec<&'a str>,
    relations: Vec<&'a str>,
}

fn parse_target(target: &str) -> Result<TargetSegments<'_>, MaskError> {
    let body = target
        .strip_suffix(END_SENTINEL)
        .ok_or_else(|| MaskError::MalformedTarget(format!("missing trailing {END_SENTINEL}")))?;
    if body.contains(END_SENTINEL) {
        return Err(MaskError::MalformedTarget(format!(
            "{END_SENTINEL} appears more than once"
        )));
    }
    let mut starts: Vec<usize> = body
        .match_indices(TRIPLE_SENTINEL)
        .chain(body.match_indices(RELATION_SENTINEL))
        .map(|(i, _)| i)
        .collect();
    starts.sort_unstable();
    if starts.first().map_or(!body.is_empty(), |&s| s != 0) {
        return Err(MaskError::MalformedTarget(
            "text before the first sentinel".into(),
        ));
    }
    let mut segs = TargetSegments {
        triples: Vec::new(),
        relations: Vec::new(),
    };
    for (k, &s) in starts.iter().enumerate() {
        let end = starts.get(k + 1).copied().unwrap_or(body.len());
        let seg = &body[s..end];
        let seg = seg.strip_suffix(' ').ok_or_else(|| {
            MaskError::MalformedTarget(format!("segment {seg:?} is not space-terminated"))
        })?;
        if let Some(rest) = seg.strip_prefix("<X> [") {
            let inner = rest
                .strip_suffix(']')
                .ok_or_else(|| MaskError::MalformedTarget(format!("bad triple segment {seg:?}")))?;
            segs.triples.push(inner);
        } else if let Some(rest) = seg.strip_prefix("<Y> ") {
            if !rest.starts_with("P | ") {
                return Err(MaskError::MalformedTarget(format!(
                    "bad relation segment {seg:?}"
                )));
            }
            segs.relations.push(rest);
        } else {
            return Err(MaskError::MalformedTarget(format!("bad segment {seg:?}")));
        }
    }
    Ok(segs)
}

/// Splices the target back into the input's sentinel positions.
///
/// For an example produced from `lg` with options `opts`, the result equals
/// `linearize(lg, opts)`.
pub fn reconstruct(example: &MaskedExample) -> Result<String, MaskError> {
    let segs = parse_target(&example.target_text)?;
    let input = &example.input_text;
    for (sentinel, in_target) in [
        (TRIPLE_SENTINEL, segs.triples.len()),
        (RELATION_SENTINEL, segs.relations.len()),
    ] {
        let in_input = input.matches(sentinel).count();
        if in_input != in_target {
            return Err(MaskError::SentinelMismatch {
                sentinel,
                in_input,
                in_target,
            });
        }
    }

    let mut out = String::with_capacity(input.len() + example.target_text.len());
    let mut triples = segs.triples.into_iter();
    let mut relations = segs.relations.into_iter();
    let mut rest = input.as_str();
    loop {
        let next = [TRIPLE_SENTINEL, RELATION_SENTINEL]
            .iter()
            .filter_map(|s| rest.find(s).map(|p| (p, *s)))
            .min();
        let Some((pos, sentinel)) = next else {
            out.push_str(rest);
            break;
        };
        out.push_str(&rest[..pos]);
        let fill = if sentinel == TRIPLE_SENTINEL {
            triples.next()
        } else {
            relations.next()
        };
        out.push_str(fill.expect("counts checked above"));
        rest = &rest[pos + sentinel.len()..];
    }
    Ok(out)
}

/// Stable per-entry seed: the first 8 bytes (little endian) of
/// SHA-256(global_seed as 8 little-endian bytes || entry_id as UTF-8).
pub fn entry_seed(global_seed: u64, entry_id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(global_seed.to_le_bytes());
    h.update(entry_id.as_bytes());
    let digest = h.finalize();
    let mut first = [0u8; 8];
    first.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(first)
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("all {0} entries were skipped")]
    AllEntriesSkipped(usize),
}

/// One line of a corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub input: String,
    pub target: String,
    pub id: String,
    pub strategy: Strategy,
    /// Decimal string so that 64-bit values survive JSON readers using doubles.
    pub seed: String,
}

impl From<&MaskedExample> for CorpusRecord {
    fn from(e: &MaskedExample) -> Self {
        Self {
            input: e.input_text.clone(),
            target: e.target_text.clone(),
            id: e.entry_id.clone(),
            strategy: e.strategy,
            seed: e.seed.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub strategy: Strategy,
    pub policy: MaskPolicy,
    pub level_markers: bool,
    pub global_seed: u64,
    pub prng: String,
    pub entries: usize,
    pub emitted: usize,
    pub skipped: usize,
}

/// Masks every entry with its derived seed, in dataset order.
/// Entries too small for the policy are reported as `None`.
pub fn mask_dataset(
    dataset: &Dataset,
    strategy: Strategy,
    policy: &MaskPolicy,
    opts: &LinearizeOptions,
    global_seed: u64,
) -> Vec<Option<MaskedExample>> {
    dataset
        .entries()
        .par_iter()
        .map(|e| {
            let lg = assign_levels(&e.graph);
            let seed = entry_seed(global_seed, &e.entry_id);
            match mask(&lg, strategy, policy, opts, seed) {
                Ok(mut ex) => {
                    ex.entry_id = e.entry_id.clone();
                    Some(ex)
                }
                Err(MaskError::GraphTooSmall { .. }) => None,
                Err(other) => unreachable!("masking cannot fail otherwise: {other}"),
            }
        })
        .collect()
}

/// Writes one JSON line per eligible entry and returns the manifest.
pub fn build_corpus<W: Write>(
    dataset: &Dataset,
    strategy: Strategy,
    policy: &MaskPolicy,
    opts: &LinearizeOptions,
    global_seed: u64,
    mut out: W,
) -> Result<CorpusManifest, CorpusError> {
    let examples = mask_dataset(dataset, strategy, policy, opts, global_seed);
    let emitted = examples.iter().flatten().count();
    if emitted == 0 {
        return Err(CorpusError::AllEntriesSkipped(dataset.len()));
    }
    for ex in examples.iter().flatten() {
        serde_json::to_writer(&mut out, &CorpusRecord::from(ex)).map_err(io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(CorpusManifest {
        strategy,
        policy: *policy,
        level_markers: opts.include_level_markers,
        global_seed,
        prng: PRNG_NAME.to_string(),
        entries: dataset.len(),
        emitted,
        skipped: dataset.len() - emitted,
    })
}
