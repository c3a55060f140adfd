//! Structure-aware linearisation of a leveled graph and its inverse.
//!
//! Wire format, one bracket group per triple, groups joined by `", "`:
//!
//! ```text
//! [S | {head}, P | {relation}, O | {tail}, {level}]
//! ```
//!
//! Without level markers the trailing `", {level}"` is dropped. Groups are
//! ordered by `(level, input index)`. The masker additionally produces
//! `[<X>, {level}]` for a masked triple and `<Y>` in place of `P | {relation}`
//! for a masked relation; [`parse_linearized`] accepts both.

use thiserror::Error;

use crate::graph::{LeveledGraph, Triple};

pub const TRIPLE_SENTINEL: &str = "<X>";
pub const RELATION_SENTINEL: &str = "<Y>";
pub const END_SENTINEL: &str = "<Z>";

const GROUP_SEP: &str = ", ";

/// How triples are ordered in the output. Only one ordering is defined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TripleOrder {
    /// Ascending level, input order within a level.
    #[default]
    LevelAscending,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinearizeOptions {
    pub include_level_markers: bool,
    pub order: TripleOrder,
}

impl Default for LinearizeOptions {
    fn default() -> Self {
        Self {
            include_level_markers: true,
            order: TripleOrder::LevelAscending,
        }
    }
}

impl LinearizeOptions {
    pub fn without_level_markers() -> Self {
        Self {
            include_level_markers: false,
            ..Self::default()
        }
    }
}

pub(crate) fn push_triple_body(out: &mut String, t: &Triple) {
    out.push_str("S | ");
    out.push_str(t.head());
    out.push_str(", P | ");
    out.push_str(t.relation());
    out.push_str(", O | ");
    out.push_str(t.tail());
}

pub(crate) fn push_level(out: &mut String, level: Option<u32>) {
    if let Some(l) = level {
        out.push_str(GROUP_SEP);
        out.push_str(&l.to_string());
    }
}

/// Renders one triple as a bracket group.
pub fn render_triple(t: &Triple, level: Option<u32>) -> String {
    let mut out = String::with_capacity(t.head().len() + t.relation().len() + t.tail().len() + 24);
    out.push('[');
    push_triple_body(&mut out, t);
    push_level(&mut out, level);
    out.push(']');
    out
}

pub fn linearize(lg: &LeveledGraph, opts: &LinearizeOptions) -> String {
    let TripleOrder::LevelAscending = opts.order;
    let mut out = String::new();
    for (k, i) in lg.linear_order().into_iter().enumerate() {
        if k > 0 {
            out.push_str(GROUP_SEP);
        }
        let level = opts.include_level_markers.then(|| lg.levels()[i]);
        out.push('[');
        push_triple_body(&mut out, &lg.triples()[i]);
        push_level(&mut out, level);
        out.push(']');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unbalanced brackets or stray text at byte {offset}")]
    UnbalancedBrackets { offset: usize },
    #[error("bracket group {group} has the wrong number of segments")]
    BadSegmentCount { group: usize },
    #[error("bracket group {group} has a missing or unexpected role prefix")]
    BadRolePrefix { group: usize },
}

/// Content of one parsed bracket group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Slot {
    /// A full triple; `relation` is `None` where the relation was masked by `<Y>`.
    Triple {
        head: String,
        relation: Option<String>,
        tail: String,
    },
    /// A whole triple masked by `<X>`.
    Masked,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub slot: Slot,
    pub level: Option<u32>,
}

/// Result of [`parse_linearized`], groups in text order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Linearized {
    pub groups: Vec<Group>,
}

impl Linearized {
    pub fn has_levels(&self) -> bool {
        !self.groups.is_empty() && self.groups.iter().all(|g| g.level.is_some())
    }

    pub fn levels(&self) -> Option<Vec<u32>> {
        self.groups.iter().map(|g| g.level).collect()
    }

    /// The triples, or `None` if any group carries a mask.
    pub fn triples(&self) -> Option<Vec<Triple>> {
        self.groups
            .iter()
            .map(|g| match &g.slot {
                Slot::Triple {
                    head,
                    relation: Some(r),
                    tail,
                } => Triple::new(head, r, tail).ok(),
                _ => None,
            })
            .collect()
    }

    /// Indices of groups masked by `<X>`.
    pub fn masked_triples(&self) -> Vec<usize> {
        self.positions(|s| matches!(s, Slot::Masked))
    }

    /// Indices of groups whose relation is masked by `<Y>`.
    pub fn masked_relations(&self) -> Vec<usize> {
        self.positions(|s| matches!(s, Slot::Triple { relation: None, .. }))
    }

    fn positions(&self, pred: impl Fn(&Slot) -> bool) -> Vec<usize> {
        self.groups
            .iter()
            .enumerate()
            .filter(|(_, g)| pred(&g.slot))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Splits `text` into the contents of its top-level bracket groups.
fn split_groups(text: &str) -> Result<Vec<&str>, ParseError> {
    let mut groups = Vec::new();
    let mut rest = text;
    let offset = |rest: &str| text.len() - rest.len();
    if rest.is_empty() {
        return Ok(groups);
    }
    loop {
        let Some(body) = rest.strip_prefix('[') else {
            return Err(ParseError::UnbalancedBrackets { offset: offset(rest) });
        };
        let close = body
            .find(']')
            .ok_or(ParseError::UnbalancedBrackets { offset: offset(rest) })?;
        let content = &body[..close];
        if let Some(p) = content.find('[') {
            return Err(ParseError::UnbalancedBrackets {
                offset: offset(body) + p,
            });
        }
        groups.push(content);
        rest = &body[close + 1..];
        if rest.is_empty() {
            return Ok(groups);
        }
        rest = rest
            .strip_prefix(GROUP_SEP)
            .ok_or(ParseError::UnbalancedBrackets { offset: offset(rest) })?;
    }
}

/// Splits a trailing `", {positive integer}"` off a group body.
fn split_level(content: &str) -> Option<(&str, u32)> {
    let (body, num) = content.rsplit_once(GROUP_SEP)?;
    if num.is_empty() || !num.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let level: u32 = num.parse().ok()?;
    (level > 0).then_some((body, level))
}

fn parse_body(body: &str, group: usize) -> Result<Slot, ParseError> {
    if body == TRIPLE_SENTINEL {
        return Ok(Slot::Masked);
    }
    let segments = body.split(GROUP_SEP).count();
    let shape_error = || {
        if segments < 3 {
            ParseError::BadSegmentCount { group }
        } else {
            ParseError::BadRolePrefix { group }
        }
    };
    let after_head = body.strip_prefix("S | ").ok_or_else(|| {
        if body.starts_with(TRIPLE_SENTINEL) {
            ParseError::BadSegmentCount { group }
        } else {
            ParseError::BadRolePrefix { group }
        }
    })?;

    let relation_at = [", P | ", ", <Y>, O | "]
        .iter()
        .filter_map(|m| after_head.find(m))
        .min()
        .ok_or_else(shape_error)?;
    let head = &after_head[..relation_at];
    let rest = &after_head[relation_at + GROUP_SEP.len()..];

    let (relation, tail) = if let Some(tail) = rest.strip_prefix("<Y>, O | ") {
        (None, tail)
    } else {
        let rest = rest.strip_prefix("P | ").ok_or_else(shape_error)?;
        let (relation, tail) = rest.split_once(", O | ").ok_or_else(shape_error)?;
        (Some(relation), tail)
    };

    let valid = |s: &str| !s.is_empty() && s.trim() == s;
    if !valid(head) || !valid(tail) || relation.is_some_and(|r| !valid(r)) {
        return Err(shape_error());
    }
    Ok(Slot::Triple {
        head: head.to_string(),
        relation: relation.map(str::to_string),
        tail: tail.to_string(),
    })
}

/// Parses a linearised string back into groups.
///
/// Level markers are recognised only when every group ends in `", {n}"` with
/// `n >= 1`; otherwise the text is read as marker-free.
pub fn parse_linearized(text: &str) -> Result<Linearized, ParseError> {
    let contents = split_groups(text)?;
    let split: Vec<_> = contents.iter().map(|c| split_level(c)).collect();
    let marked = split.iter().all(Option::is_some);

    let groups = contents
        .iter()
        .zip(split)
        .enumerate()
        .map(|(i, (content, lv))| {
            let (body, level) = match lv {
                Some((body, level)) if marked => (body, Some(level)),
                _ => (*content, None),
            };
            Ok(Group {
                slot: parse_body(body, i)?,
                level,
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(Linearized { groups })
}
