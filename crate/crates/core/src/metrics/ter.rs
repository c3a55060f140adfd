//! Translation edit rate with greedy phrase shifts.
//!
//! Follows the tercom procedure: while some shift of a hypothesis phrase onto a
//! matching, misaligned reference position lowers the word edit distance, apply
//! the best such shift (largest gain, then longest phrase, then earliest source,
//! then earliest target) and count it as one edit. Remaining edits are plain
//! insertions, deletions and substitutions.

use serde::Serialize;

use super::{MetricConfig, MetricError, TokenizedPair};

pub const MAX_SHIFT_SIZE: usize = 10;
pub const MAX_SHIFT_DIST: usize = 50;
pub const MAX_SHIFT_ITERATIONS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Match,
    Sub,
    /// Hypothesis word with no reference counterpart.
    HypOnly,
    /// Reference word missing from the hypothesis.
    RefOnly,
}

pub fn edit_distance<T: PartialEq>(hyp: &[T], reference: &[T]) -> usize {
    let m = reference.len();
    let mut prev: Vec<usize> = (0..=m).collect();
    let mut cur = vec![0; m + 1];
    for (i, h) in hyp.iter().enumerate() {
        cur[0] = i + 1;
        for (j, r) in reference.iter().enumerate() {
            let diag = prev[j] + usize::from(h != r);
            cur[j + 1] = diag.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m]
}

/// Minimal edit script, diagonal moves preferred on ties.
fn edit_script<T: PartialEq>(hyp: &[T], reference: &[T]) -> Vec<Op> {
    let (n, m) = (hyp.len(), reference.len());
    let mut d = vec![vec![0usize; m + 1]; n + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=m {
        d[0][j] = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let diag = d[i - 1][j - 1] + usize::from(hyp[i - 1] != reference[j - 1]);
            d[i][j] = diag.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        if i > 0 && j > 0 {
            let same = hyp[i - 1] == reference[j - 1];
            if d[i][j] == d[i - 1][j - 1] + usize::from(!same) {
                ops.push(if same { Op::Match } else { Op::Sub });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && d[i][j] == d[i - 1][j] + 1 {
            ops.push(Op::HypOnly);
            i -= 1;
        } else {
            ops.push(Op::RefOnly);
            j -= 1;
        }
    }
    ops.reverse();
    ops
}

struct Alignment {
    /// For each reference word, the hypothesis position it aligns to (or the
    /// last hypothesis position before it, `-1` if none).
    align: Vec<isize>,
    ref_err: Vec<bool>,
    hyp_err: Vec<bool>,
}

fn alignment(ops: &[Op]) -> Alignment {
    let (mut h, mut r) = (-1isize, -1isize);
    let mut a = Alignment {
        align: Vec::new(),
        ref_err: Vec::new(),
        hyp_err: Vec::new(),
    };
    for op in ops {
        match op {
            Op::Match | Op::Sub => {
                h += 1;
                r += 1;
                a.align.push(h);
                let err = *op == Op::Sub;
                a.hyp_err.push(err);
                a.ref_err.push(err);
            }
            Op::HypOnly => {
                h += 1;
                a.hyp_err.push(true);
            }
            Op::RefOnly => {
                r += 1;
                a.align.push(h);
                a.ref_err.push(true);
            }
        }
    }
    debug_assert_eq!(a.align.len() as isize, r + 1);
    a
}

/// Moves `words[start..start + len]` so that it lands before position `target`
/// (tercom index conventions).
fn perform_shift<T: Clone>(words: &[T], start: usize, len: usize, target: usize) -> Vec<T> {
    let block = &words[start..start + len];
    let mut out = Vec::with_capacity(words.len());
    if target < start {
        out.extend_from_slice(&words[..target]);
        out.extend_from_slice(block);
        out.extend_from_slice(&words[target..start]);
        out.extend_from_slice(&words[start + len..]);
    } else if target > start + len {
        out.extend_from_slice(&words[..start]);
        out.extend_from_slice(&words[start + len..target]);
        out.extend_from_slice(block);
        out.extend_from_slice(&words[target..]);
    } else {
        let cut = (len + target).min(words.len());
        out.extend_from_slice(&words[..start]);
        out.extend_from_slice(&words[start + len..cut]);
        out.extend_from_slice(block);
        out.extend_from_slice(&words[cut..]);
    }
    out
}

/// Best single shift as `(gain, shifted words)`, if any candidate exists.
fn best_shift<T: PartialEq + Clone>(hyp: &[T], reference: &[T]) -> Option<(isize, Vec<T>)> {
    let base = edit_distance(hyp, reference) as isize;
    let a = alignment(&edit_script(hyp, reference));
    // (gain, len, -start_h, -target)
    let mut best: Option<((isize, usize, isize, isize), Vec<T>)> = None;

    for start_h in 0..hyp.len() {
        for start_r in 0..reference.len() {
            if start_h.abs_diff(start_r) > MAX_SHIFT_DIST {
                continue;
            }
            let mut len = 0;
            while len < MAX_SHIFT_SIZE
                && start_h + len < hyp.len()
                && start_r + len < reference.len()
                && hyp[start_h + len] == reference[start_r + len]
            {
                len += 1;
                if !a.hyp_err[start_h..start_h + len].iter().any(|&e| e) {
                    continue;
                }
                if !a.ref_err[start_r..start_r + len].iter().any(|&e| e) {
                    continue;
                }
                let aligned = a.align[start_r];
                if aligned >= start_h as isize && aligned < (start_h + len) as isize {
                    continue;
                }
                let mut prev_target = None;
                for offset in -1..len as isize {
                    let r = start_r as isize + offset;
                    let target = if r < 0 { 0 } else { (a.align[r as usize] + 1) as usize };
                    if prev_target == Some(target) {
                        continue;
                    }
                    prev_target = Some(target);
                    let shifted = perform_shift(hyp, start_h, len, target);
                    let gain = base - edit_distance(&shifted, reference) as isize;
                    let key = (gain, len, -(start_h as isize), -(target as isize));
                    if best.as_ref().is_none_or(|(k, _)| key > *k) {
                        best = Some((key, shifted));
                    }
                }
            }
        }
    }
    best.map(|((gain, ..), words)| (gain, words))
}

/// Edits (shifts plus word edits) needed to turn `hyp` into `reference`.
pub fn segment_edits<T: PartialEq + Clone>(hyp: &[T], reference: &[T]) -> usize {
    let mut words = hyp.to_vec();
    let mut shifts = 0;
    while shifts < MAX_SHIFT_ITERATIONS {
        match best_shift(&words, reference) {
            Some((gain, shifted)) if gain > 0 => {
                words = shifted;
                shifts += 1;
            }
            _ => break,
        }
    }
    shifts + edit_distance(&words, reference)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TerSegment {
    pub edits: usize,
    pub ref_len: usize,
}

/// Fewest edits over the references; among equally good references the
/// longest is used for normalisation, so reference order does not matter.
pub fn best_segment(pair: &TokenizedPair) -> Result<TerSegment, MetricError> {
    if pair.references.is_empty() || pair.references.iter().any(|r| r.is_empty()) {
        return Err(MetricError::EmptyReference);
    }
    Ok(pair
        .references
        .iter()
        .map(|r| TerSegment {
            edits: segment_edits(&pair.hypothesis, r),
            ref_len: r.len(),
        })
        .min_by(|a, b| a.edits.cmp(&b.edits).then(b.ref_len.cmp(&a.ref_len)))
        .expect("references checked non-empty"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TerScore {
    /// `edits / ref_len`; may exceed 1.
    pub score: f64,
    pub edits: usize,
    pub ref_len: usize,
}

pub fn ter_from_segments(segments: &[TerSegment]) -> Result<TerScore, MetricError> {
    if segments.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    let edits = segments.iter().map(|s| s.edits).sum();
    let ref_len: usize = segments.iter().map(|s| s.ref_len).sum();
    Ok(TerScore {
        score: edits as f64 / ref_len as f64,
        edits,
        ref_len,
    })
}

pub fn ter_from_tokens(pairs: &[TokenizedPair]) -> Result<TerScore, MetricError> {
    if pairs.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    let segments = pairs.iter().map(best_segment).collect::<Result<Vec<_>, _>>()?;
    ter_from_segments(&segments)
}

pub fn ter_corpus(pairs: &[super::SegmentPair], config: &MetricConfig) -> Result<TerScore, MetricError> {
    ter_from_tokens(&super::tokenize_pairs(pairs, config)?)
}
