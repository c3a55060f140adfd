//! Combined BLEU/TER report and its flat `key=value` text form.
//!
//! ```text
//! bleu=57.64
//! bleu_p1=..  bleu_p2=..  bleu_p3=..  bleu_p4=..
//! bleu_bp=1.0000
//! bleu_hyp_len=..
//! bleu_ref_len=..
//! ter=0.3912
//! ter_edits=..
//! ter_ref_len=..
//! segments=..
//! config.tokenizer=intl
//! config.lowercase=false
//! external.meteor=42.24
//! ```
//!
//! One pair per line in exactly this order; `external.*` keys are sorted and
//! their values are copied verbatim from the caller.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::bleu::{score_from_stats, segment_stats, smoothed_sentence_score, BleuStats};
use super::ter::{best_segment, ter_from_segments};
use super::{tokenize_pairs, BleuScore, MetricConfig, MetricError, SegmentPair, TerScore};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentDiagnostics {
    /// Smoothed sentence BLEU, 0 to 100.
    pub bleu: f64,
    pub ter_edits: usize,
    pub ter_ref_len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    pub config: MetricConfig,
    pub bleu: BleuScore,
    pub ter: TerScore,
    pub external: BTreeMap<String, String>,
    pub segments: Vec<SegmentDiagnostics>,
}

fn valid_external(name: &str, value: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        && !value.is_empty()
        && !value.contains(['\n', '\r'])
}

/// Scores `pairs` with both metrics and attaches externally computed values
/// (e.g. METEOR) unchanged.
pub fn score_report(
    pairs: &[SegmentPair],
    config: &MetricConfig,
    external: &BTreeMap<String, String>,
) -> Result<ScoreReport, MetricError> {
    if let Some((k, v)) = external.iter().find(|(k, v)| !valid_external(k, v)) {
        return Err(MetricError::BadExternal(format!("{k}={v}")));
    }
    let tokenized = tokenize_pairs(pairs, config)?;
    let mut total = BleuStats::default();
    let mut ter_segments = Vec::with_capacity(tokenized.len());
    let mut segments = Vec::with_capacity(tokenized.len());
    for pair in &tokenized {
        let stats = segment_stats(pair);
        total += stats;
        let ter = best_segment(pair)?;
        ter_segments.push(ter);
        segments.push(SegmentDiagnostics {
            bleu: smoothed_sentence_score(&stats, config.segment_epsilon),
            ter_edits: ter.edits,
            ter_ref_len: ter.ref_len,
        });
    }
    Ok(ScoreReport {
        config: *config,
        bleu: score_from_stats(&total),
        ter: ter_from_segments(&ter_segments)?,
        external: external.clone(),
        segments,
    })
}

impl ScoreReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let b = &self.bleu;
        let _ = writeln!(out, "bleu={:.2}", b.score);
        for (n, p) in b.precisions.iter().enumerate() {
            let _ = writeln!(out, "bleu_p{}={p:.4}", n + 1);
        }
        let _ = writeln!(out, "bleu_bp={:.4}", b.brevity_penalty);
        let _ = writeln!(out, "bleu_hyp_len={}", b.stats.hyp_len);
        let _ = writeln!(out, "bleu_ref_len={}", b.stats.ref_len);
        let _ = writeln!(out, "ter={:.4}", self.ter.score);
        let _ = writeln!(out, "ter_edits={}", self.ter.edits);
        let _ = writeln!(out, "ter_ref_len={}", self.ter.ref_len);
        let _ = writeln!(out, "segments={}", self.segments.len());
        let _ = writeln!(out, "config.tokenizer={}", self.config.tokenizer);
        let _ = writeln!(out, "config.lowercase={}", self.config.lowercase);
        for (k, v) in &self.external {
            let _ = writeln!(out, "external.{k}={v}");
        }
        out
    }

    /// Tab-separated per-segment diagnostics with a header row.
    pub fn segments_tsv(&self) -> String {
        let mut out = String::from("segment\tbleu\tter_edits\tter_ref_len\n");
        for (i, s) in self.segments.iter().enumerate() {
            let _ = writeln!(out, "{i}\t{:.4}\t{}\t{}", s.bleu, s.ter_edits, s.ter_ref_len);
        }
        out
    }
}

/// Parses report text back into its key/value pairs.
pub fn parse_report_text(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn read_lines(path: &Path) -> Result<Vec<String>, MetricError> {
    let text = fs::read_to_string(path).map_err(|source| MetricError::Io {
        path: PathBuf::from(path),
        source,
    })?;
    Ok(text.lines().map(str::to_string).collect())
}

/// Reads a hypothesis file and parallel reference files, one segment per line.
/// A blank reference line means that segment has no reference in that file.
pub fn read_segments(hyp: &Path, refs: &[PathBuf]) -> Result<Vec<SegmentPair>, MetricError> {
    let hyps = read_lines(hyp)?;
    let mut columns = Vec::with_capacity(refs.len());
    for path in refs {
        let lines = read_lines(path)?;
        if lines.len() != hyps.len() {
            return Err(MetricError::LineCountMismatch {
                path: path.clone(),
                found: lines.len(),
                expected: hyps.len(),
            });
        }
        columns.push(lines);
    }
    hyps.into_iter()
        .enumerate()
        .map(|(i, h)| {
            let refs = columns
                .iter()
                .map(|c| c[i].trim())
                .filter(|r| !r.is_empty())
                .map(str::to_string);
            SegmentPair::new(h, refs).ok_or(MetricError::NoReferences(i))
        })
        .collect()
}
