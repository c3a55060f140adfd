//! Multi-reference BLEU and TER.

pub mod bleu;
pub mod report;
pub mod ter;
mod tokenize;

use serde::Serialize;
use thiserror::Error;

pub use bleu::{bleu_corpus, BleuScore};
pub use report::{read_segments, score_report, ScoreReport, SegmentDiagnostics};
pub use ter::{ter_corpus, TerScore};
pub use tokenize::{tokenize, Tokenizer};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("no segments to score")]
    EmptyCorpus,
    #[error("a reference is empty after tokenization")]
    EmptyReference,
    #[error("segment {0} has no references")]
    NoReferences(usize),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("external value {0:?} must be `name=value` with a [A-Za-z0-9_-] name and a one-line value")]
    BadExternal(String),
    #[error("{path} has {found} lines, expected {expected}")]
    LineCountMismatch {
        path: std::path::PathBuf,
        found: usize,
        expected: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricConfig {
    pub tokenizer: Tokenizer,
    pub lowercase: bool,
    /// Replacement for zero n-gram matches in per-segment BLEU diagnostics.
    /// Corpus BLEU is never smoothed.
    pub segment_epsilon: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            tokenizer: Tokenizer::Intl,
            lowercase: false,
            segment_epsilon: 0.1,
        }
    }
}

/// A hypothesis with at least one reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentPair {
    pub hypothesis: String,
    references: Vec<String>,
}

impl SegmentPair {
    /// `None` if `references` is empty.
    pub fn new<I, S>(hypothesis: impl Into<String>, references: I) -> Option<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let references: Vec<String> = references.into_iter().map(Into::into).collect();
        (!references.is_empty()).then(|| Self {
            hypothesis: hypothesis.into(),
            references,
        })
    }

    pub fn references(&self) -> &[String] {
        &self.references
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedPair {
    pub hypothesis: Vec<String>,
    pub references: Vec<Vec<String>>,
}

pub fn tokenize_pairs(
    pairs: &[SegmentPair],
    config: &MetricConfig,
) -> Result<Vec<TokenizedPair>, MetricError> {
    if pairs.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    let tok = |s: &str| tokenize(s, config.tokenizer, config.lowercase);
    Ok(pairs
        .iter()
        .map(|p| TokenizedPair {
            hypothesis: tok(&p.hypothesis),
            references: p.references.iter().map(|r| tok(r)).collect(),
        })
        .collect())
}
