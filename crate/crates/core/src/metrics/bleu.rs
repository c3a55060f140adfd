//! Corpus-level BLEU-4 with multiple references.

use std::collections::HashMap;

use serde::Serialize;

use super::{MetricConfig, MetricError, TokenizedPair};

pub const MAX_ORDER: usize = 4;

/// Pooled sufficient statistics; these add across segments.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BleuStats {
    pub matches: [u64; MAX_ORDER],
    pub totals: [u64; MAX_ORDER],
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl std::ops::AddAssign for BleuStats {
    fn add_assign(&mut self, o: Self) {
        for n in 0..MAX_ORDER {
            self.matches[n] += o.matches[n];
            self.totals[n] += o.totals[n];
        }
        self.hyp_len += o.hyp_len;
        self.ref_len += o.ref_len;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BleuScore {
    /// 0 to 100.
    pub score: f64,
    /// Modified n-gram precisions, 0 to 100.
    pub precisions: [f64; MAX_ORDER],
    pub brevity_penalty: f64,
    pub stats: BleuStats,
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], u64> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Clipped n-gram statistics for one segment. The reference length is the one
/// closest to the hypothesis length, preferring the shorter on ties.
pub fn segment_stats(pair: &TokenizedPair) -> BleuStats {
    let hyp = &pair.hypothesis;
    let mut stats = BleuStats {
        hyp_len: hyp.len() as u64,
        ref_len: pair
            .references
            .iter()
            .map(|r| r.len())
            .min_by_key(|&len| (len.abs_diff(hyp.len()), len))
            .unwrap_or(0) as u64,
        ..BleuStats::default()
    };
    for n in 1..=MAX_ORDER {
        let hyp_counts = ngram_counts(hyp, n);
        let mut max_ref: HashMap<&[String], u64> = HashMap::new();
        for r in &pair.references {
            for (gram, c) in ngram_counts(r, n) {
                let slot = max_ref.entry(gram).or_insert(0);
                *slot = (*slot).max(c);
            }
        }
        stats.totals[n - 1] = hyp.len().saturating_sub(n - 1) as u64;
        stats.matches[n - 1] = hyp_counts
            .iter()
            .map(|(gram, &c)| c.min(max_ref.get(gram).copied().unwrap_or(0)))
            .sum();
    }
    stats
}

pub fn brevity_penalty(hyp_len: u64, ref_len: u64) -> f64 {
    if hyp_len == 0 {
        0.0
    } else if hyp_len <= ref_len {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    } else {
        1.0
    }
}

/// Unsmoothed BLEU from pooled statistics: any zero precision gives 0.
pub fn score_from_stats(stats: &BleuStats) -> BleuScore {
    let mut precisions = [0.0; MAX_ORDER];
    for n in 0..MAX_ORDER {
        if stats.totals[n] > 0 {
            precisions[n] = 100.0 * stats.matches[n] as f64 / stats.totals[n] as f64;
        }
    }
    let brevity_penalty = brevity_penalty(stats.hyp_len, stats.ref_len);
    let score = if precisions.contains(&0.0) {
        0.0
    } else {
        let log_mean = precisions.iter().map(|p| (p / 100.0).ln()).sum::<f64>() / MAX_ORDER as f64;
        100.0 * brevity_penalty * log_mean.exp()
    };
    BleuScore {
        score,
        precisions,
        brevity_penalty,
        stats: *stats,
    }
}

/// Segment-level BLEU for diagnostics. Zero match counts are replaced by
/// `epsilon`; orders longer than the hypothesis are left out.
pub fn smoothed_sentence_score(stats: &BleuStats, epsilon: f64) -> f64 {
    let logs: Vec<f64> = (0..MAX_ORDER)
        .filter(|&n| stats.totals[n] > 0)
        .map(|n| {
            let m = stats.matches[n] as f64;
            let m = if m == 0.0 { epsilon } else { m };
            (m / stats.totals[n] as f64).ln()
        })
        .collect();
    if logs.is_empty() {
        return 0.0;
    }
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    100.0 * brevity_penalty(stats.hyp_len, stats.ref_len) * mean.exp()
}

pub fn bleu_from_tokens(pairs: &[TokenizedPair]) -> Result<BleuScore, MetricError> {
    if pairs.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    let mut total = BleuStats::default();
    for p in pairs {
        total += segment_stats(p);
    }
    Ok(score_from_stats(&total))
}

pub fn bleu_corpus(pairs: &[super::SegmentPair], config: &MetricConfig) -> Result<BleuScore, MetricError> {
    bleu_from_tokens(&super::tokenize_pairs(pairs, config)?)
}

#[cfg(test)]
mod tests {
    use super::super::SegmentPair;
    use super::*;

    fn ws() -> MetricConfig {
        MetricConfig {
            tokenizer: super::super::Tokenizer::Whitespace,
            ..MetricConfig::default()
        }
    }

    #[test]
    fn perfect() {
        let pairs = vec![
            SegmentPair::new("the cat sat on the mat", ["a dog", "the cat sat on the mat"]).unwrap(),
            SegmentPair::new("hello there , general kenobi", ["hello there , general kenobi"]).unwrap(),
        ];
        let b = bleu_corpus(&pairs, &MetricConfig::default()).unwrap();
        assert_eq!(format!("{:.2}", b.score), "100.00");
        assert_eq!(b.brevity_penalty, 1.0);
    }

    #[test]
    fn clipping() {
        let pairs = vec![SegmentPair::new("the the the the", ["the cat"]).unwrap()];
        let b = bleu_corpus(&pairs, &ws()).unwrap();
        assert_eq!(b.stats.matches, [1, 0, 0, 0]);
        assert_eq!(b.stats.totals, [4, 3, 2, 1]);
        assert_eq!(b.precisions[0], 25.0);
        assert_eq!(b.score, 0.0);
    }

    #[test]
    fn closest_reference_prefers_shorter() {
        let pair = SegmentPair::new("a b c", ["a b", "a b c d"]).unwrap();
        let toks = super::super::tokenize_pairs(&[pair], &ws()).unwrap();
        assert_eq!(segment_stats(&toks[0]).ref_len, 2);
    }

    #[test]
    fn brevity() {
        assert_eq!(brevity_penalty(0, 3), 0.0);
        assert_eq!(brevity_penalty(3, 3), 1.0);
        assert_eq!(brevity_penalty(4, 3), 1.0);
        assert!((brevity_penalty(2, 3) - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn empty_hypothesis_and_corpus() {
        let pairs = vec![SegmentPair::new("", ["x y"]).unwrap()];
        assert_eq!(bleu_corpus(&pairs, &ws()).unwrap().score, 0.0);
        assert!(matches!(bleu_corpus(&[], &ws()), Err(MetricError::EmptyCorpus)));
    }

    #[test]
    fn smoothed_segment() {
        let pairs = vec![SegmentPair::new("a b x", ["a b c"]).unwrap()];
        let toks = super::super::tokenize_pairs(&pairs, &ws()).unwrap();
        let s = segment_stats(&toks[0]);
        // p = 2/3, 1/2, eps/1; no 4-grams
        let expected = 100.0 * (((2.0f64 / 3.0).ln() + 0.5f64.ln() + 0.1f64.ln()) / 3.0).exp();
        assert!((smoothed_sentence_score(&s, 0.1) - expected).abs() < 1e-9);
    }
}
