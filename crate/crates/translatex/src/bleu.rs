//! Corpus-level BLEU: modified n-gram precision up to 4-grams with a
//! brevity penalty.
//!
//! For each order n, a hypothesis n-gram counts as a match only up to the
//! number of times it occurs in the reference (clipping, so `the the the`
//! cannot farm matches from a single reference `the`). Per-sentence clipped
//! counts and totals are summed over the corpus, and
//!
//! ```text
//! score = BP · exp( Σ_{n=1..4} ¼·ln p_n )
//! BP    = 1 if hyp_len > ref_len, else exp(1 − ref_len/hyp_len)
//! ```
//!
//! Any zero precision makes the score 0 unless add-one smoothing is
//! requested (a short-corpus diagnostic, not for reported numbers).
//! Hypotheses and references are tokenized identically with
//! [`crate::corpus::word_tokenize`].

use crate::corpus::word_tokenize;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

pub const MAX_NGRAM: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BleuError {
    #[error("cannot score an empty corpus")]
    EmptyCorpus,
    #[error("hypothesis count {hyps} does not match reference count {refs}")]
    MismatchedLengths { hyps: usize, refs: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuReport {
    /// Clipped n-gram precisions p_1..p_4.
    pub precisions: [f64; MAX_NGRAM],
    pub brevity_penalty: f64,
    /// In [0, 1]; multiply by 100 for the conventional reporting scale.
    pub score: f64,
    pub hyp_len: usize,
    pub ref_len: usize,
}

impl BleuReport {
    pub fn score_percent(&self) -> f64 {
        self.score * 100.0
    }

    /// One-line human summary in the conventional percent scale.
    pub fn summary(&self) -> String {
        format!(
            "BLEU = {:.2}, {:.1}/{:.1}/{:.1}/{:.1} (BP={:.3}, hyp_len={}, ref_len={})",
            self.score_percent(),
            self.precisions[0] * 100.0,
            self.precisions[1] * 100.0,
            self.precisions[2] * 100.0,
            self.precisions[3] * 100.0,
            self.brevity_penalty,
            self.hyp_len,
            self.ref_len
        )
    }
}

/// Summed clipped matches and hypothesis n-gram totals over aligned,
/// pre-tokenized sentences.
pub fn clipped_ngram_precision(
    hyps: &[Vec<String>],
    refs: &[Vec<String>],
    n: usize,
) -> (u64, u64) {
    debug_assert!((1..=MAX_NGRAM).contains(&n));
    let mut matches = 0u64;
    let mut total = 0u64;
    for (hyp, reference) in hyps.iter().zip(refs) {
        let hyp_counts = ngram_counts(hyp, n);
        let ref_counts = ngram_counts(reference, n);
        for (gram, count) in &hyp_counts {
            total += *count as u64;
            if let Some(&ref_count) = ref_counts.get(gram) {
                matches += (*count).min(ref_count) as u64;
            }
        }
    }
    (matches, total)
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n && n > 0 {
        for window in tokens.windows(n) {
            *counts.entry(window).or_insert(0) += 1;
        }
    }
    counts
}

/// Corpus BLEU with a single reference per hypothesis, no smoothing.
pub fn bleu<S: AsRef<str>>(hyps: &[S], refs: &[S]) -> Result<BleuReport, BleuError> {
    bleu_with(hyps, refs, false)
}

pub fn bleu_with<S: AsRef<str>>(
    hyps: &[S],
    refs: &[S],
    smooth: bool,
) -> Result<BleuReport, BleuError> {
    if hyps.is_empty() || refs.is_empty() {
        return Err(BleuError::EmptyCorpus);
    }
    if hyps.len() != refs.len() {
        return Err(BleuError::MismatchedLengths {
            hyps: hyps.len(),
            refs: refs.len(),
        });
    }
    let hyp_tokens: Vec<Vec<String>> =
        hyps.iter().map(|s| word_tokenize(s.as_ref())).collect();
    let ref_tokens: Vec<Vec<String>> =
        refs.iter().map(|s| word_tokenize(s.as_ref())).collect();
    let hyp_len: usize = hyp_tokens.iter().map(Vec::len).sum();
    let ref_len: usize = ref_tokens.iter().map(Vec::len).sum();

    let mut precisions = [0.0f64; MAX_NGRAM];
    for n in 1..=MAX_NGRAM {
        let (matches, total) = clipped_ngram_precision(&hyp_tokens, &ref_tokens, n);
        precisions[n - 1] = if smooth {
            (matches + 1) as f64 / (total + 1) as f64
        } else if total == 0 {
            0.0
        } else {
            matches as f64 / total as f64
        };
    }

    // hyp_len == 0 is degenerate: the score is 0 from the precisions anyway
    let brevity_penalty = if hyp_len == 0 || hyp_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };

    let score = if precisions.iter().any(|&p| p <= 0.0) {
        0.0
    } else {
        let log_mean = precisions.iter().map(|p| p.ln()).sum::<f64>() / MAX_NGRAM as f64;
        brevity_penalty * log_mean.exp()
    };

    Ok(BleuReport {
        precisions,
        brevity_penalty,
        score,
        hyp_len,
        ref_len,
    })
}
