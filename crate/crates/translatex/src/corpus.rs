//! Parallel-corpus curation: word tokenization, glossary-based domain
//! filtering, deterministic shuffled splits and vocabulary statistics.

use crate::glossary::Glossary;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("split ratios {0:?} must be positive and sum to 1")]
    BadRatios((f64, f64, f64)),
    #[error("source has {src} lines but target has {tgt}")]
    LineCountMismatch { src: usize, tgt: usize },
    #[error("line {0}: expected `source<TAB>target`")]
    MalformedLine(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Aligned (source sentence, target sentence) pairs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParallelCorpus {
    pub pairs: Vec<(String, String)>,
    pub provenance: String,
}

impl ParallelCorpus {
    pub fn new(pairs: Vec<(String, String)>, provenance: impl Into<String>) -> Self {
        ParallelCorpus {
            pairs,
            provenance: provenance.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Two line-aligned plain-text files, line i of one translating line i
    /// of the other.
    pub fn from_files(
        source: impl AsRef<Path>,
        target: impl AsRef<Path>,
    ) -> Result<Self, CorpusError> {
        let src = std::fs::read_to_string(&source)?;
        let tgt = std::fs::read_to_string(&target)?;
        let src_lines: Vec<&str> = src.lines().collect();
        let tgt_lines: Vec<&str> = tgt.lines().collect();
        if src_lines.len() != tgt_lines.len() {
            return Err(CorpusError::LineCountMismatch {
                src: src_lines.len(),
                tgt: tgt_lines.len(),
            });
        }
        let pairs = src_lines
            .into_iter()
            .zip(tgt_lines)
            .map(|(s, t)| (s.to_string(), t.to_string()))
            .collect();
        let provenance = source.as_ref().display().to_string();
        Ok(ParallelCorpus::new(pairs, provenance))
    }

    /// Single-file TSV form: `source<TAB>target` per line.
    pub fn from_tsv(text: &str, provenance: impl Into<String>) -> Result<Self, CorpusError> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let Some((s, t)) = line.split_once('\t') else {
                return Err(CorpusError::MalformedLine(i + 1));
            };
            pairs.push((s.to_string(), t.to_string()));
        }
        Ok(ParallelCorpus::new(pairs, provenance))
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (s, t) in &self.pairs {
            out.push_str(s);
            out.push('\t');
            out.push_str(t);
            out.push('\n');
        }
        out
    }
}

/// Split text into word tokens, separating punctuation into its own tokens.
///
/// A punctuation character stays inside a token only when it sits directly
/// between two alphanumeric characters, so `p.d.f.` keeps its inner periods
/// but sheds the final one, `3.14` and `well-known` stay whole, and a comma
/// after a word (or a `MATHnX` token) splits off. Joining the tokens with
/// spaces and re-tokenizing reproduces the token list.
pub fn word_tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_whitespace() {
            flush(&mut tokens, &mut current);
        } else if c.is_alphanumeric() {
            current.push(c);
        } else {
            let between = i > 0
                && chars[i - 1].is_alphanumeric()
                && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
            if between {
                current.push(c);
            } else {
                flush(&mut tokens, &mut current);
                tokens.push(c.to_string());
            }
        }
    }
    flush(&mut tokens, &mut current);
    tokens
}

fn flush(tokens: &mut Vec<String>, current: &mut String) {
    if !current.is_empty() {
        tokens.push(std::mem::take(current));
    }
}

/// Keep exactly the pairs whose *source* side contains at least `min_terms`
/// glossary terms. Order is preserved; pairs with an empty side are dropped.
pub fn filter_by_glossary(
    corpus: &ParallelCorpus,
    glossary: &Glossary,
    min_terms: usize,
) -> ParallelCorpus {
    let pairs = corpus
        .pairs
        .iter()
        .filter(|(s, t)| {
            !t.trim().is_empty() && glossary.count_term_matches(s) >= min_terms
        })
        .cloned()
        .collect();
    ParallelCorpus {
        pairs,
        provenance: corpus.provenance.clone(),
    }
}

/// Shuffle deterministically and split into (train, valid, test).
///
/// Validation and test receive `⌊ratio·N⌋` pairs each; the remainder goes
/// to train. The same seed always produces the same partition.
pub fn shuffle_split(
    corpus: &ParallelCorpus,
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<(ParallelCorpus, ParallelCorpus, ParallelCorpus), CorpusError> {
    let (tr, va, te) = ratios;
    if tr < 0.0 || va < 0.0 || te < 0.0 || ((tr + va + te) - 1.0).abs() > 1e-9 {
        return Err(CorpusError::BadRatios(ratios));
    }
    let mut pairs = corpus.pairs.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pairs.shuffle(&mut rng);
    let n = pairs.len();
    let n_valid = (va * n as f64).floor() as usize;
    let n_test = (te * n as f64).floor() as usize;
    let n_train = n - n_valid - n_test;
    let rest = pairs.split_off(n_train);
    let (valid, test) = rest.split_at(n_valid);
    let mk = |p: Vec<(String, String)>, tag: &str| ParallelCorpus {
        pairs: p,
        provenance: format!("{}:{tag}", corpus.provenance),
    };
    Ok((
        mk(pairs, "train"),
        mk(valid.to_vec(), "valid"),
        mk(test.to_vec(), "test"),
    ))
}

/// Number of distinct tokens (case-sensitive) over all sentences.
pub fn vocab_size<S: AsRef<str>>(sentences: &[S]) -> usize {
    let mut vocab = HashSet::new();
    for s in sentences {
        vocab.extend(word_tokenize(s.as_ref()));
    }
    vocab.len()
}

/// Like [`vocab_size`], but case-folded first.
pub fn vocab_size_casefolded<S: AsRef<str>>(sentences: &[S]) -> usize {
    let mut vocab = HashSet::new();
    for s in sentences {
        vocab.extend(
            word_tokenize(s.as_ref())
                .into_iter()
                .map(|t| t.to_lowercase()),
        );
    }
    vocab.len()
}
