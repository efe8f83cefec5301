//! Bilingual terminology glossary: loading, matching and placeholder
//! protection.
//!
//! Terms are matched longest-first, case-insensitively and on word
//! boundaries; multi-word phrases are allowed. Matching is used two ways:
//! counting domain terms to filter corpora, and masking matched terms behind
//! `TERMkX` placeholders so any backend — with or without native glossary
//! support — emits the chosen target terms.

use regex::Regex;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::LazyLock;
use thiserror::Error;

static TERM_TOKEN_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"TERM[0-9]+X").unwrap());

#[derive(Debug, Error)]
pub enum GlossaryError {
    #[error("line {0}: expected `source<TAB>target`")]
    MalformedLine(usize),
    #[error("glossary contains no entries")]
    EmptyGlossary,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlossaryEntry {
    pub source: String,
    pub target: String,
}

/// An ordered list of (source term, target term) pairs.
///
/// Entries are sorted by descending source word count, then descending
/// length, then lexicographically, so matching is deterministic and
/// independent of file order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Glossary {
    entries: Vec<GlossaryEntry>,
}

impl Glossary {
    /// Build from pairs; duplicates (case-folded source) keep the first
    /// occurrence.
    pub fn from_pairs<S: Into<String>, T: Into<String>>(
        pairs: impl IntoIterator<Item = (S, T)>,
    ) -> Self {
        let mut entries: Vec<GlossaryEntry> = Vec::new();
        for (s, t) in pairs {
            let source = s.into();
            let target = t.into();
            let folded = fold(&source);
            if !entries.iter().any(|e| fold(&e.source) == folded) {
                entries.push(GlossaryEntry { source, target });
            }
        }
        entries.sort_by(|a, b| {
            let (ka, kb) = (sort_key(&a.source), sort_key(&b.source));
            kb.0.cmp(&ka.0)
                .then(kb.1.cmp(&ka.1))
                .then(ka.2.cmp(&kb.2))
        });
        Glossary { entries }
    }

    /// Parse the TSV wire format: `source<TAB>target` per line, `#`
    /// comments and blank lines ignored.
    pub fn parse(text: &str) -> Result<Self, GlossaryError> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            let (Some(source), Some(target), None) =
                (cols.next(), cols.next(), cols.next())
            else {
                return Err(GlossaryError::MalformedLine(i + 1));
            };
            let (source, target) = (source.trim(), target.trim());
            if source.is_empty() || target.is_empty() {
                return Err(GlossaryError::MalformedLine(i + 1));
            }
            pairs.push((source.to_string(), target.to_string()));
        }
        if pairs.is_empty() {
            return Err(GlossaryError::EmptyGlossary);
        }
        Ok(Glossary::from_pairs(pairs))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GlossaryError> {
        Glossary::parse(&std::fs::read_to_string(path)?)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[GlossaryEntry] {
        &self.entries
    }

    /// Number of non-overlapping, case-insensitive, whole-word matches of
    /// source terms in `sentence`, longest terms first.
    pub fn count_term_matches(&self, sentence: &str) -> usize {
        self.find_matches(sentence).len()
    }

    /// Replace each matched source term by an opaque `TERMkX` placeholder.
    /// Returns the masked sentence and the restoration map sending each
    /// placeholder to its target term.
    pub fn protect_terms(&self, sentence: &str) -> (String, Vec<(String, String)>) {
        let mut matches = self.find_matches(sentence);
        matches.sort_by_key(|m| m.start);
        let chars: Vec<char> = sentence.chars().collect();
        let mut out = String::with_capacity(sentence.len());
        let mut map = Vec::new();
        let mut cursor = 0usize;
        for (k, m) in matches.iter().enumerate() {
            out.extend(&chars[cursor..m.start]);
            let placeholder = format!("TERM{}X", k + 1);
            out.push_str(&placeholder);
            map.push((placeholder, self.entries[m.entry].target.clone()));
            cursor = m.end;
        }
        out.extend(&chars[cursor..]);
        (out, map)
    }

    /// Matched spans in char indices, non-overlapping, longest-first.
    fn find_matches(&self, sentence: &str) -> Vec<TermMatch> {
        let folded: Vec<char> = sentence.chars().map(fold_char).collect();
        let mut occupied = vec![false; folded.len()];
        let mut matches = Vec::new();
        for (entry_idx, entry) in self.entries.iter().enumerate() {
            let term: Vec<char> = entry.source.chars().map(fold_char).collect();
            if term.is_empty() || term.len() > folded.len() {
                continue;
            }
            let mut i = 0usize;
            while i + term.len() <= folded.len() {
                if folded[i..i + term.len()] == term[..]
                    && boundary(&folded, i, i + term.len())
                    && !occupied[i..i + term.len()].iter().any(|&o| o)
                {
                    occupied[i..i + term.len()].iter_mut().for_each(|o| *o = true);
                    matches.push(TermMatch {
                        start: i,
                        end: i + term.len(),
                        entry: entry_idx,
                    });
                    i += term.len();
                } else {
                    i += 1;
                }
            }
        }
        matches
    }
}

struct TermMatch {
    start: usize,
    end: usize,
    entry: usize,
}

/// Replace `TERMkX` placeholders in backend output by their target terms.
/// Unknown placeholders are left as-is.
pub fn unprotect_terms(text: &str, map: &[(String, String)]) -> String {
    TERM_TOKEN_RE
        .replace_all(text, |caps: &regex::Captures| {
            let name = caps.get(0).unwrap().as_str();
            map.iter()
                .find(|(k, _)| k == name)
                .map(|(_, v)| v.clone())
                .unwrap_or_else(|| name.to_string())
        })
        .into_owned()
}

fn boundary(chars: &[char], start: usize, end: usize) -> bool {
    let before_ok = start == 0 || !chars[start - 1].is_alphanumeric();
    let after_ok = end == chars.len() || !chars[end].is_alphanumeric();
    before_ok && after_ok
}

/// Char-count-preserving case fold; enough for Latin-script math text.
fn fold_char(c: char) -> char {
    c.to_lowercase().next().unwrap_or(c)
}

fn fold(s: &str) -> String {
    s.chars().map(fold_char).collect()
}

fn sort_key(term: &str) -> (usize, usize, String) {
    let folded = fold(term);
    (folded.split_whitespace().count(), folded.chars().count(), folded)
}
