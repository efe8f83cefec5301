//! Sentence assembly: math tokenization, string joining, segmentation and
//! detokenization.
//!
//! Translation backends operate on plain sentences, so each translatable
//! block's inline sequence is lifted into text with every formula replaced
//! by an indexed `MATHnX` token. The token shape makes translators treat a
//! formula as an unknown word and pass it through unchanged, keeping the
//! surrounding sentence context intact. The original formulas live in a
//! [`MathTokenMap`] and are substituted back after translation.
//!
//! Token indices are document-global and increase in document order; the
//! map serializes to the JSON object written by `--dump-intermediate`.

use crate::latex::{render_inlines, Command, CommandArg, Inline, Math, MathDelim, MathMode, ParserConfig};
use indexmap::IndexMap;
use regex::Regex;
use serde::de::Deserializer;
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use std::sync::LazyLock;
use thiserror::Error;

pub static MATH_TOKEN_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"MATH[0-9]+X").unwrap());

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssembleError {
    #[error("inline sequence still contains a math node; tokenize first")]
    UntokenizedMath,
    #[error("translated text references unknown token {0}")]
    MissingToken(String),
    #[error("translated text dropped tokens: {0:?}")]
    DroppedToken(Vec<String>),
}

/// What a token stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenMode {
    Inline,
    Display,
    /// Opaque non-math LaTeX (an unknown command, a comment, a raw group)
    /// protected through translation the same way formulas are.
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenEntry {
    pub tex: String,
    pub mode: TokenMode,
    /// Original math delimiters when they differ from the canonical ones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delim: Option<MathDelim>,
}

/// Bijection from `MATHnX` token names to the LaTeX they replaced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MathTokenMap {
    entries: IndexMap<String, TokenEntry>,
    next_index: usize,
}

impl MathTokenMap {
    pub fn new() -> Self {
        MathTokenMap {
            entries: IndexMap::new(),
            next_index: 1,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&TokenEntry> {
        self.entries.get(name)
    }

    /// Index the next inserted formula will receive (starts at 1).
    pub fn next_index(&self) -> usize {
        self.next_index.max(1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &TokenEntry)> {
        self.entries.iter()
    }

    fn push(&mut self, entry: TokenEntry) -> String {
        let name = format!("MATH{}X", self.next_index.max(1));
        self.next_index = self.next_index.max(1) + 1;
        self.entries.insert(name.clone(), entry);
        name
    }

    pub fn insert_math(&mut self, math: &Math) -> String {
        self.push(TokenEntry {
            tex: math.tex.clone(),
            mode: match math.mode {
                MathMode::Inline => TokenMode::Inline,
                MathMode::Display => TokenMode::Display,
            },
            delim: math.delim,
        })
    }

    pub fn insert_raw(&mut self, tex: impl Into<String>) -> String {
        self.push(TokenEntry {
            tex: tex.into(),
            mode: TokenMode::Raw,
            delim: None,
        })
    }
}

impl Serialize for MathTokenMap {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.entries.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MathTokenMap {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let entries = IndexMap::<String, TokenEntry>::deserialize(deserializer)?;
        let next_index = entries
            .keys()
            .filter_map(|k| {
                k.strip_prefix("MATH")
                    .and_then(|t| t.strip_suffix('X'))
                    .and_then(|n| n.parse::<usize>().ok())
            })
            .max()
            .map_or(1, |m| m + 1);
        Ok(MathTokenMap {
            entries,
            next_index,
        })
    }
}

/// Replace every math inline by its `MATHnX` token, recursing into
/// translatable command arguments. All other inlines are unchanged.
pub fn tokenize_math(inlines: &[Inline], map: &mut MathTokenMap) -> Vec<Inline> {
    inlines
        .iter()
        .map(|inline| match inline {
            Inline::Math(m) => Inline::Str(map.insert_math(m)),
            Inline::Command(cmd) => Inline::Command(Command {
                name: cmd.name.clone(),
                starred: cmd.starred,
                args: cmd
                    .args
                    .iter()
                    .map(|arg| match arg {
                        CommandArg::Translatable(inner) => {
                            CommandArg::Translatable(tokenize_math(inner, map))
                        }
                        other => other.clone(),
                    })
                    .collect(),
            }),
            other => other.clone(),
        })
        .collect()
}

/// Protect inlines that must survive translation byte-for-byte but are not
/// math: unknown commands, comments, raw groups. Span-level commands with a
/// translatable argument keep their structure (the argument is recursed
/// into); everything else opaque becomes a `MATHnX` token with mode `raw`.
pub fn tokenize_opaque(
    inlines: &[Inline],
    map: &mut MathTokenMap,
    cfg: &ParserConfig,
) -> Vec<Inline> {
    inlines
        .iter()
        .map(|inline| match inline {
            Inline::Command(cmd)
                if cfg.is_span_command(&cmd.name)
                    && matches!(cmd.args.as_slice(), [CommandArg::Translatable(_)]) =>
            {
                let CommandArg::Translatable(inner) = &cmd.args[0] else {
                    unreachable!()
                };
                Inline::Command(Command {
                    name: cmd.name.clone(),
                    starred: cmd.starred,
                    args: vec![CommandArg::Translatable(tokenize_opaque(inner, map, cfg))],
                })
            }
            Inline::Command(_) => {
                let tex = render_inlines(std::slice::from_ref(inline));
                Inline::Str(map.insert_raw(tex))
            }
            Inline::RawInline(_) => {
                let tex = render_inlines(std::slice::from_ref(inline));
                Inline::Str(map.insert_raw(tex))
            }
            other => other.clone(),
        })
        .collect()
}

/// Join a tokenized inline sequence into one text chunk.
///
/// `Str` contents are joined with single spaces at `Space` nodes;
/// translatable command arguments are flattened in place. A remaining math
/// node is an error: it would corrupt the formula in translation.
pub fn join_inlines(inlines: &[Inline]) -> Result<String, AssembleError> {
    let mut out = String::new();
    join_into(inlines, &mut out)?;
    Ok(out)
}

fn join_into(inlines: &[Inline], out: &mut String) -> Result<(), AssembleError> {
    for inline in inlines {
        match inline {
            Inline::Str(s) => out.push_str(s),
            Inline::Space => out.push(' '),
            Inline::Math(_) => return Err(AssembleError::UntokenizedMath),
            Inline::Command(cmd) => {
                if let Some(arg) = cmd.translatable_arg() {
                    join_into(arg, out)?;
                } else {
                    // defensive: untokenized opaque content rides through raw
                    out.push_str(&render_inlines(std::slice::from_ref(inline)));
                }
            }
            Inline::RawInline(_) => {
                out.push_str(&render_inlines(std::slice::from_ref(inline)));
            }
        }
    }
    Ok(())
}

/// A whole sentence (or phrase) ready for translation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub text: String,
    /// Index of the translation unit this sentence came from.
    pub source_block: usize,
    /// `MATHnX` names appearing in `text`, in order.
    pub token_names: Vec<String>,
}

impl Sentence {
    pub fn new(text: impl Into<String>, source_block: usize) -> Self {
        let text = text.into();
        let token_names = math_tokens(&text);
        Sentence {
            text,
            source_block,
            token_names,
        }
    }
}

/// All `MATHnX` tokens of a text, in order (with repetitions).
pub fn math_tokens(text: &str) -> Vec<String> {
    MATH_TOKEN_RE
        .find_iter(text)
        .map(|m| m.as_str().to_string())
        .collect()
}

/// Tokens of `source` that are missing from `output`, multiset-aware.
pub fn missing_tokens(source: &str, output: &str) -> Vec<String> {
    let mut out_counts: IndexMap<String, usize> = IndexMap::new();
    for t in math_tokens(output) {
        *out_counts.entry(t).or_insert(0) += 1;
    }
    let mut missing = Vec::new();
    for t in math_tokens(source) {
        match out_counts.get_mut(&t) {
            Some(n) if *n > 0 => *n -= 1,
            _ => missing.push(t),
        }
    }
    missing
}

/// True when `output` carries exactly the tokens of `source` (as multisets).
pub fn tokens_conserved(source: &str, output: &str) -> bool {
    let mut a = math_tokens(source);
    let mut b = math_tokens(output);
    a.sort();
    b.sort();
    a == b
}

/// Segmentation knobs; the abbreviation list ships as editable data.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentConfig {
    /// Words (with their trailing period) that never end a sentence.
    pub abbreviations: Vec<String>,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        let abbreviations = [
            "p.d.f.", "c.d.f.", "i.e.", "e.g.", "cf.", "etc.", "vs.", "al.",
            "resp.", "w.r.t.", "a.e.", "a.s.", "thm.", "eq.", "eqs.", "fig.",
            "figs.", "sec.", "ch.", "def.", "prop.", "lem.", "cor.", "rem.",
            "no.", "vol.", "pp.", "ed.", "prof.", "dr.", "mr.", "mrs.", "ms.",
            "st.", "approx.",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        SegmentConfig { abbreviations }
    }
}

impl SegmentConfig {
    fn is_abbreviation(&self, word: &str) -> bool {
        let folded = word.to_lowercase();
        // single-letter initials ("M.") never split either
        if folded.len() == 2 && folded.ends_with('.') {
            let c = folded.chars().next().unwrap();
            if c.is_alphabetic() {
                return true;
            }
        }
        self.abbreviations.iter().any(|a| a.to_lowercase() == folded)
    }
}

/// Split a joined block text into sentences using the default abbreviation
/// list. Joining the result back with single spaces reproduces the input.
pub fn segment_sentences(text: &str) -> Vec<Sentence> {
    segment_sentences_with(text, &SegmentConfig::default())
}

pub fn segment_sentences_with(text: &str, cfg: &SegmentConfig) -> Vec<Sentence> {
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let bytes = text.as_bytes();
    let mut i = 0usize;
    while i < bytes.len() {
        let b = bytes[i];
        if b == b'.' || b == b'!' || b == b'?' {
            // allow closing punctuation between the terminator and the space
            let mut end = i + 1;
            while end < bytes.len() && matches!(bytes[end], b')' | b']' | b'\'' | b'"') {
                end += 1;
            }
            if is_boundary(text, i, end, cfg) {
                let sentence = text[start..end].trim();
                if !sentence.is_empty() {
                    sentences.push(Sentence::new(sentence, 0));
                }
                // consume the separating whitespace
                let rest = &text[end..];
                let skipped = rest.len() - rest.trim_start().len();
                start = end + skipped;
                i = start;
                continue;
            }
        }
        i += 1;
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        sentences.push(Sentence::new(tail, 0));
    }
    sentences
}

fn is_boundary(text: &str, punct: usize, end: usize, cfg: &SegmentConfig) -> bool {
    // must be followed by whitespace and an uppercase letter or MATH token
    let rest = &text[end..];
    let trimmed = rest.trim_start();
    if trimmed.len() == rest.len() || trimmed.is_empty() {
        return false;
    }
    let next = trimmed.chars().next().unwrap();
    if !(next.is_uppercase() || trimmed.starts_with("MATH")) {
        return false;
    }
    // a period closing an abbreviation does not split; strip leading
    // punctuation ("(e.g." -> "e.g.") before the lookup
    if text.as_bytes()[punct] == b'.' {
        let word_start = text[..punct]
            .rfind(char::is_whitespace)
            .map_or(0, |p| p + 1);
        let word =
            text[word_start..punct + 1].trim_start_matches(|c: char| !c.is_alphanumeric());
        if cfg.is_abbreviation(word) {
            return false;
        }
    }
    true
}

/// Substitute tokens in translated text back to their inlines.
///
/// Words are split on whitespace; a token embedded in a word (for example
/// `MATH3X,` with punctuation attached) is matched by name and the
/// surrounding fragments are re-attached without spaces.
pub fn detokenize(translated: &str, map: &MathTokenMap) -> Result<Vec<Inline>, AssembleError> {
    let mut out = Vec::new();
    for word in translated.split_whitespace() {
        if !out.is_empty() {
            out.push(Inline::Space);
        }
        let mut cursor = 0usize;
        for m in MATH_TOKEN_RE.find_iter(word) {
            if m.start() > cursor {
                out.push(Inline::Str(word[cursor..m.start()].to_string()));
            }
            let entry = map
                .get(m.as_str())
                .ok_or_else(|| AssembleError::MissingToken(m.as_str().to_string()))?;
            out.push(entry_to_inline(entry));
            cursor = m.end();
        }
        if cursor < word.len() {
            out.push(Inline::Str(word[cursor..].to_string()));
        }
    }
    Ok(out)
}

/// [`detokenize`], but also verifies that every expected token is present.
pub fn detokenize_strict(
    translated: &str,
    map: &MathTokenMap,
    expected: &[String],
) -> Result<Vec<Inline>, AssembleError> {
    let mut have = math_tokens(translated);
    have.sort();
    let mut dropped: Vec<String> = Vec::new();
    for t in expected {
        match have.binary_search(t) {
            Ok(i) => {
                have.remove(i);
            }
            Err(_) => dropped.push(t.clone()),
        }
    }
    if !dropped.is_empty() {
        return Err(AssembleError::DroppedToken(dropped));
    }
    detokenize(translated, map)
}

fn entry_to_inline(entry: &TokenEntry) -> Inline {
    match entry.mode {
        TokenMode::Inline => Inline::Math(Math {
            mode: MathMode::Inline,
            tex: entry.tex.clone(),
            delim: entry.delim,
        }),
        TokenMode::Display => Inline::Math(Math {
            mode: MathMode::Display,
            tex: entry.tex.clone(),
            delim: entry.delim,
        }),
        TokenMode::Raw => Inline::RawInline(entry.tex.clone()),
    }
}
