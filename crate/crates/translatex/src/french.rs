//! French LaTeX typographic conventions.
//!
//! Two idempotent rewrites: the documentclass gains a `french` option with
//! the matching `fontenc`/`babel` packages, and LaTeX-style double quotes
//! become `\og ... \fg{}` guillemets. Both are applied by the pipeline by
//! default when the target language is French.

use crate::latex::DocumentAst;
use regex::Regex;
use std::sync::LazyLock;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrenchError {
    #[error("preamble has no \\documentclass declaration")]
    NoDocumentClass,
}

pub const FONTENC_LINE: &str = "\\usepackage[T1]{fontenc}";
pub const BABEL_LINE: &str = "\\usepackage{babel}";

static DOCUMENTCLASS_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\\documentclass(\[(?P<opts>[^\]]*)\])?\{(?P<class>[^}]*)\}").unwrap()
});

/// Append `french` to the documentclass options (creating the option list
/// if absent) and insert the fontenc/babel packages after it, unless they
/// are already present. Applying twice equals applying once.
pub fn add_french_preamble(ast: &DocumentAst) -> Result<DocumentAst, FrenchError> {
    let mut out = ast.clone();
    out.preamble = patch_preamble(&ast.preamble)?;
    Ok(out)
}

fn patch_preamble(preamble: &str) -> Result<String, FrenchError> {
    let caps = DOCUMENTCLASS_RE
        .captures(preamble)
        .ok_or(FrenchError::NoDocumentClass)?;
    let whole = caps.get(0).unwrap();
    let class = caps.name("class").unwrap().as_str();

    let mut opts: Vec<&str> = caps
        .name("opts")
        .map(|m| {
            m.as_str()
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .collect()
        })
        .unwrap_or_default();
    if !opts.contains(&"french") {
        opts.push("french");
    }
    let declaration = format!("\\documentclass[{}]{{{class}}}", opts.join(","));

    let mut patched = String::with_capacity(preamble.len() + 64);
    patched.push_str(&preamble[..whole.start()]);
    patched.push_str(&declaration);
    let mut insert = String::new();
    if !preamble.contains(FONTENC_LINE) {
        insert.push('\n');
        insert.push_str(FONTENC_LINE);
    }
    if !preamble.contains(BABEL_LINE) {
        insert.push('\n');
        insert.push_str(BABEL_LINE);
    }
    patched.push_str(&insert);
    patched.push_str(&preamble[whole.end()..]);
    Ok(patched)
}

/// Rewrite LaTeX double quotes in translated sentence text: each balanced
/// ``..'' pair becomes `\og ..\fg{}`. Unbalanced occurrences are left
/// untouched and reported as warnings; straight `"` quotes are not touched.
pub fn convert_quotes(text: &str) -> (String, Vec<String>) {
    let mut events = Vec::new(); // (byte index, is_open)
    let bytes = text.as_bytes();
    let mut i = 0;
    while i + 1 < bytes.len() {
        if bytes[i] == b'`' && bytes[i + 1] == b'`' {
            events.push((i, true));
            i += 2;
        } else if bytes[i] == b'\'' && bytes[i + 1] == b'\'' {
            events.push((i, false));
            i += 2;
        } else {
            i += 1;
        }
    }

    // pair openers with the following closer; anything else is unbalanced
    let mut pairs = Vec::new();
    let mut unbalanced = Vec::new();
    let mut pending_open: Option<usize> = None;
    for (at, is_open) in events {
        match (is_open, pending_open) {
            (true, None) => pending_open = Some(at),
            (true, Some(prev)) => {
                unbalanced.push(prev);
                pending_open = Some(at);
            }
            (false, Some(open)) => {
                pairs.push((open, at));
                pending_open = None;
            }
            (false, None) => unbalanced.push(at),
        }
    }
    if let Some(open) = pending_open {
        unbalanced.push(open);
    }

    let mut warnings = Vec::new();
    if !unbalanced.is_empty() {
        warnings.push(format!(
            "unbalanced LaTeX quotes left untouched at byte offsets {unbalanced:?}"
        ));
    }

    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for (open, close) in pairs {
        out.push_str(&text[cursor..open]);
        out.push_str("\\og ");
        out.push_str(&text[open + 2..close]);
        out.push_str("\\fg{}");
        cursor = close + 2;
    }
    out.push_str(&text[cursor..]);
    (out, warnings)
}
