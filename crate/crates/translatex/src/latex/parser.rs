//! LaTeX-subset parser.
//!
//! The parser is hand-rolled rather than delegated to an external converter:
//! converters that re-synthesize LaTeX lose commands they cannot represent,
//! while the whole point here is that unrecognized constructs ride through
//! as raw bytes. The strategy is byte-accurate scanning with three layers:
//! document split (preamble / body / trailer), block scanning (paragraphs,
//! environments, headings, comments), and inline scanning (words, spaces,
//! math, commands).
//!
//! `%` starts a comment everywhere except inside opaque environments and
//! `\verb`; this includes math bodies, so formulas must write `\%`.

use super::ast::*;
use super::config::ParserConfig;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unbalanced `{delim}` opened at byte {offset} is never closed")]
    UnbalancedDelimiter { delim: String, offset: usize },
    #[error("environment `{name}` at byte {offset} has no matching pair")]
    UnmatchedEnvironment { name: String, offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::UnbalancedDelimiter { offset, .. } => *offset,
            ParseError::UnmatchedEnvironment { offset, .. } => *offset,
        }
    }
}

/// 1-based (line, column) of a byte offset, for diagnostics.
pub fn line_col(source: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(source.len());
    let before = &source[..offset];
    let line = before.bytes().filter(|&b| b == b'\n').count() + 1;
    let col = before.rfind('\n').map_or(offset, |p| offset - p - 1) + 1;
    (line, col)
}

/// Parse a LaTeX source with the default configuration.
pub fn parse_document(source: &str) -> Result<DocumentAst, ParseError> {
    parse_document_with(source, &ParserConfig::default())
}

pub fn parse_document_with(
    source: &str,
    cfg: &ParserConfig,
) -> Result<DocumentAst, ParseError> {
    const BEGIN_DOC: &str = "\\begin{document}";
    const END_DOC: &str = "\\end{document}";

    if let Some(begin) = find_outside_comments(source, 0, BEGIN_DOC) {
        let body_start = begin + BEGIN_DOC.len();
        let end = find_outside_comments(source, body_start, END_DOC).ok_or(
            ParseError::UnmatchedEnvironment {
                name: "document".into(),
                offset: begin,
            },
        )?;
        let blocks = BlockParser::new(&source[body_start..end], body_start, cfg).run()?;
        Ok(DocumentAst {
            preamble: source[..begin].to_string(),
            blocks,
            trailer: source[end + END_DOC.len()..].to_string(),
            has_document_env: true,
        })
    } else {
        let blocks = BlockParser::new(source, 0, cfg).run()?;
        Ok(DocumentAst {
            preamble: String::new(),
            blocks,
            trailer: String::new(),
            has_document_env: false,
        })
    }
}

/// Find `needle` in `hay[from..]`, skipping `%` comments and `\` escapes.
fn find_outside_comments(hay: &str, from: usize, needle: &str) -> Option<usize> {
    let bytes = hay.as_bytes();
    let target = needle.as_bytes();
    let mut i = from;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => {
                if bytes[i..].starts_with(target) {
                    return Some(i);
                }
                i += 2.min(bytes.len() - i);
            }
            b'%' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            _ => {
                if bytes[i..].starts_with(target) {
                    return Some(i);
                }
                i += 1;
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Block layer
// ---------------------------------------------------------------------------

struct BlockParser<'a> {
    text: &'a str,
    base: usize,
    pos: usize,
    cfg: &'a ParserConfig,
}

impl<'a> BlockParser<'a> {
    fn new(text: &'a str, base: usize, cfg: &'a ParserConfig) -> Self {
        BlockParser {
            text,
            base,
            pos: 0,
            cfg,
        }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn abs(&self) -> usize {
        self.base + self.pos
    }

    fn run(mut self) -> Result<Vec<Block>, ParseError> {
        let mut blocks = Vec::new();
        loop {
            self.skip_whitespace();
            if self.pos >= self.text.len() {
                break;
            }
            let rest = self.rest();
            if rest.starts_with('%') {
                blocks.push(self.comment_block());
            } else if rest.starts_with("\\begin{") {
                blocks.push(self.environment()?);
            } else if rest.starts_with("\\end{") {
                let name = env_name_at(rest, "\\end{").unwrap_or_default();
                return Err(ParseError::UnmatchedEnvironment {
                    name,
                    offset: self.abs(),
                });
            } else if let Some((cmd, level)) = self.heading_at() {
                blocks.push(self.heading(&cmd, level)?);
            } else {
                blocks.push(self.paragraph()?);
            }
        }
        Ok(blocks)
    }

    fn skip_whitespace(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    /// Consecutive `%` lines become one raw block.
    fn comment_block(&mut self) -> Block {
        let mut lines = Vec::new();
        loop {
            let rest = self.rest();
            if !rest.starts_with('%') {
                break;
            }
            let eol = rest.find('\n').unwrap_or(rest.len());
            lines.push(&rest[..eol]);
            self.pos += eol;
            // stop on blank line so comment groups don't swallow spacing
            let ws = self.rest();
            let after = ws.trim_start();
            let newlines = ws[..ws.len() - after.len()]
                .bytes()
                .filter(|&b| b == b'\n')
                .count();
            if newlines > 1 || !after.starts_with('%') {
                break;
            }
            self.pos = self.text.len() - after.len();
        }
        Block::RawBlock(lines.join("\n"))
    }

    /// Does the rest start with a sectioning command taking a brace group?
    fn heading_at(&self) -> Option<(String, u8)> {
        heading_at(self.rest(), self.cfg)
    }

    fn heading(&mut self, cmd: &str, level: u8) -> Result<Block, ParseError> {
        self.pos += 1 + cmd.len(); // backslash + name
        let mut starred = false;
        if self.rest().starts_with('*') {
            starred = true;
            self.pos += 1;
        }
        let mut opt = None;
        if self.rest().starts_with('[') {
            let (inner, len) = read_bracket_group(self.rest(), self.abs())?;
            opt = Some(inner.to_string());
            self.pos += len;
        }
        let (inner, len) = read_brace_group(self.rest(), self.abs())?;
        let inner_base = self.abs() + 1;
        self.pos += len;
        let inlines = InlineParser::region(inner, inner_base, self.cfg).run()?;
        Ok(Block::Heading(Heading {
            level,
            command: cmd.to_string(),
            starred,
            opt,
            inlines,
        }))
    }

    fn environment(&mut self) -> Result<Block, ParseError> {
        let begin_offset = self.abs();
        let name = env_name_at(self.rest(), "\\begin{").ok_or_else(|| {
            ParseError::UnbalancedDelimiter {
                delim: "\\begin{".into(),
                offset: begin_offset,
            }
        })?;
        self.pos += "\\begin{".len() + name.len() + 1;

        // immediate [..] / {..} arguments, raw
        let mut args = String::new();
        loop {
            let rest = self.rest();
            if rest.starts_with('[') {
                let (inner, len) = read_bracket_group(rest, self.abs())?;
                args.push('[');
                args.push_str(inner);
                args.push(']');
                self.pos += len;
            } else if rest.starts_with('{') {
                let (inner, len) = read_brace_group(rest, self.abs())?;
                args.push('{');
                args.push_str(inner);
                args.push('}');
                self.pos += len;
            } else {
                break;
            }
        }

        let end_marker = format!("\\end{{{name}}}");
        let body_start = self.pos;
        let body_end = if self.cfg.is_opaque_env(&name) {
            // opaque bodies may contain % and \, so search raw bytes
            self.rest().find(&end_marker).map(|i| self.pos + i)
        } else {
            find_env_end(self.text, self.pos, &name, self.cfg)
        }
        .ok_or_else(|| ParseError::UnmatchedEnvironment {
            name: name.clone(),
            offset: begin_offset,
        })?;
        let body = &self.text[body_start..body_end];
        self.pos = body_end + end_marker.len();

        if self.cfg.is_opaque_env(&name) {
            return Ok(Block::VerbatimBlock(Verbatim {
                name,
                args,
                content: body.to_string(),
            }));
        }
        if self.cfg.is_equation_env(&name) {
            return Ok(Block::DisplayMathBlock(DisplayMath {
                tex: body.to_string(),
                style: DisplayStyle::Environment { name, args },
            }));
        }
        if name == "itemize" || name == "enumerate" {
            if let Some(list) =
                self.try_list(&name, &args, body, self.base + body_start)?
            {
                return Ok(Block::ListBlock(list));
            }
        }
        let blocks = BlockParser::new(body, self.base + body_start, self.cfg).run()?;
        Ok(Block::EnvironmentBlock(Environment { name, args, blocks }))
    }

    /// Parse an itemize/enumerate body into items. Returns `None` when the
    /// body has content before the first `\item`; the caller then falls back
    /// to a generic environment so no bytes are lost.
    fn try_list(
        &self,
        name: &str,
        args: &str,
        body: &'a str,
        body_base: usize,
    ) -> Result<Option<ListBlock>, ParseError> {
        let mut cuts = Vec::new();
        let mut scan = EnvScanner::new(body, self.cfg);
        while let Some(i) = scan.next_match("\\item") {
            let after = body[i + "\\item".len()..].chars().next();
            if !matches!(after, Some(c) if c.is_ascii_alphabetic()) {
                cuts.push(i);
            }
        }
        let Some(&first) = cuts.first() else {
            return Ok(None);
        };
        let leading = &body[..first];
        let leading_ok = leading
            .lines()
            .all(|l| l.trim().is_empty() || l.trim_start().starts_with('%'));
        if !leading_ok {
            return Ok(None);
        }

        let mut items = Vec::new();
        for (k, &cut) in cuts.iter().enumerate() {
            let seg_end = cuts.get(k + 1).copied().unwrap_or(body.len());
            let mut seg_pos = cut + "\\item".len();
            let mut opt = None;
            let after = &body[seg_pos..seg_end];
            let spaces = after.len() - after.trim_start_matches([' ', '\t']).len();
            if after[spaces..].starts_with('[') {
                let (inner, len) =
                    read_bracket_group(&after[spaces..], body_base + seg_pos + spaces)?;
                opt = Some(inner.to_string());
                seg_pos += spaces + len;
            }
            let content = &body[seg_pos..seg_end];
            let blocks = BlockParser::new(content, body_base + seg_pos, self.cfg).run()?;
            items.push(ListItem { opt, blocks });
        }
        Ok(Some(ListBlock {
            ordered: name == "enumerate",
            name: name.to_string(),
            args: args.to_string(),
            items,
        }))
    }

    fn paragraph(&mut self) -> Result<Block, ParseError> {
        let mut inline = InlineParser::paragraph(self.text, self.base, self.pos, self.cfg);
        let inlines = inline.run()?;
        self.pos = inline.pos;
        // a paragraph that is a single display formula is a display block
        if let [Inline::Math(m)] = inlines.as_slice() {
            if m.mode == MathMode::Display {
                let style = match m.delimiters() {
                    MathDelim::DoubleDollar => DisplayStyle::Dollars,
                    _ => DisplayStyle::Brackets,
                };
                return Ok(Block::DisplayMathBlock(DisplayMath {
                    tex: m.tex.clone(),
                    style,
                }));
            }
        }
        Ok(Block::Paragraph(inlines))
    }
}

/// Canonical delimiters are stored as `None` so serialized trees stay lean.
fn math_node(mode: MathMode, tex: &str, delim: MathDelim) -> Inline {
    Inline::Math(Math {
        mode,
        tex: tex.to_string(),
        delim: (delim != MathDelim::canonical(mode)).then_some(delim),
    })
}

fn env_name_at(rest: &str, prefix: &str) -> Option<String> {
    let after = rest.strip_prefix(prefix)?;
    let end = after.find('}')?;
    let name = &after[..end];
    if name.is_empty()
        || !name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '*')
    {
        return None;
    }
    Some(name.to_string())
}

fn heading_at(rest: &str, cfg: &ParserConfig) -> Option<(String, u8)> {
    let after = rest.strip_prefix('\\')?;
    let name_len = after
        .bytes()
        .take_while(|b| b.is_ascii_alphabetic())
        .count();
    if name_len == 0 {
        return None;
    }
    let name = &after[..name_len];
    let level = cfg.heading_level(name)?;
    let mut tail = &after[name_len..];
    if let Some(t) = tail.strip_prefix('*') {
        tail = t;
    }
    if tail.starts_with('[') {
        // skip the optional group to confirm a brace group follows
        let close = find_bracket_close(tail)?;
        tail = &tail[close + 1..];
    }
    tail.starts_with('{').then(|| (name.to_string(), level))
}

/// Find the matching `\end{name}`, honouring nesting of the same name,
/// comments, `$`-math and opaque environments.
fn find_env_end(text: &str, from: usize, name: &str, cfg: &ParserConfig) -> Option<usize> {
    let begin_marker = format!("\\begin{{{name}}}");
    let end_marker = format!("\\end{{{name}}}");
    let bytes = text.as_bytes();
    let mut i = from;
    let mut depth = 1usize;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => {
                let rest = &text[i..];
                if rest.starts_with(&end_marker) {
                    depth -= 1;
                    if depth == 0 {
                        return Some(i);
                    }
                    i += end_marker.len();
                } else if rest.starts_with(&begin_marker) {
                    depth += 1;
                    i += begin_marker.len();
                } else if let Some(inner) = env_name_at(rest, "\\begin{") {
                    if cfg.is_opaque_env(&inner) {
                        let inner_end = format!("\\end{{{inner}}}");
                        let skip = rest.find(&inner_end)? + inner_end.len();
                        i += skip;
                    } else {
                        i += 2;
                    }
                } else {
                    i += 2.min(bytes.len() - i);
                }
            }
            b'%' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'$' => {
                // skip to the closing $ so math bodies can't fake an \end
                i += 1;
                while i < bytes.len() {
                    match bytes[i] {
                        b'\\' => i += 2.min(bytes.len() - i),
                        b'$' => {
                            i += 1;
                            break;
                        }
                        _ => i += 1,
                    }
                }
            }
            _ => i += 1,
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Inline layer
// ---------------------------------------------------------------------------

struct InlineParser<'a> {
    text: &'a str,
    base: usize,
    pos: usize,
    cfg: &'a ParserConfig,
    /// Paragraph mode: stop at blank lines, environments and headings.
    at_para_level: bool,
}

impl<'a> InlineParser<'a> {
    fn paragraph(text: &'a str, base: usize, pos: usize, cfg: &'a ParserConfig) -> Self {
        InlineParser {
            text,
            base,
            pos,
            cfg,
            at_para_level: true,
        }
    }

    /// Parse a bounded region (heading title, translatable command arg).
    fn region(text: &'a str, base: usize, cfg: &'a ParserConfig) -> Self {
        InlineParser {
            text,
            base,
            pos: 0,
            cfg,
            at_para_level: false,
        }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn abs(&self) -> usize {
        self.base + self.pos
    }

    fn run(&mut self) -> Result<Vec<Inline>, ParseError> {
        let mut out: Vec<Inline> = Vec::new();
        loop {
            if self.pos >= self.text.len() {
                break;
            }
            if self.at_para_level && self.at_boundary() {
                break;
            }
            let rest = self.rest();
            let c = rest.chars().next().unwrap();
            if c.is_whitespace() {
                let trimmed = rest.trim_start();
                let ws = &rest[..rest.len() - trimmed.len()];
                let newlines = ws.bytes().filter(|&b| b == b'\n').count();
                self.pos += ws.len();
                if self.at_para_level && newlines >= 2 {
                    break; // blank line: paragraph ends
                }
                let after_comment = matches!(
                    out.last(),
                    Some(Inline::RawInline(r)) if r.starts_with('%')
                );
                let at_end = self.pos >= self.text.len()
                    || (self.at_para_level && self.at_boundary());
                // TeX eats the newline that terminates a comment
                if !out.is_empty() && !at_end && !(after_comment && newlines <= 1) {
                    out.push(Inline::Space);
                }
                if at_end {
                    break;
                }
            } else if c == '%' {
                let eol = rest.find('\n').unwrap_or(rest.len());
                out.push(Inline::RawInline(rest[..eol].to_string()));
                self.pos += eol;
            } else if c == '$' {
                out.push(self.math_dollar()?);
            } else if c == '\\' {
                out.push(self.backslash()?);
            } else if c == '{' {
                let offset = self.abs();
                let (inner, len) = read_brace_group(rest, offset)?;
                let _ = inner;
                out.push(Inline::RawInline(rest[..len].to_string()));
                self.pos += len;
            } else if c == '}' {
                return Err(ParseError::UnbalancedDelimiter {
                    delim: "}".into(),
                    offset: self.abs(),
                });
            } else {
                out.push(self.word());
            }
        }
        if matches!(out.last(), Some(Inline::Space)) {
            out.pop();
        }
        Ok(out)
    }

    fn at_boundary(&self) -> bool {
        let rest = self.rest();
        rest.starts_with("\\begin{")
            || rest.starts_with("\\end{")
            || heading_at(rest, self.cfg).is_some()
    }

    fn word(&mut self) -> Inline {
        let rest = self.rest();
        let mut len = 0;
        for (i, c) in rest.char_indices() {
            if c.is_whitespace() || matches!(c, '\\' | '{' | '}' | '$' | '%') {
                break;
            }
            len = i + c.len_utf8();
        }
        self.pos += len;
        Inline::Str(rest[..len].to_string())
    }

    fn math_dollar(&mut self) -> Result<Inline, ParseError> {
        let rest = self.rest();
        let offset = self.abs();
        if let Some(after) = rest.strip_prefix("$$") {
            let end = find_unescaped(after, "$$").ok_or_else(|| {
                ParseError::UnbalancedDelimiter {
                    delim: "$$".into(),
                    offset,
                }
            })?;
            self.pos += 2 + end + 2;
            return Ok(math_node(
                MathMode::Display,
                &after[..end],
                MathDelim::DoubleDollar,
            ));
        }
        let after = &rest[1..];
        let end =
            find_unescaped(after, "$").ok_or_else(|| ParseError::UnbalancedDelimiter {
                delim: "$".into(),
                offset,
            })?;
        self.pos += 1 + end + 1;
        Ok(math_node(MathMode::Inline, &after[..end], MathDelim::Dollar))
    }

    /// Handle everything that starts with a backslash.
    fn backslash(&mut self) -> Result<Inline, ParseError> {
        let rest = self.rest();
        let offset = self.abs();

        if let Some(after) = rest.strip_prefix("\\(") {
            let end = find_unescaped_paren(after).ok_or_else(|| {
                ParseError::UnbalancedDelimiter {
                    delim: "\\(".into(),
                    offset,
                }
            })?;
            self.pos += 2 + end + 2;
            return Ok(math_node(
                MathMode::Inline,
                &after[..end],
                MathDelim::Paren,
            ));
        }
        if let Some(after) = rest.strip_prefix("\\[") {
            let end = find_unescaped(after, "\\]").ok_or_else(|| {
                ParseError::UnbalancedDelimiter {
                    delim: "\\[".into(),
                    offset,
                }
            })?;
            self.pos += 2 + end + 2;
            return Ok(math_node(
                MathMode::Display,
                &after[..end],
                MathDelim::Bracket,
            ));
        }
        // \verb only when followed by a non-letter delimiter, so commands
        // like \verbose take the ordinary path
        if let Some(tail) = rest.strip_prefix("\\verb") {
            let tail = tail.strip_prefix('*').unwrap_or(tail);
            if matches!(tail.chars().next(), Some(c) if !c.is_ascii_alphabetic()) {
                return self.verb();
            }
        }
        if rest.starts_with("\\begin{") || rest.starts_with("\\end{") {
            // only reachable in region mode; keep the whole environment raw
            return self.raw_environment();
        }

        let after = &rest[1..];
        let name_len = after
            .bytes()
            .take_while(|b| b.is_ascii_alphabetic())
            .count();
        if name_len == 0 {
            // control symbol: \%, \\, \', ...
            let Some(sym) = after.chars().next() else {
                return Err(ParseError::UnbalancedDelimiter {
                    delim: "\\".into(),
                    offset,
                });
            };
            self.pos += 1 + sym.len_utf8();
            let mut cmd = Command::bare(sym.to_string());
            if matches!(sym, '\'' | '`' | '^' | '"' | '~' | '.' | '=') {
                if self.rest().starts_with('{') {
                    let (inner, len) = read_brace_group(self.rest(), self.abs())?;
                    cmd.args.push(CommandArg::Raw(inner.to_string()));
                    self.pos += len;
                }
            } else if sym == '\\' && self.rest().starts_with('[') {
                let (inner, len) = read_bracket_group(self.rest(), self.abs())?;
                cmd.args.push(CommandArg::Optional(inner.to_string()));
                self.pos += len;
            }
            return Ok(Inline::Command(cmd));
        }

        let name = &after[..name_len];
        self.pos += 1 + name_len;
        let mut cmd = Command::bare(name);
        if self.rest().starts_with('*') {
            cmd.starred = true;
            self.pos += 1;
        }
        let translatable = self.cfg.is_translatable_command(name);
        let mut saw_brace = false;
        loop {
            let rest = self.rest();
            if rest.starts_with('[') {
                let (inner, len) = read_bracket_group(rest, self.abs())?;
                cmd.args.push(CommandArg::Optional(inner.to_string()));
                self.pos += len;
            } else if rest.starts_with('{') {
                let (inner, len) = read_brace_group(rest, self.abs())?;
                let inner_base = self.abs() + 1;
                self.pos += len;
                if translatable && !saw_brace {
                    let inlines = InlineParser::region(inner, inner_base, self.cfg).run()?;
                    cmd.args.push(CommandArg::Translatable(inlines));
                } else {
                    cmd.args.push(CommandArg::Raw(inner.to_string()));
                }
                saw_brace = true;
            } else {
                break;
            }
        }
        Ok(Inline::Command(cmd))
    }

    fn verb(&mut self) -> Result<Inline, ParseError> {
        let rest = self.rest();
        let offset = self.abs();
        let mut idx = "\\verb".len();
        if rest[idx..].starts_with('*') {
            idx += 1;
        }
        let Some(delim) = rest[idx..].chars().next() else {
            return Err(ParseError::UnbalancedDelimiter {
                delim: "\\verb".into(),
                offset,
            });
        };
        idx += delim.len_utf8();
        let close = rest[idx..]
            .find(delim)
            .ok_or_else(|| ParseError::UnbalancedDelimiter {
                delim: format!("\\verb{delim}"),
                offset,
            })?;
        let total = idx + close + delim.len_utf8();
        self.pos += total;
        Ok(Inline::RawInline(rest[..total].to_string()))
    }

    /// An environment inside a bounded region (e.g. a footnote argument):
    /// preserved as raw bytes, never translated.
    fn raw_environment(&mut self) -> Result<Inline, ParseError> {
        let rest = self.rest();
        let offset = self.abs();
        let Some(name) = env_name_at(rest, "\\begin{") else {
            return Err(ParseError::UnmatchedEnvironment {
                name: rest.chars().take(12).collect(),
                offset,
            });
        };
        let start = "\\begin{".len() + name.len() + 1;
        let body_end = find_env_end(rest, start, &name, self.cfg).ok_or_else(|| {
            ParseError::UnmatchedEnvironment {
                name: name.clone(),
                offset,
            }
        })?;
        let total = body_end + format!("\\end{{{name}}}").len();
        self.pos += total;
        Ok(Inline::RawInline(rest[..total].to_string()))
    }
}

// ---------------------------------------------------------------------------
// Low-level scanners
// ---------------------------------------------------------------------------

/// Find `needle` skipping `\`-escapes; returns the offset in `hay`.
/// A needle that itself starts with `\` is matched before escape-skipping.
fn find_unescaped(hay: &str, needle: &str) -> Option<usize> {
    let bytes = hay.as_bytes();
    let target = needle.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'\\' {
            if bytes[i..].starts_with(target) {
                return Some(i);
            }
            i += 2.min(bytes.len() - i);
            continue;
        }
        if bytes[i..].starts_with(target) {
            return Some(i);
        }
        i += 1;
    }
    None
}

/// Find `\)` — unlike [`find_unescaped`] the needle itself starts with a
/// backslash, so escape-skipping must look one byte ahead.
fn find_unescaped_paren(hay: &str) -> Option<usize> {
    let bytes = hay.as_bytes();
    let mut i = 0;
    while i + 1 < bytes.len() {
        if bytes[i] == b'\\' {
            if bytes[i + 1] == b')' {
                return Some(i);
            }
            i += 2;
            continue;
        }
        i += 1;
    }
    None
}

/// Read a `{..}` group at the start of `rest`. Returns (inner, total length
/// including braces). Comments and escapes inside are honoured.
fn read_brace_group(rest: &str, offset: usize) -> Result<(&str, usize), ParseError> {
    debug_assert!(rest.starts_with('{'));
    let bytes = rest.as_bytes();
    let mut depth = 0usize;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2.min(bytes.len() - i),
            b'%' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'{' => {
                depth += 1;
                i += 1;
            }
            b'}' => {
                depth -= 1;
                i += 1;
                if depth == 0 {
                    return Ok((&rest[1..i - 1], i));
                }
            }
            _ => i += 1,
        }
    }
    Err(ParseError::UnbalancedDelimiter {
        delim: "{".into(),
        offset,
    })
}

/// Read a `[..]` group at the start of `rest`; `]` inside nested braces does
/// not close the group.
fn read_bracket_group(rest: &str, offset: usize) -> Result<(&str, usize), ParseError> {
    debug_assert!(rest.starts_with('['));
    match find_bracket_close(rest) {
        Some(i) => Ok((&rest[1..i], i + 1)),
        None => Err(ParseError::UnbalancedDelimiter {
            delim: "[".into(),
            offset,
        }),
    }
}

fn find_bracket_close(rest: &str) -> Option<usize> {
    let bytes = rest.as_bytes();
    let mut brace_depth = 0usize;
    let mut i = 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2.min(bytes.len() - i),
            b'{' => {
                brace_depth += 1;
                i += 1;
            }
            b'}' => {
                brace_depth = brace_depth.saturating_sub(1);
                i += 1;
            }
            b']' if brace_depth == 0 => return Some(i),
            _ => i += 1,
        }
    }
    None
}

/// Iterator over occurrences of a marker at "item depth": outside braces,
/// math, comments and nested environments.
struct EnvScanner<'a> {
    text: &'a str,
    cfg: &'a ParserConfig,
    i: usize,
}

impl<'a> EnvScanner<'a> {
    fn new(text: &'a str, cfg: &'a ParserConfig) -> Self {
        EnvScanner { text, cfg, i: 0 }
    }

    fn next_match(&mut self, marker: &str) -> Option<usize> {
        let bytes = self.text.as_bytes();
        while self.i < bytes.len() {
            match bytes[self.i] {
                b'\\' => {
                    let rest = &self.text[self.i..];
                    if rest.starts_with(marker) {
                        let at = self.i;
                        self.i += marker.len();
                        return Some(at);
                    }
                    if let Some(inner) = env_name_at(rest, "\\begin{") {
                        let from = "\\begin{".len() + inner.len() + 1;
                        let end = if self.cfg.is_opaque_env(&inner) {
                            let end_marker = format!("\\end{{{inner}}}");
                            rest.find(&end_marker)
                                .map(|p| p + end_marker.len())
                        } else {
                            find_env_end(rest, from, &inner, self.cfg)
                                .map(|p| p + format!("\\end{{{inner}}}").len())
                        };
                        match end {
                            Some(p) => self.i += p,
                            None => self.i += 2,
                        }
                    } else {
                        self.i += 2.min(bytes.len() - self.i);
                    }
                }
                b'%' => {
                    while self.i < bytes.len() && bytes[self.i] != b'\n' {
                        self.i += 1;
                    }
                }
                b'{' => {
                    let rest = &self.text[self.i..];
                    match read_brace_group(rest, 0) {
                        Ok((_, len)) => self.i += len,
                        Err(_) => self.i += 1,
                    }
                }
                b'$' => {
                    self.i += 1;
                    while self.i < bytes.len() {
                        match bytes[self.i] {
                            b'\\' => self.i += 2.min(bytes.len() - self.i),
                            b'$' => {
                                self.i += 1;
                                break;
                            }
                            _ => self.i += 1,
                        }
                    }
                }
                _ => self.i += 1,
            }
        }
        None
    }
}
