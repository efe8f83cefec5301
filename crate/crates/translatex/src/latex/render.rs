//! Render an AST back to LaTeX.
//!
//! Rendering is total on well-formed trees. Raw and verbatim content is
//! emitted byte-for-byte; whitespace between inlines is normalized to single
//! spaces, so `render(parse(s))` is a normal form: parsing and rendering it
//! again reproduces it exactly.

use super::ast::*;

pub fn render_document(ast: &DocumentAst) -> String {
    let body = render_blocks(&ast.blocks);
    if !ast.has_document_env {
        let mut out = body;
        if !out.is_empty() && !out.ends_with('\n') {
            out.push('\n');
        }
        return out;
    }
    let mut out = String::with_capacity(ast.preamble.len() + body.len() + 64);
    out.push_str(&ast.preamble);
    out.push_str("\\begin{document}\n");
    out.push_str(&body);
    if !body.is_empty() && !out.ends_with('\n') {
        out.push('\n');
    }
    out.push_str("\\end{document}");
    out.push_str(&ast.trailer);
    out
}

pub fn render_blocks(blocks: &[Block]) -> String {
    let mut out = String::new();
    for block in blocks {
        if !out.is_empty() {
            // a block ending in its own newline (comments) needs only one more
            if out.ends_with('\n') {
                out.push('\n');
            } else {
                out.push_str("\n\n");
            }
        }
        render_block(block, &mut out);
    }
    out
}

fn render_block(block: &Block, out: &mut String) {
    match block {
        Block::Paragraph(inlines) => out.push_str(&render_inlines(inlines)),
        Block::Heading(h) => {
            out.push('\\');
            out.push_str(&h.command);
            if h.starred {
                out.push('*');
            }
            if let Some(opt) = &h.opt {
                out.push('[');
                out.push_str(opt);
                out.push(']');
            }
            out.push('{');
            out.push_str(&render_inlines(&h.inlines));
            out.push('}');
        }
        Block::ListBlock(list) => {
            out.push_str("\\begin{");
            out.push_str(&list.name);
            out.push('}');
            out.push_str(&list.args);
            for item in &list.items {
                out.push_str("\n\\item");
                if let Some(opt) = &item.opt {
                    out.push('[');
                    out.push_str(opt);
                    out.push(']');
                }
                let body = render_blocks(&item.blocks);
                if !body.is_empty() {
                    out.push(' ');
                    out.push_str(&body);
                }
            }
            if !out.ends_with('\n') {
                out.push('\n');
            }
            out.push_str("\\end{");
            out.push_str(&list.name);
            out.push('}');
        }
        Block::DisplayMathBlock(dm) => match &dm.style {
            DisplayStyle::Brackets => {
                out.push_str("\\[");
                push_padded(out, &dm.tex);
                out.push_str("\\]");
            }
            DisplayStyle::Dollars => {
                out.push_str("$$");
                push_padded(out, &dm.tex);
                out.push_str("$$");
            }
            DisplayStyle::Environment { name, args } => {
                out.push_str("\\begin{");
                out.push_str(name);
                out.push('}');
                out.push_str(args);
                out.push_str(&dm.tex);
                out.push_str("\\end{");
                out.push_str(name);
                out.push('}');
            }
        },
        Block::EnvironmentBlock(env) => {
            out.push_str("\\begin{");
            out.push_str(&env.name);
            out.push('}');
            out.push_str(&env.args);
            out.push('\n');
            let body = render_blocks(&env.blocks);
            out.push_str(&body);
            if !out.ends_with('\n') {
                out.push('\n');
            }
            out.push_str("\\end{");
            out.push_str(&env.name);
            out.push('}');
        }
        Block::VerbatimBlock(v) => {
            out.push_str("\\begin{");
            out.push_str(&v.name);
            out.push('}');
            out.push_str(&v.args);
            out.push_str(&v.content);
            out.push_str("\\end{");
            out.push_str(&v.name);
            out.push('}');
        }
        Block::RawBlock(raw) => out.push_str(raw),
    }
}

/// Display math reads better padded onto its own lines; bodies that already
/// carry their newlines are kept byte-identical.
fn push_padded(out: &mut String, tex: &str) {
    if !tex.starts_with('\n') {
        out.push('\n');
    }
    out.push_str(tex);
    if !tex.ends_with('\n') {
        out.push('\n');
    }
}

pub fn render_inlines(inlines: &[Inline]) -> String {
    let mut out = String::new();
    for inline in inlines {
        render_inline(inline, &mut out);
    }
    out
}

fn render_inline(inline: &Inline, out: &mut String) {
    match inline {
        Inline::Str(s) => out.push_str(s),
        Inline::Space => out.push(' '),
        Inline::Math(m) => {
            let d = m.delimiters();
            out.push_str(d.open());
            out.push_str(&m.tex);
            out.push_str(d.close());
        }
        Inline::Command(cmd) => {
            out.push('\\');
            out.push_str(&cmd.name);
            if cmd.starred {
                out.push('*');
            }
            for arg in &cmd.args {
                match arg {
                    CommandArg::Optional(s) => {
                        out.push('[');
                        out.push_str(s);
                        out.push(']');
                    }
                    CommandArg::Raw(s) => {
                        out.push('{');
                        out.push_str(s);
                        out.push('}');
                    }
                    CommandArg::Translatable(inner) => {
                        out.push('{');
                        out.push_str(&render_inlines(inner));
                        out.push('}');
                    }
                }
            }
        }
        Inline::RawInline(s) => {
            out.push_str(s);
            // comments own their line ending
            if s.starts_with('%') {
                out.push('\n');
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latex::parse_document;

    fn round(s: &str) -> String {
        render_document(&parse_document(s).unwrap())
    }

    #[test]
    fn simple_round_trip_is_identity() {
        assert_eq!(round("Let $x$ be real.\n"), "Let $x$ be real.\n");
    }

    #[test]
    fn render_is_idempotent_after_one_pass() {
        let cases = [
            "a  b\tc\nnext    line",
            "One.\n\n\nTwo.",
            "\\section {x}",
            "Math \\(x\\) and $$y$$ mixed.",
            "\\begin{theorem}\nIt holds. % why\n\\end{theorem}",
            "A % c\n\nB",
            "\\begin{itemize}\n  \\item   a\n  \\item b\n\\end{itemize}",
        ];
        for src in cases {
            let once = round(src);
            assert_eq!(round(&once), once, "not idempotent for {src:?}");
        }
    }

    #[test]
    fn canonical_display_block() {
        let block = Block::DisplayMathBlock(DisplayMath {
            tex: "S_r(x)=\\{y\\}".into(),
            style: DisplayStyle::Brackets,
        });
        assert_eq!(render_blocks(&[block]), "\\[\nS_r(x)=\\{y\\}\n\\]");
    }

    #[test]
    fn display_styles_survive() {
        assert_eq!(round("$$\na+b\n$$\n"), "$$\na+b\n$$\n");
        assert_eq!(
            round("\\begin{align}\nx &= y\\\\\nz &= w\n\\end{align}\n"),
            "\\begin{align}\nx &= y\\\\\nz &= w\n\\end{align}\n"
        );
    }

    #[test]
    fn math_delimiters_survive() {
        assert_eq!(round("a \\(x\\) b\n"), "a \\(x\\) b\n");
        assert_eq!(round("a $x$ b\n"), "a $x$ b\n");
    }

    #[test]
    fn whitespace_normalizes_to_single_spaces() {
        assert_eq!(round("a   b\nc\n"), "a b c\n");
    }

    #[test]
    fn verbatim_bytes_are_untouched() {
        let src = "\\begin{verbatim}\n  $x$   %not a comment\n\\end{verbatim}\n";
        assert_eq!(round(src), src);
    }

    #[test]
    fn full_document_shape() {
        let src = "\\documentclass{article}\n\\begin{document}\nHello $w$.\n\\end{document}\n";
        assert_eq!(round(src), src);
    }

    #[test]
    fn comment_newline_not_doubled() {
        let src = "word % note\nmore.\n";
        assert_eq!(round(src), "word % note\nmore.\n");
        let eaten = "foo%\nbar\n";
        assert_eq!(round(eaten), "foo%\nbar\n");
    }
}
