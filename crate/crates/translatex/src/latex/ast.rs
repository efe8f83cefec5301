//! Block/inline tree representation of a LaTeX source.
//!
//! The tree is deliberately coarse: anything the parser does not understand
//! is kept as raw bytes (`RawBlock`, `RawInline`, `VerbatimBlock`, command
//! arguments) so that rendering reproduces it verbatim. Only the nodes a
//! translation pass needs to see — words, spaces, math — are structured.
//!
//! Every node serializes to JSON as `{"t": <tag>, "c": <contents>}`; the
//! field names are part of the `parse` subcommand's output contract and are
//! documented in the book's wire-formats chapter.

use serde::{Deserialize, Serialize};

/// A parsed LaTeX document.
///
/// `preamble` holds everything before `\begin{document}` and `trailer`
/// everything after `\end{document}`, both as raw text. Sources without a
/// `document` environment (fragments) parse with an empty preamble/trailer
/// and `has_document_env == false`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentAst {
    pub preamble: String,
    pub blocks: Vec<Block>,
    pub trailer: String,
    pub has_document_env: bool,
}

impl DocumentAst {
    /// A fragment document with the given blocks and no preamble.
    pub fn fragment(blocks: Vec<Block>) -> Self {
        DocumentAst {
            preamble: String::new(),
            blocks,
            trailer: String::new(),
            has_document_env: false,
        }
    }
}

/// Paragraph-level document unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "t", content = "c")]
pub enum Block {
    Paragraph(Vec<Inline>),
    Heading(Heading),
    ListBlock(ListBlock),
    DisplayMathBlock(DisplayMath),
    EnvironmentBlock(Environment),
    VerbatimBlock(Verbatim),
    RawBlock(String),
}

/// Sectioning command such as `\section{..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Heading {
    /// 1 = section .. 5 = subparagraph.
    pub level: u8,
    /// Command name without backslash, e.g. `"section"`.
    pub command: String,
    pub starred: bool,
    /// Optional short-title argument, raw, without brackets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opt: Option<String>,
    pub inlines: Vec<Inline>,
}

/// `itemize` or `enumerate` environment whose body is a clean `\item` list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ListBlock {
    pub ordered: bool,
    /// Environment name (`itemize`/`enumerate`), kept for rendering.
    pub name: String,
    /// Raw arguments following `\begin{..}`, e.g. `[label=(\alph*)]`.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub args: String,
    pub items: Vec<ListItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ListItem {
    /// Raw `\item[..]` label, without brackets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opt: Option<String>,
    pub blocks: Vec<Block>,
}

/// Display math standing on its own as a block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplayMath {
    /// Raw math body, delimiters excluded.
    pub tex: String,
    #[serde(default, skip_serializing_if = "DisplayStyle::is_brackets")]
    pub style: DisplayStyle,
}

/// Which delimiters the display math used in the source.
///
/// Rendering preserves the original style; `Brackets` (`\[..\]`) is the
/// canonical style for programmatically built blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "t", content = "c")]
pub enum DisplayStyle {
    #[default]
    Brackets,
    Dollars,
    Environment {
        name: String,
        #[serde(default, skip_serializing_if = "String::is_empty")]
        args: String,
    },
}

impl DisplayStyle {
    fn is_brackets(&self) -> bool {
        matches!(self, DisplayStyle::Brackets)
    }
}

/// Environment parsed recursively (theorem, abstract, figure, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub name: String,
    /// Raw arguments following `\begin{..}` (brackets/braces included).
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub args: String,
    pub blocks: Vec<Block>,
}

/// Environment kept entirely opaque (verbatim, lstlisting, tikzpicture, ...).
/// No downstream pass ever touches `content`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verbatim {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub args: String,
    pub content: String,
}

/// Word-level unit inside a block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "t", content = "c")]
pub enum Inline {
    /// A word; never contains whitespace.
    Str(String),
    Space,
    Math(Math),
    Command(Command),
    /// Verbatim inline bytes: comments, `\verb`, bare brace groups.
    RawInline(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MathMode {
    Inline,
    Display,
}

/// Original delimiters of a math inline. `None` means canonical for the
/// mode: `$..$` for inline, `\[..\]` for display.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MathDelim {
    Dollar,
    Paren,
    DoubleDollar,
    Bracket,
}

impl MathDelim {
    pub fn canonical(mode: MathMode) -> Self {
        match mode {
            MathMode::Inline => MathDelim::Dollar,
            MathMode::Display => MathDelim::Bracket,
        }
    }

    pub fn open(self) -> &'static str {
        match self {
            MathDelim::Dollar => "$",
            MathDelim::Paren => "\\(",
            MathDelim::DoubleDollar => "$$",
            MathDelim::Bracket => "\\[",
        }
    }

    pub fn close(self) -> &'static str {
        match self {
            MathDelim::Dollar => "$",
            MathDelim::Paren => "\\)",
            MathDelim::DoubleDollar => "$$",
            MathDelim::Bracket => "\\]",
        }
    }
}

/// A math formula. `tex` excludes the delimiters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Math {
    pub mode: MathMode,
    pub tex: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delim: Option<MathDelim>,
}

impl Math {
    /// Math with canonical delimiters for its mode.
    pub fn new(mode: MathMode, tex: impl Into<String>) -> Self {
        Math {
            mode,
            tex: tex.into(),
            delim: None,
        }
    }

    pub fn inline(tex: impl Into<String>) -> Self {
        Math::new(MathMode::Inline, tex)
    }

    pub fn display(tex: impl Into<String>) -> Self {
        Math::new(MathMode::Display, tex)
    }

    pub fn delimiters(&self) -> MathDelim {
        self.delim.unwrap_or(MathDelim::canonical(self.mode))
    }
}

/// A LaTeX command with its arguments.
///
/// `name` is stored without the leading backslash; control symbols such as
/// `\%` or `\\` store the single punctuation character.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Command {
    pub name: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub starred: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub args: Vec<CommandArg>,
}

impl Command {
    pub fn bare(name: impl Into<String>) -> Self {
        Command {
            name: name.into(),
            starred: false,
            args: Vec::new(),
        }
    }

    /// The single translatable argument, if this command carries one.
    pub fn translatable_arg(&self) -> Option<&[Inline]> {
        self.args.iter().find_map(|a| match a {
            CommandArg::Translatable(inlines) => Some(inlines.as_slice()),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "t", content = "c")]
pub enum CommandArg {
    /// `[..]` argument, raw, without the brackets.
    Optional(String),
    /// `{..}` argument, raw, without the braces.
    Raw(String),
    /// `{..}` argument parsed as inlines because the command is on the
    /// translatable whitelist.
    Translatable(Vec<Inline>),
}

/// Convenience constructors used throughout the tests and the book.
impl Inline {
    pub fn word(s: impl Into<String>) -> Self {
        let s = s.into();
        debug_assert!(
            !s.chars().any(char::is_whitespace),
            "Str must not contain whitespace: {s:?}"
        );
        Inline::Str(s)
    }

    pub fn math(tex: impl Into<String>) -> Self {
        Inline::Math(Math::inline(tex))
    }

    pub fn display_math(tex: impl Into<String>) -> Self {
        Inline::Math(Math::display(tex))
    }
}
