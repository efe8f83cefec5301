//! LaTeX parsing and rendering.

mod ast;
mod config;
mod parser;
mod render;

pub use ast::{
    Block, Command, CommandArg, DisplayMath, DisplayStyle, DocumentAst, Environment,
    Heading, Inline, ListBlock, ListItem, Math, MathDelim, MathMode, Verbatim,
};
pub use config::ParserConfig;
pub use parser::{line_col, parse_document, parse_document_with, ParseError};
pub use render::{render_blocks, render_document, render_inlines};
