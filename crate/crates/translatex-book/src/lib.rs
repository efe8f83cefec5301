//! Doc-test harness for the book.
//!
//! mdbook cannot run example code against crate dependencies, so each
//! chapter is included here as rustdoc: `cargo test --doc -p
//! translatex-book` compiles and runs every Rust code block in the book.
//! One module per chapter keeps failures attributable.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/parsing.md")]
pub mod parsing {}

#[doc = include_str!("../../../book/src/math-tokens.md")]
pub mod math_tokens {}

#[doc = include_str!("../../../book/src/glossary.md")]
pub mod glossary {}

#[doc = include_str!("../../../book/src/routing.md")]
pub mod routing {}

#[doc = include_str!("../../../book/src/corpus-and-bleu.md")]
pub mod corpus_and_bleu {}

#[doc = include_str!("../../../book/src/french.md")]
pub mod french {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
