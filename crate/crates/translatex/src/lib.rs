//! Translate LaTeX documents that contain mathematics.
//!
//! The pipeline parses a document into a block/inline tree, lifts each
//! translatable block into whole sentences with formulas replaced by
//! `MATHnX` tokens, routes every sentence through a perplexity-gated pair of
//! translation backends (with a terminology glossary protecting domain
//! terms), restores the formulas, applies French typographic conventions and
//! renders a compilable document. Corpus curation and BLEU evaluation
//! tooling round out the crate.
//!
//! See the book under `book/` for a guided tour; the `translatex` binary
//! exposes everything as subcommands.

pub mod assemble;
pub mod backend;
pub mod bleu;
pub mod corpus;
pub mod french;
pub mod glossary;
pub mod latex;
pub mod pipeline;
pub mod router;
