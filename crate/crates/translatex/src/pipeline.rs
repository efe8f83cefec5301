//! The full document pipeline: walk the AST, lift translatable units into
//! sentences, route them through the backends, restore formulas and apply
//! French conventions.
//!
//! Work happens in source order so `MATHnX` indices are deterministic; the
//! map is built while walking and is read-only during backend calls, which
//! may run concurrently per sentence. Results are reassembled in source
//! order, so with deterministic backends the whole pipeline is a pure
//! function of (document, config).

use crate::assemble::{
    join_inlines, math_tokens, segment_sentences_with, MathTokenMap, SegmentConfig,
    Sentence, MATH_TOKEN_RE,
};
use crate::backend::{Backend, GlossaryWrappedBackend};
use crate::french::{add_french_preamble, convert_quotes, FrenchError};
use crate::glossary::Glossary;
use crate::latex::{
    render_inlines, Block, Command, CommandArg, DocumentAst, Inline, ListBlock,
    ListItem, ParserConfig,
};
use crate::router::{route, Routed, RouteConfig, RoutingDecision};
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub source_lang: String,
    pub target_lang: String,
    pub perplexity_threshold: f64,
    /// Maximum concurrent backend calls (1 = strictly sequential).
    pub concurrency: usize,
    /// `None`: enabled exactly when the target language is French.
    pub french_conventions: Option<bool>,
    pub parser: ParserConfig,
    pub segmenter: SegmentConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            source_lang: "en".into(),
            target_lang: "fr".into(),
            perplexity_threshold: crate::router::DEFAULT_PERPLEXITY_THRESHOLD,
            concurrency: 4,
            french_conventions: None,
            parser: ParserConfig::default(),
            segmenter: SegmentConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn french_enabled(&self) -> bool {
        self.french_conventions
            .unwrap_or_else(|| self.target_lang.eq_ignore_ascii_case("fr"))
    }
}

/// Per-sentence record in the routing report. `decision` is absent for a
/// sentence that passed through untranslated after both backends failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub id: usize,
    pub source_block: usize,
    pub perplexity: Option<f64>,
    pub backend_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision: Option<RoutingDecision>,
}

/// Aggregated routing outcome for one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutingReport {
    pub schema: u32,
    pub total_sentences: usize,
    pub fallback_count: usize,
    pub fallback_fraction: f64,
    pub sentences: Vec<SentenceRecord>,
    pub warnings: Vec<String>,
}

impl RoutingReport {
    fn finalize(&mut self) {
        self.fallback_count = self
            .sentences
            .iter()
            .filter(|r| {
                matches!(
                    &r.decision,
                    Some(d) if d.chosen == crate::router::Chosen::Fallback
                )
            })
            .count();
        self.total_sentences = self.sentences.len();
        self.fallback_fraction = if self.total_sentences == 0 {
            0.0
        } else {
            self.fallback_count as f64 / self.total_sentences as f64
        };
    }
}

pub struct PipelineOutcome {
    pub document: DocumentAst,
    pub report: RoutingReport,
    pub token_map: MathTokenMap,
}

/// A configured translation pipeline. The fallback backend is wrapped with
/// the glossary so every fallback call enforces terminology.
pub struct Pipeline {
    primary: Box<dyn Backend>,
    fallback: Box<dyn Backend>,
    glossary: Option<Glossary>,
    config: PipelineConfig,
}

impl Pipeline {
    pub fn new(
        primary: Box<dyn Backend>,
        fallback: Box<dyn Backend>,
        glossary: Option<Glossary>,
        config: PipelineConfig,
    ) -> Self {
        Pipeline {
            primary,
            fallback,
            glossary,
            config,
        }
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn translate_document(&self, ast: &DocumentAst) -> PipelineOutcome {
        let wrapped;
        let fallback: &dyn Backend = match &self.glossary {
            Some(g) => {
                wrapped = GlossaryWrappedBackend::new(&*self.fallback, g.clone());
                &wrapped
            }
            None => &*self.fallback,
        };
        let mut run = Run {
            pipeline: self,
            fallback,
            map: MathTokenMap::new(),
            report: RoutingReport {
                schema: REPORT_SCHEMA_VERSION,
                total_sentences: 0,
                fallback_count: 0,
                fallback_fraction: 0.0,
                sentences: Vec::new(),
                warnings: Vec::new(),
            },
            unit_counter: 0,
        };

        let blocks = run.translate_blocks(&ast.blocks);
        let mut document = DocumentAst {
            preamble: ast.preamble.clone(),
            blocks,
            trailer: ast.trailer.clone(),
            has_document_env: ast.has_document_env,
        };

        if self.config.french_enabled() && ast.has_document_env {
            match add_french_preamble(&document) {
                Ok(patched) => document = patched,
                Err(FrenchError::NoDocumentClass) => run.report.warnings.push(
                    "french conventions: no \\documentclass found; preamble left as-is"
                        .into(),
                ),
            }
        }

        let mut report = run.report;
        report.finalize();
        PipelineOutcome {
            document,
            report,
            token_map: run.map,
        }
    }
}

struct Run<'a> {
    pipeline: &'a Pipeline,
    fallback: &'a dyn Backend,
    map: MathTokenMap,
    report: RoutingReport,
    unit_counter: usize,
}

impl Run<'_> {
    fn translate_blocks(&mut self, blocks: &[Block]) -> Vec<Block> {
        blocks
            .iter()
            .map(|block| match block {
                Block::Paragraph(inlines) => Block::Paragraph(self.translate_unit(inlines)),
                Block::Heading(h) => {
                    let mut heading = h.clone();
                    heading.inlines = self.translate_unit(&h.inlines);
                    Block::Heading(heading)
                }
                Block::ListBlock(list) => Block::ListBlock(ListBlock {
                    ordered: list.ordered,
                    name: list.name.clone(),
                    args: list.args.clone(),
                    items: list
                        .items
                        .iter()
                        .map(|item| ListItem {
                            opt: item.opt.clone(),
                            blocks: self.translate_blocks(&item.blocks),
                        })
                        .collect(),
                }),
                Block::EnvironmentBlock(env) => {
                    let mut env = env.clone();
                    env.blocks = self.translate_blocks(&env.blocks);
                    Block::EnvironmentBlock(env)
                }
                // math, verbatim and raw blocks are never touched
                other => other.clone(),
            })
            .collect()
    }

    /// Translate one inline unit end to end.
    fn translate_unit(&mut self, inlines: &[Inline]) -> Vec<Inline> {
        let unit_id = self.unit_counter;
        self.unit_counter += 1;

        let tokenized = self.tokenize_walk(inlines);
        let text = match join_inlines(&tokenized) {
            Ok(t) => t,
            Err(e) => {
                self.report
                    .warnings
                    .push(format!("unit {unit_id}: join failed ({e}); left untranslated"));
                return inlines.to_vec();
            }
        };
        let mut sentences =
            segment_sentences_with(&text, &self.pipeline.config.segmenter);
        if sentences.is_empty() {
            return inlines.to_vec();
        }
        for s in &mut sentences {
            s.source_block = unit_id;
        }

        let first_id = self.report.sentences.len();
        let routed = self.route_all(&sentences, first_id);

        let mut translated = Vec::with_capacity(sentences.len());
        for (i, (sentence, outcome)) in sentences.iter().zip(routed).enumerate() {
            let id = first_id + i;
            match outcome {
                Ok(Routed {
                    result,
                    decision,
                    warnings,
                }) => {
                    self.report.warnings.extend(warnings);
                    let mut text = result.text.clone();
                    if self.pipeline.config.french_enabled() {
                        let (converted, quote_warnings) = convert_quotes(&text);
                        text = converted;
                        self.report.warnings.extend(
                            quote_warnings
                                .into_iter()
                                .map(|w| format!("sentence {id}: {w}")),
                        );
                    }
                    self.report.sentences.push(SentenceRecord {
                        id,
                        source_block: unit_id,
                        perplexity: result.perplexity,
                        backend_id: Some(result.backend_id),
                        decision: Some(decision),
                    });
                    translated.push(text);
                }
                Err(e) => {
                    self.report.warnings.push(format!(
                        "sentence {id} passed through untranslated: {e}"
                    ));
                    self.report.sentences.push(SentenceRecord {
                        id,
                        source_block: unit_id,
                        perplexity: None,
                        backend_id: None,
                        decision: None,
                    });
                    translated.push(sentence.text.clone());
                }
            }
        }

        let rejoined = translated.join(" ");
        let (restored, unknown) = detokenize_lenient(&rejoined, &self.map);
        if !unknown.is_empty() {
            self.report.warnings.push(format!(
                "unit {unit_id}: backend invented unknown tokens {unknown:?}; kept as words"
            ));
        }
        restored
    }

    /// Source-order walk that tokenizes math, protects opaque inlines and
    /// recursively translates unit-command arguments in place.
    fn tokenize_walk(&mut self, inlines: &[Inline]) -> Vec<Inline> {
        let cfg = &self.pipeline.config.parser;
        let mut out = Vec::with_capacity(inlines.len());
        for inline in inlines {
            match inline {
                Inline::Str(_) | Inline::Space => out.push(inline.clone()),
                Inline::Math(m) => out.push(Inline::Str(self.map.insert_math(m))),
                Inline::Command(cmd)
                    if cfg.is_span_command(&cmd.name)
                        && matches!(cmd.args.as_slice(), [CommandArg::Translatable(_)]) =>
                {
                    let CommandArg::Translatable(inner) = &cmd.args[0] else {
                        unreachable!()
                    };
                    out.push(Inline::Command(Command {
                        name: cmd.name.clone(),
                        starred: cmd.starred,
                        args: vec![CommandArg::Translatable(self.tokenize_walk(inner))],
                    }));
                }
                Inline::Command(cmd)
                    if cfg.is_unit_command(&cmd.name)
                        && cmd.translatable_arg().is_some() =>
                {
                    let args = cmd
                        .args
                        .iter()
                        .map(|arg| match arg {
                            CommandArg::Translatable(inner) => {
                                CommandArg::Translatable(self.translate_unit(inner))
                            }
                            other => other.clone(),
                        })
                        .collect();
                    let rebuilt = Inline::Command(Command {
                        name: cmd.name.clone(),
                        starred: cmd.starred,
                        args,
                    });
                    let tex = render_inlines(std::slice::from_ref(&rebuilt));
                    out.push(Inline::Str(self.map.insert_raw(tex)));
                }
                Inline::Command(_) | Inline::RawInline(_) => {
                    let tex = render_inlines(std::slice::from_ref(inline));
                    out.push(Inline::Str(self.map.insert_raw(tex)));
                }
            }
        }
        out
    }

    fn route_all(
        &self,
        sentences: &[Sentence],
        first_id: usize,
    ) -> Vec<Result<Routed, crate::router::RouterError>> {
        let cfg = &self.pipeline.config;
        let route_one = |i: usize, sentence: &Sentence| {
            route(
                sentence,
                &*self.pipeline.primary,
                self.fallback,
                &RouteConfig {
                    source_lang: cfg.source_lang.clone(),
                    target_lang: cfg.target_lang.clone(),
                    threshold: cfg.perplexity_threshold,
                    sentence_id: first_id + i,
                },
            )
        };

        let workers = cfg.concurrency.max(1).min(sentences.len().max(1));
        if workers <= 1 || sentences.len() <= 1 {
            return sentences
                .iter()
                .enumerate()
                .map(|(i, s)| route_one(i, s))
                .collect();
        }

        let results: Mutex<Vec<Option<Result<Routed, crate::router::RouterError>>>> =
            Mutex::new((0..sentences.len()).map(|_| None).collect());
        let next = AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= sentences.len() {
                        break;
                    }
                    let outcome = route_one(i, &sentences[i]);
                    results.lock().unwrap()[i] = Some(outcome);
                });
            }
        });
        results
            .into_inner()
            .unwrap()
            .into_iter()
            .map(|r| r.expect("every sentence routed"))
            .collect()
    }
}

/// Like `assemble::detokenize`, but unknown token names stay in the text as
/// plain words and are reported instead of failing the document.
fn detokenize_lenient(text: &str, map: &MathTokenMap) -> (Vec<Inline>, Vec<String>) {
    let mut unknown = Vec::new();
    for name in math_tokens(text) {
        if map.get(&name).is_none() && !unknown.contains(&name) {
            unknown.push(name);
        }
    }
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(Inline::Space);
        }
        let mut cursor = 0usize;
        for m in MATH_TOKEN_RE.find_iter(word) {
            let Some(entry) = map.get(m.as_str()) else {
                continue;
            };
            if m.start() > cursor {
                out.push(Inline::Str(word[cursor..m.start()].to_string()));
            }
            out.push(match entry.mode {
                crate::assemble::TokenMode::Inline => Inline::Math(crate::latex::Math {
                    mode: crate::latex::MathMode::Inline,
                    tex: entry.tex.clone(),
                    delim: entry.delim,
                }),
                crate::assemble::TokenMode::Display => Inline::Math(crate::latex::Math {
                    mode: crate::latex::MathMode::Display,
                    tex: entry.tex.clone(),
                    delim: entry.delim,
                }),
                crate::assemble::TokenMode::Raw => Inline::RawInline(entry.tex.clone()),
            });
            cursor = m.end();
        }
        if cursor < word.len() {
            out.push(Inline::Str(word[cursor..].to_string()));
        }
    }
    (out, unknown)
}
