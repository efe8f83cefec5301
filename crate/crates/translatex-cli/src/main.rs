//! Command-line interface: document translation plus the corpus and
//! evaluation tooling, as subcommands.
//!
//! Exit codes are a stable contract for scripting: 0 clean, 2 completed
//! with warnings, 1 fatal error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use translatex::backend::{Backend, HttpBackend, MockDictionaryBackend};
use translatex::bleu::bleu_with;
use translatex::corpus::{
    filter_by_glossary, shuffle_split, vocab_size, vocab_size_casefolded, ParallelCorpus,
};
use translatex::glossary::Glossary;
use translatex::latex::{line_col, parse_document_with, render_document, ParseError};
use translatex::pipeline::{Pipeline, PipelineConfig};

const ENV_BACKEND_URL: &str = "TRANSLATEX_BACKEND_URL";
const ENV_API_KEY: &str = "TRANSLATEX_API_KEY";
const ENV_TIMEOUT: &str = "TRANSLATEX_TIMEOUT_SECS";

#[derive(Parser)]
#[command(
    name = "translatex",
    about = "Translate LaTeX documents containing mathematics",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Translate a LaTeX document (or a directory of them with --batch)
    Translate(TranslateArgs),
    /// Parse a LaTeX document and dump its syntax tree as JSON
    Parse(ParseArgs),
    /// Parallel-corpus curation tools
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
    /// Score a translation against a reference with corpus BLEU
    ScoreBleu(ScoreBleuArgs),
}

#[derive(Args)]
struct TranslateArgs {
    /// Input .tex file, or a directory with --batch
    input: PathBuf,
    /// Output path (default: INPUT with a _<target-lang>.tex suffix)
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Primary backend: `identity`, `mock:DICT.tsv`, or an http(s) URL
    /// (default: $TRANSLATEX_BACKEND_URL if set, else identity)
    #[arg(long)]
    primary: Option<String>,
    /// Fallback backend, same syntax; wrapped with the glossary
    #[arg(long, default_value = "identity")]
    fallback: String,
    /// Glossary TSV enforced on the fallback backend
    #[arg(long)]
    glossary: Option<PathBuf>,
    /// Perplexity threshold: primary output accepted at or below it
    #[arg(long, default_value_t = translatex::router::DEFAULT_PERPLEXITY_THRESHOLD)]
    threshold: f64,
    #[arg(long, default_value = "en")]
    source_lang: String,
    #[arg(long, default_value = "fr")]
    target_lang: String,
    /// Concurrent backend requests per document
    #[arg(long, default_value_t = 4)]
    concurrency: usize,
    /// Where to write the routing report (default: OUTPUT.report.json)
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also write the MATHnX token map next to the output
    #[arg(long)]
    dump_intermediate: bool,
    /// Disable the French typographic conventions
    #[arg(long)]
    no_french_conventions: bool,
    /// JSON file overriding parser environments / abbreviation list
    #[arg(long)]
    config: Option<PathBuf>,
    /// Treat INPUT as a directory and translate every .tex inside
    #[arg(long)]
    batch: bool,
    /// HTTP timeout in seconds (or $TRANSLATEX_TIMEOUT_SECS)
    #[arg(long)]
    timeout: Option<u64>,
    /// Retries after HTTP timeouts or connection failures
    #[arg(long, default_value_t = 1)]
    retries: u32,
}

#[derive(Args)]
struct ParseArgs {
    input: PathBuf,
    /// Write the JSON dump here instead of stdout
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Keep pairs whose source side has at least --min-terms glossary terms
    Filter(CorpusFilterArgs),
    /// Shuffle deterministically and split into train/valid/test
    Split(CorpusSplitArgs),
    /// Pair count, token count and vocabulary size, as JSON
    Stats(CorpusStatsArgs),
}

#[derive(Args, Clone)]
struct CorpusInput {
    /// Source-side text file (one sentence per line), with --tgt
    #[arg(long)]
    src: Option<PathBuf>,
    /// Target-side text file aligned line-by-line with --src
    #[arg(long)]
    tgt: Option<PathBuf>,
    /// Single TSV file: source<TAB>target per line
    #[arg(long)]
    tsv: Option<PathBuf>,
}

impl CorpusInput {
    fn load(&self) -> Result<ParallelCorpus> {
        match (&self.src, &self.tgt, &self.tsv) {
            (Some(src), Some(tgt), None) => Ok(ParallelCorpus::from_files(src, tgt)?),
            (None, None, Some(tsv)) => {
                let text = std::fs::read_to_string(tsv)
                    .with_context(|| format!("reading {}", tsv.display()))?;
                Ok(ParallelCorpus::from_tsv(&text, tsv.display().to_string())?)
            }
            _ => bail!("provide either --src and --tgt, or --tsv"),
        }
    }

    fn is_tsv(&self) -> bool {
        self.tsv.is_some()
    }
}

#[derive(Args)]
struct CorpusFilterArgs {
    #[command(flatten)]
    input: CorpusInput,
    #[arg(long)]
    glossary: PathBuf,
    #[arg(long, default_value_t = 2)]
    min_terms: usize,
    /// Output prefix: writes PREFIX.src/PREFIX.tgt (or PREFIX.tsv)
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct CorpusSplitArgs {
    #[command(flatten)]
    input: CorpusInput,
    /// train,valid,test fractions summing to 1
    #[arg(long, default_value = "0.8,0.1,0.1", value_parser = parse_ratios)]
    ratios: Ratios,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output prefix: writes PREFIX.train.src etc. (or PREFIX.train.tsv)
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy)]
struct Ratios(f64, f64, f64);

fn parse_ratios(s: &str) -> Result<Ratios, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    match parts.as_slice() {
        [a, b, c] => Ok(Ratios(*a, *b, *c)),
        _ => Err("expected three comma-separated fractions".into()),
    }
}

#[derive(Args)]
struct CorpusStatsArgs {
    #[command(flatten)]
    input: CorpusInput,
    /// Case-fold tokens before counting the vocabulary
    #[arg(long)]
    casefold: bool,
}

#[derive(Args)]
struct ScoreBleuArgs {
    /// Hypothesis file, one sentence per line
    #[arg(long)]
    hyp: PathBuf,
    /// Reference file, aligned line-by-line
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Add-one smoothing (diagnostic for short corpora)
    #[arg(long)]
    smooth: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Translate(args) => cmd_translate(args),
        Command::Parse(args) => cmd_parse(args),
        Command::Corpus { command } => match command {
            CorpusCommand::Filter(args) => cmd_corpus_filter(args),
            CorpusCommand::Split(args) => cmd_corpus_split(args),
            CorpusCommand::Stats(args) => cmd_corpus_stats(args),
        },
        Command::ScoreBleu(args) => cmd_score_bleu(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

// ---------------------------------------------------------------------------
// translate
// ---------------------------------------------------------------------------

#[derive(serde::Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    parser: Option<translatex::latex::ParserConfig>,
    segmenter: Option<translatex::assemble::SegmentConfig>,
}

fn build_backend(spec: &str, timeout: Duration, retries: u32) -> Result<Box<dyn Backend>> {
    if spec == "identity" {
        return Ok(Box::new(MockDictionaryBackend::identity("identity")));
    }
    if let Some(path) = spec.strip_prefix("mock:") {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading mock dictionary {path}"))?;
        return Ok(Box::new(MockDictionaryBackend::from_tsv("mock", &text)?));
    }
    if spec.starts_with("http://") || spec.starts_with("https://") {
        let mut backend = HttpBackend::new(spec, timeout)?.with_retries(retries);
        if let Ok(key) = std::env::var(ENV_API_KEY) {
            backend = backend.with_api_key(key);
        }
        return Ok(Box::new(backend));
    }
    bail!("unknown backend spec {spec:?}; use identity, mock:PATH or an http(s) URL")
}

fn cmd_translate(args: TranslateArgs) -> Result<ExitCode> {
    let timeout = Duration::from_secs(
        args.timeout
            .or_else(|| std::env::var(ENV_TIMEOUT).ok().and_then(|v| v.parse().ok()))
            .unwrap_or(30),
    );
    let primary_spec = args
        .primary
        .clone()
        .or_else(|| std::env::var(ENV_BACKEND_URL).ok())
        .unwrap_or_else(|| "identity".into());
    let primary = build_backend(&primary_spec, timeout, args.retries)?;
    let fallback = build_backend(&args.fallback, timeout, args.retries)?;
    let glossary = args
        .glossary
        .as_ref()
        .map(|p| Glossary::load(p).with_context(|| format!("loading glossary {}", p.display())))
        .transpose()?;

    let mut config = PipelineConfig {
        source_lang: args.source_lang.clone(),
        target_lang: args.target_lang.clone(),
        perplexity_threshold: args.threshold,
        concurrency: args.concurrency,
        french_conventions: args.no_french_conventions.then_some(false),
        ..PipelineConfig::default()
    };
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let file: FileConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        if let Some(parser) = file.parser {
            config.parser = parser;
        }
        if let Some(segmenter) = file.segmenter {
            config.segmenter = segmenter;
        }
    }
    let pipeline = Pipeline::new(primary, fallback, glossary, config);

    if args.batch {
        let mut worst = 0u8;
        let mut entries: Vec<PathBuf> = std::fs::read_dir(&args.input)
            .with_context(|| format!("reading directory {}", args.input.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "tex"))
            .collect();
        entries.sort();
        if entries.is_empty() {
            bail!("no .tex files in {}", args.input.display());
        }
        for input in entries {
            let output = default_output(&input, &args.target_lang);
            // per-file reports: an explicit --report would overwrite itself
            let code = translate_one(&pipeline, &args, &input, &output, None)?;
            worst = worst.max(code);
        }
        return Ok(ExitCode::from(worst));
    }

    let output = args
        .output
        .clone()
        .unwrap_or_else(|| default_output(&args.input, &args.target_lang));
    let code = translate_one(&pipeline, &args, &args.input, &output, args.report.as_deref())?;
    Ok(ExitCode::from(code))
}

fn default_output(input: &Path, target_lang: &str) -> PathBuf {
    let stem = input.file_stem().unwrap_or_default().to_string_lossy();
    input.with_file_name(format!("{stem}_{target_lang}.tex"))
}

fn translate_one(
    pipeline: &Pipeline,
    args: &TranslateArgs,
    input: &Path,
    output: &Path,
    report_override: Option<&Path>,
) -> Result<u8> {
    let source = std::fs::read_to_string(input)
        .with_context(|| format!("reading {}", input.display()))?;
    let ast = match parse_document_with(&source, &pipeline.config().parser) {
        Ok(ast) => ast,
        Err(e) => {
            report_parse_error(input, &source, &e);
            return Ok(1);
        }
    };
    let outcome = pipeline.translate_document(&ast);
    std::fs::write(output, render_document(&outcome.document))
        .with_context(|| format!("writing {}", output.display()))?;

    let report_path = report_override
        .map(Path::to_path_buf)
        .unwrap_or_else(|| with_suffix(output, ".report.json"));
    std::fs::write(&report_path, serde_json::to_string_pretty(&outcome.report)?)?;
    if args.dump_intermediate {
        std::fs::write(
            with_suffix(output, ".tokens.json"),
            serde_json::to_string_pretty(&outcome.token_map)?,
        )?;
    }

    let warned = !outcome.report.warnings.is_empty();
    eprintln!(
        "{}: {} sentences, {:.1}% fallback{} -> {}",
        input.display(),
        outcome.report.total_sentences,
        outcome.report.fallback_fraction * 100.0,
        if warned {
            format!(", {} warning(s)", outcome.report.warnings.len())
        } else {
            String::new()
        },
        output.display()
    );
    for warning in &outcome.report.warnings {
        eprintln!("  warning: {warning}");
    }
    Ok(if warned { 2 } else { 0 })
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn report_parse_error(input: &Path, source: &str, err: &ParseError) {
    let (line, col) = line_col(source, err.offset());
    eprintln!("error: {}:{line}:{col}: {err}", input.display());
}

// ---------------------------------------------------------------------------
// parse
// ---------------------------------------------------------------------------

fn cmd_parse(args: ParseArgs) -> Result<ExitCode> {
    let source = std::fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let parser_cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let file: FileConfig = serde_json::from_str(&text)?;
            file.parser.unwrap_or_default()
        }
        None => Default::default(),
    };
    let ast = match parse_document_with(&source, &parser_cfg) {
        Ok(ast) => ast,
        Err(e) => {
            report_parse_error(&args.input, &source, &e);
            return Ok(ExitCode::from(1));
        }
    };
    let json = serde_json::to_string_pretty(&ast)?;
    match &args.output {
        Some(path) => std::fs::write(path, json)?,
        None => println!("{json}"),
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// corpus
// ---------------------------------------------------------------------------

fn write_corpus(corpus: &ParallelCorpus, prefix: &Path, tsv: bool) -> Result<()> {
    if tsv {
        std::fs::write(with_suffix(prefix, ".tsv"), corpus.to_tsv())?;
    } else {
        let mut src = String::new();
        let mut tgt = String::new();
        for (s, t) in &corpus.pairs {
            src.push_str(s);
            src.push('\n');
            tgt.push_str(t);
            tgt.push('\n');
        }
        std::fs::write(with_suffix(prefix, ".src"), src)?;
        std::fs::write(with_suffix(prefix, ".tgt"), tgt)?;
    }
    Ok(())
}

fn cmd_corpus_filter(args: CorpusFilterArgs) -> Result<ExitCode> {
    let corpus = args.input.load()?;
    let glossary = Glossary::load(&args.glossary)?;
    let filtered = filter_by_glossary(&corpus, &glossary, args.min_terms);
    write_corpus(&filtered, &args.output, args.input.is_tsv())?;
    eprintln!(
        "kept {} of {} pairs (>= {} glossary terms)",
        filtered.len(),
        corpus.len(),
        args.min_terms
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_corpus_split(args: CorpusSplitArgs) -> Result<ExitCode> {
    let corpus = args.input.load()?;
    let Ratios(a, b, c) = args.ratios;
    let (train, valid, test) = shuffle_split(&corpus, (a, b, c), args.seed)?;
    for (part, name) in [(&train, "train"), (&valid, "valid"), (&test, "test")] {
        let prefix = with_suffix(&args.output, &format!(".{name}"));
        write_corpus(part, &prefix, args.input.is_tsv())?;
    }
    eprintln!(
        "split {} pairs into {}/{}/{} (seed {})",
        corpus.len(),
        train.len(),
        valid.len(),
        test.len(),
        args.seed
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_corpus_stats(args: CorpusStatsArgs) -> Result<ExitCode> {
    let corpus = args.input.load()?;
    let sources: Vec<&str> = corpus.pairs.iter().map(|(s, _)| s.as_str()).collect();
    let token_count: usize = sources
        .iter()
        .map(|s| translatex::corpus::word_tokenize(s).len())
        .sum();
    let vocab = if args.casefold {
        vocab_size_casefolded(&sources)
    } else {
        vocab_size(&sources)
    };
    let stats = serde_json::json!({
        "pairs": corpus.len(),
        "source_tokens": token_count,
        "source_vocab": vocab,
        "casefold": args.casefold,
    });
    println!("{}", serde_json::to_string_pretty(&stats)?);
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// score-bleu
// ---------------------------------------------------------------------------

fn cmd_score_bleu(args: ScoreBleuArgs) -> Result<ExitCode> {
    let hyp_text = std::fs::read_to_string(&args.hyp)
        .with_context(|| format!("reading {}", args.hyp.display()))?;
    let ref_text = std::fs::read_to_string(&args.reference)
        .with_context(|| format!("reading {}", args.reference.display()))?;
    let hyps: Vec<&str> = hyp_text.lines().collect();
    let refs: Vec<&str> = ref_text.lines().collect();
    let report = bleu_with(&hyps, &refs, args.smooth)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    eprintln!("{}", report.summary());
    Ok(ExitCode::SUCCESS)
}
