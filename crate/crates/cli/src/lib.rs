//! Pipeline stages behind the `spellvar` binary.
//!
//! Each stage reads its inputs from declared paths and writes its outputs to
//! declared paths, so stages can be rerun independently:
//!
//! * `extract`: definitions dump + frequency table -> pairs file + stats.
//! * `count-freq`: raw corpus -> frequency table.
//! * `build-vocab`: raw corpus -> formal lexicon.
//! * `evaluate`: pairs + lexicon + embeddings -> report (text and TSV).
//! * `report`: TSV report -> accuracy summary and worst-pair diagnostics.

pub mod config;

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use spellvar_core::embedding::{EmbeddingFormat, EmbeddingTable};
use spellvar_core::eval::{
    diagnostics_from_rows, evaluate_pairs, read_report_rows, summarize_rows, EvalConfig, EvalReport,
};
use spellvar_core::extract::{
    extract_pairs, read_definitions, read_pairs, write_pairs, ExtractionStats,
};
use spellvar_core::vocab::{
    build_lexicon, count_frequencies, filter_pairs_by_lexicon, load_lexicon, tokenize,
    FormalLexicon, FrequencyTable,
};

pub use config::PipelineConfig;

#[derive(Debug, Parser)]
#[command(
    name = "spellvar",
    version,
    about = "Spelling-variant mining and embedding evaluation"
)]
pub struct Cli {
    /// Flat `key = value` file; keys mirror the long flag names.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mine variant pairs from a definitions dump.
    Extract(Flags),
    /// Build a formal lexicon from a raw text corpus.
    BuildVocab(Flags),
    /// Count token frequencies in a raw text corpus.
    CountFreq(Flags),
    /// Rank formal neighbors for each pair and write the report.
    Evaluate(Flags),
    /// Summarize a TSV report and list the worst-ranked pairs.
    Report(Flags),
}

#[derive(Debug, Default, Args)]
pub struct Flags {
    /// Definitions dump: `entry_id TAB headword TAB definition`.
    #[arg(long, value_name = "FILE")]
    pub defs: Option<PathBuf>,
    /// Frequency table: `token TAB count`.
    #[arg(long, value_name = "FILE")]
    pub freq: Option<PathBuf>,
    /// Minimum headword frequency kept by `extract` [default: 100].
    #[arg(long, value_name = "N")]
    pub min_freq: Option<u64>,
    /// Formal lexicon, one token per line.
    #[arg(long, value_name = "FILE")]
    pub lexicon: Option<PathBuf>,
    /// Raw text corpus for `build-vocab` and `count-freq`.
    #[arg(long, value_name = "FILE")]
    pub corpus: Option<PathBuf>,
    /// Minimum corpus count for lexicon entries [default: 1].
    #[arg(long, value_name = "N")]
    pub min_count: Option<u64>,
    /// Embeddings in text format.
    #[arg(long, value_name = "FILE")]
    pub embeddings: Option<PathBuf>,
    /// `plain` or `headered` [default: plain].
    #[arg(long, value_name = "FORMAT")]
    pub format: Option<EmbeddingFormat>,
    /// Pairs file: `informal TAB formal TAB entry_id TAB delimiter TAB validation`.
    #[arg(long, value_name = "FILE")]
    pub pairs: Option<PathBuf>,
    /// Text report path; the TSV form is written next to it with `.tsv` appended.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
    /// Accuracy cutoffs [default: 1,5,10,20].
    #[arg(long, value_name = "LIST")]
    pub cutoffs: Option<String>,
    /// Neighbors kept per pair [default: 20].
    #[arg(long, value_name = "N")]
    pub k: Option<usize>,
    /// Pairs listed by `report` [default: 10].
    #[arg(long, value_name = "N")]
    pub worst: Option<usize>,
    /// Worker threads [default: available parallelism].
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
    /// Let the informal token count as its own neighbor.
    #[arg(long)]
    pub no_exclude_self: bool,
}

impl Flags {
    fn apply(&self, cfg: &mut PipelineConfig) -> Result<()> {
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { cfg.$field = Some(v.clone()); })*
            };
        }
        set!(defs, freq, lexicon, corpus, embeddings, pairs, report);
        macro_rules! set_value {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { cfg.$field = v.clone(); })*
            };
        }
        set_value!(min_freq, min_count, format, k, worst, threads);
        if let Some(text) = &self.cutoffs {
            cfg.cutoffs = config::parse_cutoffs(text)?;
        }
        if self.no_exclude_self {
            cfg.exclude_self = false;
        }
        Ok(())
    }
}

impl Cli {
    /// Resolves defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(&config::read_config_file(path)?)?;
        }
        self.flags().apply(&mut cfg)?;
        if cfg.threads == 0 {
            bail!("--threads must be at least 1");
        }
        if cfg.k == 0 {
            bail!("--k must be at least 1");
        }
        Ok(cfg)
    }

    fn flags(&self) -> &Flags {
        match &self.command {
            Command::Extract(f)
            | Command::BuildVocab(f)
            | Command::CountFreq(f)
            | Command::Evaluate(f)
            | Command::Report(f) => f,
        }
    }
}

/// Parses arguments, runs the selected stage and prints its summary.
pub fn run(cli: Cli) -> Result<()> {
    let cfg = cli.resolve()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .context("cannot start worker threads")?;
    pool.install(|| match &cli.command {
        Command::Extract(_) => {
            let stats = cmd_extract(&cfg)?;
            print!("{}", stats.to_text());
            Ok(())
        }
        Command::BuildVocab(_) => {
            let lexicon = cmd_build_vocab(&cfg)?;
            eprintln!("lexicon: {} tokens", lexicon.len());
            Ok(())
        }
        Command::CountFreq(_) => {
            let table = cmd_count_freq(&cfg)?;
            eprintln!(
                "frequencies: {} types, {} tokens",
                table.len(),
                table.total_tokens()
            );
            Ok(())
        }
        Command::Evaluate(_) => {
            let report = cmd_evaluate(&cfg)?;
            print!("{}", report.summary());
            Ok(())
        }
        Command::Report(_) => {
            print!("{}", cmd_report(&cfg)?);
            Ok(())
        }
    })
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(file))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

/// `path` with `suffix` appended to the file name.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_os_string();
    name.push(suffix);
    PathBuf::from(name)
}

pub fn stats_path(pairs: &Path) -> PathBuf {
    sibling(pairs, ".stats")
}

pub fn tsv_path(report: &Path) -> PathBuf {
    if report.extension().is_some_and(|e| e == "tsv") {
        report.to_path_buf()
    } else {
        sibling(report, ".tsv")
    }
}

pub fn read_frequency_file(path: &Path) -> Result<FrequencyTable> {
    FrequencyTable::read(open(path)?).with_context(|| format!("in {}", path.display()))
}

/// Extraction stage. Writes the kept pairs to `--pairs` and the stats
/// block to `<pairs>.stats`.
pub fn cmd_extract(cfg: &PipelineConfig) -> Result<ExtractionStats> {
    let defs_path = cfg.require(&cfg.defs, "defs")?;
    let freq_path = cfg.require(&cfg.freq, "freq")?;
    let pairs_path = cfg.require(&cfg.pairs, "pairs")?;
    if cfg.min_freq == 0 {
        bail!("--min-freq must be positive");
    }

    let entries = read_definitions(open(defs_path)?)
        .with_context(|| format!("in {}", defs_path.display()))?;
    let freq = read_frequency_file(freq_path)?;
    let outcome = extract_pairs(&entries, &freq, cfg.min_freq)?;

    let mut sink = create(pairs_path)?;
    write_pairs(&outcome.kept, &mut sink)?;
    sink.flush()?;
    write_file(&stats_path(pairs_path), &outcome.stats.to_text())?;
    Ok(outcome.stats)
}

fn corpus_tokens(cfg: &PipelineConfig) -> Result<Vec<String>> {
    let path = cfg.require(&cfg.corpus, "corpus")?;
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(text.lines().flat_map(tokenize).collect())
}

/// Writes every corpus token occurring at least `--min-count` times.
pub fn cmd_build_vocab(cfg: &PipelineConfig) -> Result<FormalLexicon> {
    let out = cfg.require(&cfg.lexicon, "lexicon")?;
    let tokens = corpus_tokens(cfg)?;
    let lexicon = build_lexicon(&tokens, cfg.min_count).with_context(|| {
        format!(
            "cannot build lexicon from {}",
            cfg.corpus.as_deref().unwrap_or(Path::new("-")).display()
        )
    })?;
    let mut sink = create(out)?;
    lexicon.write(&mut sink)?;
    sink.flush()?;
    Ok(lexicon)
}

/// Counts corpus tokens in parallel shards and writes `--freq`.
pub fn cmd_count_freq(cfg: &PipelineConfig) -> Result<FrequencyTable> {
    let out = cfg.require(&cfg.freq, "freq")?;
    let tokens = corpus_tokens(cfg)?;
    let table = tokens
        .par_chunks(1 << 16)
        .map(count_frequencies)
        .reduce(FrequencyTable::default, FrequencyTable::merge);
    let mut sink = create(out)?;
    table.write(&mut sink)?;
    sink.flush()?;
    Ok(table)
}

/// Evaluation stage. Pairs already marked rejected are skipped and pairs
/// whose formal token is outside the lexicon are dropped before scoring;
/// both counts go into the report header.
pub fn cmd_evaluate(cfg: &PipelineConfig) -> Result<EvalReport> {
    let pairs_path = cfg.require(&cfg.pairs, "pairs")?;
    let lexicon_path = cfg.require(&cfg.lexicon, "lexicon")?;
    let embeddings_path = cfg.require(&cfg.embeddings, "embeddings")?;
    let report_path = cfg.require(&cfg.report, "report")?;

    let table = EmbeddingTable::load(open(embeddings_path)?, cfg.format)
        .with_context(|| format!("in {}", embeddings_path.display()))?
        .normalize();
    if table.duplicates() > 0 {
        eprintln!(
            "warning: {} duplicate tokens in {} (first occurrence kept)",
            table.duplicates(),
            embeddings_path.display()
        );
    }
    let mut lexicon = load_lexicon(open(lexicon_path)?)
        .with_context(|| format!("in {}", lexicon_path.display()))?;
    lexicon.set_source_label(lexicon_path.display().to_string());
    let pairs =
        read_pairs(open(pairs_path)?).with_context(|| format!("in {}", pairs_path.display()))?;

    let total = pairs.len();
    let (pairs, rejected): (Vec<_>, Vec<_>) =
        pairs.into_iter().partition(|p| !p.validation.is_rejected());
    let (retained, removed) = filter_pairs_by_lexicon(pairs, &lexicon);

    let eval_config = EvalConfig {
        k: cfg.k,
        exclude_self: cfg.exclude_self,
        cutoffs: cfg.cutoffs.clone(),
    };
    let mut report = evaluate_pairs(&table, &retained, &lexicon, &eval_config)?;
    report.embedding_label = embeddings_path.display().to_string();
    report.metadata = cfg.evaluation_echo();
    report.metadata.extend([
        ("pairs_read".to_string(), total.to_string()),
        (
            "pairs_rejected_skipped".to_string(),
            rejected.len().to_string(),
        ),
        (
            "pairs_outside_lexicon".to_string(),
            removed.len().to_string(),
        ),
    ]);

    write_file(report_path, &report.to_text())?;
    write_file(&tsv_path(report_path), &report.to_tsv())?;
    Ok(report)
}

/// Recomputes accuracy from a TSV report and lists the worst pairs.
pub fn cmd_report(cfg: &PipelineConfig) -> Result<String> {
    let report_path = cfg.require(&cfg.report, "report")?;
    let path = tsv_path(report_path);
    let rows = read_report_rows(open(&path)?).with_context(|| format!("in {}", path.display()))?;
    let mut out = summarize_rows(&rows, &cfg.cutoffs);
    out.push('\n');
    out.push_str(&diagnostics_from_rows(&rows, cfg.worst));
    Ok(out)
}
