//! Effective pipeline settings: command-line flags layered over an optional
//! `key = value` config file, layered over defaults.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use spellvar_core::embedding::EmbeddingFormat;
use spellvar_core::eval::DEFAULT_CUTOFFS;

pub const DEFAULT_MIN_FREQ: u64 = 100;
pub const DEFAULT_MIN_COUNT: u64 = 1;
pub const DEFAULT_K: usize = 20;
pub const DEFAULT_WORST: usize = 10;

const KNOWN_KEYS: &[&str] = &[
    "defs",
    "freq",
    "min-freq",
    "lexicon",
    "embeddings",
    "format",
    "pairs",
    "report",
    "cutoffs",
    "threads",
    "no-exclude-self",
    "corpus",
    "min-count",
    "k",
    "worst",
];

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub defs: Option<PathBuf>,
    pub freq: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub pairs: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub min_freq: u64,
    pub min_count: u64,
    pub cutoffs: Vec<usize>,
    pub format: EmbeddingFormat,
    pub exclude_self: bool,
    pub k: usize,
    pub worst: usize,
    pub threads: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            defs: None,
            freq: None,
            lexicon: None,
            embeddings: None,
            pairs: None,
            report: None,
            corpus: None,
            min_freq: DEFAULT_MIN_FREQ,
            min_count: DEFAULT_MIN_COUNT,
            cutoffs: DEFAULT_CUTOFFS.to_vec(),
            format: EmbeddingFormat::Plain,
            exclude_self: true,
            k: DEFAULT_K,
            worst: DEFAULT_WORST,
            threads: default_threads(),
        }
    }
}

pub fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, usize::from)
}

/// Parses `1,5,10,20`. Values must be positive and strictly increasing.
pub fn parse_cutoffs(text: &str) -> Result<Vec<usize>> {
    let cutoffs = text
        .split(',')
        .map(|c| {
            c.trim()
                .parse::<usize>()
                .map_err(|_| anyhow!("invalid cutoff `{c}`"))
        })
        .collect::<Result<Vec<_>>>()?;
    if cutoffs.is_empty() || cutoffs[0] == 0 || cutoffs.windows(2).any(|w| w[0] >= w[1]) {
        bail!("cutoffs must be strictly increasing positive integers, got `{text}`");
    }
    Ok(cutoffs)
}

fn parse_bool(text: &str) -> Result<bool> {
    match text {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => bail!("expected a boolean, got `{other}`"),
    }
}

/// Reads a flat `key = value` file. `#` starts a comment line.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    parse_config_text(&text).with_context(|| format!("in config file {}", path.display()))
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected `key = value`", i + 1))?;
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            bail!("line {}: unknown key `{key}`", i + 1);
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

impl PipelineConfig {
    /// Applies values from a parsed config file.
    pub fn apply_file(&mut self, values: &BTreeMap<String, String>) -> Result<()> {
        for (key, value) in values {
            let ctx = || format!("config key `{key}`");
            match key.as_str() {
                "defs" => self.defs = Some(value.into()),
                "freq" => self.freq = Some(value.into()),
                "lexicon" => self.lexicon = Some(value.into()),
                "embeddings" => self.embeddings = Some(value.into()),
                "pairs" => self.pairs = Some(value.into()),
                "report" => self.report = Some(value.into()),
                "corpus" => self.corpus = Some(value.into()),
                "min-freq" => self.min_freq = value.parse().with_context(ctx)?,
                "min-count" => self.min_count = value.parse().with_context(ctx)?,
                "k" => self.k = value.parse().with_context(ctx)?,
                "worst" => self.worst = value.parse().with_context(ctx)?,
                "threads" => self.threads = value.parse().with_context(ctx)?,
                "cutoffs" => self.cutoffs = parse_cutoffs(value).with_context(ctx)?,
                "format" => self.format = value.parse().with_context(ctx)?,
                "no-exclude-self" => self.exclude_self = !parse_bool(value).with_context(ctx)?,
                _ => bail!("unknown config key `{key}`"),
            }
        }
        Ok(())
    }

    pub fn require<'a>(&self, field: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
        field
            .as_deref()
            .ok_or_else(|| anyhow!("missing required path `--{flag}`"))
    }

    /// The settings that shape an evaluation, as `key: value` pairs for the
    /// report header.
    pub fn evaluation_echo(&self) -> Vec<(String, String)> {
        let path = |p: &Option<PathBuf>| {
            p.as_ref()
                .map_or_else(|| "-".to_string(), |p| p.display().to_string())
        };
        vec![
            ("pairs_file".into(), path(&self.pairs)),
            ("embedding_format".into(), self.format.to_string()),
            ("lexicon_case_folding".into(), "lowercase".into()),
            (
                "lexicon_tokenization".into(),
                "lowercase, whitespace split, strip non-alphanumeric edges".into(),
            ),
            ("lexicon_min_count".into(), self.min_count.to_string()),
            ("min_freq".into(), self.min_freq.to_string()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoffs_parse_and_validate() {
        assert_eq!(parse_cutoffs("1,5,10,20").unwrap(), vec![1, 5, 10, 20]);
        assert!(parse_cutoffs("5,1").is_err());
        assert!(parse_cutoffs("0,1").is_err());
        assert!(parse_cutoffs("1,1").is_err());
        assert!(parse_cutoffs("a").is_err());
    }

    #[test]
    fn config_file_overrides_defaults() {
        let map = parse_config_text(
            "# comment\nmin-freq = 5\ncutoffs = 1, 3\nno-exclude-self = true\nformat = headered\n",
        )
        .unwrap();
        let mut cfg = PipelineConfig::default();
        cfg.apply_file(&map).unwrap();
        assert_eq!(cfg.min_freq, 5);
        assert_eq!(cfg.cutoffs, vec![1, 3]);
        assert!(!cfg.exclude_self);
        assert_eq!(cfg.format, EmbeddingFormat::Headered);
    }

    #[test]
    fn config_file_rejects_unknown_keys() {
        assert!(parse_config_text("colour = blue\n").is_err());
        assert!(parse_config_text("no equals sign\n").is_err());
    }
}
