//! Restricted-vocabulary neighbor ranking and accuracy@k.
//!
//! For a pair `(informal, formal)` only tokens of the formal lexicon are
//! ranked by cosine similarity to the informal token, so growth of the
//! informal vocabulary cannot push the target down. The pair's rank is the
//! 1-based position of the formal token in that full restricted ranking;
//! `k` only limits how many neighbors are kept for display.
//!
//! Ordering is by descending similarity, then ascending token.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::io::BufRead;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::embedding::{cosine, EmbeddingTable};
use crate::extract::VariantPair;
use crate::vocab::FormalLexicon;

pub const TIE_BREAK: &str = "similarity desc, token asc";
pub const DEFAULT_CUTOFFS: [usize; 4] = [1, 5, 10, 20];

/// Neighbors shown per pair by [`diagnostics`].
const DIAGNOSTIC_NEIGHBORS: usize = 5;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("informal token `{0}` is not in the embedding vocabulary")]
    InformalMissing(String),
    #[error("informal token `{0}` has an all-zero vector")]
    DegenerateInformal(String),
    #[error("no formal candidates to rank against `{0}`")]
    EmptyCandidates(String),
    #[error("k must be at least 1")]
    ZeroK,
    #[error("cutoffs must be strictly increasing positive integers")]
    InvalidCutoffs,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalConfig {
    /// Neighbors kept per pair.
    pub k: usize,
    /// Drop the informal token from its own candidate list. The formal
    /// target is never dropped.
    pub exclude_self: bool,
    pub cutoffs: Vec<usize>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            k: 20,
            exclude_self: true,
            cutoffs: DEFAULT_CUTOFFS.to_vec(),
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.k == 0 {
            return Err(EvalError::ZeroK);
        }
        let increasing = self.cutoffs.windows(2).all(|w| w[0] < w[1]);
        if !increasing || self.cutoffs.first() == Some(&0) {
            return Err(EvalError::InvalidCutoffs);
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairStatus {
    Scored,
    InformalMissing,
    FormalMissing,
}

impl PairStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PairStatus::Scored => "scored",
            PairStatus::InformalMissing => "informal_missing",
            PairStatus::FormalMissing => "formal_missing",
        }
    }
}

impl fmt::Display for PairStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PairStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "scored" => Ok(PairStatus::Scored),
            "informal_missing" => Ok(PairStatus::InformalMissing),
            "formal_missing" => Ok(PairStatus::FormalMissing),
            other => Err(format!("unknown status `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairResult {
    pub pair: VariantPair,
    pub status: PairStatus,
    pub rank: Option<usize>,
    pub top_neighbors: Vec<(String, f64)>,
    /// Size of the restricted candidate set the rank was taken over.
    pub candidates: usize,
}

impl PairResult {
    fn missing(pair: VariantPair, status: PairStatus) -> Self {
        PairResult {
            pair,
            status,
            rank: None,
            top_neighbors: Vec::new(),
            candidates: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub per_pair: Vec<PairResult>,
    pub scored_count: usize,
    pub missing_informal: usize,
    pub missing_formal: usize,
    pub accuracy_at: BTreeMap<usize, f64>,
    pub hits_at: BTreeMap<usize, usize>,
    pub config: EvalConfig,
    pub embedding_label: String,
    pub lexicon_label: String,
    /// Extra `key: value` lines echoed in the text header.
    pub metadata: Vec<(String, String)>,
    pub warnings: Vec<String>,
}

/// Hits and fractions at each cutoff for a set of ranks.
pub fn accuracy_table(
    ranks: &[usize],
    cutoffs: &[usize],
) -> (BTreeMap<usize, usize>, BTreeMap<usize, f64>) {
    let mut hits = BTreeMap::new();
    let mut accuracy = BTreeMap::new();
    if ranks.is_empty() {
        return (hits, accuracy);
    }
    for &c in cutoffs {
        let n = ranks.iter().filter(|&&r| r <= c).count();
        hits.insert(c, n);
        accuracy.insert(c, n as f64 / ranks.len() as f64);
    }
    (hits, accuracy)
}

impl EvalReport {
    /// Aggregates per-pair results into counts and accuracies.
    pub fn assemble(
        per_pair: Vec<PairResult>,
        config: EvalConfig,
        embedding_label: impl Into<String>,
        lexicon_label: impl Into<String>,
    ) -> Self {
        let ranks: Vec<usize> = per_pair.iter().filter_map(|r| r.rank).collect();
        let count = |s: PairStatus| per_pair.iter().filter(|r| r.status == s).count();
        let (hits_at, accuracy_at) = accuracy_table(&ranks, &config.cutoffs);
        let mut warnings = Vec::new();
        if ranks.is_empty() {
            warnings.push("no scored pairs; accuracy is undefined".to_string());
        }
        EvalReport {
            scored_count: count(PairStatus::Scored),
            missing_informal: count(PairStatus::InformalMissing),
            missing_formal: count(PairStatus::FormalMissing),
            per_pair,
            accuracy_at,
            hits_at,
            config,
            embedding_label: embedding_label.into(),
            lexicon_label: lexicon_label.into(),
            metadata: Vec::new(),
            warnings,
        }
    }

    /// One-line-per-cutoff accuracy summary.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "pairs: {}", self.per_pair.len());
        let _ = writeln!(out, "scored: {}", self.scored_count);
        let _ = writeln!(out, "missing_informal: {}", self.missing_informal);
        let _ = writeln!(out, "missing_formal: {}", self.missing_formal);
        out.push_str(&format_accuracy(
            &self.hits_at,
            &self.accuracy_at,
            self.scored_count,
        ));
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }

    /// Key-value header followed by the per-pair table.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# spelling-variant evaluation report\n");
        let cutoffs: Vec<String> = self.config.cutoffs.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(out, "embeddings: {}", self.embedding_label);
        let _ = writeln!(out, "lexicon: {}", self.lexicon_label);
        let _ = writeln!(out, "k: {}", self.config.k);
        let _ = writeln!(out, "exclude_self: {}", self.config.exclude_self);
        let _ = writeln!(out, "tie_break: {TIE_BREAK}");
        let _ = writeln!(out, "cutoffs: {}", cutoffs.join(","));
        for (key, value) in &self.metadata {
            let _ = writeln!(out, "{key}: {value}");
        }
        out.push_str(&self.summary());
        out.push_str("\ninformal\tformal\tstatus\trank\tneighbors\n");
        out.push_str(&self.to_tsv());
        out
    }

    /// `informal TAB formal TAB status TAB rank TAB neighbor:sim,...`, one
    /// line per pair, in input order. Absent ranks are written as `-`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for r in &self.per_pair {
            let rank = r.rank.map_or_else(|| "-".to_string(), |k| k.to_string());
            let neighbors: Vec<String> = r
                .top_neighbors
                .iter()
                .map(|(t, s)| format!("{t}:{s:.6}"))
                .collect();
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                r.pair.informal,
                r.pair.formal,
                r.status,
                rank,
                neighbors.join(",")
            );
        }
        out
    }
}

fn format_accuracy(
    hits: &BTreeMap<usize, usize>,
    accuracy: &BTreeMap<usize, f64>,
    scored: usize,
) -> String {
    let mut out = String::new();
    for (c, a) in accuracy {
        let _ = writeln!(out, "accuracy@{c}: {a:.3} ({}/{scored})", hits[c]);
    }
    out
}

/// One line of the machine-readable report, parsed back.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub informal: String,
    pub formal: String,
    pub status: PairStatus,
    pub rank: Option<usize>,
    pub neighbors: Vec<(String, f64)>,
}

pub fn read_report_rows<R: BufRead>(reader: R) -> Result<Vec<ReportRow>, EvalError> {
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let err = |message: String| EvalError::Parse {
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        let [informal, formal, status, rank, neighbors] = fields[..] else {
            return Err(err(format!("expected 5 fields, found {}", fields.len())));
        };
        let status: PairStatus = status.parse().map_err(err)?;
        let rank = match rank {
            "-" => None,
            r => Some(
                r.parse::<usize>()
                    .map_err(|_| err(format!("bad rank `{r}`")))?,
            ),
        };
        if rank.is_some() != (status == PairStatus::Scored) {
            return Err(err("rank must be present exactly for scored pairs".into()));
        }
        let neighbors = if neighbors.is_empty() {
            Vec::new()
        } else {
            neighbors
                .split(',')
                .map(|n| {
                    let (token, sim) = n
                        .rsplit_once(':')
                        .ok_or_else(|| err(format!("bad neighbor `{n}`")))?;
                    let sim = sim
                        .parse::<f64>()
                        .map_err(|_| err(format!("bad similarity `{sim}`")))?;
                    Ok((token.to_string(), sim))
                })
                .collect::<Result<_, EvalError>>()?
        };
        rows.push(ReportRow {
            informal: informal.to_string(),
            formal: formal.to_string(),
            status,
            rank,
            neighbors,
        });
    }
    Ok(rows)
}

/// Accuracy summary recomputed from parsed report rows.
pub fn summarize_rows(rows: &[ReportRow], cutoffs: &[usize]) -> String {
    let ranks: Vec<usize> = rows.iter().filter_map(|r| r.rank).collect();
    let (hits, accuracy) = accuracy_table(&ranks, cutoffs);
    let mut out = String::new();
    let _ = writeln!(out, "pairs: {}", rows.len());
    let _ = writeln!(out, "scored: {}", ranks.len());
    out.push_str(&format_accuracy(&hits, &accuracy, ranks.len()));
    out
}

/// Orders `(row, score)` candidates: higher similarity first, then smaller
/// token.
fn ranking_order(table: &EmbeddingTable, a: (usize, f64), b: (usize, f64)) -> Ordering {
    b.1.total_cmp(&a.1)
        .then_with(|| table.token(a.0).cmp(table.token(b.0)))
}

/// Rows eligible for ranking: in the lexicon and not all-zero. Vocabulary
/// order.
pub fn restricted_rows(table: &EmbeddingTable, lexicon: &FormalLexicon) -> Vec<usize> {
    (0..table.len())
        .filter(|&i| !table.is_degenerate(i) && lexicon.contains(table.token(i)))
        .collect()
}

fn query_row(table: &EmbeddingTable, informal: &str) -> Result<usize, EvalError> {
    let row = table
        .index_of(informal)
        .ok_or_else(|| EvalError::InformalMissing(informal.to_string()))?;
    if table.is_degenerate(row) {
        return Err(EvalError::DegenerateInformal(informal.to_string()));
    }
    Ok(row)
}

/// Scores `candidates` against `query`, skipping `skip`.
fn score(
    table: &EmbeddingTable,
    query: usize,
    candidates: &[usize],
    skip: Option<usize>,
) -> Vec<(usize, f64)> {
    let sims = table.similarities(query, candidates);
    candidates
        .iter()
        .copied()
        .zip(sims)
        .filter(|&(c, _)| Some(c) != skip)
        .collect()
}

/// The `k` best of `scored`, ordered.
fn top_k(table: &EmbeddingTable, mut scored: Vec<(usize, f64)>, k: usize) -> Vec<(String, f64)> {
    let cmp = |a: &(usize, f64), b: &(usize, f64)| ranking_order(table, *a, *b);
    if k < scored.len() {
        scored.select_nth_unstable_by(k - 1, cmp);
        scored.truncate(k);
    }
    scored.sort_unstable_by(cmp);
    scored
        .into_iter()
        .map(|(i, s)| (table.token(i).to_string(), s))
        .collect()
}

/// The `k` lexicon tokens most similar to `informal`, best first.
pub fn rank_formal_neighbors(
    table: &EmbeddingTable,
    informal: &str,
    lexicon: &FormalLexicon,
    k: usize,
    exclude_self: bool,
) -> Result<Vec<(String, f64)>, EvalError> {
    if k == 0 {
        return Err(EvalError::ZeroK);
    }
    let query = query_row(table, informal)?;
    let candidates = restricted_rows(table, lexicon);
    let skip = exclude_self.then_some(query);
    let scored = score(table, query, &candidates, skip);
    if scored.is_empty() {
        return Err(EvalError::EmptyCandidates(informal.to_string()));
    }
    Ok(top_k(table, scored, k))
}

/// Complete restricted ranking by exhaustive pairwise cosine and a full
/// sort. Reference implementation for [`rank_formal_neighbors`].
pub fn brute_force_rank(
    table: &EmbeddingTable,
    informal: &str,
    lexicon: &FormalLexicon,
    exclude_self: bool,
) -> Result<Vec<(String, f64)>, EvalError> {
    let query = table
        .vector_of(informal)
        .ok_or_else(|| EvalError::InformalMissing(informal.to_string()))?;
    let mut ranking = Vec::new();
    for (token, row) in table.vocabulary().iter().zip(table.rows()) {
        if !lexicon.contains(token) || (exclude_self && token == informal) {
            continue;
        }
        match cosine(query, row) {
            Ok(sim) => ranking.push((token.clone(), sim)),
            Err(_) if row.iter().all(|&v| v == 0.0) => continue,
            Err(_) => return Err(EvalError::DegenerateInformal(informal.to_string())),
        }
    }
    if ranking.is_empty() {
        return Err(EvalError::EmptyCandidates(informal.to_string()));
    }
    ranking.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(ranking)
}

fn evaluate_one(
    table: &EmbeddingTable,
    pair: &VariantPair,
    lexicon: &FormalLexicon,
    candidates: &[usize],
    config: &EvalConfig,
) -> PairResult {
    let Ok(query) = query_row(table, &pair.informal) else {
        return PairResult::missing(pair.clone(), PairStatus::InformalMissing);
    };
    let target = match table.index_of(&pair.formal) {
        Some(t) if !table.is_degenerate(t) && lexicon.contains(&pair.formal) => t,
        _ => return PairResult::missing(pair.clone(), PairStatus::FormalMissing),
    };
    let skip = (config.exclude_self && query != target).then_some(query);
    let scored = score(table, query, candidates, skip);
    let target_score = scored
        .iter()
        .find(|(c, _)| *c == target)
        .map(|&(_, s)| s)
        .expect("target is a restricted candidate");
    let ahead = scored
        .iter()
        .filter(|&&c| ranking_order(table, c, (target, target_score)) == Ordering::Less)
        .count();
    let n = scored.len();
    PairResult {
        pair: pair.clone(),
        status: PairStatus::Scored,
        rank: Some(ahead + 1),
        top_neighbors: top_k(table, scored, config.k),
        candidates: n,
    }
}

/// Scores every pair against the restricted ranking. Pairs are evaluated
/// on the current rayon pool; results keep input order.
pub fn evaluate_pairs(
    table: &EmbeddingTable,
    pairs: &[VariantPair],
    lexicon: &FormalLexicon,
    config: &EvalConfig,
) -> Result<EvalReport, EvalError> {
    config.validate()?;
    let candidates = restricted_rows(table, lexicon);
    let per_pair: Vec<PairResult> = pairs
        .par_iter()
        .map(|pair| evaluate_one(table, pair, lexicon, &candidates, config))
        .collect();
    Ok(EvalReport::assemble(
        per_pair,
        config.clone(),
        "",
        lexicon.source_label(),
    ))
}

struct WorstView<'a> {
    informal: &'a str,
    formal: &'a str,
    rank: usize,
    neighbors: &'a [(String, f64)],
}

fn render_worst(mut views: Vec<WorstView<'_>>, n_worst: usize) -> String {
    views.sort_by_key(|v| std::cmp::Reverse(v.rank));
    let mut out = String::new();
    let shown = n_worst.min(views.len());
    let _ = writeln!(out, "worst {shown} of {} scored pairs:", views.len());
    for v in views.into_iter().take(n_worst) {
        let neighbors: Vec<String> = v
            .neighbors
            .iter()
            .take(DIAGNOSTIC_NEIGHBORS)
            .map(|(t, s)| format!("{t} ({s:.3})"))
            .collect();
        let _ = writeln!(
            out,
            "{:>6}  {} -> {}: {}",
            v.rank,
            v.informal,
            v.formal,
            neighbors.join(", ")
        );
    }
    out
}

/// The `n_worst` scored pairs by descending rank, each with its closest
/// formal neighbors. Equal ranks keep input order.
pub fn diagnostics(report: &EvalReport, n_worst: usize) -> String {
    let views = report
        .per_pair
        .iter()
        .filter_map(|r| {
            Some(WorstView {
                informal: &r.pair.informal,
                formal: &r.pair.formal,
                rank: r.rank?,
                neighbors: &r.top_neighbors,
            })
        })
        .collect();
    render_worst(views, n_worst)
}

pub fn diagnostics_from_rows(rows: &[ReportRow], n_worst: usize) -> String {
    let views = rows
        .iter()
        .filter_map(|r| {
            Some(WorstView {
                informal: &r.informal,
                formal: &r.formal,
                rank: r.rank?,
                neighbors: &r.neighbors,
            })
        })
        .collect();
    render_worst(views, n_worst)
}
