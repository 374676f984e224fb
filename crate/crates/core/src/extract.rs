//! Mining spelling-variant candidates from dictionary-definition dumps.
//!
//! A definition is a candidate source when it contains "spelling"
//! anywhere (so "misspelling" counts). From those, the variant is the
//! first single-token word that follows "spelling" inside the same clause
//! and is wrapped in `'...'`, `"..."` or a `[...]` link:
//!
//! ```text
//! spelling[^.,]* ('|"|\[)(?P<variant>\w+)('|"|\])
//! ```
//!
//! where the closing delimiter must correspond to the opening one.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::ops::Add;
use std::str::FromStr;
use std::sync::LazyLock;

use rayon::prelude::*;
use regex::Regex;
use thiserror::Error;

use crate::fold_case;
use crate::vocab::FrequencyTable;

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate entry id `{0}`")]
    DuplicateEntry(String),
    #[error("pair refers to unknown entry id `{0}`")]
    UnknownEntry(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

static VARIANT_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"spelling[^.,]* (?:'(?P<single>\w+)'|"(?P<double>\w+)"|\[(?P<bracket>\w+)\])"#)
        .unwrap()
});

static NAME_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\bname\b").unwrap());

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefinitionEntry {
    pub entry_id: String,
    pub headword: String,
    pub definition_text: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Delimiter {
    SingleQuote,
    DoubleQuote,
    Bracket,
}

impl Delimiter {
    pub fn as_str(self) -> &'static str {
        match self {
            Delimiter::SingleQuote => "single_quote",
            Delimiter::DoubleQuote => "double_quote",
            Delimiter::Bracket => "bracket",
        }
    }
}

impl fmt::Display for Delimiter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Delimiter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single_quote" => Ok(Delimiter::SingleQuote),
            "double_quote" => Ok(Delimiter::DoubleQuote),
            "bracket" => Ok(Delimiter::Bracket),
            other => Err(format!("unknown delimiter `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Validation {
    #[default]
    Unvalidated,
    Confirmed,
    RejectedName,
    RejectedOther,
}

impl Validation {
    pub fn as_str(self) -> &'static str {
        match self {
            Validation::Unvalidated => "unvalidated",
            Validation::Confirmed => "confirmed",
            Validation::RejectedName => "rejected_name",
            Validation::RejectedOther => "rejected_other",
        }
    }

    pub fn is_rejected(self) -> bool {
        matches!(self, Validation::RejectedName | Validation::RejectedOther)
    }
}

impl fmt::Display for Validation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Validation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unvalidated" => Ok(Validation::Unvalidated),
            "confirmed" => Ok(Validation::Confirmed),
            "rejected_name" => Ok(Validation::RejectedName),
            "rejected_other" => Ok(Validation::RejectedOther),
            other => Err(format!("unknown validation status `{other}`")),
        }
    }
}

/// An informal headword and the formal spelling its definition points to.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VariantPair {
    pub informal: String,
    pub formal: String,
    pub entry_id: String,
    pub delimiter: Delimiter,
    pub validation: Validation,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExtractionStats {
    pub definitions_scanned: u64,
    pub spelling_hits: u64,
    pub candidates_extracted: u64,
    pub excluded_name: u64,
    pub excluded_frequency: u64,
    pub excluded_nonascii: u64,
}

impl ExtractionStats {
    pub fn excluded(&self) -> u64 {
        self.excluded_name + self.excluded_frequency + self.excluded_nonascii
    }

    pub fn kept(&self) -> u64 {
        self.candidates_extracted - self.excluded()
    }

    fn fields(&self) -> [(&'static str, u64); 6] {
        [
            ("definitions_scanned", self.definitions_scanned),
            ("spelling_hits", self.spelling_hits),
            ("candidates_extracted", self.candidates_extracted),
            ("excluded_nonascii", self.excluded_nonascii),
            ("excluded_name", self.excluded_name),
            ("excluded_frequency", self.excluded_frequency),
        ]
    }

    /// Flat `key: value` block, one field per line, followed by `kept`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (key, value) in self.fields() {
            out.push_str(&format!("{key}: {value}\n"));
        }
        out.push_str(&format!("kept: {}\n", self.kept()));
        out
    }

    /// Parses the block written by [`ExtractionStats::to_text`]. Unknown
    /// keys are ignored.
    pub fn parse(text: &str) -> Result<Self, ExtractError> {
        let mut stats = ExtractionStats::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let err = || ExtractError::Parse {
                line: i + 1,
                message: format!("expected `key: value`, got `{line}`"),
            };
            let (key, value) = line.split_once(':').ok_or_else(err)?;
            let value: u64 = value.trim().parse().map_err(|_| err())?;
            match key.trim() {
                "definitions_scanned" => stats.definitions_scanned = value,
                "spelling_hits" => stats.spelling_hits = value,
                "candidates_extracted" => stats.candidates_extracted = value,
                "excluded_nonascii" => stats.excluded_nonascii = value,
                "excluded_name" => stats.excluded_name = value,
                "excluded_frequency" => stats.excluded_frequency = value,
                _ => {}
            }
        }
        Ok(stats)
    }
}

impl Add for ExtractionStats {
    type Output = ExtractionStats;

    fn add(self, o: ExtractionStats) -> ExtractionStats {
        ExtractionStats {
            definitions_scanned: self.definitions_scanned + o.definitions_scanned,
            spelling_hits: self.spelling_hits + o.spelling_hits,
            candidates_extracted: self.candidates_extracted + o.candidates_extracted,
            excluded_name: self.excluded_name + o.excluded_name,
            excluded_frequency: self.excluded_frequency + o.excluded_frequency,
            excluded_nonascii: self.excluded_nonascii + o.excluded_nonascii,
        }
    }
}

pub fn contains_spelling(text: &str) -> bool {
    // Lowercasing only matters when an uppercase S/P/E/L/I/N/G is present.
    text.contains("spelling") || text.to_lowercase().contains("spelling")
}

/// Entries whose definition contains "spelling", case-insensitively.
pub fn find_spelling_definitions<'a, I>(entries: I) -> impl Iterator<Item = &'a DefinitionEntry>
where
    I: IntoIterator<Item = &'a DefinitionEntry>,
{
    entries
        .into_iter()
        .filter(|e| contains_spelling(&e.definition_text))
}

/// Replaces typographic quotes with their ASCII counterparts.
pub fn normalize_quotes(text: &str) -> std::borrow::Cow<'_, str> {
    const DOUBLE: [char; 4] = ['\u{201C}', '\u{201D}', '\u{201E}', '\u{201F}'];
    const SINGLE: [char; 4] = ['\u{2018}', '\u{2019}', '\u{201A}', '\u{201B}'];
    if !text.contains(|c| DOUBLE.contains(&c) || SINGLE.contains(&c)) {
        return text.into();
    }
    text.chars()
        .map(|c| {
            if DOUBLE.contains(&c) {
                '"'
            } else if SINGLE.contains(&c) {
                '\''
            } else {
                c
            }
        })
        .collect::<String>()
        .into()
}

/// Applies the variant pattern to one definition. Only the leftmost match
/// is considered; if it names the headword itself the entry yields nothing.
pub fn extract_candidate(entry: &DefinitionEntry) -> Option<VariantPair> {
    let text = normalize_quotes(&entry.definition_text);
    let caps = VARIANT_RE.captures(&text)?;
    let (variant, delimiter) = if let Some(m) = caps.name("single") {
        (m, Delimiter::SingleQuote)
    } else if let Some(m) = caps.name("double") {
        (m, Delimiter::DoubleQuote)
    } else {
        (caps.name("bracket")?, Delimiter::Bracket)
    };
    let informal = fold_case(&entry.headword);
    let formal = fold_case(variant.as_str());
    if informal == formal {
        return None;
    }
    Some(VariantPair {
        informal,
        formal,
        entry_id: entry.entry_id.clone(),
        delimiter,
        validation: Validation::Unvalidated,
    })
}

pub fn mentions_name(text: &str) -> bool {
    NAME_RE.is_match(text)
}

/// Why [`apply_filters`] dropped a pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exclusion {
    NonAscii,
    Name,
    Frequency,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FilterOutcome {
    pub kept: Vec<VariantPair>,
    pub excluded: Vec<(VariantPair, Exclusion)>,
    pub stats: ExtractionStats,
}

pub type EntryIndex<'a> = HashMap<&'a str, &'a DefinitionEntry>;

pub fn index_entries(entries: &[DefinitionEntry]) -> EntryIndex<'_> {
    entries.iter().map(|e| (e.entry_id.as_str(), e)).collect()
}

/// The first exclusion rule `pair` trips, if any. Rules are checked in
/// the order non-ASCII headword, "name" in the definition, headword
/// frequency below `min_freq`.
pub fn exclusion_for(
    pair: &VariantPair,
    entry: &DefinitionEntry,
    freq: &FrequencyTable,
    min_freq: u64,
) -> Option<Exclusion> {
    if !entry.headword.is_ascii() {
        Some(Exclusion::NonAscii)
    } else if mentions_name(&entry.definition_text) {
        Some(Exclusion::Name)
    } else if freq.count(&pair.informal) < min_freq {
        Some(Exclusion::Frequency)
    } else {
        None
    }
}

/// Runs the exclusion cascade. Each pair is counted under the first rule
/// it trips; pairs excluded for "name" come back marked `rejected_name`.
///
/// The returned stats only fill `candidates_extracted` and the exclusion
/// tallies.
pub fn apply_filters(
    pairs: Vec<VariantPair>,
    entries: &EntryIndex<'_>,
    freq: &FrequencyTable,
    min_freq: u64,
) -> Result<FilterOutcome, ExtractError> {
    let mut outcome = FilterOutcome::default();
    outcome.stats.candidates_extracted = pairs.len() as u64;
    for mut pair in pairs {
        let entry = entries
            .get(pair.entry_id.as_str())
            .ok_or_else(|| ExtractError::UnknownEntry(pair.entry_id.clone()))?;
        match exclusion_for(&pair, entry, freq, min_freq) {
            None => outcome.kept.push(pair),
            Some(reason) => {
                match reason {
                    Exclusion::NonAscii => outcome.stats.excluded_nonascii += 1,
                    Exclusion::Name => {
                        outcome.stats.excluded_name += 1;
                        pair.validation = Validation::RejectedName;
                    }
                    Exclusion::Frequency => outcome.stats.excluded_frequency += 1,
                }
                outcome.excluded.push((pair, reason));
            }
        }
    }
    Ok(outcome)
}

/// The whole extraction stage over a dump: spelling search, pattern
/// extraction and the exclusion cascade, with every stats field filled.
///
/// Runs on the current rayon pool; output order follows the dump.
pub fn extract_pairs(
    entries: &[DefinitionEntry],
    freq: &FrequencyTable,
    min_freq: u64,
) -> Result<FilterOutcome, ExtractError> {
    let hits: Vec<Option<VariantPair>> = entries
        .par_iter()
        .filter(|e| contains_spelling(&e.definition_text))
        .map(extract_candidate)
        .collect();
    let spelling_hits = hits.len() as u64;
    let candidates: Vec<VariantPair> = hits.into_iter().flatten().collect();
    let index = index_entries(entries);
    let mut outcome = apply_filters(candidates, &index, freq, min_freq)?;
    outcome.stats.definitions_scanned = entries.len() as u64;
    outcome.stats.spelling_hits = spelling_hits;
    Ok(outcome)
}

fn unescape(field: &str) -> String {
    if !field.contains('\\') {
        return field.to_string();
    }
    let mut out = String::with_capacity(field.len());
    let mut chars = field.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('r') => out.push('\r'),
            Some('\\') => out.push('\\'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

fn escape(field: &str) -> String {
    let mut out = String::with_capacity(field.len());
    for c in field.chars() {
        match c {
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            '\\' => out.push_str("\\\\"),
            c => out.push(c),
        }
    }
    out
}

/// Reads a definitions dump: `entry_id TAB headword TAB definition_text`
/// per line, with newlines inside definitions escaped as `\n`.
pub fn read_definitions<R: BufRead>(reader: R) -> Result<Vec<DefinitionEntry>, ExtractError> {
    let mut entries = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let mut fields = line.splitn(3, '\t');
        let (Some(id), Some(headword), Some(text)) = (fields.next(), fields.next(), fields.next())
        else {
            return Err(ExtractError::Parse {
                line: i + 1,
                message: "expected `entry_id<TAB>headword<TAB>definition`".into(),
            });
        };
        if id.is_empty() || headword.is_empty() || text.is_empty() {
            return Err(ExtractError::Parse {
                line: i + 1,
                message: "empty entry id, headword or definition".into(),
            });
        }
        if !seen.insert(id.to_string()) {
            return Err(ExtractError::DuplicateEntry(id.to_string()));
        }
        entries.push(DefinitionEntry {
            entry_id: id.to_string(),
            headword: headword.to_string(),
            definition_text: unescape(text),
        });
    }
    Ok(entries)
}

pub fn write_definitions<W: Write>(
    entries: &[DefinitionEntry],
    mut sink: W,
) -> std::io::Result<()> {
    for e in entries {
        writeln!(
            sink,
            "{}\t{}\t{}",
            e.entry_id,
            e.headword,
            escape(&e.definition_text)
        )?;
    }
    Ok(())
}

/// Writes `informal TAB formal TAB entry_id TAB delimiter TAB validation`.
pub fn write_pairs<W: Write>(pairs: &[VariantPair], mut sink: W) -> std::io::Result<()> {
    for p in pairs {
        writeln!(
            sink,
            "{}\t{}\t{}\t{}\t{}",
            p.informal, p.formal, p.entry_id, p.delimiter, p.validation
        )?;
    }
    Ok(())
}

pub fn read_pairs<R: BufRead>(source: R) -> Result<Vec<VariantPair>, ExtractError> {
    let mut pairs = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let err = |message: String| ExtractError::Parse {
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        let [informal, formal, entry_id, delimiter, validation] = fields[..] else {
            return Err(err(format!("expected 5 fields, found {}", fields.len())));
        };
        pairs.push(VariantPair {
            informal: informal.to_string(),
            formal: formal.to_string(),
            entry_id: entry_id.to_string(),
            delimiter: delimiter.parse().map_err(err)?,
            validation: validation.parse().map_err(err)?,
        });
    }
    Ok(pairs)
}
