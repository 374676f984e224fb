//! Formal lexicon and informal-corpus frequency tables.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::extract::VariantPair;
use crate::fold_case;

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("lexicon source is empty")]
    EmptyLexicon,
    #[error("min_count must be positive")]
    ZeroMinCount,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Splits raw text into lexicon tokens: lowercase, whitespace split, strip
/// leading and trailing non-alphanumeric characters. Internal apostrophes
/// and hyphens survive ("don't", "well-known").
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace().filter_map(|raw| {
        let trimmed = raw.trim_matches(|c: char| !c.is_alphanumeric());
        (!trimmed.is_empty()).then(|| fold_case(trimmed))
    })
}

/// Tokens considered formal. Membership is tested after lowercasing both
/// sides.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FormalLexicon {
    tokens: BTreeSet<String>,
    source_label: String,
    duplicates: usize,
}

impl FormalLexicon {
    pub fn new<I, S>(tokens: I, source_label: impl Into<String>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut lexicon = FormalLexicon {
            source_label: source_label.into(),
            ..Default::default()
        };
        for token in tokens {
            lexicon.insert(token.as_ref());
        }
        lexicon
    }

    fn insert(&mut self, token: &str) {
        if !self.tokens.insert(fold_case(token)) {
            self.duplicates += 1;
        }
    }

    pub fn contains(&self, token: &str) -> bool {
        // Fast path for tokens that are already lowercase.
        self.tokens.contains(token) || self.tokens.contains(&fold_case(token))
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }

    pub fn set_source_label(&mut self, label: impl Into<String>) {
        self.source_label = label.into();
    }

    /// Duplicate entries collapsed while loading.
    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    /// One token per line, sorted.
    pub fn write<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        for token in &self.tokens {
            writeln!(writer, "{token}")?;
        }
        Ok(())
    }
}

/// Every token occurring at least `min_count` times.
pub fn build_lexicon<I, S>(corpus: I, min_count: u64) -> Result<FormalLexicon, VocabError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    if min_count == 0 {
        return Err(VocabError::ZeroMinCount);
    }
    let freq = count_frequencies(corpus);
    if freq.total_tokens() == 0 {
        return Err(VocabError::EmptyCorpus);
    }
    let tokens = freq
        .iter()
        .filter(|(_, count)| *count >= min_count)
        .map(|(token, _)| token);
    Ok(FormalLexicon::new(
        tokens,
        format!("corpus (min_count={min_count}, lowercase)"),
    ))
}

/// Reads one token per line. Blank lines are ignored.
pub fn load_lexicon<R: BufRead>(reader: R) -> Result<FormalLexicon, VocabError> {
    let mut lexicon = FormalLexicon::default();
    for line in reader.lines() {
        let line = line?;
        let token = line.trim();
        if !token.is_empty() {
            lexicon.insert(token);
        }
    }
    if lexicon.is_empty() {
        return Err(VocabError::EmptyLexicon);
    }
    Ok(lexicon)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    counts: HashMap<String, u64>,
    total_tokens: u64,
}

impl FrequencyTable {
    pub fn count(&self, token: &str) -> u64 {
        self.counts.get(token).copied().unwrap_or(0)
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn add(&mut self, token: &str, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(token.to_string()).or_insert(0) += count;
        self.total_tokens += count;
    }

    /// Combines two shards. Associative and commutative.
    pub fn merge(mut self, other: FrequencyTable) -> FrequencyTable {
        let (mut big, small) = if self.counts.len() >= other.counts.len() {
            (std::mem::take(&mut self), other)
        } else {
            (other, self)
        };
        for (token, count) in small.counts {
            *big.counts.entry(token).or_insert(0) += count;
        }
        big.total_tokens += small.total_tokens;
        big
    }

    /// Reads `token TAB count` lines. The total is the sum of the counts.
    pub fn read<R: BufRead>(reader: R) -> Result<Self, VocabError> {
        let mut table = FrequencyTable::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let parse = || {
                let (token, count) = line.split_once('\t')?;
                let count = count.trim().parse::<u64>().ok()?;
                (!token.is_empty()).then_some((token, count))
            };
            let (token, count) = parse().ok_or_else(|| VocabError::Parse {
                line: i + 1,
                message: format!("expected `token<TAB>count`, got `{line}`"),
            })?;
            table.add(token, count);
        }
        Ok(table)
    }

    /// Writes `token TAB count`, most frequent first, ties by token.
    pub fn write<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        let mut entries: Vec<_> = self.iter().collect();
        entries.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        for (token, count) in entries {
            writeln!(writer, "{token}\t{count}")?;
        }
        Ok(())
    }
}

pub fn count_frequencies<I, S>(corpus: I) -> FrequencyTable
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut table = FrequencyTable::default();
    for token in corpus {
        table.add(token.as_ref(), 1);
    }
    table
}

/// Splits `pairs` into those whose formal token is in the lexicon and the
/// rest, preserving order in both.
pub fn filter_pairs_by_lexicon(
    pairs: Vec<VariantPair>,
    lexicon: &FormalLexicon,
) -> (Vec<VariantPair>, Vec<VariantPair>) {
    pairs
        .into_iter()
        .partition(|pair| lexicon.contains(&pair.formal))
}
