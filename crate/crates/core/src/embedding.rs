//! Dense word vectors in the GloVe / word2vec text layouts.
//!
//! Two layouts are understood:
//!
//! * `plain`: one record per line, `token v1 v2 ... vd`, no header. The
//!   dimension is taken from the first record.
//! * `headered`: the same records preceded by a `count dimension` line.
//!
//! Values are parsed as `f64` and stored as `f32` in a single row-major
//! matrix. Duplicate tokens keep their first row and are tallied.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("embedding source is empty")]
    Empty,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("degenerate (all-zero) vector")]
    Degenerate,
    #[error("unknown embedding format `{0}` (expected `plain` or `headered`)")]
    UnknownFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_err(line: usize, message: impl Into<String>) -> EmbeddingError {
    EmbeddingError::Parse {
        line,
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EmbeddingFormat {
    #[default]
    Plain,
    Headered,
}

impl FromStr for EmbeddingFormat {
    type Err = EmbeddingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain" => Ok(EmbeddingFormat::Plain),
            "headered" => Ok(EmbeddingFormat::Headered),
            other => Err(EmbeddingError::UnknownFormat(other.to_string())),
        }
    }
}

impl fmt::Display for EmbeddingFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmbeddingFormat::Plain => "plain",
            EmbeddingFormat::Headered => "headered",
        })
    }
}

/// An owned vector with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector(Vec<f32>);

impl Vector {
    pub fn new(entries: Vec<f32>) -> Option<Self> {
        if entries.iter().all(|v| v.is_finite()) {
            Some(Vector(entries))
        } else {
            None
        }
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl AsRef<[f32]> for Vector {
    fn as_ref(&self) -> &[f32] {
        &self.0
    }
}

/// Dot product accumulated in `f64`, left to right.
///
/// Every similarity in the crate goes through this function so that the
/// ranked and brute-force paths produce bit-identical scores.
#[inline]
pub fn dot(u: &[f32], v: &[f32]) -> f64 {
    u.iter()
        .zip(v)
        .fold(0.0f64, |acc, (&a, &b)| acc + f64::from(a) * f64::from(b))
}

#[inline]
pub fn l2_norm(u: &[f32]) -> f64 {
    dot(u, u).sqrt()
}

#[inline]
pub(crate) fn cosine_from_parts(dot: f64, norm_u: f64, norm_v: f64) -> f64 {
    (dot / (norm_u * norm_v)).clamp(-1.0, 1.0)
}

/// Cosine similarity, clamped to `[-1, 1]`.
pub fn cosine(u: &[f32], v: &[f32]) -> Result<f64, EmbeddingError> {
    if u.len() != v.len() {
        return Err(EmbeddingError::DimensionMismatch {
            expected: u.len(),
            actual: v.len(),
        });
    }
    let norm_u = l2_norm(u);
    let norm_v = l2_norm(v);
    if norm_u == 0.0 || norm_v == 0.0 {
        return Err(EmbeddingError::Degenerate);
    }
    Ok(cosine_from_parts(dot(u, v), norm_u, norm_v))
}

#[derive(Clone, Debug)]
pub struct EmbeddingTable {
    dimension: usize,
    vocabulary: Vec<String>,
    index: HashMap<String, usize>,
    matrix: Vec<f32>,
    norms: Vec<f64>,
    degenerate: Vec<bool>,
    normalized: bool,
    duplicates: usize,
}

impl EmbeddingTable {
    /// Builds a table from in-memory rows. Duplicate tokens keep the first
    /// row.
    pub fn from_rows<I, S>(rows: I) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = (S, Vec<f32>)>,
        S: Into<String>,
    {
        let mut builder = Builder::default();
        for (i, (token, values)) in rows.into_iter().enumerate() {
            if values.iter().any(|v| !v.is_finite()) {
                return Err(parse_err(i + 1, "non-finite value"));
            }
            builder.push(token.into(), &values, i + 1)?;
        }
        builder.finish()
    }

    /// Reads a table from a text stream.
    pub fn load<R: BufRead>(
        mut reader: R,
        format: EmbeddingFormat,
    ) -> Result<Self, EmbeddingError> {
        let mut builder = Builder::default();
        let mut declared: Option<(usize, usize)> = None;
        let mut records = 0usize;
        let mut buf = Vec::new();
        let mut values = Vec::new();
        let mut line_no = 0usize;

        loop {
            buf.clear();
            if reader.read_until(b'\n', &mut buf)? == 0 {
                break;
            }
            line_no += 1;
            let line = trim_line_end(&buf);
            if line.is_empty() {
                continue;
            }

            if format == EmbeddingFormat::Headered && declared.is_none() {
                declared = Some(parse_header(line, line_no)?);
                builder.dimension = declared.map(|(_, d)| d);
                continue;
            }

            let mut fields = line.split(|&b| b == b' ');
            let token = fields.next().unwrap_or_default();
            if token.is_empty() {
                return Err(parse_err(line_no, "empty token"));
            }
            values.clear();
            for field in fields {
                let text = std::str::from_utf8(field)
                    .map_err(|_| parse_err(line_no, "non-numeric value"))?;
                let value: f64 = text
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("non-numeric value `{text}`")))?;
                let stored = value as f32;
                if !stored.is_finite() {
                    return Err(parse_err(line_no, format!("non-finite value `{text}`")));
                }
                values.push(stored);
            }
            let token = String::from_utf8_lossy(token).into_owned();
            builder.push(token, &values, line_no)?;
            records += 1;
        }

        if let Some((count, _)) = declared {
            if count != records {
                return Err(parse_err(
                    line_no,
                    format!("header declares {count} records, found {records}"),
                ));
            }
        }
        builder.finish()
    }

    /// Writes the table back out in the requested layout. Values use the
    /// shortest representation that parses back to the same `f32`.
    pub fn write<W: Write>(&self, mut writer: W, format: EmbeddingFormat) -> std::io::Result<()> {
        if format == EmbeddingFormat::Headered {
            writeln!(writer, "{} {}", self.len(), self.dimension)?;
        }
        for (token, row) in self.vocabulary.iter().zip(self.rows()) {
            writer.write_all(token.as_bytes())?;
            for value in row {
                write!(writer, " {value}")?;
            }
            writer.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Scales every nonzero row to unit length. All-zero rows are flagged
    /// degenerate and left as they are. Rows already unit within `f32`
    /// precision are not touched, so the operation is idempotent.
    pub fn normalize(mut self) -> Self {
        if self.normalized {
            return self;
        }
        let dim = self.dimension;
        for (i, row) in self.matrix.chunks_exact_mut(dim).enumerate() {
            let norm = self.norms[i];
            if norm == 0.0 {
                self.degenerate[i] = true;
                continue;
            }
            if (norm - 1.0).abs() <= f64::from(f32::EPSILON) {
                continue;
            }
            for v in row.iter_mut() {
                *v = (f64::from(*v) / norm) as f32;
            }
            self.norms[i] = l2_norm(row);
        }
        self.normalized = true;
        self
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocabulary.is_empty()
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Number of duplicate records skipped while loading.
    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Case-sensitive lookup.
    pub fn vector_of(&self, token: &str) -> Option<&[f32]> {
        self.index_of(token).map(|i| self.row(i))
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.matrix[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> {
        self.matrix.chunks_exact(self.dimension)
    }

    pub fn token(&self, i: usize) -> &str {
        &self.vocabulary[i]
    }

    /// True for rows that are all zero. Such rows never take part in
    /// ranking.
    pub fn is_degenerate(&self, i: usize) -> bool {
        self.degenerate[i] || self.norms[i] == 0.0
    }

    /// Cosine similarity of row `query` against each row in `candidates`.
    pub fn similarities(&self, query: usize, candidates: &[usize]) -> Vec<f64> {
        let q = self.row(query);
        let q_norm = self.norms[query];
        candidates
            .iter()
            .map(|&c| cosine_from_parts(dot(q, self.row(c)), q_norm, self.norms[c]))
            .collect()
    }
}

#[derive(Default)]
struct Builder {
    dimension: Option<usize>,
    vocabulary: Vec<String>,
    index: HashMap<String, usize>,
    matrix: Vec<f32>,
    duplicates: usize,
}

impl Builder {
    fn push(&mut self, token: String, values: &[f32], line: usize) -> Result<(), EmbeddingError> {
        let dim = *self.dimension.get_or_insert(values.len());
        if values.len() != dim {
            return Err(parse_err(
                line,
                format!("expected {dim} values, found {}", values.len()),
            ));
        }
        if dim == 0 {
            return Err(parse_err(line, "record has no values"));
        }
        if self.index.contains_key(&token) {
            self.duplicates += 1;
            return Ok(());
        }
        self.index.insert(token.clone(), self.vocabulary.len());
        self.vocabulary.push(token);
        self.matrix.extend_from_slice(values);
        Ok(())
    }

    fn finish(self) -> Result<EmbeddingTable, EmbeddingError> {
        if self.vocabulary.is_empty() {
            return Err(EmbeddingError::Empty);
        }
        let dimension = self.dimension.unwrap_or_default();
        let norms: Vec<f64> = self.matrix.chunks_exact(dimension).map(l2_norm).collect();
        let degenerate = norms.iter().map(|&n| n == 0.0).collect();
        Ok(EmbeddingTable {
            dimension,
            vocabulary: self.vocabulary,
            index: self.index,
            matrix: self.matrix,
            norms,
            degenerate,
            normalized: false,
            duplicates: self.duplicates,
        })
    }
}

fn trim_line_end(mut line: &[u8]) -> &[u8] {
    while let [rest @ .., b'\n' | b'\r' | b' '] = line {
        line = rest;
    }
    line
}

fn parse_header(line: &[u8], line_no: usize) -> Result<(usize, usize), EmbeddingError> {
    let text = std::str::from_utf8(line).map_err(|_| parse_err(line_no, "malformed header"))?;
    let mut parts = text.split(' ');
    let parsed = (|| {
        let count = parts.next()?.parse::<usize>().ok()?;
        let dim = parts.next()?.parse::<usize>().ok()?;
        parts.next().is_none().then_some((count, dim))
    })();
    match parsed {
        Some((_, 0)) => Err(parse_err(line_no, "header dimension must be positive")),
        Some(header) => Ok(header),
        None => Err(parse_err(line_no, format!("malformed header `{text}`"))),
    }
}
