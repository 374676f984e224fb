//! Spelling-variant mining and restricted-vocabulary embedding evaluation.
//!
//! The crate is split along the pipeline:
//!
//! * [`embedding`] loads dense word vectors from the GloVe/word2vec text
//!   layouts and serves cosine similarities.
//! * [`vocab`] builds the formal lexicon and informal-corpus frequency
//!   tables.
//! * [`extract`] mines `(informal, formal)` candidate pairs from
//!   dictionary-definition dumps and applies the exclusion cascade.
//! * [`eval`] ranks formal-lexicon tokens by similarity to each informal
//!   variant and aggregates accuracy at a set of cutoffs.

pub mod embedding;
pub mod eval;
pub mod extract;
pub mod vocab;

pub use embedding::{cosine, EmbeddingError, EmbeddingFormat, EmbeddingTable, Vector};
pub use eval::{
    brute_force_rank, diagnostics, evaluate_pairs, rank_formal_neighbors, EvalConfig, EvalError,
    EvalReport, PairResult, PairStatus,
};
pub use extract::{
    apply_filters, extract_candidate, find_spelling_definitions, read_definitions, read_pairs,
    write_pairs, DefinitionEntry, Delimiter, ExtractError, ExtractionStats, FilterOutcome,
    Validation, VariantPair,
};
pub use vocab::{
    build_lexicon, count_frequencies, filter_pairs_by_lexicon, load_lexicon, tokenize,
    FormalLexicon, FrequencyTable, VocabError,
};

/// Case folding applied to every token that takes part in a lexicon or
/// pair comparison.
pub fn fold_case(token: &str) -> String {
    token.to_lowercase()
}
