//! Symbolic inputs: min-max repetition subshifts of finite type.
//!
//! A [`RepeatSpec`] fixes, for every symbol `i`, the minimum and maximum
//! length of a maximal run of `i`. From it we build the minimal forbidden
//! word set, a run-progress state graph whose walks emit exactly the
//! admissible words, and a seeded repeat-Markov sampler in which every run
//! extends past its minimum with probability `p[i]` per extra step.

mod forbidden;
mod generator;
mod graph;
mod sequence;
mod spec;

pub use forbidden::{build_forbidden_set, infer_minmax, validate_sequence, ForbiddenWordSet, Violation, Word};
pub use generator::{generate_sequence, RunSampler, StartRule};
pub use graph::{build_state_graph, GraphEdge, GraphState, StateGraph};
pub use sequence::{run_lengths, sequence_metric, Run, SymbolSequence};
pub use spec::RepeatSpec;

/// A symbol of the input alphabet `{0, .., M-1}`.
pub type Symbol = u8;

/// Largest supported alphabet.
pub const MAX_ALPHABET: usize = u8::MAX as usize + 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SymbolicError {
    #[error("invalid repeat spec: {0}")]
    InvalidSpec(String),
    #[error("word set is not of min-max repetition form: {0}")]
    NotMinMaxForm(String),
    #[error("alphabet mismatch: {left} vs {right}")]
    AlphabetMismatch { left: usize, right: usize },
    #[error("symbol {symbol} outside alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: usize, alphabet: usize },
    #[error("sequence windows share no index")]
    EmptyOverlap,
    #[error("empty word or sequence")]
    Empty,
    #[error("origin {origin} outside window of length {len}")]
    OriginOutOfBounds { origin: i64, len: usize },
    #[error("repeat probabilities are required for sampling")]
    MissingProbabilities,
    #[error("cannot parse sequence text: {0}")]
    Parse(String),
}
