use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two models with different mode or maximum rank were combined.
    ModelMismatch { expected: String, found: String },
    /// A rank outside `1..=max_n` was requested.
    RankOutOfRange { n: usize, max_n: usize },
    InvalidMaxN(usize),
    /// A threshold outside its admissible range.
    InvalidThreshold { name: &'static str, value: f64 },
    UnknownMetric(String),
    InvalidMetricPair(String),
    EmptyRankSet,
    EmptyTokens,
    EmptyLexicon,
    /// Lexicon entries must be non-empty with positive frequency.
    InvalidLexiconEntry(String),
    NoSymbols,
    ZeroVector(char),
    TooFewVectors(usize),
    InvalidGrid(String),
    /// A pre-tokenized reference does not concatenate to its source line (1-based).
    CoverageMismatch { line: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ModelMismatch { expected, found } => {
                write!(f, "model mismatch: expected {expected}, found {found}")
            }
            Error::RankOutOfRange { n, max_n } => {
                write!(f, "rank {n} out of range 1..={max_n}")
            }
            Error::InvalidMaxN(n) => write!(f, "max_n must be at least 1, got {n}"),
            Error::InvalidThreshold { name, value } => {
                write!(f, "{name} threshold {value} is outside [0, 1]")
            }
            Error::UnknownMetric(m) => write!(
                f,
                "unknown metric {m:?}; valid mnemonics: {}",
                crate::metrics::VALID_MNEMONICS
            ),
            Error::InvalidMetricPair(m) => write!(
                f,
                "invalid metric pair {m:?}: expected one backward and one forward kind, e.g. dvf-,dvf+"
            ),
            Error::EmptyRankSet => f.write_str("rank set is empty"),
            Error::EmptyTokens => f.write_str("token multiset is empty"),
            Error::EmptyLexicon => f.write_str("lexicon is empty"),
            Error::InvalidLexiconEntry(e) => write!(f, "invalid lexicon entry {e:?}"),
            Error::NoSymbols => f.write_str("model has no rank-1 symbols"),
            Error::ZeroVector(c) => write!(f, "symbol {c:?} has an all-zero transition vector"),
            Error::TooFewVectors(n) => write!(f, "need at least 2 vectors to cluster, got {n}"),
            Error::InvalidGrid(msg) => write!(f, "invalid grid: {msg}"),
            Error::CoverageMismatch { line } => write!(f, "coverage mismatch at line {line}"),
        }
    }
}

impl core::error::Error for Error {}
