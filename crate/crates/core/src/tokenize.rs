//! Tokenizers: transition-freedom based, greedy lexicon based, delimiter based,
//! and pre-tokenized references.

use alloc::borrow::Cow;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::lexicon::Lexicon;
use crate::metrics::{boundary_scores, MetricPair};
use crate::model::NGramModel;
use crate::text::simple_lowercase_char;
use crate::{Error, Result};

/// Characters split off as single-character tokens by [`delimiter_tokenize`].
pub const DELIMITERS: &str = " \t'`\"“”+=-_&/|\\*()[]<>#^@~,;:.!?";

/// Delimiters added to reference lexicons; also covers line terminators.
pub const LEXICON_DELIMITERS: &str = " \t\n\r'`\"“”+=-_&/|\\*()[]<>#^@~,;:.!?";

pub fn is_delimiter(c: char) -> bool {
    DELIMITERS.contains(c)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    /// Character offset in the source line.
    pub start: usize,
}

impl Token {
    pub fn new(text: impl Into<String>, start: usize) -> Self {
        Token { text: text.into(), start }
    }
}

pub fn token_texts(tokens: &[Token]) -> Vec<&str> {
    tokens.iter().map(|t| t.text.as_str()).collect()
}

pub trait Tokenizer {
    fn tokenize(&self, line: &str) -> Vec<Token>;

    /// Tokenizes line `index` of a test set. Only references bound to a specific
    /// corpus need the index.
    fn tokenize_at(&self, index: usize, line: &str) -> Vec<Token> {
        let _ = index;
        self.tokenize(line)
    }
}

impl<T: Tokenizer + ?Sized> Tokenizer for &T {
    fn tokenize(&self, line: &str) -> Vec<Token> {
        (**self).tokenize(line)
    }

    fn tokenize_at(&self, index: usize, line: &str) -> Vec<Token> {
        (**self).tokenize_at(index, line)
    }
}

/// Hyperparameters of the freedom-based tokenizer.
#[derive(Clone, Debug, PartialEq)]
pub struct TokenizerConfig {
    pub metrics: MetricPair,
    /// Sorted, deduplicated ranks whose scores are averaged.
    pub n_set: Vec<usize>,
    /// A gap whose score exceeds this becomes a boundary.
    pub threshold: f64,
    /// Model compression applied before tokenizing; 0 disables it.
    pub compression: f64,
}

impl TokenizerConfig {
    pub fn new(metrics: MetricPair, mut n_set: Vec<usize>, threshold: f64, compression: f64) -> Result<Self> {
        n_set.sort_unstable();
        n_set.dedup();
        if n_set.is_empty() {
            return Err(Error::EmptyRankSet);
        }
        if n_set[0] == 0 {
            return Err(Error::RankOutOfRange { n: 0, max_n: usize::MAX });
        }
        if !(threshold >= 0.0 && threshold.is_finite()) {
            return Err(Error::InvalidThreshold { name: "tokenization", value: threshold });
        }
        if !(0.0..=1.0).contains(&compression) {
            return Err(Error::InvalidThreshold { name: "compression", value: compression });
        }
        Ok(TokenizerConfig { metrics, n_set, threshold, compression })
    }
}

/// Cuts `line` at every gap whose score is strictly above `threshold`.
pub fn split_at_scores(line: &str, scores: &[f64], threshold: f64) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut start = 0;
    for (i, c) in line.chars().enumerate() {
        current.push(c);
        if scores.get(i).is_some_and(|&s| s > threshold) {
            tokens.push(Token { text: core::mem::take(&mut current), start });
            start = i + 1;
        }
    }
    if !current.is_empty() {
        tokens.push(Token { text: current, start });
    }
    tokens
}

/// Unsupervised tokenizer thresholding [`boundary_scores`].
#[derive(Clone, Debug)]
pub struct FreedomTokenizer<'a> {
    model: Cow<'a, NGramModel>,
    config: TokenizerConfig,
}

impl<'a> FreedomTokenizer<'a> {
    /// Checks the ranks against the model and applies `config.compression` to a
    /// private copy when it is positive.
    pub fn new(model: &'a NGramModel, config: TokenizerConfig) -> Result<Self> {
        for &n in &config.n_set {
            model.rank(n)?;
        }
        let model = if config.compression > 0.0 {
            Cow::Owned(model.compress(config.compression)?)
        } else {
            Cow::Borrowed(model)
        };
        Ok(FreedomTokenizer { model, config })
    }

    pub fn config(&self) -> &TokenizerConfig {
        &self.config
    }

    pub fn model(&self) -> &NGramModel {
        &self.model
    }

    pub fn scores(&self, line: &str) -> Vec<f64> {
        boundary_scores(&self.model, line, &self.config).expect("ranks are validated at construction")
    }
}

impl Tokenizer for FreedomTokenizer<'_> {
    fn tokenize(&self, line: &str) -> Vec<Token> {
        split_at_scores(line, &self.scores(line), self.config.threshold)
    }
}

/// One-shot freedom tokenization; prefer [`FreedomTokenizer`] for many lines.
pub fn freedom_tokenize(model: &NGramModel, line: &str, config: &TokenizerConfig) -> Result<Vec<Token>> {
    Ok(FreedomTokenizer::new(model, config.clone())?.tokenize(line))
}

/// Every delimiter is its own token; runs of other characters are words.
pub fn delimiter_tokenize(line: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut word = String::new();
    let mut word_start = 0;
    for (i, c) in line.chars().enumerate() {
        if is_delimiter(c) {
            if !word.is_empty() {
                tokens.push(Token { text: core::mem::take(&mut word), start: word_start });
            }
            tokens.push(Token { text: c.into(), start: i });
        } else {
            if word.is_empty() {
                word_start = i;
            }
            word.push(c);
        }
    }
    if !word.is_empty() {
        tokens.push(Token { text: word, start: word_start });
    }
    tokens
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DelimiterTokenizer;

impl Tokenizer for DelimiterTokenizer {
    fn tokenize(&self, line: &str) -> Vec<Token> {
        delimiter_tokenize(line)
    }
}

/// Key that the greedy lexicon search maximizes at each position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SortMode {
    #[default]
    Length,
    Frequency,
    /// Length times `ln(1 + frequency)`.
    Gamma,
}

impl FromStr for SortMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "length" | "0" => Ok(SortMode::Length),
            "frequency" | "1" => Ok(SortMode::Frequency),
            "gamma" | "2" => Ok(SortMode::Gamma),
            other => Err(Error::InvalidGrid(alloc::format!("unknown sort mode {other:?}"))),
        }
    }
}

impl fmt::Display for SortMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SortMode::Length => "length",
            SortMode::Frequency => "frequency",
            SortMode::Gamma => "gamma",
        })
    }
}

fn sort_key(mode: SortMode, len: usize, freq: u64) -> f64 {
    match mode {
        SortMode::Length => len as f64,
        SortMode::Frequency => freq as f64,
        SortMode::Gamma => len as f64 * libm::log1p(freq as f64),
    }
}

/// Greedy left-to-right search over an already prepared (folded if uncased)
/// lexicon. `match_chars` must be `line`'s characters, possibly lowercased.
fn greedy(lexicon: &Lexicon, line: &str, match_chars: &[char], mode: SortMode) -> Vec<Token> {
    let chars: Vec<char> = line.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let mut best: Option<(f64, usize)> = None;
        for (len, freq) in lexicon.prefixes(&match_chars[i..]) {
            let key = sort_key(mode, len, freq);
            // candidates arrive shortest first, so ">=" prefers the longer entry on ties
            if best.is_none_or(|(k, _)| key >= k) {
                best = Some((key, len));
            }
        }
        let len = best.map_or(1, |(_, len)| len);
        tokens.push(Token { text: chars[i..i + len].iter().collect(), start: i });
        i += len;
    }
    tokens
}

/// Greedy lexicon tokenization. Positions with no matching entry emit a single
/// character. With `cased == false` matching is case-insensitive but tokens keep
/// the original text.
pub fn lexicon_tokenize(lexicon: &Lexicon, line: &str, sortmode: SortMode, cased: bool) -> Vec<Token> {
    if cased {
        let chars: Vec<char> = line.chars().collect();
        greedy(lexicon, line, &chars, sortmode)
    } else {
        LexiconTokenizer::new(lexicon.clone(), sortmode, false).tokenize(line)
    }
}

#[derive(Clone, Debug)]
pub struct LexiconTokenizer {
    lexicon: Lexicon,
    sortmode: SortMode,
    cased: bool,
}

impl LexiconTokenizer {
    pub fn new(lexicon: Lexicon, sortmode: SortMode, cased: bool) -> Self {
        let lexicon = if cased { lexicon } else { lexicon.folded() };
        LexiconTokenizer { lexicon, sortmode, cased }
    }
}

impl Tokenizer for LexiconTokenizer {
    fn tokenize(&self, line: &str) -> Vec<Token> {
        let chars: Vec<char> = if self.cased {
            line.chars().collect()
        } else {
            line.chars().map(simple_lowercase_char).collect()
        };
        greedy(&self.lexicon, line, &chars, self.sortmode)
    }
}

/// Externally produced tokenizations of a fixed list of lines.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Pretokenized {
    lines: Vec<Vec<Token>>,
}

impl Pretokenized {
    /// Binds token records to `lines`, checking that each record concatenates
    /// to its line.
    pub fn new<S: AsRef<str>>(records: Vec<Vec<String>>, lines: &[S]) -> Result<Self> {
        if records.len() != lines.len() {
            let line = records.len().min(lines.len()) + 1;
            return Err(Error::CoverageMismatch { line });
        }
        let mut out = Vec::with_capacity(records.len());
        for (i, (record, line)) in records.into_iter().zip(lines).enumerate() {
            if record.concat() != line.as_ref() {
                return Err(Error::CoverageMismatch { line: i + 1 });
            }
            let mut start = 0;
            let tokens = record
                .into_iter()
                .filter(|t| !t.is_empty())
                .map(|text| {
                    let t = Token { start, text };
                    start += t.text.chars().count();
                    t
                })
                .collect();
            out.push(tokens);
        }
        Ok(Pretokenized { lines: out })
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&[Token]> {
        self.lines.get(index).map(Vec::as_slice)
    }
}

impl Tokenizer for Pretokenized {
    /// Without an index the line is returned as a single token.
    fn tokenize(&self, line: &str) -> Vec<Token> {
        if line.is_empty() {
            Vec::new()
        } else {
            alloc::vec![Token::new(line, 0)]
        }
    }

    fn tokenize_at(&self, index: usize, line: &str) -> Vec<Token> {
        match self.lines.get(index) {
            Some(tokens) => tokens.clone(),
            None => self.tokenize(line),
        }
    }
}
