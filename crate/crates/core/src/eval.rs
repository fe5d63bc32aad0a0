//! Scoring tokenizers against a reference and searching hyperparameter grids.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::lexicon::Lexicon;
use crate::metrics::{boundary_scores, MetricPair};
use crate::model::NGramModel;
use crate::text::{simple_lowercase, strip_spaces};
use crate::tokenize::{split_at_scores, Token, Tokenizer, TokenizerConfig};
use crate::{Error, Result};

/// Token multiset.
pub type TokenBag = BTreeMap<String, u64>;

pub fn bag<'a, I: IntoIterator<Item = &'a Token>>(tokens: I) -> TokenBag {
    let mut out = TokenBag::new();
    for t in tokens {
        add_token(&mut out, &t.text, 1);
    }
    out
}

fn add_token(bag: &mut TokenBag, text: &str, count: u64) {
    match bag.get_mut(text) {
        Some(c) => *c += count,
        None => {
            bag.insert(text.into(), count);
        }
    }
}

fn merge_into(target: &mut TokenBag, other: &TokenBag) {
    for (k, &v) in other {
        add_token(target, k, v);
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision, recall and F1 over token multisets; each occurrence counts.
pub fn f1_tokens(expected: &TokenBag, actual: &TokenBag) -> Prf {
    let overlap: u64 = expected
        .iter()
        .filter_map(|(k, &e)| actual.get(k).map(|&a| e.min(a)))
        .sum();
    let precision = ratio(overlap, actual.values().sum());
    let recall = ratio(overlap, expected.values().sum());
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Prf { precision, recall, f1 }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalResult {
    pub per_text: Vec<Prf>,
    /// Unweighted mean of per-text F1.
    pub mean_f1: f64,
    /// Reference tokens over all texts.
    pub expected_tokens: TokenBag,
    /// Candidate tokens over all texts.
    pub actual_tokens: TokenBag,
}

pub fn evaluate<S, R, C>(texts: &[S], reference: &R, candidate: &C) -> EvalResult
where
    S: AsRef<str>,
    R: Tokenizer + ?Sized,
    C: Tokenizer + ?Sized,
{
    let mut result = EvalResult::default();
    for (i, text) in texts.iter().enumerate() {
        let text = text.as_ref();
        let expected = bag(&reference.tokenize_at(i, text));
        let actual = bag(&candidate.tokenize_at(i, text));
        result.per_text.push(f1_tokens(&expected, &actual));
        merge_into(&mut result.expected_tokens, &expected);
        merge_into(&mut result.actual_tokens, &actual);
    }
    result.mean_f1 = mean(result.per_text.iter().map(|p| p.f1));
    result
}

/// Evaluation on text with whitespace removed. The reference tokenizes the
/// original line and its whitespace tokens are dropped; the candidate sees the
/// stripped line.
pub fn evaluate_spaceless<S, R, C>(texts: &[S], reference: &R, candidate: &C) -> EvalResult
where
    S: AsRef<str>,
    R: Tokenizer + ?Sized,
    C: Tokenizer + ?Sized,
{
    let mut result = EvalResult::default();
    for (i, text) in texts.iter().enumerate() {
        let text = text.as_ref();
        let reference_tokens = reference.tokenize_at(i, text);
        let expected = bag(reference_tokens.iter().filter(|t| !t.text.chars().all(char::is_whitespace)));
        let stripped = strip_spaces(text);
        let actual = bag(&candidate.tokenize_at(i, &stripped));
        result.per_text.push(f1_tokens(&expected, &actual));
        merge_into(&mut result.expected_tokens, &expected);
        merge_into(&mut result.actual_tokens, &actual);
    }
    result.mean_f1 = mean(result.per_text.iter().map(|p| p.f1));
    result
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    if n == 0 {
        0.0
    } else {
        values.sum::<f64>() / n as f64
    }
}

/// Token counts split by lexicon membership.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LexiconHits {
    pub total: u64,
    pub relevant: u64,
    pub irrelevant: u64,
}

impl LexiconHits {
    pub fn precision(&self) -> f64 {
        ratio(self.relevant, self.total)
    }
}

/// Counts tokens whose lowercased text is a lexicon entry.
pub fn lexicon_hits(tokens: &TokenBag, lexicon: &Lexicon) -> Result<LexiconHits> {
    let total: u64 = tokens.values().sum();
    if total == 0 {
        return Err(Error::EmptyTokens);
    }
    let relevant = tokens
        .iter()
        .filter(|(k, _)| lexicon.contains(&simple_lowercase(k)))
        .map(|(_, &c)| c)
        .sum();
    Ok(LexiconHits { total, relevant, irrelevant: total - relevant })
}

/// Share of token occurrences found in `lexicon` (case-insensitive on the token side).
pub fn lexicon_precision(tokens: &TokenBag, lexicon: &Lexicon) -> Result<f64> {
    lexicon_hits(tokens, lexicon).map(|h| h.precision())
}

/// Hyperparameter grid over metric pairs, rank sets, compression and
/// tokenization thresholds.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub metric_pairs: Vec<MetricPair>,
    pub n_sets: Vec<Vec<usize>>,
    pub compressions: Vec<f64>,
    pub thresholds: Vec<f64>,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidGrid(msg.into()));
        if self.metric_pairs.is_empty() {
            return fail("no metric pairs");
        }
        if self.n_sets.is_empty() || self.n_sets.iter().any(Vec::is_empty) {
            return fail("empty rank set list or empty rank set");
        }
        for (name, list) in [("compressions", &self.compressions), ("thresholds", &self.thresholds)] {
            if list.is_empty() {
                return Err(Error::InvalidGrid(alloc::format!("no {name}")));
            }
            if list.windows(2).any(|w| w[0].partial_cmp(&w[1]).is_none_or(|o| o.is_gt())) {
                return Err(Error::InvalidGrid(alloc::format!("{name} must be sorted ascending")));
            }
        }
        if self.compressions.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return fail("compression thresholds must lie in [0, 1]");
        }
        if self.thresholds.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return fail("tokenization thresholds must be non-negative");
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.metric_pairs.len() * self.n_sets.len() * self.compressions.len() * self.thresholds.len()
    }

    /// `(compression index, metric pair, rank set)` in evaluation order; each group
    /// covers every tokenization threshold.
    pub fn groups(&self) -> Vec<(usize, MetricPair, Vec<usize>)> {
        let mut out = Vec::new();
        for ci in 0..self.compressions.len() {
            for &pair in &self.metric_pairs {
                for n_set in &self.n_sets {
                    out.push((ci, pair, n_set.clone()));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridRow {
    pub metrics: MetricPair,
    pub n_set: Vec<usize>,
    pub compression: f64,
    pub threshold: f64,
    pub mean_f1: f64,
}

/// A grid cell that could not be evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct MissingCell {
    pub metrics: MetricPair,
    pub n_set: Vec<usize>,
    pub compression: f64,
    pub threshold: f64,
    pub reason: Error,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GridReport {
    pub rows: Vec<GridRow>,
    pub missing: Vec<MissingCell>,
    /// Parameter count of the model at each compression level.
    pub params: Vec<(f64, u64)>,
}

impl GridReport {
    /// Highest mean F1; the earliest row wins ties.
    pub fn best(&self) -> Option<&GridRow> {
        self.rows.iter().fold(None, |best: Option<&GridRow>, row| match best {
            Some(b) if b.mean_f1 >= row.mean_f1 => Some(b),
            _ => Some(row),
        })
    }

    /// Best row restricted by a predicate.
    pub fn best_where(&self, pred: impl Fn(&GridRow) -> bool) -> Option<&GridRow> {
        self.rows.iter().filter(|r| pred(r)).fold(None, |best: Option<&GridRow>, row| match best {
            Some(b) if b.mean_f1 >= row.mean_f1 => Some(b),
            _ => Some(row),
        })
    }

    /// Appends the outcome of one group, as produced by [`evaluate_group`].
    pub fn push_group(
        &mut self,
        grid: &GridSpec,
        compression: f64,
        metrics: MetricPair,
        n_set: &[usize],
        outcome: Result<Vec<f64>>,
    ) {
        match outcome {
            Ok(scores) => {
                for (&threshold, mean_f1) in grid.thresholds.iter().zip(scores) {
                    self.rows.push(GridRow { metrics, n_set: n_set.to_vec(), compression, threshold, mean_f1 });
                }
            }
            Err(reason) => {
                for &threshold in &grid.thresholds {
                    self.missing.push(MissingCell {
                        metrics,
                        n_set: n_set.to_vec(),
                        compression,
                        threshold,
                        reason: reason.clone(),
                    });
                }
            }
        }
    }
}

/// One model per compression level: each compressed from a fresh copy, or, with
/// `cumulative`, from the previous level's result.
pub fn compression_levels(model: &NGramModel, compressions: &[f64], cumulative: bool) -> Result<Vec<NGramModel>> {
    let mut out: Vec<NGramModel> = Vec::with_capacity(compressions.len());
    for &c in compressions {
        let source = match out.last() {
            Some(prev) if cumulative => prev,
            _ => model,
        };
        out.push(source.compress(c)?);
    }
    Ok(out)
}

/// Reference token multiset of every text.
pub fn reference_bags<S: AsRef<str>, R: Tokenizer + ?Sized>(texts: &[S], reference: &R) -> Vec<TokenBag> {
    texts.iter().enumerate().map(|(i, t)| bag(&reference.tokenize_at(i, t.as_ref()))).collect()
}

/// Mean F1 for every threshold with one metric pair and rank set on an already
/// compressed model. Boundary scores are computed once per text.
pub fn evaluate_group<S: AsRef<str>>(
    model: &NGramModel,
    texts: &[S],
    references: &[TokenBag],
    metrics: MetricPair,
    n_set: &[usize],
    thresholds: &[f64],
) -> Result<Vec<f64>> {
    let config = TokenizerConfig::new(metrics, n_set.to_vec(), 0.0, 0.0)?;
    for &n in &config.n_set {
        model.rank(n)?;
    }
    let mut sums = alloc::vec![0.0; thresholds.len()];
    for (text, expected) in texts.iter().zip(references) {
        let text = text.as_ref();
        let scores = boundary_scores(model, text, &config)?;
        for (sum, &t) in sums.iter_mut().zip(thresholds) {
            let actual = bag(&split_at_scores(text, &scores, t));
            *sum += f1_tokens(expected, &actual).f1;
        }
    }
    let n = texts.len().max(1) as f64;
    Ok(sums.into_iter().map(|s| if texts.is_empty() { 0.0 } else { s / n }).collect())
}

/// Sequential grid search. Rows come ordered by compression, metric pair, rank
/// set and threshold, following the order given in `grid`.
pub fn grid_search<S, R>(
    model: &NGramModel,
    texts: &[S],
    reference: &R,
    grid: &GridSpec,
    cumulative: bool,
) -> Result<GridReport>
where
    S: AsRef<str>,
    R: Tokenizer + ?Sized,
{
    grid.validate()?;
    let models = compression_levels(model, &grid.compressions, cumulative)?;
    let references = reference_bags(texts, reference);
    let mut report = GridReport {
        params: grid.compressions.iter().zip(&models).map(|(&c, m)| (c, m.count_params())).collect(),
        ..GridReport::default()
    };
    for (ci, pair, n_set) in grid.groups() {
        let outcome = evaluate_group(&models[ci], texts, &references, pair, &n_set, &grid.thresholds);
        report.push_group(grid, grid.compressions[ci], pair, &n_set, outcome);
    }
    Ok(report)
}
