//! N-gram transition model: gram counts plus forward and backward transition
//! counts per rank, i.e. a bidirected graph weighted on vertices and edges.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::text::char_boundaries;
use crate::{Error, Result};

/// Occurrence counts keyed by gram or transition unit.
pub type Counts = BTreeMap<String, u64>;

/// What a transition points to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    /// N-gram to the single adjacent symbol.
    #[default]
    Chars,
    /// N-gram to the adjacent non-overlapping N-gram of the same rank.
    Grams,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Chars => "chars",
            Mode::Grams => "grams",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chars" => Ok(Mode::Chars),
            "grams" => Ok(Mode::Grams),
            other => Err(Error::ModelMismatch {
                expected: "chars or grams".into(),
                found: other.into(),
            }),
        }
    }
}

/// Traversal direction along the text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> char {
        match self {
            Direction::Forward => '+',
            Direction::Backward => '-',
        }
    }
}

/// Counts for a single rank `n`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Rank {
    grams: Counts,
    forward: BTreeMap<String, Counts>,
    backward: BTreeMap<String, Counts>,
}

impl Rank {
    pub fn grams(&self) -> &Counts {
        &self.grams
    }

    pub fn transitions(&self, direction: Direction) -> &BTreeMap<String, Counts> {
        match direction {
            Direction::Forward => &self.forward,
            Direction::Backward => &self.backward,
        }
    }

    fn transitions_mut(&mut self, direction: Direction) -> &mut BTreeMap<String, Counts> {
        match direction {
            Direction::Forward => &mut self.forward,
            Direction::Backward => &mut self.backward,
        }
    }

    /// Sum of all gram counts at this rank.
    pub fn total(&self) -> u64 {
        self.grams.values().sum()
    }

    fn count_params(&self) -> u64 {
        let nested = |m: &BTreeMap<String, Counts>| m.values().map(|t| t.len() as u64).sum::<u64>();
        self.grams.len() as u64 + nested(&self.forward) + nested(&self.backward)
    }
}

fn bump(map: &mut Counts, key: &str, by: u64) {
    match map.get_mut(key) {
        Some(c) => *c += by,
        None => {
            map.insert(key.to_owned(), by);
        }
    }
}

fn bump_nested(map: &mut BTreeMap<String, Counts>, key: &str, unit: &str, by: u64) {
    match map.get_mut(key) {
        Some(inner) => bump(inner, unit, by),
        None => {
            let mut inner = Counts::new();
            inner.insert(unit.to_owned(), by);
            map.insert(key.to_owned(), inner);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NGramModel {
    mode: Mode,
    max_n: usize,
    ranks: Vec<Rank>,
}

impl NGramModel {
    pub fn new(mode: Mode, max_n: usize) -> Result<Self> {
        if max_n == 0 {
            return Err(Error::InvalidMaxN(max_n));
        }
        Ok(NGramModel { mode, max_n, ranks: (0..max_n).map(|_| Rank::default()).collect() })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    pub fn rank(&self, n: usize) -> Result<&Rank> {
        self.check_rank(n)?;
        Ok(&self.ranks[n - 1])
    }

    /// `(n, rank)` pairs for `n` in `1..=max_n`.
    pub fn ranks(&self) -> impl Iterator<Item = (usize, &Rank)> {
        self.ranks.iter().enumerate().map(|(i, r)| (i + 1, r))
    }

    fn check_rank(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.max_n {
            Err(Error::RankOutOfRange { n, max_n: self.max_n })
        } else {
            Ok(())
        }
    }

    /// Count of `gram` at rank `gram.chars().count()`, 0 if unseen or out of range.
    pub fn gram_count(&self, gram: &str) -> u64 {
        let n = gram.chars().count();
        self.rank(n).ok().and_then(|r| r.grams.get(gram)).copied().unwrap_or(0)
    }

    /// Transition map of `gram` in `direction`, if any was recorded.
    pub fn transitions(&self, gram: &str, direction: Direction) -> Option<&Counts> {
        let n = gram.chars().count();
        self.rank(n).ok().and_then(|r| r.transitions(direction).get(gram))
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.iter().all(|r| r.grams.is_empty())
    }

    /// Adds `count` occurrences of `gram` at rank `n`.
    pub fn add_gram(&mut self, n: usize, gram: &str, count: u64) -> Result<()> {
        self.check_rank(n)?;
        if count > 0 {
            bump(&mut self.ranks[n - 1].grams, gram, count);
        }
        Ok(())
    }

    /// Adds `count` transitions from `gram` (rank `n`) to `unit` in `direction`.
    pub fn add_transition(
        &mut self,
        n: usize,
        direction: Direction,
        gram: &str,
        unit: &str,
        count: u64,
    ) -> Result<()> {
        self.check_rank(n)?;
        if count > 0 {
            bump_nested(self.ranks[n - 1].transitions_mut(direction), gram, unit, count);
        }
        Ok(())
    }

    /// Counts one line. Transitions never cross the line's ends.
    pub fn train_line(&mut self, line: &str) {
        let bounds = char_boundaries(line);
        let len = bounds.len() - 1;
        let unit_len = |n: usize| match self.mode {
            Mode::Chars => 1,
            Mode::Grams => n,
        };
        for n in 1..=self.max_n.min(len) {
            let step = unit_len(n);
            let rank = &mut self.ranks[n - 1];
            for i in 0..=len - n {
                let gram = &line[bounds[i]..bounds[i + n]];
                bump(&mut rank.grams, gram, 1);
                let next = i + n;
                if next + step <= len {
                    bump_nested(&mut rank.forward, gram, &line[bounds[next]..bounds[next + step]], 1);
                }
                if i >= step {
                    bump_nested(&mut rank.backward, gram, &line[bounds[i - step]..bounds[i]], 1);
                }
            }
        }
    }

    pub fn train<I, S>(&mut self, lines: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        for line in lines {
            self.train_line(line.as_ref());
        }
    }

    fn check_compatible(&self, other: &NGramModel) -> Result<()> {
        if self.mode != other.mode || self.max_n != other.max_n {
            return Err(Error::ModelMismatch {
                expected: format!("{} {}", self.mode, self.max_n),
                found: format!("{} {}", other.mode, other.max_n),
            });
        }
        Ok(())
    }

    /// Adds every count of `other` into `self`.
    pub fn merge(&mut self, other: &NGramModel) -> Result<()> {
        self.check_compatible(other)?;
        for (mine, theirs) in self.ranks.iter_mut().zip(&other.ranks) {
            for (g, &c) in &theirs.grams {
                bump(&mut mine.grams, g, c);
            }
            for dir in [Direction::Forward, Direction::Backward] {
                let target = mine.transitions_mut(dir);
                for (g, units) in theirs.transitions(dir) {
                    for (u, &c) in units {
                        bump_nested(target, g, u, c);
                    }
                }
            }
        }
        Ok(())
    }

    /// Consuming variant of [`merge`](Self::merge).
    pub fn merged(mut self, other: &NGramModel) -> Result<Self> {
        self.merge(other)?;
        Ok(self)
    }

    /// One pruning pass relative to local maxima.
    ///
    /// Grams whose count is below `threshold` times the largest count of their rank
    /// are dropped together with their transition maps. Then, for every surviving
    /// gram and direction, transitions below `threshold` times the largest count in
    /// that gram's map are dropped.
    pub fn compress(&self, threshold: f64) -> Result<NGramModel> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::InvalidThreshold { name: "compression", value: threshold });
        }
        let mut out = self.clone();
        if threshold == 0.0 {
            return Ok(out);
        }
        for rank in &mut out.ranks {
            let max = rank.grams.values().copied().max().unwrap_or(0);
            let cutoff = threshold * max as f64;
            rank.grams.retain(|_, c| *c as f64 >= cutoff);
            let Rank { grams, forward, backward } = rank;
            for map in [forward, backward] {
                map.retain(|g, _| grams.contains_key(g));
                for units in map.values_mut() {
                    let local_max = units.values().copied().max().unwrap_or(0);
                    let local_cutoff = threshold * local_max as f64;
                    units.retain(|_, c| *c as f64 >= local_cutoff);
                }
            }
        }
        Ok(out)
    }

    /// Number of stored weights: gram counts plus forward and backward transition counts.
    pub fn count_params(&self) -> u64 {
        self.ranks.iter().map(Rank::count_params).sum()
    }

    /// Rough heap footprint, used for memory guardrails while training.
    pub fn estimated_bytes(&self) -> u64 {
        const ENTRY_OVERHEAD: u64 = 56;
        let counts = |m: &Counts| m.keys().map(|k| k.len() as u64 + ENTRY_OVERHEAD).sum::<u64>();
        self.ranks
            .iter()
            .map(|r| {
                let nested = |m: &BTreeMap<String, Counts>| {
                    m.iter().map(|(k, v)| k.len() as u64 + ENTRY_OVERHEAD + counts(v)).sum::<u64>()
                };
                counts(&r.grams) + nested(&r.forward) + nested(&r.backward)
            })
            .sum()
    }
}
