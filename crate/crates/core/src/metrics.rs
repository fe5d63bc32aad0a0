//! Per-position metric profiles over a line and the boundary scores derived
//! from them.
//!
//! Base metrics, evaluated for the rank-`n` gram at each position:
//!
//! * transition freedom: number of distinct units seen after (forward) or
//!   before (backward) the gram;
//! * conditional probability of the unit actually adjacent in the line;
//! * unconditional gram probability within its rank.
//!
//! Profiles are max-abs normalized per line, optionally transformed
//! (derivative, variance around the line mean, peak), and normalized again so
//! that one threshold scale applies to every metric kind.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use crate::model::Direction;
use crate::model::{Mode, NGramModel};
use crate::text::char_boundaries;
use crate::tokenize::TokenizerConfig;
use crate::{Error, Result};

pub const VALID_MNEMONICS: &str =
    "f+ f- df+ df- dvf+ dvf- peak+ peak- p+ p- dp+ dp- dvp+ dvp- peakp+ peakp- gp+ gp- dgp+ dgp- dvgp+ dvgp-";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Base {
    /// Gram probability within its rank (`gp`).
    Probability,
    /// Probability of the adjacent unit given the gram (`p`).
    ConditionalProbability,
    /// Number of distinct adjacent units (`f`).
    Freedom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Transform {
    None,
    Derivative,
    Variance,
    Peak,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MetricKind {
    pub base: Base,
    pub transform: Transform,
    pub direction: Direction,
}

impl MetricKind {
    pub fn new(base: Base, transform: Transform, direction: Direction) -> Result<Self> {
        let kind = MetricKind { base, transform, direction };
        if base == Base::Probability && transform == Transform::Peak {
            return Err(Error::UnknownMetric(kind.mnemonic()));
        }
        Ok(kind)
    }

    /// Command-line name, e.g. `dvf+`.
    pub fn mnemonic(self) -> String {
        let letter = match self.base {
            Base::Probability => "gp",
            Base::ConditionalProbability => "p",
            Base::Freedom => "f",
        };
        let stem = match (self.transform, self.base) {
            (Transform::Peak, Base::Freedom) => String::from("peak"),
            (Transform::Peak, _) => alloc::format!("peak{letter}"),
            (Transform::None, _) => String::from(letter),
            (Transform::Derivative, _) => alloc::format!("d{letter}"),
            (Transform::Variance, _) => alloc::format!("dv{letter}"),
        };
        alloc::format!("{stem}{}", self.direction.sign())
    }

    /// Mnemonic without the direction sign, e.g. `dvf`.
    pub fn family(self) -> String {
        let mut m = self.mnemonic();
        m.pop();
        m
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.mnemonic())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownMetric(s.into());
        let (stem, direction) = if let Some(stem) = s.strip_suffix('+') {
            (stem, Direction::Forward)
        } else if let Some(stem) = s.strip_suffix('-') {
            (stem, Direction::Backward)
        } else {
            return Err(unknown());
        };
        let (base, transform) = match stem {
            "f" => (Base::Freedom, Transform::None),
            "df" => (Base::Freedom, Transform::Derivative),
            "dvf" => (Base::Freedom, Transform::Variance),
            "peak" => (Base::Freedom, Transform::Peak),
            "p" => (Base::ConditionalProbability, Transform::None),
            "dp" => (Base::ConditionalProbability, Transform::Derivative),
            "dvp" => (Base::ConditionalProbability, Transform::Variance),
            "peakp" => (Base::ConditionalProbability, Transform::Peak),
            "gp" => (Base::Probability, Transform::None),
            "dgp" => (Base::Probability, Transform::Derivative),
            "dvgp" => (Base::Probability, Transform::Variance),
            _ => return Err(unknown()),
        };
        MetricKind::new(base, transform, direction)
    }
}

/// One backward and one forward metric, combined with "max" at each gap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MetricPair {
    pub backward: MetricKind,
    pub forward: MetricKind,
}

impl MetricPair {
    pub fn new(backward: MetricKind, forward: MetricKind) -> Result<Self> {
        if backward.direction != Direction::Backward || forward.direction != Direction::Forward {
            return Err(Error::InvalidMetricPair(alloc::format!("{backward},{forward}")));
        }
        Ok(MetricPair { backward, forward })
    }

    /// Short label: the shared family (`dvf`) or both mnemonics (`dvf-f+`).
    pub fn label(&self) -> String {
        let (b, f) = (self.backward.family(), self.forward.family());
        if b == f {
            b
        } else {
            alloc::format!("{}{}", self.backward, self.forward)
        }
    }
}

impl fmt::Display for MetricPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.backward, self.forward)
    }
}

impl FromStr for MetricPair {
    type Err = Error;

    /// Parses `dvf-,dvf+` (either order).
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [a, b] = parts.as_slice() else {
            return Err(Error::InvalidMetricPair(s.into()));
        };
        let (a, b): (MetricKind, MetricKind) = (a.parse()?, b.parse()?);
        match (a.direction, b.direction) {
            (Direction::Backward, Direction::Forward) => MetricPair::new(a, b),
            (Direction::Forward, Direction::Backward) => MetricPair::new(b, a),
            _ => Err(Error::InvalidMetricPair(s.into())),
        }
    }
}

/// Metric values, one per rank-`n` gram position of a line.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricProfile {
    pub values: Vec<f64>,
    pub n: usize,
    pub kind: MetricKind,
}

impl MetricProfile {
    fn with_values(&self, values: Vec<f64>) -> MetricProfile {
        MetricProfile { values, n: self.n, kind: self.kind }
    }

    pub fn normalized(&self) -> MetricProfile {
        self.with_values(normalize(&self.values))
    }

    pub fn derivative(&self) -> MetricProfile {
        self.with_values(derivative(&self.values, self.kind.direction))
    }

    pub fn variance(&self) -> MetricProfile {
        self.with_values(variance(&self.values))
    }

    pub fn peak(&self) -> MetricProfile {
        self.with_values(peak(&self.values, self.kind.direction))
    }

    pub fn transformed(&self) -> MetricProfile {
        match self.kind.transform {
            Transform::None => self.clone(),
            Transform::Derivative => self.derivative(),
            Transform::Variance => self.variance(),
            Transform::Peak => self.peak(),
        }
    }
}

/// Divides by the largest absolute value; all-zero input is returned unchanged.
pub fn normalize(values: &[f64]) -> Vec<f64> {
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return values.to_vec();
    }
    values.iter().map(|v| v / max).collect()
}

/// First differences in traversal order; the first visited position gets 0.
///
/// Forward: `d[i] = v[i] - v[i-1]`. Backward: `d[i] = v[i] - v[i+1]`.
pub fn derivative(values: &[f64], direction: Direction) -> Vec<f64> {
    let len = values.len();
    (0..len)
        .map(|i| match direction {
            Direction::Forward if i > 0 => values[i] - values[i - 1],
            Direction::Backward if i + 1 < len => values[i] - values[i + 1],
            _ => 0.0,
        })
        .collect()
}

/// Deviation of each value from the mean of the profile.
pub fn variance(values: &[f64]) -> Vec<f64> {
    if values.is_empty() {
        return Vec::new();
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| v - mean).collect()
}

/// Derivative at a position minus the derivative at the next position in
/// traversal order (taken as 0 past the end). At interior points this is
/// `2 v[i] - v[i-1] - v[i+1]` in either direction.
pub fn peak(values: &[f64], direction: Direction) -> Vec<f64> {
    let d = derivative(values, direction);
    let len = d.len();
    (0..len)
        .map(|i| {
            let next = match direction {
                Direction::Forward => d.get(i + 1).copied(),
                Direction::Backward => i.checked_sub(1).map(|j| d[j]),
            };
            d[i] - next.unwrap_or(0.0)
        })
        .collect()
}

/// Unnormalized base metric for every rank-`n` gram of `line`.
///
/// Unknown grams and transitions yield 0. A line shorter than `n` gives an
/// empty profile.
pub fn raw_profile(
    model: &NGramModel,
    line: &str,
    n: usize,
    base: Base,
    direction: Direction,
) -> Result<MetricProfile> {
    let rank = model.rank(n)?;
    let kind = MetricKind { base, transform: Transform::None, direction };
    let bounds = char_boundaries(line);
    let len = bounds.len() - 1;
    if len < n {
        return Ok(MetricProfile { values: Vec::new(), n, kind });
    }
    let step = match model.mode() {
        Mode::Chars => 1,
        Mode::Grams => n,
    };
    let total = if base == Base::Probability { rank.total() } else { 0 };
    let transitions = rank.transitions(direction);
    let values = (0..=len - n)
        .map(|i| {
            let gram = &line[bounds[i]..bounds[i + n]];
            match base {
                Base::Freedom => transitions.get(gram).map_or(0, |t| t.len()) as f64,
                Base::Probability => {
                    let c = rank.grams().get(gram).copied().unwrap_or(0);
                    if total == 0 {
                        0.0
                    } else {
                        c as f64 / total as f64
                    }
                }
                Base::ConditionalProbability => {
                    let unit = match direction {
                        Direction::Forward => {
                            (i + n + step <= len).then(|| &line[bounds[i + n]..bounds[i + n + step]])
                        }
                        Direction::Backward => (i >= step).then(|| &line[bounds[i - step]..bounds[i]]),
                    };
                    match (unit, transitions.get(gram)) {
                        (Some(u), Some(t)) => {
                            let sum: u64 = t.values().sum();
                            let c = t.get(u).copied().unwrap_or(0);
                            if sum == 0 {
                                0.0
                            } else {
                                c as f64 / sum as f64
                            }
                        }
                        _ => 0.0,
                    }
                }
            }
        })
        .collect();
    Ok(MetricProfile { values, n, kind })
}

/// Full per-kind pipeline: raw, normalize, transform, and normalize again when
/// a transform was applied.
pub fn profile(model: &NGramModel, line: &str, n: usize, kind: MetricKind) -> Result<MetricProfile> {
    let raw = raw_profile(model, line, n, kind.base, kind.direction)?;
    let mut p = MetricProfile { kind, ..raw }.normalized();
    if kind.transform != Transform::None {
        p = p.transformed().normalized();
    }
    Ok(p)
}

/// One score per gap between adjacent characters of `line`.
///
/// The gap after character `j` takes, at rank `n`, the forward value of the gram
/// ending at `j` and the backward value of the gram starting at `j + 1`. The two
/// directions combine by max, ranks by mean; missing values count as 0.
pub fn boundary_scores(model: &NGramModel, line: &str, config: &TokenizerConfig) -> Result<Vec<f64>> {
    if config.n_set.is_empty() {
        return Err(Error::EmptyRankSet);
    }
    for &n in &config.n_set {
        model.rank(n)?;
    }
    let len = line.chars().count();
    if len < 2 {
        return Ok(Vec::new());
    }
    let gaps = len - 1;
    let mut sums = vec![0.0; gaps];
    for &n in &config.n_set {
        let fwd = profile(model, line, n, config.metrics.forward)?;
        let bwd = profile(model, line, n, config.metrics.backward)?;
        for (j, sum) in sums.iter_mut().enumerate() {
            let f = (j + 1).checked_sub(n).and_then(|p| fwd.values.get(p)).copied().unwrap_or(0.0);
            let b = bwd.values.get(j + 1).copied().unwrap_or(0.0);
            *sum += f.max(b);
        }
    }
    let ranks = config.n_set.len() as f64;
    Ok(sums.into_iter().map(|s| s / ranks).collect())
}
