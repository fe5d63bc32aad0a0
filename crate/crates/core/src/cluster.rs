//! Agglomerative clustering of symbols by their rank-1 transition vectors.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;
use core::str::FromStr;

use crate::model::{Direction, NGramModel};
use crate::{Error, Result};

/// Forward and backward neighbor counts of one symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolVector {
    pub symbol: char,
    pub forward: BTreeMap<char, u64>,
    pub backward: BTreeMap<char, u64>,
}

impl SymbolVector {
    fn features(&self) -> impl Iterator<Item = ((Direction, char), u64)> + '_ {
        let f = self.forward.iter().map(|(&c, &n)| ((Direction::Forward, c), n));
        let b = self.backward.iter().map(|(&c, &n)| ((Direction::Backward, c), n));
        f.chain(b).filter(|&(_, n)| n > 0)
    }

    fn norm_sq(&self) -> f64 {
        self.features().map(|(_, n)| (n as f64) * (n as f64)).sum()
    }

    fn support_len(&self) -> usize {
        self.features().count()
    }
}

fn units_to_chars(units: Option<&BTreeMap<String, u64>>) -> BTreeMap<char, u64> {
    let mut out = BTreeMap::new();
    for (u, &c) in units.into_iter().flatten() {
        if let Some(ch) = u.chars().next() {
            *out.entry(ch).or_insert(0) += c;
        }
    }
    out
}

/// One vector per unigram seen at least `min_count` times and having at least
/// one transition.
pub fn symbol_vectors(model: &NGramModel, min_count: u64) -> Result<Vec<SymbolVector>> {
    let rank = model.rank(1)?;
    if rank.grams().is_empty() {
        return Err(Error::NoSymbols);
    }
    let fwd = rank.transitions(Direction::Forward);
    let bwd = rank.transitions(Direction::Backward);
    Ok(rank
        .grams()
        .iter()
        .filter(|&(_, &count)| count >= min_count)
        .filter_map(|(gram, _)| {
            let symbol = gram.chars().next()?;
            let v = SymbolVector {
                symbol,
                forward: units_to_chars(fwd.get(gram)),
                backward: units_to_chars(bwd.get(gram)),
            };
            (v.support_len() > 0).then_some(v)
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Similarity {
    Cosine,
    Jaccard,
}

impl FromStr for Similarity {
    type Err = String;

    fn from_str(s: &str) -> core::result::Result<Self, String> {
        match s {
            "cosine" => Ok(Similarity::Cosine),
            "jaccard" => Ok(Similarity::Jaccard),
            other => Err(alloc::format!("unknown similarity {other:?}; expected cosine or jaccard")),
        }
    }
}

impl Similarity {
    pub fn compute(self, u: &SymbolVector, v: &SymbolVector) -> Result<f64> {
        match self {
            Similarity::Cosine => cosine(u, v),
            Similarity::Jaccard => jaccard(u, v),
        }
    }
}

fn check_nonzero(v: &SymbolVector) -> Result<()> {
    if v.support_len() == 0 {
        Err(Error::ZeroVector(v.symbol))
    } else {
        Ok(())
    }
}

fn dot_side(a: &BTreeMap<char, u64>, b: &BTreeMap<char, u64>) -> f64 {
    a.iter().filter_map(|(k, &x)| b.get(k).map(|&y| x as f64 * y as f64)).sum()
}

/// Cosine of the angle between the concatenated forward/backward count vectors.
pub fn cosine(u: &SymbolVector, v: &SymbolVector) -> Result<f64> {
    check_nonzero(u)?;
    check_nonzero(v)?;
    let dot = dot_side(&u.forward, &v.forward) + dot_side(&u.backward, &v.backward);
    let c = dot / libm::sqrt(u.norm_sq() * v.norm_sq());
    Ok(c.min(1.0))
}

/// Jaccard index of the two supports (features with a nonzero count).
pub fn jaccard(u: &SymbolVector, v: &SymbolVector) -> Result<f64> {
    check_nonzero(u)?;
    check_nonzero(v)?;
    let side = |a: &BTreeMap<char, u64>, b: &BTreeMap<char, u64>| {
        a.iter().filter(|&(k, &x)| x > 0 && b.get(k).is_some_and(|&y| y > 0)).count()
    };
    let inter = side(&u.forward, &v.forward) + side(&u.backward, &v.backward);
    let union = u.support_len() + v.support_len() - inter;
    Ok(inter as f64 / union as f64)
}

/// Full pairwise similarity matrix in input order.
pub fn similarity_matrix(vectors: &[SymbolVector], similarity: Similarity) -> Result<Vec<Vec<f64>>> {
    let n = vectors.len();
    let mut m = alloc::vec![alloc::vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let s = similarity.compute(&vectors[i], &vectors[j])?;
            m[i][j] = s;
            m[j][i] = s;
        }
    }
    Ok(m)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Dendrogram {
    Leaf(char),
    Merge { left: Box<Dendrogram>, right: Box<Dendrogram>, similarity: f64 },
}

impl Dendrogram {
    pub fn leaves(&self) -> Vec<char> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<char>) {
        match self {
            Dendrogram::Leaf(c) => out.push(*c),
            Dendrogram::Merge { left, right, .. } => {
                left.collect_leaves(out);
                right.collect_leaves(out);
            }
        }
    }

    pub fn internal_nodes(&self) -> usize {
        match self {
            Dendrogram::Leaf(_) => 0,
            Dendrogram::Merge { left, right, .. } => 1 + left.internal_nodes() + right.internal_nodes(),
        }
    }

    pub fn similarity(&self) -> Option<f64> {
        match self {
            Dendrogram::Leaf(_) => None,
            Dendrogram::Merge { similarity, .. } => Some(*similarity),
        }
    }

    pub fn children(&self) -> Option<(&Dendrogram, &Dendrogram)> {
        match self {
            Dendrogram::Leaf(_) => None,
            Dendrogram::Merge { left, right, .. } => Some((left, right)),
        }
    }

    /// Newick text with merge similarities as internal node labels.
    pub fn to_newick(&self) -> String {
        let mut s = String::new();
        self.write_newick(&mut s);
        s.push(';');
        s
    }

    fn write_newick(&self, out: &mut String) {
        match self {
            Dendrogram::Leaf(c) => push_label(out, *c),
            Dendrogram::Merge { left, right, similarity } => {
                out.push('(');
                left.write_newick(out);
                out.push(',');
                right.write_newick(out);
                out.push(')');
                out.push_str(&format_similarity(*similarity));
            }
        }
    }
}

fn push_label(out: &mut String, c: char) {
    let special = c.is_whitespace() || c.is_control() || "()[]':;,".contains(c);
    if special {
        out.push('\'');
        if c == '\'' {
            out.push('\'');
        }
        out.push(c);
        out.push('\'');
    } else {
        out.push(c);
    }
}

/// Up to six decimals, trailing zeros removed.
pub fn format_similarity(x: f64) -> String {
    let mut s = String::new();
    let _ = write!(s, "{x:.6}");
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.pop();
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

struct Cluster {
    tree: Dendrogram,
    size: usize,
    min_leaf: char,
}

/// Average-linkage agglomeration. The most similar pair merges first; ties go
/// to the pair with the lexicographically smallest leaves.
pub fn agglomerate(vectors: &[SymbolVector], similarity: Similarity) -> Result<Dendrogram> {
    if vectors.len() < 2 {
        return Err(Error::TooFewVectors(vectors.len()));
    }
    let mut sim = similarity_matrix(vectors, similarity)?;
    let mut clusters: Vec<Option<Cluster>> = vectors
        .iter()
        .map(|v| Some(Cluster { tree: Dendrogram::Leaf(v.symbol), size: 1, min_leaf: v.symbol }))
        .collect();
    let mut last = f64::INFINITY;
    for _ in 1..vectors.len() {
        let mut best: Option<(f64, (char, char), usize, usize)> = None;
        for i in 0..clusters.len() {
            let Some(ci) = &clusters[i] else { continue };
            for j in i + 1..clusters.len() {
                let Some(cj) = &clusters[j] else { continue };
                let s = sim[i][j];
                let key = if ci.min_leaf <= cj.min_leaf {
                    (ci.min_leaf, cj.min_leaf)
                } else {
                    (cj.min_leaf, ci.min_leaf)
                };
                let better = match &best {
                    None => true,
                    Some((bs, bk, _, _)) => s > *bs || (s == *bs && key < *bk),
                };
                if better {
                    best = Some((s, key, i, j));
                }
            }
        }
        let (s, _, i, j) = best.expect("at least two active clusters");
        debug_assert!(s <= last + 1e-9, "average linkage must be monotone: {s} after {last}");
        last = s;
        let a = clusters[i].take().expect("active");
        let b = clusters[j].take().expect("active");
        let (wa, wb) = (a.size as f64, b.size as f64);
        for k in 0..clusters.len() {
            if clusters[k].is_some() {
                let merged = (wa * sim[i][k] + wb * sim[j][k]) / (wa + wb);
                sim[i][k] = merged;
                sim[k][i] = merged;
            }
        }
        let (first, second) = if a.min_leaf <= b.min_leaf { (a, b) } else { (b, a) };
        clusters[i] = Some(Cluster {
            min_leaf: first.min_leaf,
            size: first.size + second.size,
            tree: Dendrogram::Merge { left: Box::new(first.tree), right: Box::new(second.tree), similarity: s },
        });
    }
    Ok(clusters.into_iter().flatten().next().expect("one cluster remains").tree)
}
