//! Shared fixtures for the integration and acceptance tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const PUNCTUATION: [char; 4] = ['.', ',', '!', '?'];

/// A random artificial language: a vocabulary, a training corpus and held-out lines.
pub struct Synthetic {
    pub vocabulary: Vec<String>,
    pub train: Vec<String>,
    pub test: Vec<String>,
    /// Word occurrences in the training corpus.
    pub word_counts: BTreeMap<String, u64>,
}

const LETTERS: std::ops::RangeInclusive<u8> = b'a'..=b'z';

/// Random letter chain: every letter may only be followed by a few others,
/// the way phonotactics restricts letter sequences in natural words.
pub fn random_successors<R: Rng>(rng: &mut R, per_letter: usize) -> BTreeMap<char, Vec<char>> {
    let letters: Vec<char> = LETTERS.map(char::from).collect();
    letters.iter().map(|&c| (c, letters.choose_multiple(rng, per_letter).copied().collect())).collect()
}

/// A word of 2 to 7 letters walking the letter chain from a random start.
pub fn random_word<R: Rng>(rng: &mut R, successors: &BTreeMap<char, Vec<char>>) -> String {
    let len = rng.gen_range(2..=7);
    let mut c = char::from(rng.gen_range(LETTERS));
    let mut word = String::from(c);
    for _ in 1..len {
        c = *successors[&c].choose(rng).unwrap();
        word.push(c);
    }
    word
}

/// Lines of 5 to 12 words drawn uniformly from the vocabulary, separated by
/// spaces and closed by one punctuation mark.
pub fn random_line<R: Rng>(rng: &mut R, vocabulary: &[String]) -> String {
    let count = rng.gen_range(5..=12);
    let words: Vec<&str> = (0..count).map(|_| vocabulary.choose(rng).unwrap().as_str()).collect();
    let mut line = words.join(" ");
    line.push(*PUNCTUATION.choose(rng).unwrap());
    line
}

pub fn synthetic(seed: u64, vocabulary_size: usize, train_lines: usize, test_lines: usize) -> Synthetic {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let successors = random_successors(&mut rng, 3);
    let mut seen = BTreeSet::new();
    let mut vocabulary = Vec::with_capacity(vocabulary_size);
    while vocabulary.len() < vocabulary_size {
        let word = random_word(&mut rng, &successors);
        if seen.insert(word.clone()) {
            vocabulary.push(word);
        }
    }
    let train: Vec<String> = (0..train_lines).map(|_| random_line(&mut rng, &vocabulary)).collect();
    let test = (0..test_lines).map(|_| random_line(&mut rng, &vocabulary)).collect();
    let mut word_counts = BTreeMap::new();
    for line in &train {
        for word in line.split(|c: char| c == ' ' || PUNCTUATION.contains(&c)).filter(|w| !w.is_empty()) {
            *word_counts.entry(word.to_string()).or_insert(0) += 1;
        }
    }
    Synthetic { vocabulary, train, test, word_counts }
}
