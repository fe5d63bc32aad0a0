//! Unsupervised character-level tokenization from N-gram transition statistics.
//!
//! A [`NGramModel`] counts N-grams together with the symbols seen right after
//! ("forward") and right before ("backward") each of them. From those counts the
//! [`metrics`] module derives per-position profiles (probability, conditional
//! probability, transition freedom and their derivative/variance/peak offshoots),
//! which the [`tokenize`] module thresholds into token boundaries. [`eval`] scores
//! tokenizers against references and runs hyperparameter grids, and [`cluster`]
//! groups symbols by the similarity of their transition vectors.
//!
//! The crate is `no_std` and only needs `alloc`; file formats and the command line
//! live in the `ftok` crate.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod cluster;
mod error;
pub mod eval;
pub mod lexicon;
pub mod metrics;
pub mod model;
pub mod text;
pub mod tokenize;

pub use error::{Error, Result};
pub use lexicon::Lexicon;
pub use metrics::{Base, Direction, MetricKind, MetricPair, MetricProfile, Transform};
pub use model::{Mode, NGramModel};
pub use tokenize::{Token, Tokenizer, TokenizerConfig};
