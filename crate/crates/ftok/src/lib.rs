//! File formats, corpus readers and report writers around [`ftok_core`].
//!
//! * [`corpus`]: plain-text lines, JSON field extraction, parallel TSV test sets, lexicons.
//! * [`model_io`]: the canonical `FTOK 1` model file (optionally gzip-compressed).
//! * [`reference`]: pre-tokenized reference files and token output records.
//! * [`grid`]: grid configuration files, the parallel grid runner, CSV and heatmap output.

pub mod corpus;
mod error;
pub mod grid;
pub mod model_io;
pub mod reference;

pub use error::{Error, Result};
pub use ftok_core as core;
