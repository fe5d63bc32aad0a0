//! Token record files: one line per source line, tokens separated by the ASCII
//! unit separator (0x1F). The visible form U+241F is accepted on input.

use std::path::Path;

use ftok_core::tokenize::Pretokenized;
use ftok_core::Token;

use crate::corpus::read_all_lines;
use crate::error::Result;

pub const UNIT_SEPARATOR: char = '\u{1F}';
pub const VISIBLE_UNIT_SEPARATOR: char = '\u{241F}';

/// Splits one record into tokens. An empty record has no tokens.
pub fn parse_record(record: &str) -> Vec<String> {
    if record.is_empty() {
        return Vec::new();
    }
    record.split([UNIT_SEPARATOR, VISIBLE_UNIT_SEPARATOR]).map(str::to_owned).collect()
}

pub fn read_reference_file(path: impl AsRef<Path>) -> Result<Vec<Vec<String>>> {
    Ok(read_all_lines(path)?.iter().map(|r| parse_record(r)).collect())
}

/// Reads reference tokenizations and checks that each record covers its line.
pub fn reference_from_file<S: AsRef<str>>(path: impl AsRef<Path>, lines: &[S]) -> Result<Pretokenized> {
    let records = read_reference_file(path)?;
    Ok(Pretokenized::new(records, lines)?)
}

/// One output record. Plain records join tokens with 0x1F; pretty records join
/// with `|` and show spaces as `␣`.
pub fn format_tokens(tokens: &[Token], pretty: bool) -> String {
    if pretty {
        tokens.iter().map(|t| t.text.replace(' ', "\u{2423}")).collect::<Vec<_>>().join("|")
    } else {
        tokens.iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join("\u{1F}")
    }
}
