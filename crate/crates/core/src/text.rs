//! Small text helpers shared by training, tokenization and evaluation.

use alloc::string::String;
use alloc::vec::Vec;

/// Removes every Unicode whitespace character, keeping everything else in order.
pub fn strip_spaces(line: &str) -> String {
    line.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Byte offsets of every character boundary in `line`, including the end.
///
/// `&line[offsets[i]..offsets[i + n]]` is the rank-`n` gram at character position `i`.
pub fn char_boundaries(line: &str) -> Vec<usize> {
    let mut offsets: Vec<usize> = line.char_indices().map(|(i, _)| i).collect();
    offsets.push(line.len());
    offsets
}

/// Per-character lowercase mapping that never changes the character count.
///
/// Characters whose lowercase form expands to several characters are kept as is.
pub fn simple_lowercase_char(c: char) -> char {
    let mut lower = c.to_lowercase();
    match (lower.next(), lower.next()) {
        (Some(l), None) => l,
        _ => c,
    }
}

pub fn simple_lowercase(s: &str) -> String {
    s.chars().map(simple_lowercase_char).collect()
}
