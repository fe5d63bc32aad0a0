//! Canonical text serialization of [`NGramModel`].
//!
//! ```text
//! FTOK<TAB>1<TAB><mode><TAB><max_n>
//! G<TAB><n><TAB><gram><TAB><count>
//! F<TAB><n><TAB><gram><TAB><unit><TAB><count>
//! B<TAB><n><TAB><gram><TAB><unit><TAB><count>
//! ```
//!
//! Records are sorted by kind (G, F, B), rank, gram and unit. Grams and units
//! escape TAB, LF, CR and backslash as `\t`, `\n`, `\r` and `\\`. A path ending
//! in `.gz` is gzip-compressed.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use ftok_core::model::{Direction, Mode, NGramModel};

use crate::error::{Error, IoContext, Result};

pub const MAGIC: &str = "FTOK";
pub const VERSION: &str = "1";

fn is_gz(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "gz")
}

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\\' => out.push_str("\\\\"),
            c => out.push(c),
        }
    }
    out
}

pub fn unescape(s: &str) -> std::result::Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('\\') => out.push('\\'),
            Some(other) => return Err(format!("invalid escape \\{other}")),
            None => return Err("dangling backslash".into()),
        }
    }
    Ok(out)
}

/// Writes the canonical form of `model` to `out`.
pub fn write_model<W: Write>(model: &NGramModel, mut out: W) -> io::Result<()> {
    writeln!(out, "{MAGIC}\t{VERSION}\t{}\t{}", model.mode(), model.max_n())?;
    for (n, rank) in model.ranks() {
        for (gram, count) in rank.grams() {
            writeln!(out, "G\t{n}\t{}\t{count}", escape(gram))?;
        }
    }
    for (kind, dir) in [('F', Direction::Forward), ('B', Direction::Backward)] {
        for (n, rank) in model.ranks() {
            for (gram, units) in rank.transitions(dir) {
                let gram = escape(gram);
                for (unit, count) in units {
                    writeln!(out, "{kind}\t{n}\t{gram}\t{}\t{count}", escape(unit))?;
                }
            }
        }
    }
    out.flush()
}

pub fn save(model: &NGramModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = BufWriter::with_capacity(1 << 16, File::create(path).at(path)?);
    if is_gz(path) {
        let mut enc = flate2::write::GzEncoder::new(file, flate2::Compression::default());
        write_model(model, &mut enc).at(path)?;
        enc.finish().at(path)?.flush().at(path)
    } else {
        write_model(model, file).at(path)
    }
}

/// Canonical bytes of `model` (uncompressed).
pub fn to_bytes(model: &NGramModel) -> Vec<u8> {
    let mut buf = Vec::new();
    write_model(model, &mut buf).expect("writing to a Vec cannot fail");
    buf
}

/// Parses a model from `reader`; `path` is used in error messages only.
pub fn read_model<R: BufRead>(mut reader: R, path: &Path) -> Result<NGramModel> {
    let truncated = || Error::Truncated { path: path.into() };
    let read_err = |error: io::Error| match error.kind() {
        io::ErrorKind::UnexpectedEof => truncated(),
        _ => Error::Io { path: path.into(), error },
    };
    let mut buf = Vec::new();
    let mut next_line = |buf: &mut Vec<u8>| -> Result<Option<String>> {
        buf.clear();
        if reader.read_until(b'\n', buf).map_err(read_err)? == 0 {
            return Ok(None);
        }
        if buf.pop() != Some(b'\n') {
            return Err(truncated());
        }
        String::from_utf8(std::mem::take(buf))
            .map(Some)
            .map_err(|_| Error::Parse { path: path.into(), line: 0, message: "invalid UTF-8".into() })
    };

    let header = next_line(&mut buf)?.ok_or_else(truncated)?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let parse_err = |line: usize, message: String| Error::Parse { path: path.into(), line, message };
    if fields.first() != Some(&MAGIC) {
        return Err(parse_err(1, format!("missing {MAGIC} header")));
    }
    let found = fields.get(1).copied().unwrap_or("none");
    if found != VERSION {
        return Err(Error::Version { path: path.into(), expected: VERSION.into(), found: found.into() });
    }
    let [_, _, mode, max_n] = fields[..] else {
        return Err(parse_err(1, format!("malformed header {header:?}")));
    };
    let mode: Mode = mode.parse().map_err(|e| parse_err(1, format!("{e}")))?;
    let max_n: usize = max_n.parse().map_err(|_| parse_err(1, format!("invalid max_n {max_n:?}")))?;
    let mut model = NGramModel::new(mode, max_n).map_err(|e| parse_err(1, e.to_string()))?;

    let mut line_no = 1;
    while let Some(line) = next_line(&mut buf)? {
        line_no += 1;
        let err = |message: String| parse_err(line_no, message);
        let fields: Vec<&str> = line.split('\t').collect();
        let kind = fields[0];
        let expected_len = if kind == "G" { 4 } else { 5 };
        if !matches!(kind, "G" | "F" | "B") || fields.len() != expected_len {
            return Err(err(format!("malformed record {line:?}")));
        }
        let n: usize = fields[1].parse().map_err(|_| err(format!("invalid rank {:?}", fields[1])))?;
        let count: u64 = fields[fields.len() - 1]
            .parse()
            .ok()
            .filter(|&c| c > 0)
            .ok_or_else(|| err(format!("invalid count {:?}", fields[fields.len() - 1])))?;
        let gram = unescape(fields[2]).map_err(err)?;
        if gram.chars().count() != n {
            return Err(err(format!("gram {gram:?} does not have rank {n}")));
        }
        if kind == "G" {
            model.add_gram(n, &gram, count).map_err(|e| err(e.to_string()))?;
            continue;
        }
        let unit = unescape(fields[3]).map_err(err)?;
        let unit_len = match mode {
            Mode::Chars => 1,
            Mode::Grams => n,
        };
        if unit.chars().count() != unit_len {
            return Err(err(format!("unit {unit:?} must have length {unit_len} in {mode} mode")));
        }
        if model.gram_count(&gram) == 0 {
            return Err(err(format!("transition from {gram:?} which has no G record")));
        }
        let dir = if kind == "F" { Direction::Forward } else { Direction::Backward };
        model.add_transition(n, dir, &gram, &unit, count).map_err(|e| err(e.to_string()))?;
    }
    Ok(model)
}

pub fn load(path: impl AsRef<Path>) -> Result<NGramModel> {
    let path = path.as_ref();
    let file = File::open(path).at(path)?;
    let reader: Box<dyn Read> =
        if is_gz(path) { Box::new(flate2::read::MultiGzDecoder::new(file)) } else { Box::new(file) };
    read_model(BufReader::with_capacity(1 << 16, reader), path)
}
