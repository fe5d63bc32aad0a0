//! Corpus and lexicon readers.
//!
//! Text is decoded as UTF-8 with invalid sequences replaced by U+FFFD; nothing
//! is trimmed, case folded or normalized.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ftok_core::Lexicon;

use crate::error::{Error, IoContext, Result};

pub use ftok_core::text::strip_spaces;

fn open(path: &Path) -> Result<Box<dyn BufRead>> {
    let file = File::open(path).at(path)?;
    let reader: Box<dyn Read> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(flate2::read::MultiGzDecoder::new(file))
    } else {
        Box::new(file)
    };
    Ok(Box::new(BufReader::with_capacity(1 << 16, reader)))
}

/// Streaming line reader; see [`read_lines`].
pub struct Lines {
    reader: Box<dyn BufRead>,
    path: PathBuf,
    buf: Vec<u8>,
}

impl Iterator for Lines {
    type Item = Result<String>;

    fn next(&mut self) -> Option<Self::Item> {
        self.buf.clear();
        match self.reader.read_until(b'\n', &mut self.buf) {
            Ok(0) => None,
            Ok(_) => {
                if self.buf.last() == Some(&b'\n') {
                    self.buf.pop();
                    if self.buf.last() == Some(&b'\r') {
                        self.buf.pop();
                    }
                }
                Some(Ok(String::from_utf8_lossy(&self.buf).into_owned()))
            }
            Err(error) => Some(Err(Error::Io { path: self.path.clone(), error })),
        }
    }
}

/// Lines of a text file in order, without their `\n` / `\r\n` terminators.
/// Files ending in `.gz` are decompressed on the fly.
pub fn read_lines(path: impl AsRef<Path>) -> Result<Lines> {
    let path = path.as_ref();
    Ok(Lines { reader: open(path)?, path: path.to_path_buf(), buf: Vec::new() })
}

/// Reads a whole file into lines.
pub fn read_all_lines(path: impl AsRef<Path>) -> Result<Vec<String>> {
    read_lines(path)?.collect()
}

/// Adapter emitting one line per requested field of each JSON-object line.
///
/// Missing fields are skipped; malformed lines are skipped and counted.
/// Newlines inside field values are replaced by spaces so that every output
/// item is a single line.
pub struct JsonFields<I> {
    lines: I,
    fields: Vec<String>,
    pending: std::collections::VecDeque<String>,
    malformed: usize,
}

impl<I> JsonFields<I> {
    pub fn new(lines: I, fields: &[impl AsRef<str>]) -> Self {
        JsonFields {
            lines,
            fields: fields.iter().map(|f| f.as_ref().to_owned()).collect(),
            pending: Default::default(),
            malformed: 0,
        }
    }

    pub fn malformed(&self) -> usize {
        self.malformed
    }

    fn extract(&mut self, line: &str) {
        match extract_fields(line, &self.fields) {
            Some(values) => self.pending.extend(values),
            None => {
                self.malformed += 1;
                log::warn!("skipping malformed JSON line ({} so far)", self.malformed);
            }
        }
    }
}

/// Values of `fields` present in one JSON-object line, in field order, or
/// `None` when the line is not a JSON object. Non-string values are rendered
/// as JSON; newlines inside values become spaces.
pub fn extract_fields(line: &str, fields: &[impl AsRef<str>]) -> Option<Vec<String>> {
    let serde_json::Value::Object(object) = serde_json::from_str(line).ok()? else {
        return None;
    };
    let mut out = Vec::new();
    for field in fields {
        let text = match object.get(field.as_ref()) {
            None | Some(serde_json::Value::Null) => continue,
            Some(serde_json::Value::String(s)) => s.clone(),
            Some(other) => other.to_string(),
        };
        out.push(text.replace(['\n', '\r'], " "));
    }
    Some(out)
}

impl<I, S> Iterator for JsonFields<I>
where
    I: Iterator<Item = S>,
    S: AsRef<str>,
{
    type Item = String;

    fn next(&mut self) -> Option<String> {
        loop {
            if let Some(line) = self.pending.pop_front() {
                return Some(line);
            }
            let line = self.lines.next()?;
            self.extract(line.as_ref());
        }
    }
}

/// Extracted lines plus the number of skipped malformed input lines.
pub fn extract_json_fields<S: AsRef<str>>(json_lines: &[S], fields: &[impl AsRef<str>]) -> (Vec<String>, usize) {
    let mut it = JsonFields::new(json_lines.iter(), fields);
    let out: Vec<String> = it.by_ref().collect();
    (out, it.malformed())
}

/// Column names of a tab-separated test corpus with a header row.
pub fn parallel_tsv_columns(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let mut reader = tsv_reader(path)?;
    let header = reader.byte_headers().map_err(|error| Error::Csv { path: path.into(), error })?;
    Ok(header.iter().map(|h| String::from_utf8_lossy(h).into_owned()).collect())
}

fn tsv_reader(path: &Path) -> Result<csv::Reader<Box<dyn BufRead>>> {
    Ok(csv::ReaderBuilder::new().delimiter(b'\t').has_headers(true).from_reader(open(path)?))
}

/// One column of a tab-separated test corpus, in row order.
pub fn read_parallel_tsv(path: impl AsRef<Path>, column: &str) -> Result<Vec<String>> {
    let path = path.as_ref();
    let mut reader = tsv_reader(path)?;
    let csv_err = |error| Error::Csv { path: path.into(), error };
    let header: Vec<String> =
        reader.byte_headers().map_err(csv_err)?.iter().map(|h| String::from_utf8_lossy(h).into_owned()).collect();
    let Some(index) = header.iter().position(|h| h == column) else {
        return Err(Error::UnknownColumn { column: column.into(), available: header });
    };
    let mut out = Vec::new();
    for record in reader.byte_records() {
        let record = record.map_err(csv_err)?;
        let field = record.get(index).unwrap_or_default();
        out.push(String::from_utf8_lossy(field).into_owned());
    }
    Ok(out)
}

/// Parses lexicon lines: `token` or `token<TAB>frequency`; blank lines and
/// lines starting with `#` are ignored. The frequency is taken after the last tab.
pub fn parse_lexicon<S: AsRef<str>>(lines: impl IntoIterator<Item = S>, path: &Path) -> Result<Lexicon> {
    let mut lexicon = Lexicon::new();
    for (i, line) in lines.into_iter().enumerate() {
        let line = line.as_ref();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse { path: path.into(), line: i + 1, message };
        let (token, freq) = match line.rsplit_once('\t') {
            Some((token, freq)) => {
                let freq = freq
                    .trim()
                    .parse::<u64>()
                    .map_err(|_| parse_err(format!("non-numeric frequency {freq:?}")))?;
                (token, freq)
            }
            None => (line, 1),
        };
        lexicon.insert(token, freq).map_err(|e| parse_err(e.to_string()))?;
    }
    Ok(lexicon)
}

/// Reads a lexicon file. Duplicate tokens keep their largest frequency.
pub fn read_lexicon(path: impl AsRef<Path>) -> Result<Lexicon> {
    let path = path.as_ref();
    let lines = read_all_lines(path)?;
    parse_lexicon(lines, path)
}

/// Writes `token<TAB>frequency` lines in token order. Tokens containing line
/// terminators or starting with `#` would not read back and are rejected.
pub fn write_lexicon(lexicon: &Lexicon, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = BufWriter::new(File::create(path).at(path)?);
    for (token, freq) in lexicon.iter() {
        if token.contains(['\n', '\r']) || token.starts_with('#') {
            return Err(Error::Parse {
                path: path.into(),
                line: 0,
                message: format!("token {token:?} cannot be stored in a lexicon file"),
            });
        }
        writeln!(out, "{token}\t{freq}").at(path)?;
    }
    out.flush().at(path)
}
