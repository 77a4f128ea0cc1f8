//! Document streaming and tokenization.
//!
//! Every source is read line by line (or record by record for CSV), so
//! memory use does not grow with the corpus. Files ending in `.gz` are
//! decompressed on the fly.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use flate2::read::MultiGzDecoder;
use log::warn;
use serde_json::Value;

use crate::error::{Error, Result};

/// How many malformed records are kept verbatim; the rest are only counted.
const MAX_KEPT_ERRORS: usize = 64;

/// Lowercase and split `text` into word tokens.
///
/// Every maximal run of alphabetic characters becomes one token. Apostrophes
/// are removed without splitting (`don't` becomes `dont`); digits,
/// punctuation and whitespace separate tokens and are discarded.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if is_apostrophe(ch) {
            continue;
        }
        if ch.is_alphabetic() {
            // Some lowercase expansions contain combining marks; only the
            // alphabetic part is kept so tokens stay re-tokenizable.
            current.extend(ch.to_lowercase().filter(|c| c.is_alphabetic()));
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

fn is_apostrophe(ch: char) -> bool {
    matches!(ch, '\'' | '\u{2018}' | '\u{2019}' | '\u{02BC}' | '`')
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Format {
    /// One document per line.
    PlainLines,
    /// One JSON object per line; the named string field holds the text.
    Jsonl { field: String },
    /// RFC 4180 CSV with a header row; the named column holds the text.
    Csv { column: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusSource {
    pub path: PathBuf,
    pub format: Format,
}

impl CorpusSource {
    pub fn plain(path: impl Into<PathBuf>) -> Self {
        CorpusSource {
            path: path.into(),
            format: Format::PlainLines,
        }
    }

    pub fn jsonl(path: impl Into<PathBuf>, field: impl Into<String>) -> Self {
        CorpusSource {
            path: path.into(),
            format: Format::Jsonl {
                field: field.into(),
            },
        }
    }

    pub fn csv(path: impl Into<PathBuf>, column: impl Into<String>) -> Self {
        CorpusSource {
            path: path.into(),
            format: Format::Csv {
                column: column.into(),
            },
        }
    }

    pub fn stream(&self) -> Result<DocumentStream> {
        stream_documents(self)
    }

    /// Like [`CorpusSource::stream`] with an explicit read buffer size.
    pub fn stream_with_buffer(&self, capacity: usize) -> Result<DocumentStream> {
        open_stream(self, capacity.max(1))
    }
}

/// A record that could not be turned into a document. The stream skips it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordError {
    pub line: usize,
    pub message: String,
}

/// Lazily yields the documents of a [`CorpusSource`] in file order.
///
/// Malformed records are skipped; [`DocumentStream::error_count`] reports how
/// many were dropped. I/O failures are yielded as `Err` and end the stream.
pub struct DocumentStream {
    inner: Inner,
    path: PathBuf,
    errors: Vec<RecordError>,
    error_count: usize,
    done: bool,
}

enum Inner {
    Lines {
        reader: Box<dyn BufRead + Send>,
        line: usize,
        buf: Vec<u8>,
        field: Option<String>,
    },
    Csv {
        reader: csv::Reader<Box<dyn Read + Send>>,
        column: usize,
        record: csv::ByteRecord,
    },
}

pub fn stream_documents(source: &CorpusSource) -> Result<DocumentStream> {
    open_stream(source, 1 << 16)
}

fn open_stream(source: &CorpusSource, capacity: usize) -> Result<DocumentStream> {
    let raw = open_maybe_gz(&source.path)?;
    let inner = match &source.format {
        Format::PlainLines => Inner::Lines {
            reader: Box::new(BufReader::with_capacity(capacity, raw)),
            line: 0,
            buf: Vec::new(),
            field: None,
        },
        Format::Jsonl { field } => Inner::Lines {
            reader: Box::new(BufReader::with_capacity(capacity, raw)),
            line: 0,
            buf: Vec::new(),
            field: Some(field.clone()),
        },
        Format::Csv { column } => {
            let mut reader = csv::ReaderBuilder::new()
                .flexible(true)
                .buffer_capacity(capacity)
                .from_reader(raw);
            let headers = reader.byte_headers()?.clone();
            let column_idx = headers
                .iter()
                .position(|h| h == column.as_bytes())
                .ok_or_else(|| {
                    Error::Format(format!(
                        "{}: no column named '{column}' in CSV header",
                        source.path.display()
                    ))
                })?;
            Inner::Csv {
                reader,
                column: column_idx,
                record: csv::ByteRecord::new(),
            }
        }
    };
    Ok(DocumentStream {
        inner,
        path: source.path.clone(),
        errors: Vec::new(),
        error_count: 0,
        done: false,
    })
}

fn open_maybe_gz(path: &Path) -> Result<Box<dyn Read + Send>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    if path.extension().is_some_and(|ext| ext == "gz") {
        Ok(Box::new(MultiGzDecoder::new(BufReader::new(file))))
    } else {
        Ok(Box::new(file))
    }
}

impl DocumentStream {
    /// Number of malformed records skipped so far.
    pub fn error_count(&self) -> usize {
        self.error_count
    }

    /// The first malformed records encountered (capped).
    pub fn errors(&self) -> &[RecordError] {
        &self.errors
    }

    fn record_error(&mut self, line: usize, message: String) {
        warn!("{}:{line}: skipping malformed record: {message}", self.path.display());
        self.error_count += 1;
        if self.errors.len() < MAX_KEPT_ERRORS {
            self.errors.push(RecordError { line, message });
        }
    }

    fn next_line_doc(&mut self) -> Option<Result<Document>> {
        loop {
            let Inner::Lines {
                reader,
                line,
                buf,
                field,
            } = &mut self.inner
            else {
                unreachable!()
            };
            buf.clear();
            match reader.read_until(b'\n', buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(Error::io(&self.path, e))),
            }
            *line += 1;
            let lineno = *line;
            while matches!(buf.last(), Some(b'\n' | b'\r')) {
                buf.pop();
            }
            let parsed = match std::str::from_utf8(buf) {
                Err(e) => Err(format!("invalid UTF-8: {e}")),
                Ok(text) => match field {
                    None => Ok(Some(tokenize(text))),
                    Some(_) if text.trim().is_empty() => Ok(None),
                    Some(field) => extract_json_field(text, field).map(|body| Some(tokenize(&body))),
                },
            };
            match parsed {
                Ok(Some(tokens)) => {
                    return Some(Ok(Document {
                        id: lineno.to_string(),
                        tokens,
                    }))
                }
                Ok(None) => {}
                Err(msg) => self.record_error(lineno, msg),
            }
        }
    }

    fn next_csv_doc(&mut self) -> Option<Result<Document>> {
        loop {
            let Inner::Csv {
                reader,
                column,
                record,
            } = &mut self.inner
            else {
                unreachable!()
            };
            let column = *column;
            match reader.read_byte_record(record) {
                Ok(false) => return None,
                Ok(true) => {
                    let lineno = record.position().map_or(0, |p| p.line() as usize);
                    let parsed = match record.get(column).map(std::str::from_utf8) {
                        Some(Ok(text)) => Ok(tokenize(text)),
                        Some(Err(e)) => Err(format!("invalid UTF-8: {e}")),
                        None => Err(format!(
                            "record has {} fields, text column is #{}",
                            record.len(),
                            column + 1
                        )),
                    };
                    match parsed {
                        Ok(tokens) => {
                            return Some(Ok(Document {
                                id: lineno.to_string(),
                                tokens,
                            }))
                        }
                        Err(msg) => self.record_error(lineno, msg),
                    }
                }
                Err(e) => {
                    let lineno = e.position().map_or(0, |p| p.line() as usize);
                    if let csv::ErrorKind::Io(_) = e.kind() {
                        return Some(Err(Error::Csv(e)));
                    }
                    self.record_error(lineno, e.to_string());
                }
            }
        }
    }
}

fn extract_json_field(line: &str, field: &str) -> std::result::Result<String, String> {
    let value: Value = serde_json::from_str(line).map_err(|e| format!("invalid JSON: {e}"))?;
    match value.get(field) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(other) => Err(format!("field '{field}' is not a string ({other})")),
        None => Err(format!("missing field '{field}'")),
    }
}

impl Iterator for DocumentStream {
    type Item = Result<Document>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = match self.inner {
            Inner::Lines { .. } => self.next_line_doc(),
            Inner::Csv { .. } => self.next_csv_doc(),
        };
        if matches!(item, None | Some(Err(_))) {
            self.done = true;
        }
        item
    }
}
