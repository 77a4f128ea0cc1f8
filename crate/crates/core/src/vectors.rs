//! Final word vectors and the whitespace-separated text format
//! (`word v1 v2 ... vd`, one word per line).

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::numfmt::format_sig;

/// Significant digits written per component.
pub const TEXT_DIGITS: usize = 6;

/// Word → dense vector lookup. Row order is preserved from the source, which
/// for files written by this crate is descending corpus frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVectors {
    words: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    data: Vec<f64>,
}

impl WordVectors {
    pub fn new(words: Vec<String>, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parameter("vector dimension must be at least 1".into()));
        }
        if data.len() != words.len() * dim {
            return Err(Error::Dimension(data.len(), words.len() * dim));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::Format(format!("duplicate word '{w}'")));
            }
        }
        Ok(WordVectors {
            words,
            index,
            dim,
            data,
        })
    }

    /// Build from `(word, vector)` pairs; every vector must share one length.
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut words = Vec::new();
        let mut data = Vec::new();
        let mut dim = None;
        for (w, v) in pairs {
            match dim {
                None => dim = Some(v.len()),
                Some(d) if d != v.len() => return Err(Error::Dimension(d, v.len())),
                _ => {}
            }
            words.push(w.into());
            data.extend(v);
        }
        Self::new(words, dim.unwrap_or(0), data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// Row position of `word`; lower means more frequent for trained output.
    pub fn rank(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.rank(word).map(|i| self.row(i))
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Multiply every component by `factor`.
    pub fn scaled(&self, factor: f64) -> WordVectors {
        WordVectors {
            data: self.data.iter().map(|x| x * factor).collect(),
            ..self.clone()
        }
    }

    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut line = String::new();
        for (i, w) in self.words.iter().enumerate() {
            line.clear();
            line.push_str(w);
            for &x in self.row(i) {
                line.push(' ');
                line.push_str(&format_sig(x, TEXT_DIGITS));
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        out.flush()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_text(BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }

    pub fn read_text<R: BufRead>(reader: R, source_name: &str) -> Result<Self> {
        let mut words = Vec::new();
        let mut data = Vec::new();
        let mut dim = None;
        for (lineno, line) in reader.lines().enumerate() {
            let lineno = lineno + 1;
            let line = line.map_err(|e| Error::parse(source_name, lineno, e.to_string()))?;
            let mut fields = line.split_ascii_whitespace();
            let Some(word) = fields.next() else {
                continue;
            };
            let before = data.len();
            for f in fields {
                let x: f64 = f
                    .parse()
                    .map_err(|_| Error::parse(source_name, lineno, format!("bad number '{f}'")))?;
                if !x.is_finite() {
                    return Err(Error::parse(source_name, lineno, format!("non-finite value '{f}'")));
                }
                data.push(x);
            }
            let d = data.len() - before;
            match dim {
                None if d == 0 => return Err(Error::parse(source_name, lineno, "word has no vector")),
                None => dim = Some(d),
                Some(expected) if expected != d => {
                    return Err(Error::parse(
                        source_name,
                        lineno,
                        format!("expected {expected} components, found {d}"),
                    ))
                }
                _ => {}
            }
            words.push(word.to_string());
        }
        let Some(dim) = dim else {
            return Err(Error::Format(format!("{source_name}: no vectors")));
        };
        Self::new(words, dim, data).map_err(|e| match e {
            Error::Format(msg) => Error::Format(format!("{source_name}: {msg}")),
            other => other,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_text(BufReader::new(file), &path.display().to_string())
    }
}
