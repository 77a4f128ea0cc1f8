//! Vocabulary construction and the windowed co-occurrence matrix.
//!
//! Out-of-vocabulary tokens are removed from each document before the
//! window slides, and windows never cross document boundaries.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::thread;

use log::info;
use rustc_hash::FxHashMap;
use sha2::{Digest, Sha256};

use crate::corpus::{CorpusSource, Document};
use crate::error::{Error, Result};

pub const MATRIX_MAGIC: &[u8; 5] = b"COOC1";
const HEADER_LEN: usize = 5 + 4 + 2 + 1 + 8;
const RECORD_LEN: usize = 4 + 4 + 8;

pub const DEFAULT_MIN_COUNT: u64 = 5;
pub const DEFAULT_WINDOW: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
    min_count: u64,
    checksum: u64,
}

impl Vocabulary {
    /// Build from raw token counts, dropping words below `min_count`.
    ///
    /// Words are ordered by descending count, ties broken lexicographically.
    pub fn from_counts<I>(counts: I, min_count: u64) -> Result<Self>
    where
        I: IntoIterator<Item = (String, u64)>,
    {
        if min_count == 0 {
            return Err(Error::Parameter("min_count must be at least 1".into()));
        }
        let mut kept: Vec<(String, u64)> = counts.into_iter().filter(|(_, c)| *c >= min_count).collect();
        if kept.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        if u32::try_from(kept.len()).is_err() {
            return Err(Error::Parameter("vocabulary exceeds 2^32 words".into()));
        }
        let (words, counts): (Vec<_>, Vec<_>) = kept.into_iter().unzip();
        Ok(Self::assemble(words, counts, min_count))
    }

    fn assemble(words: Vec<String>, counts: Vec<u64>, min_count: u64) -> Self {
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        let checksum = vocab_checksum(&words);
        Vocabulary {
            words,
            counts,
            index,
            min_count,
            checksum,
        }
    }

    /// Count tokens over a stream of documents.
    pub fn from_documents<I>(docs: I, min_count: u64) -> Result<Self>
    where
        I: IntoIterator<Item = Result<Document>>,
    {
        let mut counts: FxHashMap<String, u64> = FxHashMap::default();
        for doc in docs {
            for tok in doc?.tokens {
                *counts.entry(tok).or_insert(0) += 1;
            }
        }
        Self::from_counts(counts, min_count)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn count(&self, word: &str) -> Option<u64> {
        self.id(word).map(|i| self.counts[i as usize])
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    /// Checksum of the word order; binds matrices and embeddings to this vocabulary.
    pub fn checksum(&self) -> u64 {
        self.checksum
    }

    /// Map tokens to ids, dropping out-of-vocabulary tokens.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<u32> {
        tokens.iter().filter_map(|t| self.id(t.as_ref())).collect()
    }

    /// Write `word<TAB>count` lines in id order.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (w, c) in self.words.iter().zip(&self.counts) {
            writeln!(out, "{w}\t{c}")?;
        }
        out.flush()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_tsv(BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }

    /// Parse a vocabulary file. Line order defines ids; the smallest count
    /// present is taken as the threshold.
    pub fn read_tsv<R: BufRead>(reader: R, source_name: &str) -> Result<Self> {
        let mut words = Vec::new();
        let mut counts = Vec::new();
        let mut seen = HashMap::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            if line.is_empty() {
                continue;
            }
            let (word, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(source_name, lineno, "expected word<TAB>count"))?;
            let count: u64 = count
                .trim()
                .parse()
                .map_err(|e| Error::parse(source_name, lineno, format!("bad count: {e}")))?;
            if word.is_empty() {
                return Err(Error::parse(source_name, lineno, "empty word"));
            }
            if seen.insert(word.to_string(), lineno).is_some() {
                return Err(Error::parse(source_name, lineno, format!("duplicate word '{word}'")));
            }
            if counts.last().is_some_and(|&prev| prev < count) {
                return Err(Error::parse(source_name, lineno, "counts must be non-increasing"));
            }
            words.push(word.to_string());
            counts.push(count);
        }
        if words.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        let min_count = counts.last().copied().unwrap_or(1).max(1);
        Ok(Self::assemble(words, counts, min_count))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_tsv(BufReader::new(file), &path.display().to_string())
    }
}

fn vocab_checksum(words: &[String]) -> u64 {
    let mut hasher = Sha256::new();
    for w in words {
        hasher.update(w.as_bytes());
        hasher.update(b"\n");
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 digest is 32 bytes"))
}

/// Build a vocabulary from a corpus file.
pub fn build_vocab(source: &CorpusSource, min_count: u64) -> Result<Vocabulary> {
    let mut stream = source.stream()?;
    let vocab = Vocabulary::from_documents(stream.by_ref(), min_count)?;
    if stream.error_count() > 0 {
        log::warn!("{} malformed records skipped", stream.error_count());
    }
    Ok(vocab)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Weighting {
    /// Every in-window pair contributes 1.
    Uniform,
    /// A pair at distance k contributes 1/k.
    #[default]
    InverseDistance,
}

impl Weighting {
    pub fn code(self) -> u8 {
        match self {
            Weighting::Uniform => 0,
            Weighting::InverseDistance => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Weighting::Uniform),
            1 => Some(Weighting::InverseDistance),
            _ => None,
        }
    }

    /// Mass contributed by a pair `distance` tokens apart.
    pub fn mass(self, distance: usize) -> f64 {
        match self {
            Weighting::Uniform => 1.0,
            Weighting::InverseDistance => 1.0 / distance as f64,
        }
    }
}

impl fmt::Display for Weighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Weighting::Uniform => "uniform",
            Weighting::InverseDistance => "inverse-distance",
        })
    }
}

impl FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Weighting::Uniform),
            "inverse" | "inverse-distance" | "harmonic" => Ok(Weighting::InverseDistance),
            other => Err(Error::Parameter(format!(
                "unknown weighting '{other}' (expected uniform or inverse-distance)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CooccurOptions {
    pub window: usize,
    pub weighting: Weighting,
    pub threads: usize,
}

impl Default for CooccurOptions {
    fn default() -> Self {
        CooccurOptions {
            window: DEFAULT_WINDOW,
            weighting: Weighting::default(),
            threads: 1,
        }
    }
}

impl CooccurOptions {
    fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::Parameter("window must be at least 1".into()));
        }
        if self.window > u16::MAX as usize {
            return Err(Error::Parameter(format!("window {} exceeds {}", self.window, u16::MAX)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub row: u32,
    pub col: u32,
    pub mass: f64,
}

/// Symmetric sparse co-occurrence matrix, stored as row-sorted entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceMatrix {
    vocab_size: u32,
    window: usize,
    weighting: Weighting,
    vocab_checksum: u64,
    entries: Vec<Entry>,
    row_start: Vec<usize>,
    row_sums: Vec<f64>,
}

impl CooccurrenceMatrix {
    /// Assemble from a full (both triangles) list of entries.
    ///
    /// Entries are sorted; the list must be symmetric, strictly positive,
    /// and free of duplicate coordinates.
    pub fn from_entries(
        vocab_size: u32,
        window: usize,
        weighting: Weighting,
        vocab_checksum: u64,
        mut entries: Vec<Entry>,
    ) -> Result<Self> {
        entries.sort_unstable_by_key(|e| (e.row, e.col));
        for pair in entries.windows(2) {
            if (pair[0].row, pair[0].col) == (pair[1].row, pair[1].col) {
                return Err(Error::Format(format!(
                    "duplicate entry ({}, {})",
                    pair[0].row, pair[0].col
                )));
            }
        }
        for e in &entries {
            if e.row >= vocab_size || e.col >= vocab_size {
                return Err(Error::Format(format!(
                    "entry ({}, {}) outside vocabulary of {vocab_size}",
                    e.row, e.col
                )));
            }
            if !(e.mass > 0.0 && e.mass.is_finite()) {
                return Err(Error::Format(format!(
                    "entry ({}, {}) has non-positive mass {}",
                    e.row, e.col, e.mass
                )));
            }
        }
        let matrix = Self::assemble(vocab_size, window, weighting, vocab_checksum, entries);
        for e in &matrix.entries {
            if matrix.get(e.col, e.row) != e.mass {
                return Err(Error::Format(format!(
                    "matrix is not symmetric at ({}, {})",
                    e.row, e.col
                )));
            }
        }
        Ok(matrix)
    }

    fn assemble(
        vocab_size: u32,
        window: usize,
        weighting: Weighting,
        vocab_checksum: u64,
        entries: Vec<Entry>,
    ) -> Self {
        let v = vocab_size as usize;
        let mut row_start = vec![0usize; v + 1];
        let mut row_sums = vec![0.0f64; v];
        for e in &entries {
            row_start[e.row as usize + 1] += 1;
            row_sums[e.row as usize] += e.mass;
        }
        for i in 0..v {
            row_start[i + 1] += row_start[i];
        }
        CooccurrenceMatrix {
            vocab_size,
            window,
            weighting,
            vocab_checksum,
            entries,
            row_start,
            row_sums,
        }
    }

    pub fn vocab_size(&self) -> u32 {
        self.vocab_size
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn weighting(&self) -> Weighting {
        self.weighting
    }

    pub fn vocab_checksum(&self) -> u64 {
        self.vocab_checksum
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn row(&self, i: u32) -> &[Entry] {
        let i = i as usize;
        if i >= self.vocab_size as usize {
            return &[];
        }
        &self.entries[self.row_start[i]..self.row_start[i + 1]]
    }

    /// Stored mass at `(i, j)`, or 0 when absent.
    pub fn get(&self, i: u32, j: u32) -> f64 {
        let row = self.row(i);
        row.binary_search_by_key(&j, |e| e.col)
            .map_or(0.0, |k| row[k].mass)
    }

    /// `X_i`: total context mass of word `i`.
    pub fn row_sum(&self, i: u32) -> f64 {
        self.row_sums.get(i as usize).copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|e| e.mass).sum()
    }

    /// Entrywise sum of two matrices counted over disjoint document shards.
    pub fn merge(&self, other: &CooccurrenceMatrix) -> Result<CooccurrenceMatrix> {
        if self.vocab_checksum != other.vocab_checksum {
            return Err(Error::VocabMismatch {
                expected: self.vocab_checksum,
                found: other.vocab_checksum,
            });
        }
        if self.window != other.window || self.weighting != other.weighting {
            return Err(Error::Parameter("cannot merge matrices with different windowing".into()));
        }
        let mut merged = Vec::with_capacity(self.entries.len().max(other.entries.len()));
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        loop {
            let next = match (a.peek(), b.peek()) {
                (Some(x), Some(y)) => match (x.row, x.col).cmp(&(y.row, y.col)) {
                    std::cmp::Ordering::Less => *a.next().unwrap(),
                    std::cmp::Ordering::Greater => *b.next().unwrap(),
                    std::cmp::Ordering::Equal => {
                        let (x, y) = (a.next().unwrap(), b.next().unwrap());
                        Entry {
                            mass: x.mass + y.mass,
                            ..*x
                        }
                    }
                },
                (Some(_), None) => *a.next().unwrap(),
                (None, Some(_)) => *b.next().unwrap(),
                (None, None) => break,
            };
            merged.push(next);
        }
        Ok(Self::assemble(
            self.vocab_size,
            self.window,
            self.weighting,
            self.vocab_checksum,
            merged,
        ))
    }

    pub fn write_binary<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(MATRIX_MAGIC)?;
        out.write_all(&self.vocab_size.to_le_bytes())?;
        out.write_all(&(self.window as u16).to_le_bytes())?;
        out.write_all(&[self.weighting.code()])?;
        out.write_all(&self.vocab_checksum.to_le_bytes())?;
        let mut rec = [0u8; RECORD_LEN];
        for e in &self.entries {
            rec[0..4].copy_from_slice(&e.row.to_le_bytes());
            rec[4..8].copy_from_slice(&e.col.to_le_bytes());
            rec[8..16].copy_from_slice(&e.mass.to_le_bytes());
            out.write_all(&rec)?;
        }
        out.flush()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_binary(BufWriter::with_capacity(1 << 20, file))
            .map_err(|e| Error::io(path, e))
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<Self> {
        let mut header = [0u8; HEADER_LEN];
        input
            .read_exact(&mut header)
            .map_err(|_| Error::Format("truncated co-occurrence header".into()))?;
        if &header[0..5] != MATRIX_MAGIC {
            return Err(Error::Format("not a co-occurrence file (bad magic)".into()));
        }
        let vocab_size = u32::from_le_bytes(header[5..9].try_into().unwrap());
        let window = u16::from_le_bytes(header[9..11].try_into().unwrap()) as usize;
        let weighting = Weighting::from_code(header[11])
            .ok_or_else(|| Error::Format(format!("unknown weighting code {}", header[11])))?;
        let checksum = u64::from_le_bytes(header[12..20].try_into().unwrap());

        let mut entries = Vec::new();
        let mut rec = [0u8; RECORD_LEN];
        loop {
            match read_full(&mut input, &mut rec)? {
                0 => break,
                RECORD_LEN => {}
                n => {
                    return Err(Error::Format(format!(
                        "truncated record {} ({n} of {RECORD_LEN} bytes)",
                        entries.len()
                    )))
                }
            }
            entries.push(Entry {
                row: u32::from_le_bytes(rec[0..4].try_into().unwrap()),
                col: u32::from_le_bytes(rec[4..8].try_into().unwrap()),
                mass: f64::from_le_bytes(rec[8..16].try_into().unwrap()),
            });
        }
        if entries
            .windows(2)
            .any(|p| (p[0].row, p[0].col) >= (p[1].row, p[1].col))
        {
            return Err(Error::Format("records are not sorted by (i, j)".into()));
        }
        Self::from_entries(vocab_size, window, weighting, checksum, entries)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_binary(BufReader::with_capacity(1 << 20, file))
    }
}

fn read_full<R: Read>(input: &mut R, buf: &mut [u8]) -> Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match input.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(Error::Stream(e)),
        }
    }
    Ok(filled)
}

/// `P(j | i) = X_ji / X_i`.
pub fn cooccur_probability(m: &CooccurrenceMatrix, j: u32, i: u32) -> Result<f64> {
    let total = m.row_sum(i);
    if total <= 0.0 {
        return Err(Error::Unobserved(i));
    }
    Ok(m.get(j, i) / total)
}

/// `P(k | i) / P(k | j)`, the ratio that separates relevant context words
/// (far from 1) from irrelevant ones (close to 1).
pub fn probability_ratio(m: &CooccurrenceMatrix, i: u32, j: u32, k: u32) -> Result<f64> {
    let numer = cooccur_probability(m, k, i)?;
    let denom = cooccur_probability(m, k, j)?;
    if denom == 0.0 {
        return Err(Error::ZeroDenominator(format!(
            "word {k} never appears in the context of word {j}"
        )));
    }
    Ok(numer / denom)
}

fn lcm_up_to(n: usize) -> Option<u64> {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let mut acc: u64 = 1;
    for k in 2..=n as u64 {
        acc = acc.checked_mul(k / gcd(acc, k))?;
        if acc > u32::MAX as u64 {
            return None;
        }
    }
    Some(acc)
}

#[inline]
fn pair_key(a: u32, b: u32) -> u64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    ((lo as u64) << 32) | hi as u64
}

/// Thread-local sparse accumulator over unordered pairs.
///
/// When every weight is a multiple of `1/scale` for an integer `scale` that
/// fits in 32 bits, mass is accumulated as exact integer units so shard
/// merge order cannot change the result.
enum Accumulator {
    Exact {
        scale: u64,
        units: Vec<u64>,
        map: FxHashMap<u64, u64>,
    },
    Float {
        mass: Vec<f64>,
        map: FxHashMap<u64, f64>,
    },
}

impl Accumulator {
    fn new(opts: &CooccurOptions) -> Self {
        let scale = match opts.weighting {
            Weighting::Uniform => Some(1),
            Weighting::InverseDistance => lcm_up_to(opts.window),
        };
        match scale {
            Some(scale) => Accumulator::Exact {
                scale,
                units: (1..=opts.window as u64)
                    .map(|k| match opts.weighting {
                        Weighting::Uniform => scale,
                        Weighting::InverseDistance => scale / k,
                    })
                    .collect(),
                map: FxHashMap::default(),
            },
            None => Accumulator::Float {
                mass: (1..=opts.window).map(|k| opts.weighting.mass(k)).collect(),
                map: FxHashMap::default(),
            },
        }
    }

    fn add_document(&mut self, ids: &[u32]) {
        match self {
            Accumulator::Exact { units, map, .. } => {
                let window = units.len();
                for (t, &a) in ids.iter().enumerate() {
                    for (k, &b) in ids[t + 1..].iter().take(window).enumerate() {
                        let u = if a == b { 2 * units[k] } else { units[k] };
                        *map.entry(pair_key(a, b)).or_insert(0) += u;
                    }
                }
            }
            Accumulator::Float { mass, map } => {
                let window = mass.len();
                for (t, &a) in ids.iter().enumerate() {
                    for (k, &b) in ids[t + 1..].iter().take(window).enumerate() {
                        let m = if a == b { 2.0 * mass[k] } else { mass[k] };
                        *map.entry(pair_key(a, b)).or_insert(0.0) += m;
                    }
                }
            }
        }
    }

    fn absorb(&mut self, other: Accumulator) {
        match (self, other) {
            (Accumulator::Exact { map, .. }, Accumulator::Exact { map: other, .. }) => {
                for (k, v) in other {
                    *map.entry(k).or_insert(0) += v;
                }
            }
            (Accumulator::Float { map, .. }, Accumulator::Float { map: other, .. }) => {
                for (k, v) in other {
                    *map.entry(k).or_insert(0.0) += v;
                }
            }
            _ => unreachable!("accumulators built from the same options"),
        }
    }

    fn into_entries(self) -> Vec<Entry> {
        let pairs: Vec<(u64, f64)> = match self {
            Accumulator::Exact { scale, map, .. } => {
                let scale = scale as f64;
                map.into_iter().map(|(k, u)| (k, u as f64 / scale)).collect()
            }
            Accumulator::Float { map, .. } => map.into_iter().collect(),
        };
        let mut entries = Vec::with_capacity(pairs.len() * 2);
        for (key, mass) in pairs {
            let (lo, hi) = ((key >> 32) as u32, key as u32);
            entries.push(Entry { row: lo, col: hi, mass });
            if lo != hi {
                entries.push(Entry { row: hi, col: lo, mass });
            }
        }
        entries.sort_unstable_by_key(|e| (e.row, e.col));
        entries
    }
}

const BATCH_TOKENS: usize = 1 << 18;

/// Count windowed co-occurrences over already-tokenized documents.
///
/// With `threads > 1` documents are batched and distributed to workers that
/// each own an accumulator; the accumulators are summed at the end.
pub fn count_documents<I>(docs: I, vocab: &Vocabulary, opts: &CooccurOptions) -> Result<CooccurrenceMatrix>
where
    I: IntoIterator<Item = Result<Document>>,
{
    opts.validate()?;
    let threads = opts.threads.max(1);
    let mut n_docs = 0usize;
    let mut n_tokens = 0usize;

    let accumulator = if threads == 1 {
        let mut acc = Accumulator::new(opts);
        for doc in docs {
            let ids = vocab.encode(&doc?.tokens);
            n_docs += 1;
            n_tokens += ids.len();
            acc.add_document(&ids);
            if n_docs.is_multiple_of(100_000) {
                info!("cooccur: {n_docs} documents, {n_tokens} in-vocabulary tokens");
            }
        }
        acc
    } else {
        let (tx, rx) = crossbeam_channel::bounded::<Vec<Vec<u32>>>(threads * 2);
        thread::scope(|scope| -> Result<Accumulator> {
            let workers: Vec<_> = (0..threads)
                .map(|_| {
                    let rx = rx.clone();
                    scope.spawn(move || {
                        let mut acc = Accumulator::new(opts);
                        for batch in rx {
                            for ids in &batch {
                                acc.add_document(ids);
                            }
                        }
                        acc
                    })
                })
                .collect();
            drop(rx);

            let feed = || -> Result<()> {
                let mut batch = Vec::new();
                let mut batch_tokens = 0;
                for doc in docs {
                    let ids = vocab.encode(&doc?.tokens);
                    n_docs += 1;
                    n_tokens += ids.len();
                    batch_tokens += ids.len();
                    batch.push(ids);
                    if batch_tokens >= BATCH_TOKENS {
                        batch_tokens = 0;
                        // Workers only stop when the channel closes.
                        tx.send(std::mem::take(&mut batch)).expect("workers alive");
                    }
                    if n_docs.is_multiple_of(100_000) {
                        info!("cooccur: {n_docs} documents, {n_tokens} in-vocabulary tokens");
                    }
                }
                if !batch.is_empty() {
                    tx.send(batch).expect("workers alive");
                }
                Ok(())
            };
            let fed = feed();
            drop(tx);

            let mut accs = workers.into_iter().map(|h| h.join().expect("cooccur worker panicked"));
            let mut total = accs.next().expect("at least one worker");
            for acc in accs {
                total.absorb(acc);
            }
            fed.map(|()| total)
        })?
    };

    info!("cooccur: counted {n_docs} documents, {n_tokens} in-vocabulary tokens");
    let entries = accumulator.into_entries();
    Ok(CooccurrenceMatrix::assemble(
        vocab.len() as u32,
        opts.window,
        opts.weighting,
        vocab.checksum(),
        entries,
    ))
}

/// Count co-occurrences over a corpus file.
pub fn count_cooccurrences(
    source: &CorpusSource,
    vocab: &Vocabulary,
    opts: &CooccurOptions,
) -> Result<CooccurrenceMatrix> {
    count_documents(source.stream()?, vocab, opts)
}
