//! Weighted least-squares fitting of word vectors to log co-occurrence mass,
//! optimized with per-parameter AdaGrad.
//!
//! The objective over stored entries `(i, j, x)` is
//!
//! ```text
//! J = Σ f(x) (w_i · w̃_j + b_i + b̃_j − ln x)²
//! ```
//!
//! with `f(x) = min(1, (x / x_max)^alpha)`.

use std::sync::atomic::{AtomicU64, Ordering};
use std::thread;

use log::info;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cooccur::{CooccurrenceMatrix, Entry, Vocabulary};
use crate::error::{Error, Result};
use crate::vectors::WordVectors;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub x_max: f64,
    pub alpha: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Single-threaded, fixed-order updates; bitwise reproducible.
    pub deterministic: bool,
    /// Worker count for the lock-free parallel mode.
    pub threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 200,
            x_max: 100.0,
            alpha: 0.75,
            learning_rate: 0.05,
            epochs: 15,
            seed: 42,
            deterministic: false,
            threads: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Parameter(msg.to_string()));
        if self.dim == 0 {
            return bad("dim must be at least 1");
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha must lie in (0, 1]");
        }
        if !(self.x_max > 0.0 && self.x_max.is_finite()) {
            return bad("x_max must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        Ok(())
    }
}

/// Weighting function: `(x / x_max)^alpha` below the cap, 1 above it.
pub fn weight_fn(x: f64, x_max: f64, alpha: f64) -> f64 {
    if x < x_max {
        (x / x_max).powf(alpha)
    } else {
        1.0
    }
}

/// How final word vectors are formed from the two trained vector sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Combine {
    /// `w + w̃`
    #[default]
    Sum,
    /// `w` only.
    MainOnly,
}

/// Trained parameters: main and context vectors plus their biases, stored
/// row-major (`vocab_size × dim`).
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    pub dim: usize,
    pub vocab_size: usize,
    pub vocab_checksum: u64,
    pub main: Vec<f64>,
    pub context: Vec<f64>,
    pub main_bias: Vec<f64>,
    pub context_bias: Vec<f64>,
}

impl EmbeddingSet {
    pub fn zeros(vocab_size: usize, dim: usize, vocab_checksum: u64) -> Self {
        EmbeddingSet {
            dim,
            vocab_size,
            vocab_checksum,
            main: vec![0.0; vocab_size * dim],
            context: vec![0.0; vocab_size * dim],
            main_bias: vec![0.0; vocab_size],
            context_bias: vec![0.0; vocab_size],
        }
    }

    /// Every parameter drawn uniformly from `(-0.5/dim, 0.5/dim)`.
    pub fn random<R: Rng>(vocab_size: usize, dim: usize, vocab_checksum: u64, rng: &mut R) -> Self {
        let mut e = Self::zeros(vocab_size, dim, vocab_checksum);
        let half = 0.5 / dim as f64;
        for x in e
            .main
            .iter_mut()
            .chain(e.context.iter_mut())
            .chain(e.main_bias.iter_mut())
            .chain(e.context_bias.iter_mut())
        {
            *x = rng.gen_range(-half..half);
        }
        e
    }

    pub fn main_vec(&self, i: u32) -> &[f64] {
        let i = i as usize;
        &self.main[i * self.dim..(i + 1) * self.dim]
    }

    pub fn context_vec(&self, j: u32) -> &[f64] {
        let j = j as usize;
        &self.context[j * self.dim..(j + 1) * self.dim]
    }

    /// The same parameters with main and context roles exchanged.
    pub fn swapped(&self) -> EmbeddingSet {
        EmbeddingSet {
            main: self.context.clone(),
            context: self.main.clone(),
            main_bias: self.context_bias.clone(),
            context_bias: self.main_bias.clone(),
            ..self.clone()
        }
    }

    pub fn all_finite(&self) -> bool {
        self.main
            .iter()
            .chain(&self.context)
            .chain(&self.main_bias)
            .chain(&self.context_bias)
            .all(|x| x.is_finite())
    }

    pub fn final_vector(&self, i: u32, combine: Combine) -> Vec<f64> {
        match combine {
            Combine::Sum => self
                .main_vec(i)
                .iter()
                .zip(self.context_vec(i))
                .map(|(a, b)| a + b)
                .collect(),
            Combine::MainOnly => self.main_vec(i).to_vec(),
        }
    }

    /// Attach words to the final vectors.
    pub fn to_word_vectors(&self, vocab: &Vocabulary, combine: Combine) -> Result<WordVectors> {
        if vocab.checksum() != self.vocab_checksum {
            return Err(Error::VocabMismatch {
                expected: self.vocab_checksum,
                found: vocab.checksum(),
            });
        }
        let data = (0..self.vocab_size as u32)
            .flat_map(|i| self.final_vector(i, combine))
            .collect();
        WordVectors::new(vocab.words().to_vec(), self.dim, data)
    }

    fn check_binding(&self, m: &CooccurrenceMatrix) -> Result<()> {
        if m.vocab_checksum() != self.vocab_checksum {
            return Err(Error::VocabMismatch {
                expected: self.vocab_checksum,
                found: m.vocab_checksum(),
            });
        }
        if m.vocab_size() as usize != self.vocab_size {
            return Err(Error::Dimension(m.vocab_size() as usize, self.vocab_size));
        }
        Ok(())
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn residual(e: &EmbeddingSet, i: u32, j: u32, x: f64) -> f64 {
    dot(e.main_vec(i), e.context_vec(j)) + e.main_bias[i as usize] + e.context_bias[j as usize] - x.ln()
}

/// Weighted squared residual of one entry.
pub fn entry_loss(e: &EmbeddingSet, entry: &Entry, cfg: &TrainConfig) -> f64 {
    let r = residual(e, entry.row, entry.col, entry.mass);
    weight_fn(entry.mass, cfg.x_max, cfg.alpha) * r * r
}

/// Exact objective over every stored entry, summed serially in entry order.
pub fn loss(e: &EmbeddingSet, m: &CooccurrenceMatrix, cfg: &TrainConfig) -> Result<f64> {
    e.check_binding(m)?;
    Ok(m.entries().iter().map(|en| entry_loss(e, en, cfg)).sum())
}

/// [`loss`] summed over `shards` contiguous chunks in parallel.
pub fn loss_parallel(e: &EmbeddingSet, m: &CooccurrenceMatrix, cfg: &TrainConfig, shards: usize) -> Result<f64> {
    e.check_binding(m)?;
    let chunk = m.nnz().div_ceil(shards.max(1)).max(1);
    let partials: Vec<f64> = m
        .entries()
        .par_chunks(chunk)
        .map(|c| c.iter().map(|en| entry_loss(e, en, cfg)).sum())
        .collect();
    Ok(partials.iter().sum())
}

/// Gradient of one entry's loss term.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub main: Vec<f64>,
    pub context: Vec<f64>,
    pub main_bias: f64,
    pub context_bias: f64,
}

/// Gradients of `weight · r²` for entry `(i, j, x)` with an explicit weight.
pub fn weighted_gradients(e: &EmbeddingSet, i: u32, j: u32, x: f64, weight: f64) -> Result<Gradients> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Parameter(format!("co-occurrence mass must be positive, got {x}")));
    }
    let g = 2.0 * weight * residual(e, i, j, x);
    Ok(Gradients {
        main: e.context_vec(j).iter().map(|c| g * c).collect(),
        context: e.main_vec(i).iter().map(|w| g * w).collect(),
        main_bias: g,
        context_bias: g,
    })
}

pub fn gradients(e: &EmbeddingSet, entry: &Entry, cfg: &TrainConfig) -> Result<Gradients> {
    weighted_gradients(
        e,
        entry.row,
        entry.col,
        entry.mass,
        weight_fn(entry.mass.max(0.0), cfg.x_max, cfg.alpha),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub embeddings: EmbeddingSet,
    /// Mean weighted squared residual seen during each epoch.
    pub epoch_loss: Vec<f64>,
}

/// Read/write access to one flat parameter array.
trait Store {
    fn get(&self, k: usize) -> f64;
    fn set(&mut self, k: usize, v: f64);
}

impl Store for &mut [f64] {
    #[inline(always)]
    fn get(&self, k: usize) -> f64 {
        self[k]
    }

    #[inline(always)]
    fn set(&mut self, k: usize, v: f64) {
        self[k] = v;
    }
}

/// Shared array updated by many workers without locks. Relaxed loads and
/// stores: concurrent updates to the same parameter may overwrite each other.
#[derive(Clone, Copy)]
struct Racy<'a>(&'a [AtomicU64]);

impl Store for Racy<'_> {
    #[inline(always)]
    fn get(&self, k: usize) -> f64 {
        f64::from_bits(self.0[k].load(Ordering::Relaxed))
    }

    #[inline(always)]
    fn set(&mut self, k: usize, v: f64) {
        self.0[k].store(v.to_bits(), Ordering::Relaxed);
    }
}

/// Parameters and their AdaGrad accumulators.
struct Params<S> {
    main: S,
    context: S,
    main_bias: S,
    context_bias: S,
    grad_main: S,
    grad_context: S,
    grad_main_bias: S,
    grad_context_bias: S,
}

impl<S: Store> Params<S> {
    /// One AdaGrad step on a single entry; returns the weighted squared residual.
    #[inline]
    fn update(&mut self, en: &Entry, dim: usize, cfg: &TrainConfig) -> f64 {
        let (i, j) = (en.row as usize, en.col as usize);
        let (wi, cj) = (i * dim, j * dim);
        let mut r = self.main_bias.get(i) + self.context_bias.get(j) - en.mass.ln();
        for d in 0..dim {
            r += self.main.get(wi + d) * self.context.get(cj + d);
        }
        let weight = weight_fn(en.mass, cfg.x_max, cfg.alpha);
        let g = 2.0 * weight * r;
        if !g.is_finite() {
            return f64::NAN;
        }
        let lr = cfg.learning_rate;
        for d in 0..dim {
            let (w, c) = (self.main.get(wi + d), self.context.get(cj + d));
            let (gw, gc) = (g * c, g * w);
            let (hw, hc) = (self.grad_main.get(wi + d), self.grad_context.get(cj + d));
            self.main.set(wi + d, w - lr * gw / hw.sqrt());
            self.context.set(cj + d, c - lr * gc / hc.sqrt());
            self.grad_main.set(wi + d, hw + gw * gw);
            self.grad_context.set(cj + d, hc + gc * gc);
        }
        let (hb, hcb) = (self.grad_main_bias.get(i), self.grad_context_bias.get(j));
        self.main_bias.set(i, self.main_bias.get(i) - lr * g / hb.sqrt());
        self.context_bias.set(j, self.context_bias.get(j) - lr * g / hcb.sqrt());
        self.grad_main_bias.set(i, hb + g * g);
        self.grad_context_bias.set(j, hcb + g * g);
        weight * r * r
    }

    /// Run over `order`; on a non-finite update returns the offending entry.
    fn run(&mut self, entries: &[Entry], order: &[u32], dim: usize, cfg: &TrainConfig) -> std::result::Result<f64, Entry> {
        let mut total = 0.0;
        for &k in order {
            let en = &entries[k as usize];
            let l = self.update(en, dim, cfg);
            if !l.is_finite() {
                return Err(*en);
            }
            total += l;
        }
        Ok(total)
    }
}

fn atomics(values: &[f64]) -> Vec<AtomicU64> {
    values.iter().map(|x| AtomicU64::new(x.to_bits())).collect()
}

fn from_atomics(values: &[AtomicU64]) -> Vec<f64> {
    values.iter().map(|a| f64::from_bits(a.load(Ordering::Relaxed))).collect()
}

/// Fit vectors to `m`.
///
/// Parameters start uniform in `±0.5/dim` from `cfg.seed`; every epoch visits
/// all stored entries in a freshly shuffled order. In deterministic mode (or
/// with one thread) updates are applied sequentially; otherwise the shuffled
/// order is split across `cfg.threads` workers that update shared parameters
/// without locks.
pub fn train(m: &CooccurrenceMatrix, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if m.is_empty() {
        return Err(Error::Parameter("co-occurrence matrix has no entries".into()));
    }
    if u32::try_from(m.nnz()).is_err() {
        return Err(Error::Parameter("more than 2^32 co-occurrence entries".into()));
    }
    let dim = cfg.dim;
    let v = m.vocab_size() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut emb = EmbeddingSet::random(v, dim, m.vocab_checksum(), &mut rng);
    let mut grad_main = vec![1.0; v * dim];
    let mut grad_context = vec![1.0; v * dim];
    let mut grad_main_bias = vec![1.0; v];
    let mut grad_context_bias = vec![1.0; v];

    let threads = if cfg.deterministic { 1 } else { cfg.threads.max(1) };
    let entries = m.entries();
    let mut order: Vec<u32> = (0..entries.len() as u32).collect();
    let mut epoch_loss = Vec::with_capacity(cfg.epochs);

    let shared = (threads > 1).then(|| {
        [
            atomics(&emb.main),
            atomics(&emb.context),
            atomics(&emb.main_bias),
            atomics(&emb.context_bias),
            atomics(&grad_main),
            atomics(&grad_context),
            atomics(&grad_main_bias),
            atomics(&grad_context_bias),
        ]
    });

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let outcome = match &shared {
            None => Params {
                main: emb.main.as_mut_slice(),
                context: emb.context.as_mut_slice(),
                main_bias: emb.main_bias.as_mut_slice(),
                context_bias: emb.context_bias.as_mut_slice(),
                grad_main: grad_main.as_mut_slice(),
                grad_context: grad_context.as_mut_slice(),
                grad_main_bias: grad_main_bias.as_mut_slice(),
                grad_context_bias: grad_context_bias.as_mut_slice(),
            }
            .run(entries, &order, dim, cfg),
            Some(arrays) => {
                let chunk = order.len().div_ceil(threads);
                thread::scope(|scope| {
                    let handles: Vec<_> = order
                        .chunks(chunk)
                        .map(|part| {
                            let mut params = Params {
                                main: Racy(&arrays[0]),
                                context: Racy(&arrays[1]),
                                main_bias: Racy(&arrays[2]),
                                context_bias: Racy(&arrays[3]),
                                grad_main: Racy(&arrays[4]),
                                grad_context: Racy(&arrays[5]),
                                grad_main_bias: Racy(&arrays[6]),
                                grad_context_bias: Racy(&arrays[7]),
                            };
                            scope.spawn(move || params.run(entries, part, dim, cfg))
                        })
                        .collect();
                    handles
                        .into_iter()
                        .map(|h| h.join().expect("training worker panicked"))
                        .sum::<std::result::Result<f64, Entry>>()
                })
            }
        };
        let total = outcome.map_err(|en| Error::NonFinite {
            epoch,
            row: en.row,
            col: en.col,
            mass: en.mass,
        })?;
        let mean = total / entries.len() as f64;
        info!("train: epoch {epoch}/{}, mean loss {mean:.6}", cfg.epochs);
        epoch_loss.push(mean);
    }

    if let Some(arrays) = &shared {
        emb.main = from_atomics(&arrays[0]);
        emb.context = from_atomics(&arrays[1]);
        emb.main_bias = from_atomics(&arrays[2]);
        emb.context_bias = from_atomics(&arrays[3]);
    }
    if !emb.all_finite() {
        return Err(Error::Parameter("training produced non-finite parameters".into()));
    }
    Ok(TrainOutcome {
        embeddings: emb,
        epoch_loss,
    })
}
