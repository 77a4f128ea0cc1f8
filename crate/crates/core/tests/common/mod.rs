#![allow(dead_code)]

use std::collections::BTreeMap;

use embias::cooccur::{CooccurrenceMatrix, Vocabulary, Weighting};
use embias::corpus::Document;
use embias::glove::{entry_loss, EmbeddingSet, TrainConfig};
use embias::cooccur::Entry;
use embias::vectors::WordVectors;
use embias::weat::WordSets;
use rand::Rng;

pub const WORDS: [&str; 26] = [
    "ant", "bee", "cat", "dog", "eel", "fox", "gnu", "hen", "ibis", "jay", "kiwi", "lark", "mole", "newt", "owl",
    "pig", "quail", "rat", "seal", "toad", "urchin", "vole", "wasp", "yak", "zebu", "wren",
];

/// Random documents over a small alphabet with a skewed word distribution.
pub fn random_corpus<R: Rng>(rng: &mut R, max_tokens: usize) -> Vec<Vec<String>> {
    let alphabet = rng.gen_range(2..WORDS.len());
    let target = rng.gen_range(1..=max_tokens);
    let mut docs = Vec::new();
    let mut total = 0;
    while total < target {
        let len = rng.gen_range(0..=60.min(target - total).max(1));
        let doc: Vec<String> = (0..len)
            .map(|_| {
                let r: f64 = rng.gen();
                WORDS[((r * r) * alphabet as f64) as usize].to_string()
            })
            .collect();
        total += len.max(1);
        docs.push(doc);
    }
    docs
}

pub fn as_documents(docs: &[Vec<String>]) -> Vec<embias::Result<Document>> {
    docs.iter()
        .enumerate()
        .map(|(i, t)| {
            Ok(Document {
                id: i.to_string(),
                tokens: t.clone(),
            })
        })
        .collect()
}

/// All in-window pairs enumerated directly: every position against every
/// later position up to `window` steps away among in-vocabulary tokens.
/// Pair counts are kept per distance and weighted once at the end.
pub fn brute_force_cooccur(
    docs: &[Vec<String>],
    vocab: &Vocabulary,
    window: usize,
    weighting: Weighting,
) -> BTreeMap<(u32, u32), f64> {
    let mut by_distance: BTreeMap<(u32, u32), Vec<u64>> = BTreeMap::new();
    for doc in docs {
        let ids: Vec<u32> = doc.iter().filter_map(|w| vocab.id(w)).collect();
        for p in 0..ids.len() {
            for q in p + 1..ids.len() {
                let k = q - p;
                if k > window {
                    continue;
                }
                for key in [(ids[p], ids[q]), (ids[q], ids[p])] {
                    by_distance.entry(key).or_insert_with(|| vec![0; window + 1])[k] += 1;
                }
            }
        }
    }
    by_distance
        .into_iter()
        .map(|(key, counts)| {
            let mass = counts
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| match weighting {
                    Weighting::Uniform => c as f64,
                    Weighting::InverseDistance => c as f64 / k as f64,
                })
                .sum();
            (key, mass)
        })
        .collect()
}

/// Largest absolute difference between a matrix and an oracle map, or
/// `None` when their sparsity patterns differ.
pub fn max_abs_diff(m: &CooccurrenceMatrix, oracle: &BTreeMap<(u32, u32), f64>) -> Option<f64> {
    if m.nnz() != oracle.len() {
        return None;
    }
    let mut worst = 0.0f64;
    for e in m.entries() {
        let want = oracle.get(&(e.row, e.col))?;
        worst = worst.max((e.mass - want).abs());
    }
    Some(worst)
}

/// Every parameter of an embedding set, for finite-difference probing.
#[derive(Debug, Clone, Copy)]
pub enum Param {
    Main(usize),
    Context(usize),
    MainBias(usize),
    ContextBias(usize),
}

fn slot(e: &mut EmbeddingSet, p: Param) -> &mut f64 {
    match p {
        Param::Main(k) => &mut e.main[k],
        Param::Context(k) => &mut e.context[k],
        Param::MainBias(k) => &mut e.main_bias[k],
        Param::ContextBias(k) => &mut e.context_bias[k],
    }
}

/// Central difference of one entry's loss with respect to one parameter.
pub fn finite_difference(e: &EmbeddingSet, entry: &Entry, cfg: &TrainConfig, p: Param, h: f64) -> f64 {
    let mut plus = e.clone();
    *slot(&mut plus, p) += h;
    let mut minus = e.clone();
    *slot(&mut minus, p) -= h;
    (entry_loss(&plus, entry, cfg) - entry_loss(&minus, entry, cfg)) / (2.0 * h)
}

pub fn random_embedding_set<R: Rng>(rng: &mut R, v: usize, dim: usize) -> EmbeddingSet {
    let mut e = EmbeddingSet::zeros(v, dim, 0);
    for x in e
        .main
        .iter_mut()
        .chain(e.context.iter_mut())
        .chain(e.main_bias.iter_mut())
        .chain(e.context_bias.iter_mut())
    {
        *x = rng.gen_range(-1.0..1.0);
    }
    e
}

fn cos(u: &[f64], v: &[f64]) -> f64 {
    let d: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    d / (nu * nv)
}

/// Association score recomputed from raw vectors.
pub fn naive_s(e: &WordVectors, w: &str, a: &[String], b: &[String]) -> f64 {
    let v = e.get(w).unwrap();
    let ma = a.iter().map(|x| cos(v, e.get(x).unwrap())).sum::<f64>() / a.len() as f64;
    let mb = b.iter().map(|x| cos(v, e.get(x).unwrap())).sum::<f64>() / b.len() as f64;
    ma - mb
}

/// Exact permutation p-value by walking every bitmask over `X ∪ Y`.
///
/// Partitions are counted when clearly beyond the observed magnitude; the
/// function panics if any partition is too close to call, so a returned
/// value never depends on rounding.
pub fn brute_force_p(e: &WordVectors, ws: &WordSets, two_sided: bool) -> (u64, u64) {
    let pooled: Vec<&String> = ws.x.iter().chain(&ws.y).collect();
    let n = ws.x.len();
    let s: Vec<f64> = pooled.iter().map(|w| naive_s(e, w, &ws.a, &ws.b)).collect();
    let stat = |mask: u32| -> f64 {
        (0..pooled.len())
            .map(|i| if mask >> i & 1 == 1 { s[i] } else { -s[i] })
            .sum()
    };
    let observed = stat((1u32 << n) - 1).abs();
    let (mut count, mut total) = (0u64, 0u64);
    for mask in 0u32..1 << pooled.len() {
        if mask.count_ones() as usize != n {
            continue;
        }
        total += 1;
        let si = stat(mask);
        let v = if two_sided { si.abs() } else { si };
        let gap = v - observed;
        if gap.abs() <= 1e-9 {
            assert!(gap.abs() <= 1e-13 * (1.0 + observed), "partition too close to call: gap {gap:e}");
            continue;
        }
        if gap > 0.0 {
            count += 1;
        }
    }
    (count, total)
}

/// Words named `{prefix}{i}`.
pub fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Random vectors for sets of the given sizes, under names x*, y*, a*, b*.
pub fn random_instance<R: Rng>(rng: &mut R, n: usize, na: usize, nb: usize, dim: usize) -> (WordVectors, WordSets) {
    let sets = WordSets {
        name: "random".into(),
        x: names("x", n),
        y: names("y", n),
        a: names("a", na),
        b: names("b", nb),
        labels: None,
    };
    let pairs: Vec<(String, Vec<f64>)> = sets
        .x
        .iter()
        .chain(&sets.y)
        .chain(&sets.a)
        .chain(&sets.b)
        .map(|w| (w.clone(), (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()))
        .collect();
    (WordVectors::from_pairs(pairs).unwrap(), sets)
}

/// X words lie on the A direction and Y words on the B direction, each with
/// its own positive length, embedded in `dim` dimensions after a random
/// rotation of the first two axes into general position.
pub fn planted_instance<R: Rng>(rng: &mut R, n: usize, dim: usize) -> (WordVectors, WordSets) {
    let sets = WordSets {
        name: "planted".into(),
        x: names("x", n),
        y: names("y", n),
        a: names("a", n),
        b: names("b", n),
        labels: None,
    };
    let u = random_unit(rng, dim);
    let mut v = random_unit(rng, dim);
    let proj: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
    for (vi, ui) in v.iter_mut().zip(&u) {
        *vi -= proj * ui;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut pairs = Vec::new();
    for (group, dir) in [(&sets.x, &u), (&sets.a, &u), (&sets.y, &v), (&sets.b, &v)] {
        for w in group {
            let len = rng.gen_range(0.5..3.0);
            pairs.push((w.clone(), dir.iter().map(|c| c * len).collect::<Vec<f64>>()));
        }
    }
    (WordVectors::from_pairs(pairs).unwrap(), sets)
}

fn random_unit<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// Documents in which each of `targets` appears among words drawn only
/// from its own context group.
pub fn planted_context_corpus<R: Rng>(
    rng: &mut R,
    groups: &[(&[&str], &[&str])],
    docs_per_target: usize,
    doc_len: usize,
) -> Vec<Vec<String>> {
    let mut docs = Vec::new();
    for (targets, contexts) in groups {
        for t in *targets {
            for _ in 0..docs_per_target {
                let pos = rng.gen_range(0..doc_len);
                let doc = (0..doc_len)
                    .map(|k| {
                        if k == pos {
                            t.to_string()
                        } else {
                            contexts[rng.gen_range(0..contexts.len())].to_string()
                        }
                    })
                    .collect();
                docs.push(doc);
            }
        }
    }
    docs
}

/// `Q(a, x)` at 40-digit precision, rows indexed by `a`, columns by x in
/// `GAMMA_X`.
pub const GAMMA_X: [f64; 7] = [0.01, 0.5, 1.0, 3.0, 7.5, 20.0, 60.0];
pub const GAMMA_Q: [(f64, [f64; 7]); 8] = [
    (0.5, [0.8875370839817152, 0.3173105078629141, 0.15729920705028513, 0.01430587843542964, 0.00010751117672950056, 2.539628589470865e-10, 6.326068263677261e-28]),
    (1.0, [0.9900498337491681, 0.6065306597126334, 0.36787944117144233, 0.049787068367863944, 0.0005530843701478336, 2.061153622438558e-09, 8.75651076269652e-27]),
    (1.5, [0.9992522446606088, 0.8012519569012008, 0.5724067044708798, 0.11161022509471256, 0.0018166489665723232, 1.0655090334255861e-08, 7.716790355634159e-26]),
    (2.5, [0.999997012398468, 0.9625657732472964, 0.8491450360846097, 0.3062189184132784, 0.010362337915786437, 1.4933679000503952e-07, 3.138579772755296e-24]),
    (5.0, [0.9999999999991735, 0.9998278843700441, 0.9963401531726563, 0.8152632445237721, 0.1320618562877206, 1.6944743930067385e-05, 5.060046065842574e-21]),
    (10.0, [1.0, 0.999999999829033, 0.9999998885745217, 0.9988975118698845, 0.7764076130197144, 0.004995412308307587, 2.85150775555202e-16]),
    (25.5, [1.0, 1.0, 1.0, 0.999999999999999, 0.9999997990938093, 0.8668774420240073, 1.7288918608233702e-07]),
    (50.0, [1.0, 1.0, 1.0, 1.0, 1.0, 0.9999999875410739, 0.08440668109369183]),
];

/// `(statistic, df, upper tail)` at 40-digit precision.
pub const CHI_SQUARE_TAILS: [(f64, usize, f64); 6] = [
    (6.666666666666667, 1, 0.009823274507519247),
    (46.59, 2, 7.640293532575077e-11),
    (18.83, 1, 1.429016545019469e-05),
    (3.841458820694124, 1, 0.05000000000000006),
    (100.0, 50, 3.454931382984864e-05),
    (0.3, 4, 0.9898141728888165),
];
