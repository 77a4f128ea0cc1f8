//! Association scores, the bias statistic, effect size and permutation
//! p-values over word vectors.
//!
//! For a word `w` and attribute sets `A`, `B`:
//!
//! ```text
//! s(w, A, B)    = mean_a cos(w, a) − mean_b cos(w, b)
//! S(X, Y, A, B) = Σ_x s(x, A, B) − Σ_y s(y, A, B)
//! d             = (mean_x s − mean_y s) / stddev_{X ∪ Y} s
//! ```
//!
//! Significance comes from re-partitioning `X ∪ Y` into two equal halves:
//! exhaustively when the number of partitions is small, by random sampling
//! otherwise.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vectors::WordVectors;
use crate::wordlists;

/// `C(20, 10)`: up to this many partitions are enumerated exactly.
pub const DEFAULT_EXACT_THRESHOLD: u64 = 184_756;
pub const DEFAULT_SHUFFLES: usize = 5000;
const SHUFFLES_PER_TASK: usize = 1000;

/// Two target sets and two attribute sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordSets {
    pub name: String,
    #[serde(rename = "X")]
    pub x: Vec<String>,
    #[serde(rename = "Y")]
    pub y: Vec<String>,
    #[serde(rename = "A")]
    pub a: Vec<String>,
    #[serde(rename = "B")]
    pub b: Vec<String>,
    /// Display names for the four sets, used in report sentences.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<SetLabels>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetLabels {
    #[serde(rename = "X")]
    pub x: String,
    #[serde(rename = "Y")]
    pub y: String,
    #[serde(rename = "A")]
    pub a: String,
    #[serde(rename = "B")]
    pub b: String,
}

impl Default for SetLabels {
    fn default() -> Self {
        SetLabels {
            x: "X".into(),
            y: "Y".into(),
            a: "A".into(),
            b: "B".into(),
        }
    }
}

impl WordSets {
    /// Parse one word-set object or an array of them.
    pub fn parse_json(text: &str) -> Result<Vec<WordSets>> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        if value.is_array() {
            Ok(serde_json::from_value(value)?)
        } else {
            Ok(vec![serde_json::from_value(value)?])
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Vec<WordSets>> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_json(&text)
    }

    pub fn with_targets_swapped(&self) -> WordSets {
        WordSets {
            x: self.y.clone(),
            y: self.x.clone(),
            labels: self.labels.clone().map(|l| SetLabels { x: l.y, y: l.x, ..l }),
            ..self.clone()
        }
    }

    pub fn with_attributes_swapped(&self) -> WordSets {
        WordSets {
            a: self.b.clone(),
            b: self.a.clone(),
            labels: self.labels.clone().map(|l| SetLabels { a: l.b, b: l.a, ..l }),
            ..self.clone()
        }
    }

    /// Match the sets against a vocabulary.
    ///
    /// Repeated words are collapsed. Missing words are dropped with a
    /// warning, or rejected under [`MissingPolicy::Strict`]. If the target
    /// sets then differ in size, the larger one loses its least frequent
    /// words (highest row rank) until both match.
    pub fn resolve(&self, e: &WordVectors, opts: &ResolveOptions) -> Result<ResolvedSets> {
        let mut report = ResolutionReport::default();
        let mut all_missing = Vec::new();
        let mut resolved: Vec<Vec<String>> = Vec::with_capacity(4);
        for (label, words) in [("X", &self.x), ("Y", &self.y), ("A", &self.a), ("B", &self.b)] {
            let mut seen = HashSet::new();
            let mut kept = Vec::new();
            let mut missing = Vec::new();
            for w in words {
                if !seen.insert(w.as_str()) {
                    report.warnings.push(format!("{label}: repeated word '{w}' ignored"));
                    continue;
                }
                if e.contains(w) {
                    kept.push(w.clone());
                } else {
                    missing.push(w.clone());
                }
            }
            if !missing.is_empty() {
                report
                    .warnings
                    .push(format!("{label}: {} word(s) not in vocabulary: {}", missing.len(), missing.join(", ")));
                all_missing.extend(missing.iter().cloned());
                report.missing.insert(label.to_string(), missing);
            }
            resolved.push(kept);
        }
        if opts.policy == MissingPolicy::Strict && !all_missing.is_empty() {
            return Err(Error::MissingWords(all_missing));
        }
        let [mut x, mut y, a, b]: [Vec<String>; 4] = resolved.try_into().expect("four sets");

        if x.len() != y.len() {
            let (label, longer, target) = if x.len() > y.len() {
                ("X", &mut x, y.len())
            } else {
                ("Y", &mut y, x.len())
            };
            let mut by_rank: Vec<(usize, String)> = longer
                .iter()
                .map(|w| (e.rank(w).expect("resolved word"), w.clone()))
                .collect();
            by_rank.sort();
            let dropped: Vec<String> = by_rank[target..].iter().map(|(_, w)| w.clone()).collect();
            longer.retain(|w| !dropped.contains(w));
            report.warnings.push(format!(
                "{label}: trimmed {} least frequent word(s) to equalize target sizes: {}",
                dropped.len(),
                dropped.join(", ")
            ));
            report.trimmed.insert(label.to_string(), dropped);
        }

        let min = opts.min_per_set.max(1);
        let short: Vec<String> = [("X", &x), ("Y", &y), ("A", &a), ("B", &b)]
            .iter()
            .filter(|(_, s)| s.len() < min)
            .map(|(label, s)| {
                let missing = report.missing.get(*label).map(|m| m.join(", ")).unwrap_or_default();
                format!("{label} has {} usable word(s), need {min} (missing: {missing})", s.len())
            })
            .collect();
        if !short.is_empty() {
            return Err(Error::Coverage(format!("{}: {}", self.name, short.join("; "))));
        }
        for w in &report.warnings {
            warn!("{}: {w}", self.name);
        }
        Ok(ResolvedSets {
            sets: WordSets {
                name: self.name.clone(),
                x,
                y,
                a,
                b,
                labels: self.labels.clone(),
            },
            report,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingPolicy {
    /// Drop missing words with a warning.
    #[default]
    Lenient,
    /// Any missing word is an error.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResolveOptions {
    pub policy: MissingPolicy,
    /// Minimum usable words required in each of the four sets.
    pub min_per_set: usize,
}

impl Default for ResolveOptions {
    fn default() -> Self {
        ResolveOptions {
            policy: MissingPolicy::Lenient,
            min_per_set: 1,
        }
    }
}

/// What resolution changed, keyed by set label (`X`, `Y`, `A`, `B`).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolutionReport {
    pub missing: BTreeMap<String, Vec<String>>,
    pub trimmed: BTreeMap<String, Vec<String>>,
    pub warnings: Vec<String>,
}

/// Word sets whose every word has a vector, with `|X| = |Y|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedSets {
    pub sets: WordSets,
    pub report: ResolutionReport,
}

impl ResolvedSets {
    /// Use sets as-is; every word must be present and `|X| = |Y|`.
    pub fn exact(sets: WordSets, e: &WordVectors) -> Result<ResolvedSets> {
        let opts = ResolveOptions {
            policy: MissingPolicy::Strict,
            min_per_set: 1,
        };
        if sets.x.len() != sets.y.len() {
            return Err(Error::UnequalTargets {
                x: sets.x.len(),
                y: sets.y.len(),
            });
        }
        sets.resolve(e, &opts)
    }

    fn targets(&self) -> impl Iterator<Item = &String> {
        self.sets.x.iter().chain(&self.sets.y)
    }
}

/// `Σ uᵢvᵢ / (‖u‖ ‖v‖)`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Dimension(u.len(), v.len()));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    let c = dot(u, v) / (nu * nv);
    Ok(c.clamp(-1.0, 1.0))
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

fn lookup<'a>(e: &'a WordVectors, w: &str) -> Result<&'a [f64]> {
    e.get(w).ok_or_else(|| Error::MissingWords(vec![w.to_string()]))
}

fn unit(v: &[f64]) -> Result<Vec<f64>> {
    let n = norm(v);
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(v.iter().map(|x| x / n).collect())
}

/// Unit vectors of one attribute set, for repeated mean-cosine queries.
struct Attribute {
    units: Vec<Vec<f64>>,
}

impl Attribute {
    fn new(words: &[String], e: &WordVectors) -> Result<Self> {
        let missing: Vec<String> = words.iter().filter(|w| !e.contains(w)).cloned().collect();
        if !missing.is_empty() {
            return Err(Error::MissingWords(missing));
        }
        if words.is_empty() {
            return Err(Error::Parameter("attribute set is empty".into()));
        }
        let units = words
            .iter()
            .map(|w| unit(lookup(e, w)?))
            .collect::<Result<_>>()?;
        Ok(Attribute { units })
    }

    /// Mean cosine between `w` and the attribute words.
    fn mean_cosine(&self, w: &[f64]) -> Result<f64> {
        let w = unit(w)?;
        let total: f64 = self.units.iter().map(|a| dot(&w, a).clamp(-1.0, 1.0)).sum();
        Ok(total / self.units.len() as f64)
    }
}

/// `s(w, A, B)`: mean cosine of `w` to `A` minus mean cosine to `B`.
pub fn assoc_s(w: &str, a: &[String], b: &[String], e: &WordVectors) -> Result<f64> {
    let v = lookup(e, w)?;
    let (a, b) = (Attribute::new(a, e)?, Attribute::new(b, e)?);
    Ok(a.mean_cosine(v)? - b.mean_cosine(v)?)
}

/// Sum and mean of `s(t, A, B)` over a target set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetSimilarity {
    pub sum: f64,
    pub mean: f64,
}

impl NetSimilarity {
    fn of(values: &[f64]) -> Self {
        let sum: f64 = values.iter().sum();
        NetSimilarity {
            sum,
            mean: if values.is_empty() { 0.0 } else { sum / values.len() as f64 },
        }
    }
}

fn scores(words: &[String], a: &Attribute, b: &Attribute, e: &WordVectors) -> Result<Vec<f64>> {
    words
        .iter()
        .map(|w| {
            let v = lookup(e, w)?;
            Ok(a.mean_cosine(v)? - b.mean_cosine(v)?)
        })
        .collect()
}

fn mean_cosines(words: &[String], attr: &Attribute, e: &WordVectors) -> Result<Vec<f64>> {
    words.iter().map(|w| attr.mean_cosine(lookup(e, w)?)).collect()
}

/// Net similarity of target set `t`: `Σ_t s(t, A, B)` (and its mean).
pub fn net_similarity(t: &[String], a: &[String], b: &[String], e: &WordVectors) -> Result<NetSimilarity> {
    let (a, b) = (Attribute::new(a, e)?, Attribute::new(b, e)?);
    Ok(NetSimilarity::of(&scores(t, &a, &b, e)?))
}

/// `S(X, Y, A, B)`; positive when `X` leans toward `A` more than `Y` does.
pub fn test_statistic(ws: &ResolvedSets, e: &WordVectors) -> Result<f64> {
    let s = &ws.sets;
    Ok(net_similarity(&s.x, &s.a, &s.b, e)?.sum - net_similarity(&s.y, &s.a, &s.b, e)?.sum)
}

/// Standard deviation convention for the effect size denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StdDev {
    /// Divide by `n − 1`.
    #[default]
    Sample,
    /// Divide by `n`.
    Population,
}

fn std_dev(values: &[f64], convention: StdDev) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    let denom = match convention {
        StdDev::Sample => n - 1.0,
        StdDev::Population => n,
    };
    (ss / denom).sqrt()
}

/// Effect size from pooled per-word scores, `X` first then `Y`.
pub fn effect_size_of_scores(x: &[f64], y: &[f64], convention: StdDev) -> Result<f64> {
    if x.is_empty() || y.is_empty() || x.len() + y.len() < 3 {
        return Err(Error::Parameter("effect size needs |X ∪ Y| ≥ 3 with both sets nonempty".into()));
    }
    let mx = x.iter().sum::<f64>() / x.len() as f64;
    let my = y.iter().sum::<f64>() / y.len() as f64;
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let sd = std_dev(&pooled, convention);
    let scale = pooled.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if sd <= 1e-14 * scale.max(f64::MIN_POSITIVE) || sd == 0.0 {
        return Err(Error::NoSpread);
    }
    Ok((mx - my) / sd)
}

/// Cohen's-d style effect size of the association difference.
pub fn effect_size(ws: &ResolvedSets, e: &WordVectors, convention: StdDev) -> Result<f64> {
    let s = &ws.sets;
    let (a, b) = (Attribute::new(&s.a, e)?, Attribute::new(&s.b, e)?);
    effect_size_of_scores(&scores(&s.x, &a, &b, e)?, &scores(&s.y, &a, &b, e)?, convention)
}

/// Which partitions count as at least as extreme as the observed one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tail {
    /// `|S_i| > |S|`.
    #[default]
    TwoSided,
    /// `S_i > |S|`, the upper tail only.
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermutationOptions {
    pub n_shuffles: usize,
    pub seed: u64,
    pub exact_threshold: u64,
    pub tail: Tail,
}

impl Default for PermutationOptions {
    fn default() -> Self {
        PermutationOptions {
            n_shuffles: DEFAULT_SHUFFLES,
            seed: 42,
            exact_threshold: DEFAULT_EXACT_THRESHOLD,
            tail: Tail::TwoSided,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PMode {
    Exact { partitions: u64 },
    Sampled { shuffles: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PValue {
    pub p: f64,
    pub mode: PMode,
    /// Partitions (or samples) strictly more extreme than observed.
    pub extreme: u64,
}

/// `C(n, k)`, saturating at `u64::MAX`.
pub fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Permutation test on pooled scores, the first `n_x` belonging to `X`.
///
/// A partition counts when its statistic exceeds the observed magnitude by
/// more than a rounding tolerance, so exact ties never count.
pub fn permutation_test(scores: &[f64], n_x: usize, opts: &PermutationOptions) -> Result<PValue> {
    let n_y = scores.len() - n_x.min(scores.len());
    if n_x != n_y {
        return Err(Error::UnequalTargets { x: n_x, y: n_y });
    }
    if n_x == 0 {
        return Err(Error::Parameter("target sets are empty".into()));
    }
    let total: f64 = scores.iter().sum();
    let observed = scores[..n_x].iter().sum::<f64>() - scores[n_x..].iter().sum::<f64>();
    let scale: f64 = scores.iter().map(|s| s.abs()).sum();
    let threshold = observed.abs() + 1e-12 * scale.max(f64::MIN_POSITIVE);
    let tail = opts.tail;
    let extreme = move |sum_x: f64| {
        let s = 2.0 * sum_x - total;
        match tail {
            Tail::TwoSided => s.abs() > threshold,
            Tail::Upper => s > threshold,
        }
    };

    let partitions = binomial(scores.len() as u64, n_x as u64);
    if partitions <= opts.exact_threshold {
        let mut count = 0u64;
        enumerate_sums(scores, n_x, &mut |sum| {
            if extreme(sum) {
                count += 1;
            }
        });
        return Ok(PValue {
            p: count as f64 / partitions as f64,
            mode: PMode::Exact { partitions },
            extreme: count,
        });
    }

    if opts.n_shuffles == 0 {
        return Err(Error::Parameter("n_shuffles must be at least 1".into()));
    }
    let tasks = opts.n_shuffles.div_ceil(SHUFFLES_PER_TASK);
    let count: u64 = (0..tasks)
        .into_par_iter()
        .map(|task| {
            let n = SHUFFLES_PER_TASK.min(opts.n_shuffles - task * SHUFFLES_PER_TASK);
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(task as u64);
            let mut pool = scores.to_vec();
            let mut c = 0u64;
            for _ in 0..n {
                let (chosen, _) = pool.partial_shuffle(&mut rng, n_x);
                if extreme(chosen.iter().sum()) {
                    c += 1;
                }
            }
            c
        })
        .sum();
    Ok(PValue {
        p: (count + 1) as f64 / (opts.n_shuffles + 1) as f64,
        mode: PMode::Sampled {
            shuffles: opts.n_shuffles,
        },
        extreme: count,
    })
}

/// Call `visit` with the score sum of every `k`-subset of `scores`.
fn enumerate_sums(scores: &[f64], k: usize, visit: &mut impl FnMut(f64)) {
    fn rec(scores: &[f64], start: usize, left: usize, sum: f64, visit: &mut impl FnMut(f64)) {
        if left == 0 {
            visit(sum);
            return;
        }
        for i in start..=scores.len() - left {
            rec(scores, i + 1, left - 1, sum + scores[i], visit);
        }
    }
    rec(scores, 0, k, 0.0, visit);
}

/// Permutation p-value for the bias statistic of `ws`.
pub fn permutation_pvalue(ws: &ResolvedSets, e: &WordVectors, opts: &PermutationOptions) -> Result<PValue> {
    let s = &ws.sets;
    if s.x.len() != s.y.len() {
        return Err(Error::UnequalTargets {
            x: s.x.len(),
            y: s.y.len(),
        });
    }
    let (a, b) = (Attribute::new(&s.a, e)?, Attribute::new(&s.b, e)?);
    let pooled: Vec<String> = ws.targets().cloned().collect();
    permutation_test(&scores(&pooled, &a, &b, e)?, s.x.len(), opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WeatOptions {
    pub permutation: PermutationOptions,
    pub stddev: StdDev,
    pub resolve: ResolveOptions,
}

/// How strongly each target set associates with one attribute set alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeAssociation {
    /// `A` or `B`.
    pub attribute: String,
    /// `Σ_x mean_a cos(x, a)`
    pub x_sum: f64,
    pub y_sum: f64,
    pub x_mean: f64,
    pub y_mean: f64,
    /// `None` when every target word has the same similarity.
    pub effect_size: Option<f64>,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeatResult {
    pub name: String,
    pub statistic: f64,
    pub effect_size: f64,
    pub stddev_convention: StdDev,
    pub p_value: f64,
    pub p_mode: PMode,
    pub tail: Tail,
    pub extreme_count: u64,
    pub per_word_s: BTreeMap<String, f64>,
    pub net_sim_x: NetSimilarity,
    pub net_sim_y: NetSimilarity,
    pub decomposition: Vec<AttributeAssociation>,
    pub seed: u64,
    /// The words actually used after resolution.
    pub sets: WordSets,
    pub resolution: ResolutionReport,
}

impl WeatResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<WeatResult> {
        Ok(serde_json::from_str(text)?)
    }
}

fn association(
    label: &str,
    attr: &Attribute,
    ws: &ResolvedSets,
    e: &WordVectors,
    opts: &WeatOptions,
) -> Result<AttributeAssociation> {
    let x = mean_cosines(&ws.sets.x, attr, e)?;
    let y = mean_cosines(&ws.sets.y, attr, e)?;
    let (nx, ny) = (NetSimilarity::of(&x), NetSimilarity::of(&y));
    let effect_size = match effect_size_of_scores(&x, &y, opts.stddev) {
        Ok(d) => Some(d),
        Err(Error::NoSpread) => None,
        Err(err) => return Err(err),
    };
    let pooled: Vec<f64> = x.iter().chain(&y).copied().collect();
    let p = permutation_test(&pooled, x.len(), &opts.permutation)?;
    Ok(AttributeAssociation {
        attribute: label.to_string(),
        x_sum: nx.sum,
        y_sum: ny.sum,
        x_mean: nx.mean,
        y_mean: ny.mean,
        effect_size,
        p_value: p.p,
    })
}

/// Full association test on resolved sets.
pub fn run_weat(ws: &ResolvedSets, e: &WordVectors, opts: &WeatOptions) -> Result<WeatResult> {
    let s = &ws.sets;
    let (a, b) = (Attribute::new(&s.a, e)?, Attribute::new(&s.b, e)?);
    let sx = scores(&s.x, &a, &b, e)?;
    let sy = scores(&s.y, &a, &b, e)?;
    let (net_x, net_y) = (NetSimilarity::of(&sx), NetSimilarity::of(&sy));
    let effect_size = effect_size_of_scores(&sx, &sy, opts.stddev)?;
    let pooled: Vec<f64> = sx.iter().chain(&sy).copied().collect();
    let p = permutation_test(&pooled, sx.len(), &opts.permutation)?;
    let per_word_s = ws.targets().cloned().zip(pooled.iter().copied()).collect();
    let decomposition = vec![
        association("A", &a, ws, e, opts)?,
        association("B", &b, ws, e, opts)?,
    ];
    Ok(WeatResult {
        name: s.name.clone(),
        statistic: net_x.sum - net_y.sum,
        effect_size,
        stddev_convention: opts.stddev,
        p_value: p.p,
        p_mode: p.mode,
        tail: opts.permutation.tail,
        extreme_count: p.extreme,
        per_word_s,
        net_sim_x: net_x,
        net_sim_y: net_y,
        decomposition,
        seed: opts.permutation.seed,
        sets: s.clone(),
        resolution: ws.report.clone(),
    })
}

/// Resolve `sets` against `e` and run the test.
pub fn run_sets(sets: &WordSets, e: &WordVectors, opts: &WeatOptions) -> Result<WeatResult> {
    run_weat(&sets.resolve(e, &opts.resolve)?, e, opts)
}

/// Flowers versus insects against pleasant and unpleasant words. A sound
/// embedding of natural text should give a positive effect size.
pub fn validation_test(e: &WordVectors, opts: &WeatOptions) -> Result<WeatResult> {
    let mut opts = *opts;
    opts.resolve.min_per_set = opts.resolve.min_per_set.max(2);
    run_sets(&wordlists::validation_sets(), e, &opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(ws: &[&str]) -> Vec<String> {
        ws.iter().map(|s| s.to_string()).collect()
    }

    fn toy() -> WordVectors {
        WordVectors::from_pairs([
            ("x1", vec![1.0, 0.2, 0.0]),
            ("x2", vec![0.9, -0.1, 0.3]),
            ("y1", vec![0.1, 1.0, 0.2]),
            ("y2", vec![-0.2, 0.8, 0.5]),
            ("a1", vec![1.0, 0.0, 0.0]),
            ("b1", vec![0.0, 1.0, 0.0]),
            ("zero", vec![0.0, 0.0, 0.0]),
        ])
        .unwrap()
    }

    fn toy_sets() -> WordSets {
        WordSets {
            name: "toy".into(),
            x: words(&["x1", "x2"]),
            y: words(&["y1", "y2"]),
            a: words(&["a1"]),
            b: words(&["b1"]),
            labels: None,
        }
    }

    #[test]
    fn cosine_examples() {
        let v = [0.3, -1.2, 4.0];
        assert!((cosine(&v, &v).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(cosine(&[1.0, 2.0, 3.0], &[-1.0, -2.0, -3.0]).unwrap(), -1.0);
        assert!(matches!(cosine(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::ZeroVector)));
        assert!(matches!(cosine(&[1.0], &[1.0, 0.0]), Err(Error::Dimension(1, 2))));
    }

    #[test]
    fn assoc_examples() {
        let e = WordVectors::from_pairs([("w", vec![1.0, 0.0]), ("a", vec![1.0, 0.0]), ("b", vec![0.0, 1.0])]).unwrap();
        assert_eq!(assoc_s("w", &words(&["a"]), &words(&["b"]), &e).unwrap(), 1.0);
        assert_eq!(assoc_s("w", &words(&["a", "b"]), &words(&["a", "b"]), &e).unwrap(), 0.0);
        let err = assoc_s("ghost", &words(&["a"]), &words(&["b"]), &e).unwrap_err();
        assert!(err.to_string().contains("ghost"));
    }

    #[test]
    fn zero_vector_word_is_an_error() {
        let e = toy();
        assert!(matches!(
            assoc_s("zero", &words(&["a1"]), &words(&["b1"]), &e),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn statistic_basic_identities() {
        let e = toy();
        let ws = ResolvedSets::exact(toy_sets(), &e).unwrap();
        let s = test_statistic(&ws, &e).unwrap();
        assert!(s > 0.0);
        let swapped = ResolvedSets::exact(toy_sets().with_targets_swapped(), &e).unwrap();
        assert_eq!(test_statistic(&swapped, &e).unwrap(), -s);
        let same = ResolvedSets::exact(
            WordSets {
                y: words(&["x1", "x2"]),
                ..toy_sets()
            },
            &e,
        )
        .unwrap();
        assert_eq!(test_statistic(&same, &e).unwrap(), 0.0);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(16, 8), 12_870);
        assert_eq!(binomial(20, 10), DEFAULT_EXACT_THRESHOLD);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(200, 100), u64::MAX);
    }

    #[test]
    fn six_words_enumerate_twenty_partitions() {
        let scores = [0.3, 0.1, 0.25, -0.2, 0.05, -0.1];
        let p = permutation_test(&scores, 3, &PermutationOptions::default()).unwrap();
        assert_eq!(p.mode, PMode::Exact { partitions: 20 });
        let mut n = 0;
        enumerate_sums(&scores, 3, &mut |_| n += 1);
        assert_eq!(n, 20);
    }

    #[test]
    fn identical_scores_give_zero_p() {
        let p = permutation_test(&[0.4; 6], 3, &PermutationOptions::default()).unwrap();
        assert_eq!(p.p, 0.0);
        assert_eq!(p.extreme, 0);
    }

    #[test]
    fn unequal_targets_are_rejected() {
        assert!(matches!(
            permutation_test(&[0.1, 0.2, 0.3], 1, &PermutationOptions::default()),
            Err(Error::UnequalTargets { x: 1, y: 2 })
        ));
    }

    #[test]
    fn two_sided_count_is_twice_upper_count() {
        let scores = [0.31, -0.12, 0.27, 0.05, -0.33, 0.11, 0.02, -0.07];
        let two = permutation_test(&scores, 4, &PermutationOptions::default()).unwrap();
        let upper = permutation_test(
            &scores,
            4,
            &PermutationOptions {
                tail: Tail::Upper,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(two.extreme, 2 * upper.extreme);
    }

    #[test]
    fn sampled_mode_is_seeded_and_smoothed() {
        let scores: Vec<f64> = (0..30).map(|i| ((i * 37) % 11) as f64 / 10.0 - 0.5).collect();
        let opts = PermutationOptions {
            n_shuffles: 2500,
            seed: 7,
            ..Default::default()
        };
        let a = permutation_test(&scores, 15, &opts).unwrap();
        let b = permutation_test(&scores, 15, &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.mode, PMode::Sampled { shuffles: 2500 });
        assert_eq!(a.p, (a.extreme + 1) as f64 / 2501.0);
    }

    #[test]
    fn effect_size_two_point_closed_form() {
        let x = [1.0; 4];
        let y = [-1.0; 4];
        let pop = effect_size_of_scores(&x, &y, StdDev::Population).unwrap();
        assert!((pop - 2.0).abs() < 1e-15);
        let sample = effect_size_of_scores(&x, &y, StdDev::Sample).unwrap();
        // Sample sd of {±1 × n} is sqrt(2n / (2n − 1)).
        assert!((sample - 2.0 / (8.0f64 / 7.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn effect_size_errors() {
        assert!(matches!(
            effect_size_of_scores(&[0.5, 0.5], &[0.5, 0.5], StdDev::Sample),
            Err(Error::NoSpread)
        ));
        assert!(matches!(
            effect_size_of_scores(&[0.5], &[0.1], StdDev::Sample),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn resolve_drops_missing_and_trims_least_frequent() {
        let e = toy();
        let sets = WordSets {
            name: "t".into(),
            x: words(&["x1", "x2", "y2"]),
            y: words(&["y1", "ghost"]),
            a: words(&["a1", "nope"]),
            b: words(&["b1", "b1"]),
            labels: None,
        };
        let r = sets.resolve(&e, &ResolveOptions::default()).unwrap();
        assert_eq!(r.sets.y, ["y1"]);
        // x1 is the most frequent (row 0), so it survives.
        assert_eq!(r.sets.x, ["x1"]);
        assert_eq!(r.sets.a, ["a1"]);
        assert_eq!(r.sets.b, ["b1"]);
        assert_eq!(r.report.missing["Y"], ["ghost"]);
        assert_eq!(r.report.missing["A"], ["nope"]);
        assert_eq!(r.report.trimmed["X"], ["x2", "y2"]);
        assert!(r.report.warnings.iter().any(|w| w.contains("repeated")));
    }

    #[test]
    fn strict_policy_rejects_missing() {
        let e = toy();
        let sets = WordSets {
            a: words(&["a1", "nope"]),
            ..toy_sets()
        };
        let opts = ResolveOptions {
            policy: MissingPolicy::Strict,
            ..Default::default()
        };
        assert!(matches!(sets.resolve(&e, &opts), Err(Error::MissingWords(w)) if w == ["nope"]));
    }

    #[test]
    fn empty_after_resolution_is_coverage_error() {
        let e = toy();
        let sets = WordSets {
            b: words(&["nope"]),
            ..toy_sets()
        };
        let err = sets.resolve(&e, &ResolveOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Coverage(ref m) if m.contains("nope")), "{err}");
    }

    #[test]
    fn run_weat_fields_are_consistent() {
        let e = toy();
        let ws = ResolvedSets::exact(toy_sets(), &e).unwrap();
        let r = run_weat(&ws, &e, &WeatOptions::default()).unwrap();
        assert_eq!(r.statistic, r.net_sim_x.sum - r.net_sim_y.sum);
        assert_eq!(r.per_word_s.len(), 4);
        assert_eq!(r.p_mode, PMode::Exact { partitions: 6 });
        assert_eq!(r.decomposition.len(), 2);
        let da = &r.decomposition[0];
        let db = &r.decomposition[1];
        assert!(((da.x_sum - db.x_sum) - r.net_sim_x.sum).abs() < 1e-12);
        assert!(((da.y_sum - db.y_sum) - r.net_sim_y.sum).abs() < 1e-12);
        let back = WeatResult::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn word_sets_json_schema() {
        let text = r#"{"name": "n", "X": ["a"], "Y": ["b"], "A": ["c"], "B": ["d"]}"#;
        let sets = WordSets::parse_json(text).unwrap();
        assert_eq!(sets.len(), 1);
        assert_eq!(sets[0].x, ["a"]);
        let arr = format!("[{text}, {text}]");
        assert_eq!(WordSets::parse_json(&arr).unwrap().len(), 2);
        assert!(WordSets::parse_json(r#"{"name": "n", "X": []}"#).is_err());
    }
}
