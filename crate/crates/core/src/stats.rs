//! Independence tests on labeled contingency tables: Pearson χ², adjusted
//! and plain residuals, and the likelihood-ratio G-test.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Labeled table of nonnegative counts, at least 2×2, with positive margins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    rows: Vec<String>,
    cols: Vec<String>,
    counts: Vec<Vec<u64>>,
}

impl ContingencyTable {
    pub fn new(rows: Vec<String>, cols: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self> {
        if rows.len() < 2 || cols.len() < 2 {
            return Err(Error::Table(format!(
                "need at least a 2x2 table, got {}x{}",
                rows.len(),
                cols.len()
            )));
        }
        if counts.len() != rows.len() || counts.iter().any(|r| r.len() != cols.len()) {
            return Err(Error::Table("counts do not match the row and column labels".into()));
        }
        let t = ContingencyTable { rows, cols, counts };
        if let Some(i) = t.row_sums().iter().position(|&s| s == 0) {
            return Err(Error::Table(format!("row '{}' sums to zero", t.rows[i])));
        }
        if let Some(j) = t.col_sums().iter().position(|&s| s == 0) {
            return Err(Error::Table(format!("column '{}' sums to zero", t.cols[j])));
        }
        Ok(t)
    }

    /// Unlabeled table; rows and columns are named by position.
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let rows = (1..=counts.len()).map(|i| format!("r{i}")).collect();
        let cols = (1..=counts.first().map_or(0, Vec::len)).map(|j| format!("c{j}")).collect();
        Self::new(rows, cols, counts)
    }

    /// CSV with a header of column labels (first cell ignored) and one
    /// labeled row per line.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let cols: Vec<String> = rdr.headers()?.iter().skip(1).map(str::to_string).collect();
        let mut rows = Vec::new();
        let mut counts = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let mut fields = rec.iter();
            rows.push(fields.next().unwrap_or_default().to_string());
            let row = fields
                .map(|f| {
                    f.parse::<u64>()
                        .map_err(|_| Error::Table(format!("line {}: '{f}' is not a nonnegative integer", i + 2)))
                })
                .collect::<Result<Vec<_>>>()?;
            counts.push(row);
        }
        Self::new(rows, cols, counts)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file)
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn cols(&self) -> &[String] {
        &self.cols
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.cols.len()).map(|j| self.counts.iter().map(|r| r[j]).sum()).collect()
    }

    pub fn total(&self) -> u64 {
        self.row_sums().iter().sum()
    }

    pub fn df(&self) -> usize {
        (self.rows.len() - 1) * (self.cols.len() - 1)
    }

    /// Expected counts under independence, `row_i · col_j / n`.
    pub fn expected(&self) -> Vec<Vec<f64>> {
        let n = self.total() as f64;
        let cs = self.col_sums();
        self.row_sums()
            .iter()
            .map(|&r| cs.iter().map(|&c| r as f64 * c as f64 / n).collect())
            .collect()
    }

    fn cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &o)| (i, j, o as f64)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub df: usize,
    pub p: f64,
}

/// Pearson `Σ (O − E)² / E`.
pub fn chi_square(t: &ContingencyTable) -> TestResult {
    let e = t.expected();
    let statistic = t.cells().map(|(i, j, o)| (o - e[i][j]).powi(2) / e[i][j]).sum();
    let df = t.df();
    TestResult {
        statistic,
        df,
        p: chi_square_sf(statistic, df as f64),
    }
}

/// Likelihood ratio `2 Σ O ln(O / E)`; empty cells contribute zero.
pub fn g_test(t: &ContingencyTable) -> TestResult {
    let e = t.expected();
    let sum: f64 = t
        .cells()
        .filter(|&(_, _, o)| o > 0.0)
        .map(|(i, j, o)| o * (o / e[i][j]).ln())
        .sum();
    let statistic = (2.0 * sum).max(0.0);
    let df = t.df();
    TestResult {
        statistic,
        df,
        p: chi_square_sf(statistic, df as f64),
    }
}

/// Adjusted residuals `(O − E) / √(E (1 − row_i/n)(1 − col_j/n))`.
pub fn standardized_residuals(t: &ContingencyTable) -> Vec<Vec<f64>> {
    let e = t.expected();
    let n = t.total() as f64;
    let (rs, cs) = (t.row_sums(), t.col_sums());
    let mut out = vec![vec![0.0; t.cols.len()]; t.rows.len()];
    for (i, j, o) in t.cells() {
        let v = e[i][j] * (1.0 - rs[i] as f64 / n) * (1.0 - cs[j] as f64 / n);
        out[i][j] = (o - e[i][j]) / v.sqrt();
    }
    out
}

/// Plain residuals `(O − E) / √E`; their squares sum to χ².
pub fn pearson_residuals(t: &ContingencyTable) -> Vec<Vec<f64>> {
    let e = t.expected();
    let mut out = vec![vec![0.0; t.cols.len()]; t.rows.len()];
    for (i, j, o) in t.cells() {
        out[i][j] = (o - e[i][j]) / e[i][j].sqrt();
    }
    out
}

/// Upper tail `P(χ²_df > x)`.
pub fn chi_square_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(df / 2.0, x / 2.0)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + k as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 10_000;

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_cf(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 − P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_cf(a, x)
    }
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Modified Lentz evaluation of the continued fraction for `Q(a, x)`.
fn gamma_cf(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}
