//! Audit reports: a JSON document assembled from test results, and a
//! Markdown rendering of it.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::numfmt::{format_sig, round_sig};
use crate::weat::{PMode, SetLabels, StdDev, Tail, WeatResult};

/// Significant digits kept for every float in a report.
pub const REPORT_DIGITS: usize = 6;
pub const SCHEMA_ID: &str = "embias-report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema: String,
    pub metadata: BTreeMap<String, Value>,
    pub comparisons: Vec<Comparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Comparison {
    pub name: String,
    pub labels: SetLabels,
    pub sizes: SetSizes,
    pub statistic: f64,
    pub effect_size: f64,
    pub stddev_convention: StdDev,
    pub p_value: f64,
    pub p_mode: PMode,
    pub tail: Tail,
    pub seed: u64,
    pub net_similarity: NetSimilarityTable,
    pub attribute_tests: AttributeTests,
    pub direction: Direction,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetSizes {
    #[serde(rename = "X")]
    pub x: usize,
    #[serde(rename = "Y")]
    pub y: usize,
    #[serde(rename = "A")]
    pub a: usize,
    #[serde(rename = "B")]
    pub b: usize,
}

/// Summed similarity of each target set to each attribute set, and the
/// resulting net (`A − B`) similarity per target set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetSimilarityTable {
    pub x_a: f64,
    pub x_b: f64,
    pub y_a: f64,
    pub y_b: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeTest {
    pub effect_size: Option<f64>,
    pub p_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeTests {
    #[serde(rename = "A")]
    pub a: AttributeTest,
    #[serde(rename = "B")]
    pub b: AttributeTest,
}

/// Which target and attribute pairing contributes most to the statistic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Direction {
    /// `X` or `Y`; absent when there is no direction.
    pub target: Option<String>,
    /// `A` or `B`; absent when there is no direction.
    pub attribute: Option<String>,
    pub sentence: String,
}

pub const NO_DIRECTION: &str = "no direction";

/// The statistic splits as `S = (XA − YA) + (YB − XB)`. The larger of the
/// two gaps (on the side of the sign of `S`) names the driver; ties go to
/// the `A` term, including gaps equal up to rounding.
pub fn direction(table: &NetSimilarityTable, statistic: f64, labels: &SetLabels) -> Direction {
    let scale = table.x.abs() + table.y.abs();
    if statistic == 0.0 || statistic.abs() <= 1e-12 * scale {
        return Direction {
            target: None,
            attribute: None,
            sentence: NO_DIRECTION.to_string(),
        };
    }
    let gap_a = table.x_a - table.y_a;
    let gap_b = table.y_b - table.x_b;
    let tol = 1e-12 * scale;
    let (target, attribute) = if statistic > 0.0 {
        if gap_a >= gap_b - tol {
            ("X", "A")
        } else {
            ("Y", "B")
        }
    } else if -gap_a >= -gap_b - tol {
        ("Y", "A")
    } else {
        ("X", "B")
    };
    let name = |k: &str| match k {
        "X" => labels.x.as_str(),
        "Y" => labels.y.as_str(),
        "A" => labels.a.as_str(),
        _ => labels.b.as_str(),
    };
    Direction {
        target: Some(target.to_string()),
        attribute: Some(attribute.to_string()),
        sentence: format!(
            "bias driven by higher association of {} with {}",
            name(target),
            name(attribute)
        ),
    }
}

fn r(x: f64) -> f64 {
    round_sig(x, REPORT_DIGITS)
}

fn comparison(res: &WeatResult) -> Result<Comparison> {
    let [da, db] = res.decomposition.as_slice() else {
        return Err(Error::Format(format!(
            "{}: expected two attribute decompositions, found {}",
            res.name,
            res.decomposition.len()
        )));
    };
    let exact = NetSimilarityTable {
        x_a: da.x_sum,
        x_b: db.x_sum,
        y_a: da.y_sum,
        y_b: db.y_sum,
        x: res.net_sim_x.sum,
        y: res.net_sim_y.sum,
    };
    let labels = res.sets.labels.clone().unwrap_or_default();
    let direction = direction(&exact, res.statistic, &labels);
    let test = |d: &crate::weat::AttributeAssociation| AttributeTest {
        effect_size: d.effect_size.map(r),
        p_value: r(d.p_value),
    };
    let mut warnings = res.resolution.warnings.clone();
    if res.sets.x.len() < 2 || res.sets.y.len() < 2 {
        warnings.push("fewer than two words per target set".into());
    }
    Ok(Comparison {
        name: res.name.clone(),
        labels,
        sizes: SetSizes {
            x: res.sets.x.len(),
            y: res.sets.y.len(),
            a: res.sets.a.len(),
            b: res.sets.b.len(),
        },
        statistic: r(res.statistic),
        effect_size: r(res.effect_size),
        stddev_convention: res.stddev_convention,
        p_value: r(res.p_value),
        p_mode: res.p_mode,
        tail: res.tail,
        seed: res.seed,
        net_similarity: NetSimilarityTable {
            x_a: r(exact.x_a),
            x_b: r(exact.x_b),
            y_a: r(exact.y_a),
            y_b: r(exact.y_b),
            x: r(exact.x),
            y: r(exact.y),
        },
        attribute_tests: AttributeTests {
            a: test(da),
            b: test(db),
        },
        direction,
        warnings,
    })
}

/// Assemble a report; floats are rounded to [`REPORT_DIGITS`] significant
/// digits.
pub fn compose_report(results: &[WeatResult], metadata: BTreeMap<String, Value>) -> Result<Report> {
    if results.is_empty() {
        return Err(Error::Parameter("a report needs at least one result".into()));
    }
    Ok(Report {
        schema: SCHEMA_ID.to_string(),
        metadata,
        comparisons: results.iter().map(comparison).collect::<Result<_>>()?,
    })
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Parse and check a report document.
    pub fn from_json(text: &str) -> Result<Report> {
        let report: Report = serde_json::from_str(text)?;
        report.validate()?;
        Ok(report)
    }

    /// Check the constraints serde cannot express.
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, msg: &str| Err(Error::Format(format!("report comparison '{name}': {msg}")));
        if self.schema != SCHEMA_ID {
            return Err(Error::Format(format!("unknown report schema '{}'", self.schema)));
        }
        if self.comparisons.is_empty() {
            return Err(Error::Format("report has no comparisons".into()));
        }
        for c in &self.comparisons {
            let n = &c.net_similarity;
            let floats = [c.statistic, c.effect_size, c.p_value, n.x_a, n.x_b, n.y_a, n.y_b, n.x, n.y];
            if floats.iter().any(|x| !x.is_finite()) {
                return bad(&c.name, "non-finite value");
            }
            let ps = [c.p_value, c.attribute_tests.a.p_value, c.attribute_tests.b.p_value];
            if ps.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return bad(&c.name, "p-value outside [0, 1]");
            }
            if c.sizes.x != c.sizes.y || c.sizes.x == 0 || c.sizes.a == 0 || c.sizes.b == 0 {
                return bad(&c.name, "set sizes must be positive with |X| = |Y|");
            }
            let d = &c.direction;
            let valid = match (d.target.as_deref(), d.attribute.as_deref()) {
                (None, None) => d.sentence == NO_DIRECTION,
                (Some("X" | "Y"), Some("A" | "B")) => d.sentence.starts_with("bias driven by"),
                _ => false,
            };
            if !valid {
                return bad(&c.name, "inconsistent direction");
            }
        }
        Ok(())
    }

    pub fn to_markdown(&self) -> String {
        let f = |x: f64| format_sig(x, REPORT_DIGITS);
        let mut md = String::from("# Association bias audit\n\n");
        if !self.metadata.is_empty() {
            md.push_str("| Setting | Value |\n|---|---|\n");
            for (k, v) in &self.metadata {
                let v = match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                let _ = writeln!(md, "| {k} | {v} |");
            }
            md.push('\n');
        }
        md.push_str("| Comparison | S | d | p | Direction |\n|---|---|---|---|---|\n");
        for c in &self.comparisons {
            let _ = writeln!(
                md,
                "| {} | {} | {} | {} | {} |",
                c.name,
                f(c.statistic),
                f(c.effect_size),
                f(c.p_value),
                c.direction.sentence
            );
        }
        for c in &self.comparisons {
            let l = &c.labels;
            let n = &c.net_similarity;
            let _ = writeln!(md, "\n## {}\n", c.name);
            let _ = writeln!(
                md,
                "{} ({}) vs {} ({}), against {} ({}) and {} ({}).\n",
                l.x, c.sizes.x, l.y, c.sizes.y, l.a, c.sizes.a, l.b, c.sizes.b
            );
            let mode = match c.p_mode {
                PMode::Exact { partitions } => format!("exact over {partitions} partitions"),
                PMode::Sampled { shuffles } => format!("{shuffles} sampled shuffles"),
            };
            let sd = match c.stddev_convention {
                StdDev::Sample => "sample",
                StdDev::Population => "population",
            };
            let tail = match c.tail {
                Tail::TwoSided => "two-sided",
                Tail::Upper => "upper tail",
            };
            let _ = writeln!(
                md,
                "S = {}, d = {} ({sd} sd), p = {} ({tail}, {mode}, seed {}).\n",
                f(c.statistic),
                f(c.effect_size),
                f(c.p_value),
                c.seed
            );
            let _ = writeln!(md, "| Net similarity | {} | {} | {} − {} |", l.a, l.b, l.a, l.b);
            md.push_str("|---|---|---|---|\n");
            let _ = writeln!(md, "| {} | {} | {} | {} |", l.x, f(n.x_a), f(n.x_b), f(n.x));
            let _ = writeln!(md, "| {} | {} | {} | {} |", l.y, f(n.y_a), f(n.y_b), f(n.y));
            let t = &c.attribute_tests;
            let d = |x: Option<f64>| x.map_or("n/a".to_string(), f);
            let _ = writeln!(
                md,
                "\n{} vs {} on {} alone: d = {}, p = {}. On {} alone: d = {}, p = {}.\n",
                l.x,
                l.y,
                l.a,
                d(t.a.effect_size),
                f(t.a.p_value),
                l.b,
                d(t.b.effect_size),
                f(t.b.p_value)
            );
            let _ = writeln!(md, "Direction: {}.", c.direction.sentence);
            if !c.warnings.is_empty() {
                md.push_str("\nWarnings:\n\n");
                for w in &c.warnings {
                    let _ = writeln!(md, "- {w}");
                }
            }
        }
        md
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels() -> SetLabels {
        SetLabels {
            x: "men".into(),
            y: "women".into(),
            a: "career".into(),
            b: "family".into(),
        }
    }

    fn table(x_a: f64, x_b: f64, y_a: f64, y_b: f64) -> NetSimilarityTable {
        NetSimilarityTable {
            x_a,
            x_b,
            y_a,
            y_b,
            x: x_a - x_b,
            y: y_a - y_b,
        }
    }

    #[test]
    fn zero_statistic_has_no_direction() {
        let d = direction(&table(0.5, 0.2, 0.5, 0.2), 0.0, &labels());
        assert_eq!(d.sentence, NO_DIRECTION);
        assert_eq!(d.target, None);
    }

    #[test]
    fn career_gap_dominates() {
        let t = table(1.244, 1.508, 0.694, 1.617);
        let s = t.x - t.y;
        let d = direction(&t, s, &labels());
        assert_eq!(d.sentence, "bias driven by higher association of men with career");
    }

    #[test]
    fn family_gap_dominates() {
        let t = table(0.6, 0.1, 0.5, 0.9);
        let d = direction(&t, t.x - t.y, &labels());
        assert_eq!((d.target.as_deref(), d.attribute.as_deref()), (Some("Y"), Some("B")));
    }

    #[test]
    fn negative_statistic_names_y_or_x_b() {
        let t = table(0.1, 0.1, 0.9, 0.2);
        let d = direction(&t, t.x - t.y, &labels());
        assert_eq!(d.sentence, "bias driven by higher association of women with career");
        let t = table(0.5, 0.9, 0.5, 0.4);
        let d = direction(&t, t.x - t.y, &labels());
        assert_eq!(d.sentence, "bias driven by higher association of men with family");
    }

    #[test]
    fn empty_results_rejected() {
        assert!(compose_report(&[], BTreeMap::new()).is_err());
    }
}
