//! Report assembly and rendering.
//!
//! Evaluation and comparison results are collected into plain structs and
//! rendered as TSV (the default) or a JSON document. All numeric output is
//! rounded to six significant digits so that repeated runs are
//! byte-identical.

use serde_json::{json, Map, Value};

// ---------------------------------------------------------------------------
// Number formatting
// ---------------------------------------------------------------------------

/// Format a number with six significant digits.
///
/// Trailing zeros are trimmed (`7.00000` prints as `7`), and magnitudes
/// outside `[1e-4, 1e6)` switch to scientific notation.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    // The exponent must come from the value after rounding to six
    // significant digits (0.9999999 belongs with exponent 0, not -1).
    let sci = format!("{x:.5e}");
    let (mantissa, exponent) = sci.split_once('e').expect("exponent marker present");
    let exponent: i32 = exponent.parse().expect("valid exponent");
    if (-4..6).contains(&exponent) {
        let precision = (5 - exponent).max(0) as usize;
        trim_fraction(format!("{x:.precision$}"))
    } else {
        format!("{}e{exponent}", trim_fraction(mantissa.to_string()))
    }
}

fn trim_fraction(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// A JSON value carrying `x` rounded to six significant digits.
fn json_number(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    match sig6(x).parse::<f64>() {
        Ok(rounded) => json!(rounded),
        Err(_) => Value::Null,
    }
}

fn json_opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, json_number)
}

fn config_object(config: &[(String, String)]) -> Value {
    let mut map = Map::new();
    for (k, v) in config {
        map.insert(k.clone(), Value::String(v.clone()));
    }
    Value::Object(map)
}

fn push_config(out: &mut String, config: &[(String, String)]) {
    for (k, v) in config {
        out.push_str(&format!("# {k}: {v}\n"));
    }
}

// ---------------------------------------------------------------------------
// Evaluation reports
// ---------------------------------------------------------------------------

/// Results of one measure over one run.
#[derive(Debug, Clone)]
pub struct MeasureReport {
    pub measure: String,
    /// Per-instance values in input order; kept only on request.
    pub per_instance: Option<Vec<f64>>,
    pub mean: f64,
    pub instances: usize,
}

impl MeasureReport {
    /// Build a report from per-instance scores, aggregating in input order.
    pub fn from_scores(measure: impl Into<String>, scores: Vec<f64>, keep: bool) -> Self {
        let instances = scores.len();
        let mean = if instances == 0 {
            f64::NAN
        } else {
            scores.iter().sum::<f64>() / instances as f64
        };
        Self {
            measure: measure.into(),
            per_instance: keep.then_some(scores),
            mean,
            instances,
        }
    }
}

/// A full `eval` run: configuration echo plus one report per measure.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub config: Vec<(String, String)>,
    pub reports: Vec<MeasureReport>,
}

impl EvalReport {
    /// Render as TSV. Without per-instance values this is a three-column
    /// summary; with them, one row per instance plus a trailing mean row.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        push_config(&mut out, &self.config);
        if self.reports.iter().any(|r| r.per_instance.is_some()) {
            out.push_str("instance");
            for r in &self.reports {
                out.push('\t');
                out.push_str(&r.measure);
            }
            out.push('\n');
            let rows = self.reports[0].instances;
            for i in 0..rows {
                out.push_str(&format!("{}", i + 1));
                for r in &self.reports {
                    let v = r.per_instance.as_ref().expect("per-instance kept")[i];
                    out.push('\t');
                    out.push_str(&sig6(v));
                }
                out.push('\n');
            }
            out.push_str("mean");
            for r in &self.reports {
                out.push('\t');
                out.push_str(&sig6(r.mean));
            }
            out.push('\n');
        } else {
            out.push_str("measure\tmean\tinstances\n");
            for r in &self.reports {
                out.push_str(&format!("{}\t{}\t{}\n", r.measure, sig6(r.mean), r.instances));
            }
        }
        out
    }

    /// Render as a JSON document mirroring the TSV content.
    pub fn to_json(&self) -> String {
        let measures: Vec<Value> = self
            .reports
            .iter()
            .map(|r| {
                let mut m = Map::new();
                m.insert("measure".into(), Value::String(r.measure.clone()));
                m.insert("mean".into(), json_number(r.mean));
                m.insert("instances".into(), json!(r.instances));
                if let Some(values) = &r.per_instance {
                    m.insert(
                        "per_instance".into(),
                        Value::Array(values.iter().map(|&v| json_number(v)).collect()),
                    );
                }
                Value::Object(m)
            })
            .collect();
        let doc = json!({
            "config": config_object(&self.config),
            "measures": measures,
        });
        format!("{}\n", serde_json::to_string_pretty(&doc).expect("serializable"))
    }
}

// ---------------------------------------------------------------------------
// Comparison reports
// ---------------------------------------------------------------------------

/// One system's line in a measure's ranking, best-first.
#[derive(Debug, Clone)]
pub struct RankRow {
    /// Index into the report's system list.
    pub system: usize,
    pub mean: f64,
    pub rank: usize,
    /// Sign-test p-value against the rank-group leader; `None` for the
    /// leader itself.
    pub p_vs_leader: Option<f64>,
}

/// Multi-system comparison: rankings per measure, pairwise significance,
/// and rank correlation between measures.
#[derive(Debug, Clone)]
pub struct RankingReport {
    pub config: Vec<(String, String)>,
    pub systems: Vec<String>,
    pub measures: Vec<String>,
    /// Parallel to `measures`; rows sorted best-first.
    pub rankings: Vec<Vec<RankRow>>,
    /// Parallel to `measures`: system-by-system p-values, `p[i][j]` testing
    /// "system i beats system j"; diagonal `None`.
    pub p_matrices: Vec<Vec<Vec<Option<f64>>>>,
    /// Measure-by-measure rank correlation; `None` when undefined.
    pub tau: Vec<Vec<Option<f64>>>,
}

fn opt_cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), sig6)
}

fn push_tau_section(out: &mut String, measures: &[String], tau: &[Vec<Option<f64>>]) {
    out.push_str("# rank correlation between measures\nmeasure");
    for m in measures {
        out.push('\t');
        out.push_str(m);
    }
    out.push('\n');
    for (m, row) in measures.iter().zip(tau) {
        out.push_str(m);
        for &cell in row {
            out.push('\t');
            out.push_str(&opt_cell(cell));
        }
        out.push('\n');
    }
}

fn tau_json(measures: &[String], tau: &[Vec<Option<f64>>]) -> Value {
    json!({
        "measures": measures,
        "matrix": tau
            .iter()
            .map(|row| Value::Array(row.iter().map(|&v| json_opt(v)).collect()))
            .collect::<Vec<Value>>(),
    })
}

impl RankingReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        push_config(&mut out, &self.config);
        out.push_str("measure\tsystem\tmean\trank\tp_vs_leader\n");
        for (m, rows) in self.measures.iter().zip(&self.rankings) {
            for row in rows {
                out.push_str(&format!(
                    "{m}\t{}\t{}\t{}\t{}\n",
                    self.systems[row.system],
                    sig6(row.mean),
                    row.rank,
                    opt_cell(row.p_vs_leader),
                ));
            }
        }
        out.push('\n');
        out.push_str("# pairwise sign-test p-values (row system beats column system)\n");
        out.push_str("measure\tsystem");
        for s in &self.systems {
            out.push('\t');
            out.push_str(s);
        }
        out.push('\n');
        for (m, matrix) in self.measures.iter().zip(&self.p_matrices) {
            for (s, row) in self.systems.iter().zip(matrix) {
                out.push_str(&format!("{m}\t{s}"));
                for &cell in row {
                    out.push('\t');
                    out.push_str(&opt_cell(cell));
                }
                out.push('\n');
            }
        }
        out.push('\n');
        push_tau_section(&mut out, &self.measures, &self.tau);
        out
    }

    pub fn to_json(&self) -> String {
        let rankings: Vec<Value> = self
            .measures
            .iter()
            .zip(&self.rankings)
            .map(|(m, rows)| {
                json!({
                    "measure": m,
                    "systems": rows
                        .iter()
                        .map(|row| {
                            json!({
                                "system": self.systems[row.system],
                                "mean": json_number(row.mean),
                                "rank": row.rank,
                                "p_vs_leader": json_opt(row.p_vs_leader),
                            })
                        })
                        .collect::<Vec<Value>>(),
                })
            })
            .collect();
        let p_matrices: Vec<Value> = self
            .measures
            .iter()
            .zip(&self.p_matrices)
            .map(|(m, matrix)| {
                json!({
                    "measure": m,
                    "matrix": matrix
                        .iter()
                        .map(|row| Value::Array(row.iter().map(|&v| json_opt(v)).collect()))
                        .collect::<Vec<Value>>(),
                })
            })
            .collect();
        let doc = json!({
            "config": config_object(&self.config),
            "systems": self.systems,
            "rankings": rankings,
            "pairwise_p": p_matrices,
            "rank_correlation": tau_json(&self.measures, &self.tau),
        });
        format!("{}\n", serde_json::to_string_pretty(&doc).expect("serializable"))
    }
}

/// Correlation-only report for rank vectors supplied directly.
#[derive(Debug, Clone)]
pub struct TauReport {
    pub config: Vec<(String, String)>,
    pub measures: Vec<String>,
    pub tau: Vec<Vec<Option<f64>>>,
}

impl TauReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        push_config(&mut out, &self.config);
        push_tau_section(&mut out, &self.measures, &self.tau);
        out
    }

    pub fn to_json(&self) -> String {
        let doc = json!({
            "config": config_object(&self.config),
            "rank_correlation": tau_json(&self.measures, &self.tau),
        });
        format!("{}\n", serde_json::to_string_pretty(&doc).expect("serializable"))
    }
}

/// Build the measure-by-measure correlation matrix from per-measure rank
/// vectors (all indexed by the same system list).
///
/// Identical vectors correlate perfectly by convention even when constant
/// (two systems sharing every rank agree completely); this also fixes the
/// unit diagonal. Non-identical pairs fall back to the tie-corrected
/// coefficient, which is undefined (`None`) when one vector is constant.
pub fn rank_correlation_matrix(vectors: &[Vec<f64>]) -> Vec<Vec<Option<f64>>> {
    let n = vectors.len();
    let mut tau = vec![vec![None; n]; n];
    for i in 0..n {
        for j in 0..n {
            tau[i][j] = if vectors[i] == vectors[j] {
                Some(1.0)
            } else {
                crate::stats::kendall_tau(&vectors[i], &vectors[j])
            };
        }
    }
    tau
}
