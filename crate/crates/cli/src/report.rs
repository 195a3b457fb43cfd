//! Per-circuit result tables written by `suite` and read by `score`.

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use techmap::Verdict;
use techmap_evolve::{CircuitResult, SuiteScore};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub name: String,
    /// AND nodes in the source network.
    pub aig_size: usize,
    pub aig_depth: u32,
    pub area: Option<f64>,
    pub delay: Option<f64>,
    /// Wall-clock seconds spent in the mapper; only recorded with `--timing`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
    pub verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ReportRow {
    pub fn result(&self) -> CircuitResult {
        CircuitResult {
            name: self.name.clone(),
            area: self.area,
            delay: self.delay,
            verdict: self.verdict,
            error: self.error.clone(),
        }
    }
}

/// Comparison of a run against a baseline report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    /// Mean of candidate / baseline area over circuits valid in both.
    pub area_ratio: Option<f64>,
    pub delay_ratio: Option<f64>,
    pub s_area: f64,
    pub s_delay: f64,
    pub s_overall: f64,
    pub e: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub rows: Vec<ReportRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregate: Option<Aggregate>,
}

impl RunReport {
    pub fn results(&self) -> Vec<CircuitResult> {
        self.rows.iter().map(ReportRow::result).collect()
    }

    pub fn compare(&self, baseline: &RunReport, alpha: f64) -> Aggregate {
        let score = techmap_evolve::score_results(&baseline.results(), &self.results(), alpha);
        let ratio = |get: fn(&ReportRow) -> Option<f64>| {
            let mut values = Vec::new();
            for b in &baseline.rows {
                let Some(c) = self.rows.iter().find(|c| c.name == b.name) else { continue };
                if !c.result().is_valid() || !b.result().is_valid() {
                    continue;
                }
                if let (Some(bv), Some(cv)) = (get(b), get(c)) {
                    if bv > 0.0 {
                        values.push(cv / bv);
                    }
                }
            }
            (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
        };
        Aggregate {
            area_ratio: ratio(|r| r.area),
            delay_ratio: ratio(|r| r.delay),
            s_area: score.s_area,
            s_delay: score.s_delay,
            s_overall: score.s_overall,
            e: score.e,
        }
    }
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.digits$}"))
}

fn verdict_name(v: Option<Verdict>) -> &'static str {
    match v {
        Some(Verdict::Equivalent) => "equivalent",
        Some(Verdict::NotEquivalent) => "NOT-EQUIVALENT",
        Some(Verdict::Inconclusive) => "inconclusive",
        None => "-",
    }
}

pub fn render_run(report: &RunReport) -> String {
    let width = report.rows.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
    let mut s = String::new();
    writeln!(s, "{:<width$} {:>7} {:>6} {:>10} {:>8} {:>8}  verdict", "name", "size", "depth", "area", "delay", "t(s)").unwrap();
    for r in &report.rows {
        write!(
            s,
            "{:<width$} {:>7} {:>6} {:>10} {:>8} {:>8}  {}",
            r.name,
            r.aig_size,
            r.aig_depth,
            opt(r.area, 2),
            opt(r.delay, 2),
            opt(r.runtime_seconds, 3),
            verdict_name(r.verdict)
        )
        .unwrap();
        if let Some(e) = &r.error {
            write!(s, "  ({e})").unwrap();
        }
        s.push('\n');
    }
    if let Some(a) = &report.aggregate {
        writeln!(
            s,
            "vs baseline: area ratio {} delay ratio {} S_area {:.4} S_delay {:.4} S_overall {:.4} e {:.4}",
            opt(a.area_ratio, 4),
            opt(a.delay_ratio, 4),
            a.s_area,
            a.s_delay,
            a.s_overall,
            a.e
        )
        .unwrap();
    }
    s
}

pub fn render_score(score: &SuiteScore, alpha: f64) -> String {
    let width = score.circuits.iter().map(|c| c.name.len()).max().unwrap_or(4).max(4);
    let mut s = String::new();
    writeln!(s, "{:<width$} {:>9} {:>9} {:>9}  valid", "name", "S_area", "S_delay", "S_overall").unwrap();
    for c in &score.circuits {
        let overall = match (c.s_area, c.s_delay) {
            (Some(a), Some(d)) => Some(alpha * a + (1.0 - alpha) * d),
            _ => None,
        };
        writeln!(
            s,
            "{:<width$} {:>9} {:>9} {:>9}  {}",
            c.name,
            opt(c.s_area, 4),
            opt(c.s_delay, 4),
            opt(overall, 4),
            c.valid
        )
        .unwrap();
    }
    writeln!(s, "{:<width$} {:>9.4} {:>9.4} {:>9.4}", "mean", score.s_area, score.s_delay, score.s_overall).unwrap();
    writeln!(s, "e = {:.4}", score.e).unwrap();
    s
}
