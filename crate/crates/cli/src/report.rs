//! Experiment reports and their JSON / CSV forms.

use std::io::Write;
use std::path::Path;

use grouprep_core::{CostKind, Fairness};
use serde::{Deserialize, Serialize};

use crate::error::{validation, CliError, Result};

pub const CSV_COLUMNS: [&str; 6] = ["method", "group", "avg_cost", "pct_vs_standard", "pct_vs_group_opt", "seed_count"];
pub const GROUP_OPTIMAL: &str = "group-optimal";

/// One cell of the results table: a method's average cost on one group,
/// averaged over repetitions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub group: String,
    pub avg_cost: f64,
    /// `100 * avg_cost / standard avg_cost`; absent when the baseline is 0.
    pub pct_vs_standard: Option<f64>,
    /// `100 * avg_cost / group-optimal avg_cost`; absent when the baseline is 0.
    pub pct_vs_group_opt: Option<f64>,
    pub seed_count: usize,
}

/// One (repetition, method) run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub cell: String,
    pub repetition: usize,
    pub method: String,
    pub seed: u64,
    pub group_averages: Vec<f64>,
    /// Largest group average, or `None` for the group-optimal cell.
    pub objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub opening_cost: f64,
    pub fairness: Fairness,
    pub capacity: Option<usize>,
    pub opened: usize,
    pub lp_value: f64,
    pub objective: f64,
    /// Opening cost divided by the number of clients.
    pub opening: f64,
    pub group_averages: Vec<f64>,
    pub max_average: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub k: usize,
    pub objective: CostKind,
    pub repetitions: usize,
    pub seed: u64,
    pub groups: Vec<String>,
    /// Group-optimal rows, then standard, then the other methods in
    /// configuration order.
    pub rows: Vec<ReportRow>,
    pub cells: Vec<CellRecord>,
    pub sweep: Vec<SweepPoint>,
}

impl ExperimentReport {
    pub fn row(&self, method: &str, group: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.method == method && r.group == group)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

/// `100 * value / baseline`, or `None` when the baseline is 0.
pub fn percentage(value: f64, baseline: f64) -> Option<f64> {
    (baseline != 0.0).then(|| 100.0 * value / baseline)
}

pub fn to_json(report: &ExperimentReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| validation(format!("cannot encode report: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<ExperimentReport> {
    serde_json::from_str(text).map_err(|e| validation(format!("bad report: {e}")))
}

/// The results table, plus one row per sweep point and group under the
/// method name `facility/<fairness>/f=<cost>`.
pub fn to_csv(report: &ExperimentReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| validation(format!("cannot encode CSV: {e}"));
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
    w.write_record(CSV_COLUMNS).map_err(err)?;
    for r in &report.rows {
        w.write_record([
            r.method.clone(),
            r.group.clone(),
            r.avg_cost.to_string(),
            opt(r.pct_vs_standard),
            opt(r.pct_vs_group_opt),
            r.seed_count.to_string(),
        ])
        .map_err(err)?;
    }
    for p in &report.sweep {
        let fairness = match p.fairness {
            Fairness::PerGroup => "per-group",
            Fairness::Aggregate => "aggregate",
        };
        for (g, avg) in report.groups.iter().zip(&p.group_averages) {
            w.write_record([
                format!("facility/{fairness}/f={}", p.opening_cost),
                g.clone(),
                avg.to_string(),
                String::new(),
                String::new(),
                "1".into(),
            ])
            .map_err(err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| validation(format!("cannot encode CSV: {e}")))?;
    String::from_utf8(bytes).map_err(|e| validation(e.to_string()))
}

/// Writes `text` to `path`, or to stdout without a path. An existing file is
/// only replaced with `force`.
pub fn write_output(text: &str, path: Option<&Path>, force: bool) -> Result<()> {
    match path {
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("writing to stdout", e)),
        Some(p) => {
            if p.exists() && !force {
                return Err(validation(format!("{} exists; pass --force to overwrite", p.display())));
            }
            std::fs::write(p, text).map_err(|e| CliError::io(format!("cannot write {}", p.display()), e))
        }
    }
}

pub fn emit_report(report: &ExperimentReport, format: Format, path: Option<&Path>, force: bool) -> Result<()> {
    let text = match format {
        Format::Json => to_json(report)?,
        Format::Csv => to_csv(report)?,
    };
    write_output(&text, path, force)
}
