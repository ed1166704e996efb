//! Tables, shot-record files and structured documents.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use iontrap::analysis::FitResult;
use iontrap::noise::ErrorBudget;

use crate::error::{CliError, CliResult};
use crate::experiments::{Outcome, ShotLine};

pub const TOOL_VERSION: &str = concat!("iontrap ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    JsonLines,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub scenario: String,
    pub seed: u64,
    pub config_sha256: String,
    pub tool_version: String,
}

/// Numeric table with units in every column header.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn render(&self, meta: &Metadata, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Csv => {
                writeln!(
                    out,
                    "# scenario={} seed={} config_sha256={} tool_version={}",
                    meta.scenario, meta.seed, meta.config_sha256, meta.tool_version
                )
                .unwrap();
                writeln!(out, "{}", self.columns.join(",")).unwrap();
                for r in &self.rows {
                    let cells: Vec<String> = r.iter().map(|x| number(*x)).collect();
                    writeln!(out, "{}", cells.join(",")).unwrap();
                }
            }
            Format::JsonLines => {
                writeln!(out, "{}", serde_json::json!({ "metadata": meta })).unwrap();
                for r in &self.rows {
                    let obj: serde_json::Map<String, serde_json::Value> =
                        self.columns.iter().zip(r).map(|(c, x)| (c.clone(), serde_json::json!(x))).collect();
                    writeln!(out, "{}", serde_json::Value::Object(obj)).unwrap();
                }
            }
        }
        out
    }
}

/// Shortest round-trip form, with an exponent for very small or large values.
pub fn number(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e12).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

const SHOT_COLUMNS: [&str; 4] = ["shot_index", "sweep_value", "outcome", "counts [photons]"];

#[derive(Serialize, Deserialize)]
struct ShotJson {
    shot_index: u64,
    sweep_value: f64,
    outcome: String,
    counts: Option<u64>,
}

/// One record per line; the sweep value carries the sweep unit given in
/// the header.
pub fn render_shots(shots: &[ShotLine], sweep_unit: &str, meta: &Metadata, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            writeln!(
                out,
                "# scenario={} seed={} config_sha256={} tool_version={}",
                meta.scenario, meta.seed, meta.config_sha256, meta.tool_version
            )
            .unwrap();
            writeln!(out, "{},{} [{}],{},{}", SHOT_COLUMNS[0], SHOT_COLUMNS[1], sweep_unit, SHOT_COLUMNS[2], SHOT_COLUMNS[3]).unwrap();
            for s in shots {
                let counts = s.counts.map(|c| c.to_string()).unwrap_or_default();
                writeln!(out, "{},{},{},{}", s.shot_index, number(s.sweep_value), s.outcome.label(), counts).unwrap();
            }
        }
        Format::JsonLines => {
            writeln!(out, "{}", serde_json::json!({ "metadata": meta, "sweep_unit": sweep_unit })).unwrap();
            for s in shots {
                let rec = ShotJson { shot_index: s.shot_index, sweep_value: s.sweep_value, outcome: s.outcome.label().into(), counts: s.counts };
                writeln!(out, "{}", serde_json::to_string(&rec).unwrap()).unwrap();
            }
        }
    }
    out
}

/// Reads either shot-record format.
pub fn parse_shots(text: &str) -> CliResult<Vec<ShotLine>> {
    let bad = |line: usize, what: &str| CliError::Parse(format!("shot file line {}: {what}", line + 1));
    let mut shots = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("shot_index") {
            continue;
        }
        if line.starts_with('{') {
            let v: serde_json::Value = serde_json::from_str(line).map_err(|e| bad(i, &e.to_string()))?;
            if v.get("metadata").is_some() {
                continue;
            }
            let rec: ShotJson = serde_json::from_value(v).map_err(|e| bad(i, &e.to_string()))?;
            let outcome = Outcome::from_label(&rec.outcome).ok_or_else(|| bad(i, "unknown outcome"))?;
            shots.push(ShotLine { shot_index: rec.shot_index, sweep_value: rec.sweep_value, outcome, counts: rec.counts });
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(bad(i, "expected 4 fields"));
        }
        let counts = if f[3].is_empty() { None } else { Some(f[3].parse().map_err(|_| bad(i, "bad counts"))?) };
        shots.push(ShotLine {
            shot_index: f[0].parse().map_err(|_| bad(i, "bad shot_index"))?,
            sweep_value: f[1].parse().map_err(|_| bad(i, "bad sweep_value"))?,
            outcome: Outcome::from_label(f[2]).ok_or_else(|| bad(i, "unknown outcome"))?,
            counts,
        });
    }
    Ok(shots)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetRow {
    pub source: String,
    pub infidelity: f64,
    pub uncertainty: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetDocument {
    pub metadata: Metadata,
    /// Dimensionless gate infidelity.
    pub total_infidelity: f64,
    pub entries: Vec<BudgetRow>,
    #[serde(default)]
    pub annotations: Vec<BudgetRow>,
}

impl BudgetDocument {
    pub fn new(meta: Metadata, budget: &ErrorBudget) -> Self {
        let rows = |v: &[iontrap::noise::BudgetEntry]| {
            v.iter().map(|e| BudgetRow { source: e.source.clone(), infidelity: e.infidelity, uncertainty: e.uncertainty }).collect()
        };
        Self { metadata: meta, total_infidelity: budget.total, entries: rows(&budget.entries), annotations: rows(&budget.annotations) }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("budget serializes")
    }

    pub fn table(&self) -> String {
        let width = self.entries.iter().chain(&self.annotations).map(|e| e.source.len()).max().unwrap_or(0).max(6);
        let mut out = String::new();
        writeln!(out, "{:<width$}  {:>11}  {:>11}", "source", "infidelity", "uncertainty").unwrap();
        for e in &self.entries {
            writeln!(out, "{:<width$}  {:>11.3e}  {:>11.1e}", e.source, e.infidelity, e.uncertainty).unwrap();
        }
        writeln!(out, "{:<width$}  {:>11.3e}", "Total", self.total_infidelity).unwrap();
        for e in &self.annotations {
            writeln!(out, "{:<width$}  {:>11.3e}  (not summed)", e.source, e.infidelity).unwrap();
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitParameter {
    pub value: f64,
    /// 68% interval.
    pub interval: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitDocument {
    pub metadata: Metadata,
    pub kind: String,
    pub log_likelihood: f64,
    pub parameters: BTreeMap<String, FitParameter>,
    /// Bell-state fidelity from the fitted contrast and the even population
    /// at the analysis-free point, parity fits only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bell_fidelity: Option<f64>,
}

impl FitDocument {
    pub fn new(meta: Metadata, kind: &str, fit: &FitResult, bell_fidelity: Option<f64>) -> Self {
        let parameters = fit
            .params
            .iter()
            .map(|(k, v)| {
                let (lo, hi) = fit.confidence.get(k).copied().unwrap_or((*v, *v));
                (k.clone(), FitParameter { value: *v, interval: [lo, hi] })
            })
            .collect();
        Self { metadata: meta, kind: kind.into(), log_likelihood: fit.log_likelihood, parameters, bell_fidelity }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("fit serializes")
    }
}
