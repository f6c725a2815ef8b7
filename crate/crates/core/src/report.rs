//! CSV and JSON report emission.
//!
//! Relation CSVs start with the line `# uqrel-report v1`; chain CSVs with
//! `# uqrel-chain v1`. Column order is fixed per version.

use std::io::{self, Write};

use serde::Serialize;

use crate::uncertainty::{OzawaChain, RelationReport, RobertsonReport};

pub const REPORT_HEADER: &str = "# uqrel-report v1";
pub const CHAIN_HEADER: &str = "# uqrel-chain v1";

/// One trial in a relation report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub seed: u64,
    pub dim: usize,
    pub mode: String,
    #[serde(rename = "eps_A")]
    pub eps_a: f64,
    #[serde(rename = "eta_or_eps_B")]
    pub eta_or_eps_b: f64,
    pub lhs: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "I")]
    pub i: f64,
    pub bound_full: f64,
    pub bound_simple: f64,
    pub slack: f64,
    pub satisfied: bool,
}

impl ReportRow {
    pub fn from_relation(report: &RelationReport, seed: u64, dim: usize) -> Self {
        Self {
            seed,
            dim,
            mode: report.mode.as_str().to_string(),
            eps_a: report.eps_a,
            eta_or_eps_b: report.eps_or_eta_b,
            lhs: report.lhs,
            r: report.bounds.r,
            i: report.bounds.i,
            bound_full: report.bounds.full,
            bound_simple: report.bounds.simple,
            slack: report.slack,
            satisfied: report.satisfied(),
        }
    }

    /// Noise-operator quantities on the left, the tightest link as slack.
    pub fn from_chain(chain: &OzawaChain, seed: u64, dim: usize, tol: &crate::Tolerances) -> Self {
        Self {
            seed,
            dim,
            mode: "ozawa-chain".into(),
            eps_a: chain.ozawa_error,
            eta_or_eps_b: chain.ozawa_disturbance,
            lhs: chain.ozawa_product(),
            r: chain.bounds.r,
            i: chain.bounds.i,
            bound_full: chain.bounds.full,
            bound_simple: chain.bounds.simple,
            slack: chain.min_slack(),
            satisfied: chain.holds(tol),
        }
    }

    /// Both errors of the non-informative measurement; `satisfied` also
    /// requires the reduction to be exact within `reduction_tol`.
    pub fn from_robertson(rep: &RobertsonReport, seed: u64, dim: usize, reduction_tol: f64) -> Self {
        Self {
            seed,
            dim,
            mode: "robertson".into(),
            eps_a: rep.eps_a,
            eta_or_eps_b: rep.eps_b,
            lhs: rep.lhs,
            r: rep.bounds.r,
            i: rep.bounds.i,
            bound_full: rep.bounds.full,
            bound_simple: rep.bounds.simple,
            slack: rep.lhs - rep.bounds.full,
            satisfied: rep.satisfied && rep.eps_deviation <= reduction_tol && rep.bound_deviation <= reduction_tol,
        }
    }
}

/// One trial of the comparison chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainRow {
    pub seed: u64,
    pub dim: usize,
    pub eps_ozawa: f64,
    pub eta_ozawa: f64,
    pub eps: f64,
    pub eta: f64,
    #[serde(rename = "sigma_A")]
    pub sigma_a: f64,
    #[serde(rename = "sigma_B")]
    pub sigma_b: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "I")]
    pub i: f64,
    pub ozawa_bound: f64,
    pub slack_error: f64,
    pub slack_disturbance: f64,
    pub slack_product: f64,
    pub slack_quadrature: f64,
    pub slack_commutator: f64,
    pub tightest: String,
    pub satisfied: bool,
}

impl ChainRow {
    pub fn new(chain: &OzawaChain, seed: u64, dim: usize, tol: &crate::Tolerances) -> Self {
        let [slack_error, slack_disturbance, slack_product, slack_quadrature, slack_commutator] = chain.links;
        Self {
            seed,
            dim,
            eps_ozawa: chain.ozawa_error,
            eta_ozawa: chain.ozawa_disturbance,
            eps: chain.error,
            eta: chain.disturbance,
            sigma_a: chain.sigma_a,
            sigma_b: chain.sigma_b,
            r: chain.bounds.r,
            i: chain.bounds.i,
            ozawa_bound: chain.ozawa_bound,
            slack_error,
            slack_disturbance,
            slack_product,
            slack_quadrature,
            slack_commutator,
            tightest: OzawaChain::LINK_NAMES[chain.tightest_link()].to_string(),
            satisfied: chain.holds(tol),
        }
    }
}

fn write_csv<W: Write, R: Serialize>(mut out: W, header: &str, rows: &[R], columns: &[&str]) -> io::Result<()> {
    writeln!(out, "{header}")?;
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    wtr.write_record(columns)?;
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush()
}

pub const REPORT_COLUMNS: [&str; 12] =
    ["seed", "dim", "mode", "eps_A", "eta_or_eps_B", "lhs", "R", "I", "bound_full", "bound_simple", "slack", "satisfied"];

pub const CHAIN_COLUMNS: [&str; 18] = [
    "seed",
    "dim",
    "eps_ozawa",
    "eta_ozawa",
    "eps",
    "eta",
    "sigma_A",
    "sigma_B",
    "R",
    "I",
    "ozawa_bound",
    "slack_error",
    "slack_disturbance",
    "slack_product",
    "slack_quadrature",
    "slack_commutator",
    "tightest",
    "satisfied",
];

pub fn write_report_csv<W: Write>(out: W, rows: &[ReportRow]) -> io::Result<()> {
    write_csv(out, REPORT_HEADER, rows, &REPORT_COLUMNS)
}

pub fn write_chain_csv<W: Write>(out: W, rows: &[ChainRow]) -> io::Result<()> {
    write_csv(out, CHAIN_HEADER, rows, &CHAIN_COLUMNS)
}

pub const PROPERTIES_HEADER: &str = "# uqrel-properties v1";

/// Property rows: `seed, dim`, one slack per named property, `min_slack, satisfied`.
pub fn write_properties_csv<W: Write>(out: W, names: &[&str], rows: &[crate::cli::sweep::PropertyRow]) -> io::Result<()> {
    let mut out = out;
    writeln!(out, "{PROPERTIES_HEADER}")?;
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let mut head = vec!["seed", "dim"];
    head.extend_from_slice(names);
    head.extend_from_slice(&["min_slack", "satisfied"]);
    wtr.write_record(&head)?;
    for row in rows {
        let mut rec = vec![row.seed.to_string(), row.dim.to_string()];
        rec.extend(row.slacks.iter().map(|s| s.to_string()));
        rec.push(row.min_slack.to_string());
        rec.push(row.satisfied.to_string());
        wtr.write_record(&rec)?;
    }
    wtr.flush()
}

/// Sweep summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub mode: String,
    pub trials: usize,
    pub failures: usize,
    /// Trials whose evaluation broke down numerically.
    pub breakdowns: usize,
    pub min_slack: f64,
    /// Wall-clock seconds.
    pub runtime: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failing_seeds: Vec<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub breakdown_seeds: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tightest_counts: Option<std::collections::BTreeMap<String, usize>>,
}
