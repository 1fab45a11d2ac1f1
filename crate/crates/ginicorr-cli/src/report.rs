//! Structured (JSON) and human-readable report rendering.
//!
//! Every JSON document carries a `schema_version` field; consumers should
//! check it before relying on the layout. Human output is aligned plain text.

use ginicorr::{ConfidenceInterval, CoverageReport, IntervalStatus};
use serde::Serialize;

/// Version stamp for all JSON documents this binary emits.
pub const SCHEMA_VERSION: u32 = 1;

/// Per-class block of an estimate report.
#[derive(Serialize)]
pub struct ClassReport {
    pub name: String,
    pub count: usize,
    pub proportion: f64,
    /// Within-class Gini mean difference (V-statistic).
    pub gmd: f64,
}

/// JSON document for `estimate`.
#[derive(Serialize)]
pub struct EstimateReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub source: String,
    pub n: usize,
    pub dim: usize,
    pub features: Vec<String>,
    pub label: String,
    /// Headline point estimate (V-statistic).
    pub rho_g: f64,
    /// U-statistic estimate, the empirical-likelihood anchor.
    pub rho_u: f64,
    /// Between-class Gini covariance (V-statistic).
    pub gcov: f64,
    /// Pooled Gini mean difference (V-statistic).
    pub gmd_pooled: f64,
    pub classes: Vec<ClassReport>,
}

/// JSON document for `ci`.
#[derive(Serialize)]
pub struct CiReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub source: String,
    pub n: usize,
    pub level: f64,
    pub intervals: Vec<ConfidenceInterval>,
}

/// JSON document for `oracle`.
#[derive(Serialize)]
pub struct OracleReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub family: String,
    pub params: serde_json::Value,
    pub rho: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standard_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block_estimates: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_total: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// JSON document for `simulate`.
#[derive(Serialize)]
pub struct SimulateReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub config: String,
    pub reports: Vec<CoverageReport>,
}

/// Serializes any report as pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(report: &T) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serialization");
    text.push('\n');
    text
}

fn flags(ci: &ConfidenceInterval) -> String {
    let mut notes = Vec::new();
    if ci.multimodal {
        notes.push("multimodal");
    }
    if ci.near_zero_warning {
        notes.push("near-zero");
    }
    notes.join(",")
}

/// Renders the aligned interval table for `ci`.
pub fn render_intervals(intervals: &[ConfidenceInterval]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<7} {:>6} {:>10} {:>10} {:>10}  {:<12} {}\n",
        "method", "level", "lower", "upper", "anchor", "status", "notes"
    ));
    for ci in intervals {
        let anchor = match ci.anchor {
            Some(a) => format!("{a:>10.6}"),
            None => format!("{:>10}", "-"),
        };
        out.push_str(&format!(
            "{:<7} {:>6.3} {:>10.6} {:>10.6} {anchor}  {:<12} {}\n",
            ci.method.name(),
            ci.level,
            ci.lower,
            ci.upper,
            ci.status.to_string(),
            flags(ci)
        ));
    }
    out
}

/// Renders the aligned coverage summary table for `simulate`.
pub fn render_coverage(reports: &[CoverageReport]) -> String {
    let mut out = String::new();
    if let Some(first) = reports.first() {
        out.push_str(&format!(
            "scenario {}  n={}  level={}  replications={}x{}  seed={}\n",
            first.scenario_id, first.n, first.level, first.replications, first.batches, first.seed
        ));
        out.push_str(&format!("rho_true {}  rng: {}\n\n", first.rho_true, first.rng));
    }
    out.push_str(&format!(
        "{:<7} {:>9} {:>12} {:>12} {:>10} {:>9}\n",
        "method", "coverage", "sd_coverage", "mean_length", "sd_length", "failures"
    ));
    for r in reports {
        out.push_str(&format!(
            "{:<7} {:>9.4} {:>12.4} {:>12.4} {:>10.4} {:>9}\n",
            r.method.name(),
            r.coverage,
            r.sd_coverage,
            r.mean_length,
            r.sd_length,
            r.failures
        ));
    }
    out
}

/// One row per method, tab-separated, full float precision.
pub fn coverage_tsv(reports: &[CoverageReport]) -> String {
    let mut out = String::from(
        "scenario_id\tn\tmethod\tlevel\treplications\tbatches\tcoverage\tmean_length\tsd_coverage\tsd_length\trho_true\tseed\trng\tfailures\n",
    );
    for r in reports {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            r.scenario_id,
            r.n,
            r.method.name(),
            r.level,
            r.replications,
            r.batches,
            r.coverage,
            r.mean_length,
            r.sd_coverage,
            r.sd_length,
            r.rho_true,
            r.seed,
            r.rng,
            r.failures
        ));
    }
    out
}

/// True when any requested interval failed outright (drives the exit code).
pub fn any_failed(intervals: &[ConfidenceInterval]) -> bool {
    intervals.iter().any(|ci| ci.status == IntervalStatus::Failed)
}
