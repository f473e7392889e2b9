//! Report envelopes and the JSON and CSV emitters.

use crate::Failure;
use minsurf::conditions::ConditionReport;
use minsurf::directsum::{
    CVectors, ComparisonReport, OrthogonalityReport, PhaseLawGap, PolarReport,
};
use minsurf::surfaces::{Domain, Grid};
use serde::Serialize;
use std::path::Path;

/// Version marker leading every JSON report.
pub const SCHEMA_VERSION: u32 = 1;

/// Output format of a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    /// Parses a settings-file value.
    pub fn parse_config(text: &str) -> Result<Format, Failure> {
        match text {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Failure::config(format!(
                "format: expected json or csv, got `{other}`"
            ))),
        }
    }
}

fn write_text(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::config(format!("out: cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Serializes a report as pretty JSON with a trailing newline.
pub fn emit_json<T: Serialize>(out: Option<&Path>, report: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| Failure::config(format!("out: cannot serialize report: {e}")))?;
    text.push('\n');
    write_text(out, &text)
}

/// Writes one header record followed by the serialized rows.
pub fn emit_csv<S: AsRef<[u8]>, R: Serialize>(
    out: Option<&Path>,
    header: &[S],
    rows: &[R],
) -> Result<(), Failure> {
    let fail = |e: csv::Error| Failure::config(format!("out: cannot serialize csv: {e}"));
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).map_err(fail)?;
    for row in rows {
        writer.serialize(row).map_err(fail)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Failure::config(format!("out: cannot flush csv: {e}")))?;
    let text = String::from_utf8(bytes).expect("csv output is utf-8");
    write_text(out, &text)
}

/// One catalog surface in the listing.
#[derive(Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub ambient_dim: usize,
    pub sphere_dim: usize,
    pub domain: Domain,
    pub description: &'static str,
}

#[derive(Serialize)]
pub struct ListReport {
    pub schema: u32,
    pub command: &'static str,
    pub surfaces: Vec<CatalogEntry>,
}

/// Extremes of one scalar across the evaluated grid points.
#[derive(Clone, Copy, Serialize)]
pub struct MinMax {
    pub min: f64,
    pub max: f64,
}

/// Extremes of the order-level invariants.
#[derive(Serialize)]
pub struct OrderSummary {
    pub order: usize,
    pub ecc: MinMax,
    pub k_perp: MinMax,
}

#[derive(Serialize)]
pub struct InvariantSummary {
    pub evaluated: usize,
    pub flagged: usize,
    pub gauss: Option<MinMax>,
    pub orders: Vec<OrderSummary>,
}

/// Grid point excluded from the table, with the reason.
#[derive(Serialize)]
pub struct Flagged {
    pub x: f64,
    pub y: f64,
    pub reason: String,
}

#[derive(Serialize)]
pub struct InvariantsReport {
    pub schema: u32,
    pub command: &'static str,
    pub surface: String,
    pub grid: Grid,
    pub max_order: usize,
    pub summary: InvariantSummary,
    pub columns: Vec<String>,
    /// One row per grid point in grid order; null marks undefined entries.
    pub rows: Vec<Vec<Option<f64>>>,
    pub flagged: Vec<Flagged>,
}

#[derive(Serialize)]
pub struct CheckReport {
    pub schema: u32,
    pub command: &'static str,
    pub surface: String,
    pub condition: String,
    pub tolerance: f64,
    pub passed: bool,
    pub report: ConditionReport,
}

/// Validator residuals of the constructed immersion.
#[derive(Serialize)]
pub struct Validation {
    pub sphere: f64,
    pub conformal_diag: f64,
    pub conformal_cross: f64,
    pub minimal: f64,
}

/// Coefficient rotation under a phase shift, evaluated at one point.
#[derive(Serialize)]
pub struct PhaseLaw {
    pub phi: f64,
    pub x: f64,
    pub y: f64,
    /// Gap at order 2, the certification gate.
    pub order2_gap: f64,
    /// Per-order gaps; higher orders rotate with growing phase weight.
    pub gaps: Vec<PhaseLawGap>,
}

/// One pass/fail entry of the certification.
#[derive(Serialize)]
pub struct Gate {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Serialize)]
pub struct DirectsumReport {
    pub schema: u32,
    pub command: &'static str,
    pub label: String,
    pub base: String,
    pub weights: Vec<f64>,
    pub phases: Vec<f64>,
    pub trivial_identity: bool,
    pub tolerance: f64,
    pub validation: Validation,
    pub cvectors: CVectors,
    pub orthogonality: OrthogonalityReport,
    pub comparison: ComparisonReport,
    pub phase_law: PhaseLaw,
    pub ricci6: ConditionReport,
    pub gates: Vec<Gate>,
    pub passed: bool,
}

#[derive(Serialize)]
pub struct CvectorsReport {
    pub schema: u32,
    pub command: &'static str,
    pub mode: &'static str,
    pub weights: Vec<f64>,
    pub phases: Vec<f64>,
    pub cvectors: CVectors,
    pub orthogonality: OrthogonalityReport,
    pub max_violation: f64,
}

/// One random draw of the orthogonality audit.
#[derive(Serialize)]
pub struct AuditRow {
    pub draw: usize,
    pub m: usize,
    pub max_violation: f64,
}

#[derive(Serialize)]
pub struct AuditReport {
    pub schema: u32,
    pub command: &'static str,
    pub mode: &'static str,
    pub seed: u64,
    pub draws: usize,
    pub tolerance: f64,
    pub rows: Vec<AuditRow>,
    pub max_violation: f64,
    pub passed: bool,
}

#[derive(Serialize)]
pub struct PolarCmdReport {
    pub schema: u32,
    pub command: &'static str,
    pub surface: String,
    pub tolerance: f64,
    pub passed: bool,
    pub report: PolarReport,
}
