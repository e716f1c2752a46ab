//! Run reports: one row per check with a stable anchor identifier, plus the
//! environment block that pins node counts, boxes, grids and the seed.
//! Serialization is deterministic, so identical inputs give byte-identical
//! reports.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

/// Stable identifiers tying report rows to what they verify. The README
/// documents the registry; a row must use one of these or "plumbing".
pub const ANCHORS: &[&str] = &[
    "cauchy-quadrature",
    "coefficient-window",
    "moment-window",
    "eigenvector-property",
    "application-formula",
    "sequence-isomorphism",
    "moment-duality",
    "multiplier-algebra",
    "hyperplane-fill",
    "seminorm-system",
    "carrier-bound",
    "plumbing",
];

#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub check: String,
    pub anchor: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Environment {
    pub nodes: Option<usize>,
    #[serde(rename = "box")]
    pub bounds: Vec<usize>,
    pub z_grid: [usize; 2],
    pub seed: u64,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub environment: Environment,
    pub rows: Vec<ReportRow>,
}

impl RunReport {
    pub fn new(command: &str, environment: Environment) -> Self {
        RunReport {
            command: command.into(),
            environment,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, check: &str, anchor: &str, max_error: f64, tolerance: f64) {
        debug_assert!(ANCHORS.contains(&anchor), "unknown anchor {anchor}");
        self.rows.push(ReportRow {
            check: check.into(),
            anchor: anchor.into(),
            max_error,
            tolerance,
            pass: max_error <= tolerance,
            note: None,
        });
    }

    /// A row that failed outright (an operation errored instead of
    /// producing a value).
    pub fn push_error(&mut self, check: &str, anchor: &str, tolerance: f64, note: String) {
        debug_assert!(ANCHORS.contains(&anchor), "unknown anchor {anchor}");
        self.rows.push(ReportRow {
            check: check.into(),
            anchor: anchor.into(),
            max_error: f64::INFINITY,
            tolerance,
            pass: false,
            note: Some(note),
        });
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn print(&self, mut w: impl Write) -> std::io::Result<()> {
        for row in &self.rows {
            let status = if row.pass { "PASS" } else { "FAIL" };
            write!(
                w,
                "{status} {} [{}] err={:.3e} tol={:.1e}",
                row.check, row.anchor, row.max_error, row.tolerance
            )?;
            if let Some(note) = &row.note {
                write!(w, " ({note})")?;
            }
            writeln!(w)?;
        }
        let n_pass = self.rows.iter().filter(|r| r.pass).count();
        writeln!(
            w,
            "{}: {}/{} checks passed",
            self.command,
            n_pass,
            self.rows.len()
        )
    }

    pub fn write_json(&self, path: &Path) -> anyhow::Result<()> {
        let mut file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut file, self)?;
        file.write_all(b"\n")?;
        Ok(())
    }
}
