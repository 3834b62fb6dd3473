//! Output rendering. Both files are deterministic functions of the config,
//! the seed, and the crate version: 17-significant-digit CSV numbers, LF line
//! endings, and no timestamps or wall-clock figures, so a rerun of the same
//! scenario is byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use crate::runner::RunReport;

/// One CSV cell. `{:.16e}` prints the 17 significant digits that make an
/// f64 round-trip exactly.
fn cell(x: f64) -> String {
    format!("{x:.16e}")
}

/// Render the data table: one header line, one line per grid point.
pub fn render_csv(report: &RunReport) -> String {
    let mut out = String::new();
    out.push_str(&report.columns.join(","));
    out.push('\n');
    for row in &report.rows {
        let line: Vec<String> = row.iter().map(|&x| cell(x)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(report: &RunReport, path: &Path) -> io::Result<()> {
    fs::write(path, render_csv(report))
}

/// Render the identity-check report.
pub fn render_text(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario: {}", report.scenario);
    let _ = writeln!(out, "kind: {}", report.kind);
    let _ = writeln!(out, "library: entroflux {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "columns: {}", report.columns.join(", "));
    match (report.rows.first(), report.rows.last()) {
        (Some(first), Some(last)) => {
            let _ = writeln!(
                out,
                "rows: {} (t = {} .. {})",
                report.rows.len(),
                first[0],
                last[0]
            );
        }
        _ => {
            let _ = writeln!(out, "rows: 0");
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "checks:");
    for c in &report.checks {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(
            out,
            "  {verdict} {} (max error {:.3e}, tolerance {:.3e})",
            c.name, c.max_error, c.tolerance
        );
    }
    if !report.notes.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "notes:");
        for n in &report.notes {
            let _ = writeln!(out, "  - {n}");
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "result: {}",
        if report.all_passed() { "PASS" } else { "FAIL" }
    );
    out
}

pub fn write_text(report: &RunReport, path: &Path) -> io::Result<()> {
    fs::write(path, render_text(report))
}
