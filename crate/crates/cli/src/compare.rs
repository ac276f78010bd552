//! Side-by-side table of the comparisons stored in several reports.

use crate::error::CliError;
use crate::report::RunReport;
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub quantity: String,
    pub report: String,
    pub measured: f64,
    pub predicted: f64,
    pub ratio: f64,
    /// Relative difference of `measured` from the first report.
    pub delta: f64,
}

pub fn compare(paths: &[PathBuf]) -> Result<Vec<CompareRow>, CliError> {
    let reports = paths.iter().map(|p| RunReport::load(p)).collect::<Result<Vec<_>, _>>()?;
    let first = &reports[0];
    if let Some((p, r)) = paths.iter().zip(&reports).find(|(_, r)| r.kind != first.kind) {
        return Err(CliError::Compare(format!(
            "{} has kind `{}` but {} has kind `{}`",
            p.display(),
            r.kind.name(),
            paths[0].display(),
            first.kind.name()
        )));
    }
    let mut rows = Vec::new();
    for reference in &first.comparisons {
        for (path, report) in paths.iter().zip(&reports) {
            let Some(c) = report.comparisons.iter().find(|c| c.quantity == reference.quantity) else {
                continue;
            };
            rows.push(CompareRow {
                quantity: c.quantity.clone(),
                report: path.display().to_string(),
                measured: c.measured,
                predicted: c.predicted,
                ratio: c.ratio,
                delta: (c.measured - reference.measured) / reference.measured.abs(),
            });
        }
    }
    Ok(rows)
}

pub fn render(rows: &[CompareRow]) -> String {
    let width = rows.iter().map(|r| r.report.len()).max().unwrap_or(6).max(6);
    let mut out = format!(
        "{:<28} {:<width$} {:>14} {:>14} {:>10} {:>11}\n",
        "quantity", "report", "measured", "predicted", "ratio", "delta"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<28} {:<width$} {:>14.7e} {:>14.7e} {:>10.6} {:>11.3e}",
            r.quantity, r.report, r.measured, r.predicted, r.ratio, r.delta
        );
    }
    out
}
