//! Run outputs: `results.csv`, `plot.dat` and `report.json`.

use crate::config::{ExperimentConfig, Kind};
use crate::error::CliError;
use fermilab::analysis::FitResult;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub target: String,
    pub model: String,
    pub labels: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Model-specific diagnostics such as residual norms.
    pub diagnostics: BTreeMap<String, f64>,
}

impl FitSummary {
    pub fn least_squares(target: impl Into<String>, fit: &FitResult) -> Self {
        let diagnostics = BTreeMap::from([
            ("max_relative_residual".to_string(), fit.max_relative_residual),
            ("condition_number".to_string(), fit.condition_number),
        ]);
        Self {
            target: target.into(),
            model: "least squares".into(),
            labels: fit.labels.clone(),
            coefficients: fit.coefficients.clone(),
            std_errors: fit.std_errors.clone(),
            diagnostics,
        }
    }
}

/// A measured coefficient next to its asymptotic prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub quantity: String,
    pub measured: f64,
    pub std_error: Option<f64>,
    pub predicted: f64,
    pub ratio: f64,
}

impl Comparison {
    pub fn new(quantity: impl Into<String>, measured: f64, std_error: Option<f64>, predicted: f64) -> Self {
        Self { quantity: quantity.into(), measured, std_error, predicted, ratio: measured / predicted }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str], rows: Vec<Vec<f64>>) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Whitespace-separated columns with a `#` header, for gnuplot and friends.
    pub fn plot_dat(&self) -> String {
        let mut out = format!("# {}\n", self.columns.join(" "));
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{v:.16e}");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub kind: Kind,
    pub config: ExperimentConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub fits: Vec<FitSummary>,
    pub comparisons: Vec<Comparison>,
    pub notes: Vec<String>,
    pub wall_clock_seconds: f64,
}

impl RunReport {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Compare(format!("{}: {e}", path.display())))
    }

    pub fn table(&self) -> Table {
        Table { columns: self.columns.clone(), rows: self.rows.clone() }
    }

    pub fn write_all(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
        let table = self.table();
        let json = serde_json::to_string_pretty(self).expect("report values are finite") + "\n";
        for (name, body) in [("results.csv", table.csv()), ("plot.dat", table.plot_dat()), ("report.json", json)] {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_format_is_stable() {
        let t = Table::new(&["L", "S"], vec![vec![10.0, 0.1], vec![20.0, 1.0 / 3.0]]);
        assert_eq!(
            t.csv(),
            "L,S\n1.0000000000000000e1,1.0000000000000001e-1\n2.0000000000000000e1,3.3333333333333331e-1\n"
        );
        assert!(t.plot_dat().starts_with("# L S\n1.0000000000000000e1 "));
        assert_eq!(t.column("S"), Some(1));
    }
}
