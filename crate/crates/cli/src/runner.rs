//! Executes one experiment kind over its sweep.

use crate::config::{ExperimentConfig, Kind, Route};
use crate::error::CliError;
use crate::report::{Comparison, FitSummary, Table};
use fermilab::analysis::{default_basis, exponent_fit, fit_scaling, power_law_exponent, BasisFn, ScalingSeries};
use fermilab::geometry::Region;
use fermilab::spectral::{
    disk_kernel_2d, sine_kernel_1d, spectral_sum, spectrum, EntropyFunctional, FermiModel, LogBase, Spectrum,
};
use fermilab::tensorcube::{entropy_product_with, thm_bounds, EnumerationOptions, ProductSpectrum};
use fermilab::thermal::{crossover_temperature, thermal_entropy, ThermalParams};
use fermilab::variance::{variance_continuum_with, VarianceOptions};
use fermilab::widom::{lattice_regions, sphere_normal_mc, u_functional, widom_coefficient};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};

/// Tolerance for the U functional; far below any sweep's statistical reach.
const U_TOL: f64 = 1e-12;

#[derive(Debug, Default)]
pub struct Outcome {
    pub table: Table,
    pub fits: Vec<FitSummary>,
    pub comparisons: Vec<Comparison>,
    pub notes: Vec<String>,
}

pub struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    progress: bool,
}

fn at(point: impl Into<String>) -> impl FnOnce(fermilab::Error) -> CliError {
    let point = point.into();
    move |e| CliError::numeric(point, e)
}

/// Entropy coefficient of L^{d-1} log L: J/12 (2π)^{1-d}.
fn entropy_log_coefficient(j: f64, dim: usize) -> f64 {
    j / 12.0 * (2.0 * PI).powi(1 - dim as i32)
}

fn variance_log_coefficient(j: f64, dim: usize) -> f64 {
    j / (4.0 * PI * PI) * (2.0 * PI).powi(1 - dim as i32)
}

/// ln b, turning a coefficient of ln L in base-b units into one of log_b L.
fn ln_base(base: LogBase) -> f64 {
    1.0 / base.from_nats()
}

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

impl<'a> Runner<'a> {
    pub fn new(cfg: &'a ExperimentConfig, progress: bool) -> Self {
        Self { cfg, progress }
    }

    pub fn execute(&self) -> Result<Outcome, CliError> {
        match self.cfg.kind {
            Kind::Entropy1d => self.entropy1d(),
            Kind::Cube => self.cube(),
            Kind::Lattice2d => self.lattice2d(),
            Kind::Variance => match self.cfg.route {
                Route::Lattice => self.variance_lattice(),
                Route::Continuum => self.variance_continuum(),
            },
            Kind::WidomCoeff => self.widom(),
            Kind::Moments1d => self.moments(),
            Kind::Thermal => self.thermal(),
            Kind::Fractal => self.fractal(),
        }
    }

    /// Evaluates `f` at every point in parallel and returns the rows in sweep
    /// order. The first failing point in sweep order is reported.
    fn sweep<P, F>(&self, points: &[P], label: impl Fn(&P) -> String + Sync, f: F) -> Result<Vec<Vec<f64>>, CliError>
    where
        P: Sync,
        F: Fn(&P) -> fermilab::Result<Vec<Vec<f64>>> + Sync,
    {
        let done = AtomicUsize::new(0);
        let results: Vec<_> = points
            .par_iter()
            .map(|p| {
                let r = f(p);
                let n = done.fetch_add(1, Ordering::Relaxed) + 1;
                if self.progress {
                    eprintln!("[{n}/{}] {}", points.len(), label(p));
                }
                r
            })
            .collect();
        let mut rows = Vec::new();
        for (p, r) in points.iter().zip(results) {
            rows.extend(r.map_err(at(label(p)))?);
        }
        Ok(rows)
    }

    fn scale_sweep<F>(&self, f: F) -> Result<Vec<Vec<f64>>, CliError>
    where
        F: Fn(f64) -> fermilab::Result<Vec<f64>> + Sync,
    {
        self.sweep(&self.cfg.scales(), |l| format!("L = {l}"), |&l| f(l).map(|row| vec![row]))
    }

    fn order(&self) -> usize {
        self.cfg.numeric.quadrature_order
    }

    fn widom_for(&self, omega: &Region, gamma: &Region) -> Result<f64, CliError> {
        widom_coefficient(omega, gamma, self.order()).map_err(at("boundary coefficient J"))
    }

    fn cube_sea(&self, dim: usize) -> Result<f64, CliError> {
        let model = FermiModel::CubeSea { k_fermi: vec![self.cfg.k_fermi(); dim] };
        let (omega, gamma) = lattice_regions(dim, &model).map_err(at("lattice geometry"))?;
        self.widom_for(&omega, &gamma)
    }

    /// Least-squares fit of column `y` against column `x`; skipped when the
    /// sweep is too short to constrain the basis.
    fn fit(
        &self,
        out: &mut Outcome,
        dim: usize,
        (x, y): (&str, &str),
        basis: &[BasisFn],
    ) -> Result<Option<fermilab::analysis::FitResult>, CliError> {
        let (xi, yi) = (out.table.column(x).expect("x column"), out.table.column(y).expect("y column"));
        let points: Vec<(f64, f64)> = out.table.rows.iter().map(|r| (r[xi], r[yi])).collect();
        self.fit_points(out, dim, y, points, basis)
    }

    fn fit_points(
        &self,
        out: &mut Outcome,
        dim: usize,
        target: &str,
        points: Vec<(f64, f64)>,
        basis: &[BasisFn],
    ) -> Result<Option<fermilab::analysis::FitResult>, CliError> {
        if points.len() < basis.len() + 2 || points.len() < 4 {
            out.notes.push(format!("{target}: {} points are too few for a {}-term fit", points.len(), basis.len()));
            return Ok(None);
        }
        let series = ScalingSeries::new(dim, points, target).map_err(at(format!("fit of {target}")))?;
        let fit = fit_scaling(&series, basis).map_err(at(format!("fit of {target}")))?;
        out.fits.push(FitSummary::least_squares(target, &fit));
        Ok(Some(fit))
    }

    fn compare_log(
        &self,
        out: &mut Outcome,
        quantity: &str,
        fit: Option<fermilab::analysis::FitResult>,
        factor: f64,
        predicted: f64,
    ) {
        if let Some(f) = fit {
            let (c, se) = f.leading();
            out.comparisons.push(Comparison::new(quantity, c * factor, Some(se * factor), predicted));
        }
    }

    fn entropy1d(&self) -> Result<Outcome, CliError> {
        let (kf, base) = (self.cfg.k_fermi(), self.cfg.base);
        let j = self.cube_sea(1)?;
        let rows = self.scale_sweep(|l| {
            let s = spectrum(&sine_kernel_1d(l as usize, kf)?)?;
            Ok(vec![l, s.particle_number(), s.entropy(base), s.variance(), j / 12.0 * base.log(l)])
        })?;
        let mut out = Outcome { table: Table::new(&["L", "N", "S", "variance", "S_predicted"], rows), ..Default::default() };
        let basis = default_basis(1);
        let fit = self.fit(&mut out, 1, ("L", "S"), &basis)?;
        self.compare_log(&mut out, "entropy log coefficient", fit, ln_base(base), entropy_log_coefficient(j, 1));
        let fit = self.fit(&mut out, 1, ("L", "variance"), &basis)?;
        self.compare_log(&mut out, "variance log coefficient", fit, 1.0, variance_log_coefficient(j, 1));
        Ok(out)
    }

    fn cube(&self) -> Result<Outcome, CliError> {
        let dim = self.cfg.dim.expect("validated");
        let (kf, base) = (self.cfg.k_fermi(), self.cfg.base);
        let opts = EnumerationOptions {
            cap: self.cfg.numeric.enumeration_cap as u128,
            drop_eps: self.cfg.numeric.drop_eps,
        };
        let j = self.cube_sea(dim)?;
        let rows = self.scale_sweep(|l| {
            let axis = spectrum(&sine_kernel_1d(l as usize, kf)?)?;
            let n_axis = axis.particle_number();
            let ps = ProductSpectrum::isotropic(axis, dim)?;
            let bounds = thm_bounds(&ps, base);
            let s = entropy_product_with(&ps, base, opts)?;
            let predicted = entropy_log_coefficient(j, dim) * l.powi(dim as i32 - 1) * base.log(l);
            Ok(vec![l, n_axis.powi(dim as i32), s.value, bounds.lower, bounds.upper, s.drop_error_bound, predicted])
        })?;
        let columns = ["L", "N", "S", "lower_bound", "upper_bound", "drop_error_bound", "S_predicted"];
        let mut out = Outcome { table: Table::new(&columns, rows), ..Default::default() };
        let fit = self.fit(&mut out, dim, ("L", "S"), &default_basis(dim))?;
        self.compare_log(&mut out, "entropy log coefficient", fit, ln_base(base), entropy_log_coefficient(j, dim));
        Ok(out)
    }

    fn lattice2d(&self) -> Result<Outcome, CliError> {
        let (kf, base) = (self.cfg.k_fermi(), self.cfg.base);
        let (omega, gamma) =
            lattice_regions(2, &FermiModel::DiskSea { k_fermi: kf }).map_err(at("lattice geometry"))?;
        let j = self.widom_for(&omega, &gamma)?;
        let rows = self.scale_sweep(|l| {
            let s = spectrum(&disk_kernel_2d(l as usize, kf)?)?;
            let predicted = entropy_log_coefficient(j, 2) * l * base.log(l);
            Ok(vec![l, s.particle_number(), s.entropy(base), s.variance(), predicted])
        })?;
        let mut out = Outcome { table: Table::new(&["L", "N", "S", "variance", "S_predicted"], rows), ..Default::default() };
        let basis = default_basis(2);
        let fit = self.fit(&mut out, 2, ("L", "S"), &basis)?;
        self.compare_log(&mut out, "entropy log coefficient", fit, ln_base(base), entropy_log_coefficient(j, 2));
        let fit = self.fit(&mut out, 2, ("L", "variance"), &basis)?;
        self.compare_log(&mut out, "variance log coefficient", fit, 1.0, variance_log_coefficient(j, 2));
        Ok(out)
    }

    fn variance_lattice(&self) -> Result<Outcome, CliError> {
        let dim = self.cfg.dim.unwrap_or(1);
        let kf = self.cfg.k_fermi();
        let j = self.cube_sea(dim)?;
        let rows = self.scale_sweep(|l| {
            let axis = spectrum(&sine_kernel_1d(l as usize, kf)?)?;
            // Σ over products of t(1−t) factorizes into per-axis sums
            let n = axis.particle_number().powi(dim as i32);
            let sq = spectral_sum(&axis, &EntropyFunctional::monomial(2)).powi(dim as i32);
            let predicted = variance_log_coefficient(j, dim) * l.powi(dim as i32 - 1) * l.ln();
            Ok(vec![l, n, n - sq, predicted])
        })?;
        let mut out = Outcome { table: Table::new(&["L", "N", "variance", "variance_predicted"], rows), ..Default::default() };
        let fit = self.fit(&mut out, dim, ("L", "variance"), &default_basis(dim))?;
        self.compare_log(&mut out, "variance log coefficient", fit, 1.0, variance_log_coefficient(j, dim));
        Ok(out)
    }

    fn variance_options(&self) -> VarianceOptions {
        VarianceOptions {
            rel_tol: self.cfg.numeric.rel_tol,
            nodes_1d: self.cfg.numeric.nodes_1d,
            ..Default::default()
        }
    }

    fn variance_continuum(&self) -> Result<Outcome, CliError> {
        let (omega, gamma) = self.cfg.regions()?;
        let dim = omega.dim();
        let j = self.widom_for(&omega, &gamma)?;
        let opts = self.variance_options();
        let rows = self.scale_sweep(|l| {
            let r = variance_continuum_with(&omega, &gamma, l, &opts)?;
            let predicted = variance_log_coefficient(j, dim) * l.powi(dim as i32 - 1) * l.ln();
            Ok(vec![l, r.tr_pqp, r.tr_pqp_sq, r.variance, r.quadrature_error_estimate, predicted])
        })?;
        let columns = ["L", "tr_pqp", "tr_pqp_sq", "variance", "quadrature_error", "variance_predicted"];
        let mut out = Outcome { table: Table::new(&columns, rows), ..Default::default() };
        let fit = self.fit(&mut out, dim, ("L", "variance"), &default_basis(dim))?;
        self.compare_log(&mut out, "variance log coefficient", fit, 1.0, variance_log_coefficient(j, dim));
        Ok(out)
    }

    fn widom(&self) -> Result<Outcome, CliError> {
        let (omega, gamma) = self.cfg.regions()?;
        let dim = omega.dim();
        let j = self.widom_for(&omega, &gamma)?;
        let mut columns = vec!["J", "entropy_log_coefficient", "variance_log_coefficient"];
        let mut row = vec![j, entropy_log_coefficient(j, dim), variance_log_coefficient(j, dim)];
        let mut out = Outcome::default();
        let pairs = self.cfg.numeric.mc_pairs;
        let both_balls = matches!((&omega, &gamma), (Region::Ball { .. }, Region::Ball { .. }));
        if pairs > 0 && both_balls && dim >= 2 {
            let (mean, stderr) = sphere_normal_mc(dim, pairs, self.cfg.seed);
            let areas = omega.surface_area().map_err(at("surface area"))?
                * gamma.surface_area().map_err(at("surface area"))?;
            columns.extend(["J_monte_carlo", "J_monte_carlo_stderr"]);
            row.extend([mean * areas, stderr * areas]);
            out.comparisons.push(Comparison::new("J", j, None, mean * areas));
        } else if pairs > 0 {
            out.notes.push("mc_pairs ignored: the Monte Carlo oracle needs two balls in d ≥ 2".into());
        }
        out.table = Table::new(&columns, vec![row]);
        Ok(out)
    }

    fn moments(&self) -> Result<Outcome, CliError> {
        let kf = self.cfg.k_fermi();
        let powers = self.cfg.moments.clone().unwrap_or_else(|| vec![2, 3]);
        let j = self.cube_sea(1)?;
        let us = powers
            .iter()
            .map(|&n| u_functional(&EntropyFunctional::monomial(n), U_TOL).map_err(at(format!("U(t^{n})"))))
            .collect::<Result<Vec<_>, _>>()?;
        let rows = self.sweep(
            &self.cfg.scales(),
            |l| format!("L = {l}"),
            |&l| {
                let s: Spectrum = spectrum(&sine_kernel_1d(l as usize, kf)?)?;
                let leading = l * kf / PI;
                Ok(powers
                    .iter()
                    .zip(&us)
                    .map(|(&n, &u)| {
                        let trace = spectral_sum(&s, &EntropyFunctional::monomial(n));
                        let predicted = leading + j / (4.0 * PI * PI) * u * l.ln();
                        vec![l, n as f64, trace, leading, trace - leading, predicted]
                    })
                    .collect())
            },
        )?;
        let columns = ["L", "n", "trace", "leading", "trace_minus_leading", "trace_predicted"];
        let mut out = Outcome { table: Table::new(&columns, rows), ..Default::default() };
        let basis = default_basis(1);
        for (&n, &u) in powers.iter().zip(&us) {
            let points: Vec<(f64, f64)> =
                out.table.rows.iter().filter(|r| r[1] == n as f64).map(|r| (r[0], r[4])).collect();
            let fit = self.fit_points(&mut out, 1, &format!("trace_minus_leading[n={n}]"), points, &basis)?;
            self.compare_log(&mut out, &format!("moment log coefficient n={n}"), fit, 1.0, j * u / (4.0 * PI * PI));
        }
        Ok(out)
    }

    fn thermal(&self) -> Result<Outcome, CliError> {
        let omega = self.cfg.omega()?;
        let dim = omega.dim();
        let base = self.cfg.base;
        let spec = self.cfg.thermal.as_ref().expect("validated");
        let points: Vec<(f64, f64)> =
            spec.beta.iter().flat_map(|&b| self.cfg.scales().into_iter().map(move |l| (b, l))).collect();
        let rows = self.sweep(
            &points,
            |(b, l)| format!("β = {b}, L = {l}"),
            |&(beta, l)| {
                let params = ThermalParams::new(beta, spec.mu, dim)?;
                let s = thermal_entropy(&omega, l, &params, base)?;
                let t_star = if l > 1.0 { crossover_temperature(l, spec.mu, dim, base)? } else { 0.0 };
                Ok(vec![vec![beta, spec.mu, dim as f64, l, s, t_star]])
            },
        )?;
        Ok(Outcome { table: Table::new(&["beta", "mu", "d", "L", "S", "T_star"], rows), ..Default::default() })
    }

    fn fractal(&self) -> Result<Outcome, CliError> {
        let (omega, gamma) = self.cfg.regions()?;
        let opts = self.variance_options();
        let rows = self.scale_sweep(|l| {
            let r = variance_continuum_with(&omega, &gamma, l, &opts)?;
            Ok(vec![l, r.tr_pqp, r.variance, r.quadrature_error_estimate])
        })?;
        let mut out = Outcome {
            table: Table::new(&["L", "tr_pqp", "variance", "quadrature_error"], rows),
            ..Default::default()
        };
        let points: Vec<(f64, f64)> = out.table.rows.iter().map(|r| (r[0], r[2])).collect();
        if points.len() < 4 {
            out.notes.push("variance: too few points for an exponent fit".into());
            return Ok(out);
        }
        let (lmin, lmax) = (points[0].0, points[points.len() - 1].0);
        let series = ScalingSeries::new(1, points, "variance").map_err(at("exponent fit"))?;
        let fit = exponent_fit(&series).map_err(at("exponent fit"))?;
        let defects: Vec<(f64, f64)> =
            logspace(1.0 / lmax, 1.0 / lmin, 40).into_iter().map(|h| (h, omega.shift_defect(&[h]))).collect();
        let beta = power_law_exponent(&defects).map_err(at("shift-defect exponent"))?;
        out.fits.push(FitSummary {
            target: "variance".into(),
            model: if fit.log_factor { "L^alpha ln L" } else { "L^alpha" }.into(),
            labels: vec!["alpha".into()],
            coefficients: vec![fit.alpha],
            std_errors: vec![],
            diagnostics: [("rss_pure".to_string(), fit.rss_pure), ("rss_log".to_string(), fit.rss_log)].into(),
        });
        out.comparisons.push(Comparison::new("variance exponent", fit.alpha, None, 1.0 - beta));
        Ok(out)
    }
}
