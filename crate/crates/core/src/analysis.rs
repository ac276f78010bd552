//! Least-squares extraction of scaling coefficients from sweep data.

use crate::error::{Error, Result};
use faer::linalg::solvers::SolveLstsq;
use faer::Mat;
use serde::Serialize;

pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingSeries {
    pub dim: usize,
    pub points: Vec<(f64, f64)>,
    pub label: String,
}

impl ScalingSeries {
    pub fn new(dim: usize, points: Vec<(f64, f64)>, label: impl Into<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter { name: "dim", reason: "must be positive".into() });
        }
        if points.len() < 4 {
            return Err(Error::InvalidParameter {
                name: "points",
                reason: format!("{} points, need at least 4", points.len()),
            });
        }
        if points.iter().any(|&(l, v)| !(l > 0.0 && l.is_finite()) || !v.is_finite()) {
            return Err(Error::InvalidParameter { name: "points", reason: "non-finite value or L ≤ 0".into() });
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidParameter { name: "points", reason: "L must be strictly increasing".into() });
        }
        Ok(Self { dim, points, label: label.into() })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn scales(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0)
    }

    /// Multiplies every value by `factor` (e.g. a change of logarithm base).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            points: self.points.iter().map(|&(l, v)| (l, v * factor)).collect(),
            label: self.label.clone(),
        }
    }

    /// The upper half of the grid, used for stability checks.
    pub fn largest_half(&self) -> Result<Self> {
        let start = self.points.len() / 2;
        Self::new(self.dim, self.points[start..].to_vec(), format!("{} (upper half)", self.label))
    }

    /// Diagnostic quotient value / (L^{d-1} ln L) at every point.
    pub fn log_quotients(&self) -> Vec<f64> {
        self.points
            .iter()
            .map(|&(l, v)| v / (l.powi(self.dim as i32 - 1) * l.ln()))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BasisFn {
    /// L^{d-1} ln L
    LeadingLog,
    /// L^{d-1}
    Leading,
    /// L^{d-2} ln L
    SubleadingLog,
    /// L^{d-2}
    Subleading,
    Constant,
}

impl BasisFn {
    pub fn eval(self, dim: usize, l: f64) -> f64 {
        let d = dim as i32;
        match self {
            BasisFn::LeadingLog => l.powi(d - 1) * l.ln(),
            BasisFn::Leading => l.powi(d - 1),
            BasisFn::SubleadingLog => l.powi(d - 2) * l.ln(),
            BasisFn::Subleading => l.powi(d - 2),
            BasisFn::Constant => 1.0,
        }
    }

    pub fn label(self, dim: usize) -> String {
        let power = |k: i64| match k {
            0 => String::new(),
            1 => "L".to_string(),
            k => format!("L^{k}"),
        };
        let join = |p: String, log: bool| match (p.is_empty(), log) {
            (true, true) => "ln L".to_string(),
            (true, false) => "1".to_string(),
            (false, true) => format!("{p} ln L"),
            (false, false) => p,
        };
        let d = dim as i64;
        match self {
            BasisFn::LeadingLog => join(power(d - 1), true),
            BasisFn::Leading => join(power(d - 1), false),
            BasisFn::SubleadingLog => join(power(d - 2), true),
            BasisFn::Subleading => join(power(d - 2), false),
            BasisFn::Constant => "1".to_string(),
        }
    }
}

/// {L^{d-1} ln L, L^{d-1}, 1}; in one dimension L^0 coincides with the constant.
pub fn default_basis(dim: usize) -> Vec<BasisFn> {
    if dim == 1 {
        vec![BasisFn::LeadingLog, BasisFn::Constant]
    } else {
        vec![BasisFn::LeadingLog, BasisFn::Leading, BasisFn::Constant]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub labels: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_relative_residual: f64,
    /// Condition number of the column-normalized design matrix.
    pub condition_number: f64,
}

impl FitResult {
    pub fn leading(&self) -> (f64, f64) {
        (self.coefficients[0], self.std_errors[0])
    }
}

/// Row weights of the least-squares problem.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub enum Weighting {
    /// Deterministic sweep data.
    #[default]
    Unit,
    /// Weights 1/|y|, appropriate for multiplicative noise.
    Relative,
}

/// Unit-weight least squares of the series on `basis` via Householder QR.
pub fn fit_scaling(series: &ScalingSeries, basis: &[BasisFn]) -> Result<FitResult> {
    fit_scaling_weighted(series, basis, Weighting::Unit)
}

pub fn fit_scaling_weighted(series: &ScalingSeries, basis: &[BasisFn], weighting: Weighting) -> Result<FitResult> {
    let n = series.len();
    let p = basis.len();
    if p == 0 {
        return Err(Error::FitFailed("empty basis".into()));
    }
    if n <= p + 1 {
        return Err(Error::FitFailed(format!("{n} points for {p} basis functions")));
    }
    let weights: Vec<f64> = match weighting {
        Weighting::Unit => vec![1.0; n],
        Weighting::Relative => {
            if series.points.iter().any(|q| q.1 == 0.0) {
                return Err(Error::FitFailed("relative weights need non-zero values".into()));
            }
            series.points.iter().map(|q| 1.0 / q.1.abs()).collect()
        }
    };
    let raw = Mat::from_fn(n, p, |i, j| basis[j].eval(series.dim, series.points[i].0));
    let norms: Vec<f64> =
        (0..p).map(|j| (0..n).map(|i| (weights[i] * raw[(i, j)]).powi(2)).sum::<f64>().sqrt()).collect();
    if norms.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
        return Err(Error::FitFailed("degenerate basis column".into()));
    }
    let design = Mat::from_fn(n, p, |i, j| weights[i] * raw[(i, j)] / norms[j]);
    let sv = design.singular_values().map_err(|_| Error::FitFailed("SVD did not converge".into()))?;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = smax / smin;
    if !(condition.is_finite() && condition <= MAX_CONDITION) {
        return Err(Error::FitFailed(format!("condition number {condition:.3e} exceeds {MAX_CONDITION:e}")));
    }

    let rhs = Mat::from_fn(n, 1, |i, _| weights[i] * series.points[i].1);
    let qr = design.qr();
    let scaled = qr.solve_lstsq(&rhs);
    let coefficients: Vec<f64> = (0..p).map(|j| scaled[(j, 0)] / norms[j]).collect();

    let residuals: Vec<f64> = (0..n)
        .map(|i| {
            let model: f64 = (0..p).map(|j| raw[(i, j)] * coefficients[j]).sum();
            series.points[i].1 - model
        })
        .collect();
    let floor = series.points.iter().map(|q| q.1.abs()).fold(f64::MIN_POSITIVE, f64::max) * 1e-12;
    let max_relative_residual = residuals
        .iter()
        .zip(&series.points)
        .map(|(r, q)| r.abs() / q.1.abs().max(floor))
        .fold(0.0, f64::max);

    // cov = σ² (RᵀR)^{-1}; the diagonal of (RᵀR)^{-1} is the squared row norm of R^{-1}.
    let rss: f64 = residuals.iter().zip(&weights).map(|(r, w)| (r * w).powi(2)).sum();
    let sigma_sq = rss / (n - p) as f64;
    let r = qr.thin_R();
    let rinv = upper_inverse(p, |i, j| r[(i, j)]);
    let std_errors = (0..p)
        .map(|j| {
            let row: f64 = (j..p).map(|k| rinv[j][k].powi(2)).sum();
            (sigma_sq * row).sqrt() / norms[j]
        })
        .collect();

    Ok(FitResult {
        labels: basis.iter().map(|b| b.label(series.dim)).collect(),
        coefficients,
        std_errors,
        residuals,
        max_relative_residual,
        condition_number: condition,
    })
}

fn upper_inverse(p: usize, r: impl Fn(usize, usize) -> f64) -> Vec<Vec<f64>> {
    let mut inv = vec![vec![0.0; p]; p];
    for col in 0..p {
        for i in (0..=col).rev() {
            let mut acc = if i == col { 1.0 } else { 0.0 };
            for k in i + 1..=col {
                acc -= r(i, k) * inv[k][col];
            }
            inv[i][col] = acc / r(i, i);
        }
    }
    inv
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    pub alpha: f64,
    pub log_factor: bool,
    pub residuals: Vec<f64>,
    pub rss_pure: f64,
    pub rss_log: f64,
}

/// Compares ln V = α ln L + c against ln V = α ln L + ln ln L + c.
pub fn exponent_fit(series: &ScalingSeries) -> Result<ExponentFit> {
    if series.points.iter().any(|&(_, v)| v <= 0.0) {
        return Err(Error::FitFailed("exponent fit needs positive values".into()));
    }
    if series.points[0].0 <= 1.0 {
        return Err(Error::FitFailed("exponent fit needs L > 1".into()));
    }
    let xs: Vec<f64> = series.points.iter().map(|p| p.0.ln()).collect();
    let pure: Vec<f64> = series.points.iter().map(|p| p.1.ln()).collect();
    let logged: Vec<f64> = series.points.iter().map(|p| p.1.ln() - p.0.ln().ln()).collect();
    let (a0, r0) = line_fit(&xs, &pure);
    let (a1, r1) = line_fit(&xs, &logged);
    let rss = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
    let (rss_pure, rss_log) = (rss(&r0), rss(&r1));
    if rss_log < rss_pure {
        Ok(ExponentFit { alpha: a1, log_factor: true, residuals: r1, rss_pure, rss_log })
    } else {
        Ok(ExponentFit { alpha: a0, log_factor: false, residuals: r0, rss_pure, rss_log })
    }
}

/// Log-log slope of positive data, e.g. Vol(Ω∖(Ω+h)) against ‖h‖.
pub fn power_law_exponent(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::FitFailed("power law needs at least two positive points".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    Ok(line_fit(&xs, &ys).0)
}

fn line_fit(x: &[f64], y: &[f64]) -> (f64, Vec<f64>) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let res = x.iter().zip(y).map(|(a, b)| b - slope * a - intercept).collect();
    (slope, res)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientReport {
    pub basis: String,
    pub measured: f64,
    pub std_error: f64,
    pub predicted: f64,
    pub ratio: f64,
    /// Standard error of the ratio.
    pub confidence: f64,
}

/// Fits `series` and pairs the first basis coefficient with `predicted`.
pub fn coefficient_report(series: &ScalingSeries, basis: &[BasisFn], predicted: f64) -> Result<CoefficientReport> {
    let fit = fit_scaling(series, basis)?;
    let (measured, std_error) = fit.leading();
    Ok(CoefficientReport {
        basis: fit.labels[0].clone(),
        measured,
        std_error,
        predicted,
        ratio: measured / predicted,
        confidence: std_error / predicted.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
    }

    fn series(dim: usize, mut f: impl FnMut(f64) -> f64) -> ScalingSeries {
        let pts = grid(10.0, 1000.0, 12).into_iter().map(|l| (l, f(l))).collect();
        ScalingSeries::new(dim, pts, "synthetic").unwrap()
    }

    #[test]
    fn series_validation() {
        assert!(ScalingSeries::new(1, vec![(1.0, 1.0), (2.0, 1.0), (3.0, 1.0)], "x").is_err());
        assert!(ScalingSeries::new(1, vec![(1.0, 1.0), (2.0, 1.0), (2.0, 1.0), (3.0, 1.0)], "x").is_err());
        assert!(ScalingSeries::new(1, vec![(1.0, 1.0), (2.0, 1.0), (3.0, f64::NAN), (4.0, 1.0)], "x").is_err());
    }

    #[test]
    fn exact_two_dim_model() {
        let s = series(2, |l| 2.0 * l * l.ln() + 3.0 * l);
        let fit = fit_scaling(&s, &default_basis(2)).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-9);
        assert!((fit.coefficients[1] - 3.0).abs() < 1e-9);
        assert!(fit.coefficients[2].abs() < 1e-6);
        assert!(fit.max_relative_residual < 1e-9);
        assert_eq!(fit.residuals.len(), s.len());
        assert_eq!(fit.labels, vec!["L ln L", "L", "1"]);
    }

    #[test]
    fn constant_series() {
        let s = series(2, |_| 5.0);
        let fit = fit_scaling(&s, &default_basis(2)).unwrap();
        assert!(fit.coefficients[0].abs() < 1e-9);
        assert!((fit.coefficients[2] - 5.0).abs() < 1e-7);
    }

    #[test]
    fn noisy_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts = grid(10.0, 1e4, 60)
            .into_iter()
            .map(|l| (l, (2.0 * l * l.ln() + 3.0 * l) * (1.0 + 0.01 * rng.random_range(-1.0..1.0))))
            .collect();
        let s = ScalingSeries::new(2, pts, "noisy").unwrap();
        let fit = fit_scaling_weighted(&s, &default_basis(2), Weighting::Relative).unwrap();
        assert!((fit.coefficients[0] / 2.0 - 1.0).abs() < 0.03, "{fit:?}");
        // unit weights let the largest L dominate; the estimate is only good to its error bar
        let unit = fit_scaling(&s, &default_basis(2)).unwrap();
        assert!((unit.coefficients[0] - 2.0).abs() < 3.0 * unit.std_errors[0], "{unit:?}");
    }

    #[test]
    fn one_dim_default_basis() {
        let s = series(1, |l| l.ln() / std::f64::consts::PI.powi(2) + 0.3);
        let fit = fit_scaling(&s, &default_basis(1)).unwrap();
        assert!((fit.coefficients[0] - 1.0 / std::f64::consts::PI.powi(2)).abs() < 1e-12);
        assert_eq!(fit.labels, vec!["ln L", "1"]);
    }

    #[test]
    fn too_few_points_and_rank_deficiency() {
        let s = series(3, |l| l);
        let basis = [BasisFn::LeadingLog, BasisFn::Leading, BasisFn::SubleadingLog, BasisFn::Subleading, BasisFn::Constant];
        assert!(fit_scaling(&s, &basis).is_ok());
        // in two dimensions L^{d-2} is the constant
        assert!(fit_scaling(&s, &[BasisFn::Leading, BasisFn::Subleading, BasisFn::Constant]).is_ok());
        let s2 = ScalingSeries { dim: 2, ..s.clone() };
        assert!(fit_scaling(&s2, &[BasisFn::Subleading, BasisFn::Constant]).is_err());
        let dup = [BasisFn::Leading, BasisFn::Leading];
        assert!(matches!(fit_scaling(&s, &dup), Err(Error::FitFailed(_))));
        let short = ScalingSeries::new(2, vec![(1.0, 1.0), (2.0, 2.0), (3.0, 3.0), (4.0, 4.0)], "x").unwrap();
        assert!(fit_scaling(&short, &default_basis(2)).is_err());
    }

    #[test]
    fn standard_errors_match_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = series(2, |l| l * l.ln() + rng.random_range(-1.0..1.0));
        let basis = default_basis(2);
        let fit = fit_scaling(&s, &basis).unwrap();
        // explicit (XᵀX)^{-1} for the 3×3 case by cofactors
        let x: Vec<[f64; 3]> = s.points.iter().map(|p| [0, 1, 2].map(|j| basis[j].eval(2, p.0))).collect();
        let mut g = [[0.0; 3]; 3];
        for row in &x {
            for i in 0..3 {
                for j in 0..3 {
                    g[i][j] += row[i] * row[j];
                }
            }
        }
        let det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
            + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
        let inv00 = (g[1][1] * g[2][2] - g[1][2] * g[2][1]) / det;
        let rss: f64 = fit.residuals.iter().map(|r| r * r).sum();
        let se0 = (rss / (s.len() - 3) as f64 * inv00).sqrt();
        assert!((fit.std_errors[0] / se0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn exponent_selection() {
        let wide = |f: &dyn Fn(f64) -> f64| {
            let pts = grid(1e2, 1e6, 20).into_iter().map(|l| (l, f(l))).collect();
            ScalingSeries::new(1, pts, "v").unwrap()
        };
        let pure = exponent_fit(&wide(&|l: f64| l.powf(0.63))).unwrap();
        assert!((pure.alpha - 0.63).abs() < 1e-12 && !pure.log_factor);
        let logged = exponent_fit(&wide(&|l: f64| l.powf(0.63) * l.ln())).unwrap();
        assert!(logged.log_factor && (logged.alpha - 0.63).abs() < 0.02);
        let flat = exponent_fit(&wide(&|_| 4.0)).unwrap();
        assert!(flat.alpha.abs() < 1e-12);
        assert!(exponent_fit(&wide(&|_| -1.0)).is_err());
        let pts: Vec<(f64, f64)> = grid(1e-4, 1e-1, 9).into_iter().map(|h| (h, 3.0 * h.powf(0.37))).collect();
        assert!((power_law_exponent(&pts).unwrap() - 0.37).abs() < 1e-12);
    }

    #[test]
    fn report_ratio_and_base_invariance() {
        let c = 1.0 / std::f64::consts::PI.powi(2);
        let s = series(1, |l| c * l.ln() + 0.1);
        let r = coefficient_report(&s, &default_basis(1), c).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-12);
        let k = 1.0 / std::f64::consts::LN_2;
        let rb = coefficient_report(&s.scaled(k), &default_basis(1), c * k).unwrap();
        assert!((rb.ratio - r.ratio).abs() < 1e-12);
    }
}
