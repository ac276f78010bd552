//! Continuum particle-number variance (ΔN)² = Tr PQP − Tr (PQP)².
//!
//! Tr PQP is exact. Tr (PQP)² is evaluated in momentum form
//!
//!   Tr (PQP)² = (L/2π)^{2d} ∫ A_Γ(q) |χ̂_Ω(Lq)|² dq,
//!
//! which only needs the compactly supported autocorrelation of Γ and the
//! closed-form indicator transform of Ω. Swapping the roles of Ω and Γ gives
//! the position-space form of the same trace.

use crate::analysis::ScalingSeries;
use crate::error::{Error, Result};
use crate::geometry::{Interval, Region};
use crate::quad::{panel_edges, GaussLegendre};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Quadrature controls for the momentum-space trace.
#[derive(Debug, Clone, Copy)]
pub struct VarianceOptions {
    /// Error estimate must stay below `rel_tol · Tr PQP`.
    pub rel_tol: f64,
    /// Gauss-Legendre points per panel in one-dimensional integrals.
    pub nodes_1d: usize,
    /// Points per panel per axis in two- and three-dimensional integrals.
    pub nodes_nd: usize,
    /// Panels per half-period π/(L·extent) of the Ω transform.
    pub panels_per_half_period: f64,
}

impl Default for VarianceOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-8, nodes_1d: 16, nodes_nd: 8, panels_per_half_period: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceResult {
    pub scale: f64,
    pub tr_pqp: f64,
    pub tr_pqp_sq: f64,
    pub variance: f64,
    pub quadrature_error_estimate: f64,
}

fn check_pair(omega: &Region, gamma: &Region, scale: f64) -> Result<()> {
    if omega.dim() != gamma.dim() {
        return Err(Error::DimensionMismatch { expected: omega.dim(), got: gamma.dim() });
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParameter { name: "L", reason: format!("{scale} must be positive") });
    }
    Ok(())
}

/// (L/2π)^d |Ω| |Γ|.
pub fn tr_pqp(omega: &Region, gamma: &Region, scale: f64) -> f64 {
    (scale / (2.0 * PI)).powi(omega.dim() as i32) * omega.volume() * gamma.volume()
}

/// Value of an integral together with the spread between two rules.
#[derive(Debug, Clone, Copy)]
struct Quadrature {
    value: f64,
    error: f64,
}

impl std::ops::Mul for Quadrature {
    type Output = Quadrature;
    fn mul(self, rhs: Quadrature) -> Quadrature {
        Quadrature {
            value: self.value * rhs.value,
            error: self.error * rhs.value.abs() + rhs.error * self.value.abs() + self.error * rhs.error,
        }
    }
}

struct Rules {
    fine: GaussLegendre,
    coarse: GaussLegendre,
}

impl Rules {
    fn new(n: usize) -> Self {
        Self { fine: GaussLegendre::new(n), coarse: GaussLegendre::new(n.saturating_sub(2).max(2)) }
    }
}

fn integrate_1d<F: Fn(f64) -> f64 + Sync>(rules: &Rules, breaks: &[f64], width: f64, f: F) -> Quadrature {
    let edges = panel_edges(breaks, width);
    let parts: Vec<(f64, f64)> = edges
        .par_windows(2)
        .map(|w| (rules.fine.integrate(w[0], w[1], &f), rules.coarse.integrate(w[0], w[1], &f)))
        .collect();
    let fine: f64 = parts.iter().map(|p| p.0).sum();
    let coarse: f64 = parts.iter().map(|p| p.1).sum();
    Quadrature { value: fine, error: (fine - coarse).abs() }
}

fn sorted_breaks(mut v: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    v.retain(|x| *x > lo && *x < hi);
    v.push(lo);
    v.push(hi);
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() < 1e-15 * (1.0 + b.abs()));
    v
}

/// Kinks of A_Γ on [0, D] for a one-dimensional Γ: all endpoint differences,
/// when there are few enough intervals to list them.
fn one_dim_kinks(gamma: &Region, support: f64) -> Vec<f64> {
    let ivs = gamma.cantor_intervals();
    if ivs.len() > 64 {
        return Vec::new();
    }
    let ends: Vec<f64> = ivs.iter().flat_map(|iv| [iv.lo, iv.hi]).collect();
    let mut out = Vec::new();
    for a in &ends {
        for b in &ends {
            let d = (a - b).abs();
            if d > 0.0 && d < support {
                out.push(d);
            }
        }
    }
    out
}

/// Deepest Cantor Γ expanded term by term (3^depth shifted triangles).
const MAX_CANTOR_EXPANSION: u32 = 13;

/// ∫_R A_Γ(q) |χ̂_Ω(Lq)|² dq for one-dimensional regions (without prefactor).
fn momentum_integral_1d(omega: &Region, gamma: &Region, scale: f64, opts: &VarianceOptions) -> Quadrature {
    if let Region::Cantor1D { base, ratio, depth } = gamma {
        if (1..=MAX_CANTOR_EXPANSION).contains(depth) {
            return momentum_integral_cantor(omega, base, *ratio, *depth, scale, opts);
        }
    }
    momentum_integral_kinked(omega, gamma, scale, opts)
}

/// Generic route: panels plus the listed kinks of A_Γ.
fn momentum_integral_kinked(omega: &Region, gamma: &Region, scale: f64, opts: &VarianceOptions) -> Quadrature {
    let support = gamma.extents()[0];
    let width = PI / (scale * omega.extents()[0] * opts.panels_per_half_period);
    let breaks = sorted_breaks(one_dim_kinks(gamma, support), 0.0, support);
    let rules = Rules::new(opts.nodes_1d);
    let half = integrate_1d(&rules, &breaks, width, |q| {
        gamma.autocorrelation(&[q]) * omega.indicator_ft_sq(&[scale * q])
    });
    Quadrature { value: 2.0 * half.value, error: 2.0 * half.error }
}

/// Unrolling the self-similarity of a Cantor Γ with base length ℓ writes
/// A_Γ(q) = ℓ c^m Σ_S W_S (1 − |q/ℓ − S|/c^m)_+ with S = t Σ_k ε_k c^k,
/// ε_k ∈ {−1, 0, 0, +1}, so the integral becomes
/// ℓ² c^{2m} Σ_S W_S ∫_{-1}^{1} (1 − |u|) |χ̂_Ω(Lℓ(S + c^m u))|² du,
/// each term smooth at scales inside the resolvable window.
fn momentum_integral_cantor(
    omega: &Region,
    base: &Interval,
    ratio: f64,
    depth: u32,
    scale: f64,
    opts: &VarianceOptions,
) -> Quadrature {
    let c = 0.5 * (1.0 - ratio);
    let t = 1.0 - c;
    let ell = base.length();
    let mut shifts = vec![(0.0f64, 1.0f64)];
    let mut step = t;
    for _ in 0..depth {
        shifts = shifts
            .iter()
            .flat_map(|&(s, w)| [(s, 2.0 * w), (s + step, w), (s - step, w)])
            .collect();
        step *= c;
    }
    let cm = c.powi(depth as i32);
    let rules = Rules::new(opts.nodes_1d);
    let width = (PI / (scale * ell * cm * omega.extents()[0] * opts.panels_per_half_period)).min(1.0);
    let edges = panel_edges(&[0.0, 1.0], width);
    let g = |q: f64| omega.indicator_ft_sq(&[scale * q]);
    let terms: Vec<(f64, f64)> = shifts
        .par_iter()
        .map(|&(s, w)| {
            let f = |u: f64| (1.0 - u) * (g(ell * (s + cm * u)) + g(ell * (s - cm * u)));
            let (mut fine, mut coarse) = (0.0, 0.0);
            for e in edges.windows(2) {
                fine += rules.fine.integrate(e[0], e[1], f);
                coarse += rules.coarse.integrate(e[0], e[1], f);
            }
            (w * fine, w * coarse)
        })
        .collect();
    let fine: f64 = terms.iter().map(|p| p.0).sum();
    let coarse: f64 = terms.iter().map(|p| p.1).sum();
    let pref = ell * ell * cm * cm;
    Quadrature { value: pref * fine, error: pref * (fine - coarse).abs() }
}

fn axis_region(iv: Interval) -> Region {
    Region::boxed(vec![iv]).expect("valid interval")
}

/// Radial integral for two balls (d ≥ 2).
fn momentum_integral_balls(
    dim: usize,
    r_omega: f64,
    r_gamma: f64,
    scale: f64,
    opts: &VarianceOptions,
) -> Quadrature {
    let omega = Region::centered_ball(dim, r_omega).expect("valid ball");
    let gamma = Region::centered_ball(dim, r_gamma).expect("valid ball");
    let sphere = crate::geometry::unit_sphere_area(dim);
    let width = PI / (scale * 2.0 * r_omega * opts.panels_per_half_period);
    let rules = Rules::new(opts.nodes_1d);
    let mut dir = vec![0.0; dim];
    dir[0] = 1.0;
    let d = dim as i32;
    integrate_1d(&rules, &[0.0, 2.0 * r_gamma], width, |r| {
        let z: Vec<f64> = dir.iter().map(|x| x * r).collect();
        let k: Vec<f64> = dir.iter().map(|x| x * r * scale).collect();
        sphere * r.powi(d - 1) * gamma.autocorrelation(&z) * omega.indicator_ft_sq(&k)
    })
}

/// Tensor Gauss-Legendre over a grid of axis-aligned cells.
fn integrate_cells<F: Fn(&[f64]) -> f64 + Sync>(rule: &GaussLegendre, axes: &[Vec<f64>], f: &F) -> f64 {
    let dim = axes.len();
    let per_axis: Vec<Vec<(f64, f64)>> = axes
        .iter()
        .map(|edges| edges.windows(2).flat_map(|w| rule.mapped(w[0], w[1]).collect::<Vec<_>>()).collect())
        .collect();
    // parallel over nodes of the first axis; deterministic order of reduction
    let rows: Vec<f64> = per_axis[0]
        .par_iter()
        .map(|&(x0, w0)| {
            let mut point = vec![0.0; dim];
            point[0] = x0;
            let mut acc = 0.0;
            match dim {
                1 => acc = f(&point),
                2 => {
                    for &(x1, w1) in &per_axis[1] {
                        point[1] = x1;
                        acc += w1 * f(&point);
                    }
                }
                _ => {
                    for &(x1, w1) in &per_axis[1] {
                        point[1] = x1;
                        let mut inner = 0.0;
                        for &(x2, w2) in &per_axis[2] {
                            point[2] = x2;
                            inner += w2 * f(&point);
                        }
                        acc += w1 * inner;
                    }
                }
            }
            w0 * acc
        })
        .collect();
    crate::spectral::pairwise_sum(&rows)
}

fn integrate_cells_pair<F: Fn(&[f64]) -> f64 + Sync>(rules: &Rules, axes: &[Vec<f64>], f: &F) -> Quadrature {
    let fine = integrate_cells(&rules.fine, axes, f);
    let coarse = integrate_cells(&rules.coarse, axes, f);
    Quadrature { value: fine, error: (fine - coarse).abs() }
}

/// Generic d-dimensional momentum integral for mixed geometries.
fn momentum_integral_mixed(omega: &Region, gamma: &Region, scale: f64, opts: &VarianceOptions) -> Quadrature {
    let dim = omega.dim();
    let ext = omega.diameter();
    let width = PI / (scale * ext * opts.panels_per_half_period);
    let rules = Rules::new(opts.nodes_nd);
    match gamma {
        Region::Ball { radius, .. } => {
            // polar / spherical coordinates centred on the origin of A_Γ
            let rmax = 2.0 * radius;
            let r_edges = panel_edges(&[0.0, rmax], width);
            let ang_panels = ((2.0 * PI * rmax * scale * ext) / (PI * opts.panels_per_half_period)).ceil().max(4.0);
            let f = |x: &[f64]| {
                let r = x[0];
                let a = gamma.autocorrelation(&radial_point(dim, r));
                if a == 0.0 {
                    return 0.0;
                }
                match dim {
                    2 => {
                        let k = [scale * r * x[1].cos(), scale * r * x[1].sin()];
                        r * a * omega.indicator_ft_sq(&k)
                    }
                    _ => {
                        let st = (1.0 - x[1] * x[1]).max(0.0).sqrt();
                        let k = [scale * r * st * x[2].cos(), scale * r * st * x[2].sin(), scale * r * x[1]];
                        r * r * a * omega.indicator_ft_sq(&k)
                    }
                }
            };
            let axes = match dim {
                2 => vec![r_edges, panel_edges(&[0.0, 2.0 * PI], 2.0 * PI / ang_panels)],
                _ => vec![
                    r_edges,
                    panel_edges(&[-1.0, 1.0], 2.0 / (0.5 * ang_panels).ceil()),
                    panel_edges(&[0.0, 2.0 * PI], 2.0 * PI / ang_panels),
                ],
            };
            integrate_cells_pair(&rules, &axes, &f)
        }
        _ => {
            let ext_gamma = gamma.extents();
            let axes: Vec<Vec<f64>> = (0..dim)
                .map(|j| {
                    let d = ext_gamma[j];
                    let mut br = vec![-d, 0.0, d];
                    if let Region::Box(b) = gamma {
                        let l = b.intervals[j].length();
                        br = vec![-l, 0.0, l];
                    }
                    panel_edges(&br, width)
                })
                .collect();
            let f = |q: &[f64]| {
                let a = gamma.autocorrelation(q);
                if a == 0.0 {
                    return 0.0;
                }
                let k: Vec<f64> = q.iter().map(|x| x * scale).collect();
                a * omega.indicator_ft_sq(&k)
            };
            integrate_cells_pair(&rules, &axes, &f)
        }
    }
}

fn radial_point(dim: usize, r: f64) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[0] = r;
    v
}

fn tr_pqp_sq_impl(omega: &Region, gamma: &Region, scale: f64, opts: &VarianceOptions) -> Quadrature {
    let dim = omega.dim();
    let pref = (scale / (2.0 * PI)).powi(2 * dim as i32);
    let q = match (omega, gamma) {
        _ if dim == 1 => momentum_integral_1d(omega, gamma, scale, opts),
        (Region::Box(bo), Region::Box(bg)) => bo
            .intervals
            .iter()
            .zip(&bg.intervals)
            .map(|(io, ig)| momentum_integral_1d(&axis_region(*io), &axis_region(*ig), scale, opts))
            .fold(Quadrature { value: 1.0, error: 0.0 }, |acc, x| acc * x),
        (Region::Ball { radius: ro, .. }, Region::Ball { radius: rg, .. }) => {
            momentum_integral_balls(dim, *ro, *rg, scale, opts)
        }
        _ => momentum_integral_mixed(omega, gamma, scale, opts),
    };
    Quadrature { value: pref * q.value, error: pref * q.error }
}

/// Tr (PQP)² in momentum form.
pub fn tr_pqp_sq(omega: &Region, gamma: &Region, scale: f64) -> Result<f64> {
    tr_pqp_sq_with(omega, gamma, scale, &VarianceOptions::default()).map(|(v, _)| v)
}

/// Tr (PQP)² and its quadrature error estimate.
pub fn tr_pqp_sq_with(omega: &Region, gamma: &Region, scale: f64, opts: &VarianceOptions) -> Result<(f64, f64)> {
    check_pair(omega, gamma, scale)?;
    let q = tr_pqp_sq_impl(omega, gamma, scale, opts);
    let tol = opts.rel_tol * tr_pqp(omega, gamma, scale).max(1.0);
    if !(q.error <= tol) {
        return Err(Error::QuadratureFailed { estimate: q.error, tol });
    }
    Ok((q.value, q.error))
}

/// Position-space form (L/2π)^{2d} ∫ A_Ω(z) |χ̂_Γ(Lz)|² dz of the same trace.
pub fn tr_pqp_sq_position_form(omega: &Region, gamma: &Region, scale: f64, opts: &VarianceOptions) -> Result<(f64, f64)> {
    tr_pqp_sq_with(gamma, omega, scale, opts)
}

pub fn variance_continuum(omega: &Region, gamma: &Region, scale: f64) -> Result<VarianceResult> {
    variance_continuum_with(omega, gamma, scale, &VarianceOptions::default())
}

pub fn variance_continuum_with(
    omega: &Region,
    gamma: &Region,
    scale: f64,
    opts: &VarianceOptions,
) -> Result<VarianceResult> {
    let (sq, err) = tr_pqp_sq_with(omega, gamma, scale, opts)?;
    let tr = tr_pqp(omega, gamma, scale);
    let variance = tr - sq;
    if sq < 0.0 || variance < 0.0 {
        return Err(Error::QuadratureFailed { estimate: variance.min(sq).abs(), tol: 0.0 });
    }
    Ok(VarianceResult { scale, tr_pqp: tr, tr_pqp_sq: sq, variance, quadrature_error_estimate: err })
}

/// Scales L for which the shift scale 1/L lies in the self-similar band
/// [smallest interval, largest gap] of a Cantor set. `None` for depth 0 or
/// non-Cantor regions.
pub fn cantor_window(region: &Region) -> Option<(f64, f64)> {
    match region {
        Region::Cantor1D { base, ratio, depth } if *depth > 0 => {
            let c = 0.5 * (1.0 - ratio);
            let smallest = base.length() * c.powi(*depth as i32);
            let largest_gap = base.length() * ratio;
            Some((1.0 / largest_gap, 1.0 / smallest))
        }
        _ => None,
    }
}

/// Variance over a list of scales for a Cantor-type Ω.
pub fn fractal_variance_sweep(
    omega: &Region,
    gamma: &Region,
    scales: &[f64],
    opts: &VarianceOptions,
) -> Result<ScalingSeries> {
    if !matches!(omega, Region::Cantor1D { .. }) {
        return Err(Error::Unsupported { op: "fractal_variance_sweep", region: omega.label() });
    }
    let window = [cantor_window(omega), cantor_window(gamma)]
        .into_iter()
        .flatten()
        .fold(None, |acc: Option<(f64, f64)>, (lo, hi)| match acc {
            None => Some((lo, hi)),
            Some((a, b)) => Some((a.max(lo), b.min(hi))),
        });
    if let Some((lo, hi)) = window {
        if let Some(&bad) = scales.iter().find(|&&l| l < lo || l > hi) {
            return Err(Error::WindowViolation { scale: bad, min: lo, max: hi });
        }
    }
    let points = scales
        .iter()
        .map(|&l| variance_continuum_with(omega, gamma, l, opts).map(|r| (l, r.variance)))
        .collect::<Result<Vec<_>>>()?;
    ScalingSeries::new(1, points, format!("variance[{} | {}]", omega.label(), gamma.label()))
}
