//! Two-term asymptotics of Tr f(PQP).
//!
//! Tr f(PQP) ≈ (L/2π)^d f(1) |Ω||Γ| + (L/2π)^{d-1} (ln L / 4π²) U(f) J(∂Ω, ∂Γ),
//! with U(f) = ∫_0^1 (f(t) − t f(1)) / (t(1−t)) dt and
//! J = ∫_∂Ω ∫_∂Γ |n_x · n_p| dS_x dS_p. All logarithms are natural inside
//! this module; a functional carrying a base (h in bits) makes U(f), and
//! hence the prediction, come out in that base.

use crate::error::{Error, Result};
use crate::geometry::Region;
use crate::quad;
use crate::spectral::{pairwise_sum, EntropyFunctional, FermiModel, LogBase};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Boundary quadrature order used when callers have no preference.
pub const DEFAULT_ORDER: usize = 48;

/// J(∂Ω, ∂Γ) = Σ_{x,p} w_x w_p |n_x · n_p|.
///
/// In d = 1 each boundary is its endpoint set with unit weights, so two
/// intervals give J = 4.
pub fn widom_coefficient(omega: &Region, gamma: &Region, order: usize) -> Result<f64> {
    if omega.dim() != gamma.dim() {
        return Err(Error::DimensionMismatch { expected: omega.dim(), got: gamma.dim() });
    }
    let xs = omega.surface_quadrature(order)?;
    let ps = gamma.surface_quadrature(order)?;
    let rows: Vec<f64> = xs
        .par_iter()
        .map(|x| {
            let inner: Vec<f64> = ps
                .iter()
                .map(|p| {
                    let dot: f64 = x.normal.iter().zip(&p.normal).map(|(a, b)| a * b).sum();
                    p.weight * dot.abs()
                })
                .collect();
            x.weight * pairwise_sum(&inner)
        })
        .collect();
    Ok(pairwise_sum(&rows))
}

/// Monte Carlo estimate of ⟨|u · v|⟩ for independent uniform unit vectors in
/// R^dim. Task `i` of `pairs / 10⁶` draws from its own stream seeded with
/// `seed + i`, so the result does not depend on the worker schedule.
pub fn sphere_normal_mc(dim: usize, pairs: u64, seed: u64) -> (f64, f64) {
    const CHUNK: u64 = 1_000_000;
    let tasks = pairs.div_ceil(CHUNK);
    let partial: Vec<(f64, f64, u64)> = (0..tasks)
        .into_par_iter()
        .map(|task| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(task));
            let n = CHUNK.min(pairs - task * CHUNK);
            let draw = |rng: &mut ChaCha8Rng| {
                let mut v = [0.0f64; 3];
                let mut norm = 0.0;
                for c in v.iter_mut().take(dim) {
                    *c = StandardNormal.sample(rng);
                    norm += *c * *c;
                }
                let norm = norm.sqrt();
                v.iter_mut().for_each(|c| *c /= norm);
                v
            };
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let u = draw(&mut rng);
                let v = draw(&mut rng);
                let d = (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]).abs();
                s += d;
                s2 += d * d;
            }
            (s, s2, n)
        })
        .collect();
    let n: u64 = partial.iter().map(|p| p.2).sum();
    let s: f64 = partial.iter().map(|p| p.0).sum();
    let s2: f64 = partial.iter().map(|p| p.1).sum();
    let mean = s / n as f64;
    let var = (s2 / n as f64 - mean * mean).max(0.0);
    (mean, (var / n as f64).sqrt())
}

/// U(f) = ∫_0^1 (f(t) − t f(1)) / (t(1−t)) dt.
///
/// The halves [0, 1/2] and [1/2, 1] are mapped by t = s² and 1 − t = s² so
/// the 1/t and 1/(1−t) factors are absorbed by the Jacobian 2s.
pub fn u_functional(f: &EntropyFunctional, tol: f64) -> Result<f64> {
    let f0 = f.eval(0.0);
    if f0.abs() > 1e-14 {
        return Err(Error::DivergentIntegrand(format!("f(0) = {f0} ≠ 0 for {}", f.label())));
    }
    let f1 = f.eval(1.0);
    let g = |t: f64| (f.eval(t) - t * f1) / (t * (1.0 - t));
    let smax = std::f64::consts::FRAC_1_SQRT_2;
    let left = quad::adaptive(|s| if s == 0.0 { 0.0 } else { 2.0 * s * g(s * s) }, 0.0, smax, 0.5 * tol, 0.0)?;
    let right = quad::adaptive(
        |s| if s == 0.0 { 0.0 } else { 2.0 * s * g(1.0 - s * s) },
        0.0,
        smax,
        0.5 * tol,
        0.0,
    )?;
    let value = left.value + right.value;
    if !value.is_finite() {
        return Err(Error::DivergentIntegrand(format!("U({}) is not finite", f.label())));
    }
    Ok(value)
}

/// Leading and subleading terms of the two-term expansion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticPrediction {
    pub leading: f64,
    pub subleading: f64,
    pub scale: f64,
    pub f_label: String,
    pub j: f64,
    pub u: f64,
}

impl AsymptoticPrediction {
    pub fn total(&self) -> f64 {
        self.leading + self.subleading
    }

    /// Coefficient multiplying L^{d-1} ln L in the subleading term.
    pub fn log_coefficient(&self, dim: usize) -> f64 {
        self.subleading / (self.scale.powi(dim as i32 - 1) * self.scale.ln())
    }
}

fn check_scale(scale: f64) -> Result<()> {
    if scale > 1.0 && scale.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name: "L", reason: format!("{scale} must exceed 1") })
    }
}

pub fn trace_prediction(
    f: &EntropyFunctional,
    omega: &Region,
    gamma: &Region,
    scale: f64,
    order: usize,
) -> Result<AsymptoticPrediction> {
    check_scale(scale)?;
    let d = omega.dim() as i32;
    let u = u_functional(f, 1e-12)?;
    let j = widom_coefficient(omega, gamma, order)?;
    let s = scale / (2.0 * PI);
    Ok(AsymptoticPrediction {
        leading: s.powi(d) * f.eval(1.0) * omega.volume() * gamma.volume(),
        subleading: s.powi(d - 1) * scale.ln() / (4.0 * PI * PI) * u * j,
        scale,
        f_label: f.label(),
        j,
        u,
    })
}

/// (J/12) (L/2π)^{d-1} log L in the requested base.
pub fn entropy_prediction(omega: &Region, gamma: &Region, scale: f64, base: LogBase, order: usize) -> Result<f64> {
    check_scale(scale)?;
    let j = widom_coefficient(omega, gamma, order)?;
    let d = omega.dim() as i32;
    Ok(j / 12.0 * (scale / (2.0 * PI)).powi(d - 1) * base.log(scale))
}

/// (J/4π²) (L/2π)^{d-1} ln L.
pub fn variance_prediction(omega: &Region, gamma: &Region, scale: f64, order: usize) -> Result<f64> {
    check_scale(scale)?;
    let j = widom_coefficient(omega, gamma, order)?;
    let d = omega.dim() as i32;
    Ok(j / (4.0 * PI * PI) * (scale / (2.0 * PI)).powi(d - 1) * scale.ln())
}

/// Tr T^n for unit intervals Ω and Γ: L/2π + (ln L/π²) U(t^n).
pub fn moment_prediction_1d(n: u32, scale: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter { name: "n", reason: format!("{n} < 2") });
    }
    let unit = Region::unit_cube(1);
    Ok(trace_prediction(&EntropyFunctional::monomial(n), &unit, &unit, scale, 1)?.total())
}

/// Continuum geometry equivalent to an `L`-site lattice block: Ω is the unit
/// cube scaled by L and Γ is the lattice Fermi sea.
pub fn lattice_regions(dim: usize, model: &FermiModel) -> Result<(Region, Region)> {
    let omega = Region::unit_cube(dim);
    let gamma = match model {
        FermiModel::CubeSea { k_fermi } => Region::centered_box(k_fermi)?,
        FermiModel::DiskSea { k_fermi } => Region::centered_ball(2, *k_fermi)?,
    };
    if gamma.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: gamma.dim() });
    }
    Ok((omega, gamma))
}
