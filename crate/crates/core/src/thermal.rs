//! Semiclassical entanglement entropy at finite temperature.
//!
//! With k(p) = 1/(1 + e^{β(|p|²−μ)}) the leading term is
//! (L/2π)^d |Ω| ∫ h(k(p)) dp. Going to polar variables and u = e^{β(|p|²−μ)}
//! turns the momentum integral into
//!
//!   |S^{d-1}| μ^{d/2-1} / (2β) · ∫_{e^{-βμ}}^∞ du/u · h(1/(1+u)) (1 + ln u/βμ)^{d/2-1}.
//!
//! The factor 1/2 is the Jacobian of ρ ↦ ρ²; the integral itself is
//! [`thermal_entropy_integral`].

use crate::error::{Error, Result};
use crate::geometry::{unit_sphere_area, Region};
use crate::quad;
use crate::spectral::LogBase;
use serde::Serialize;
use std::f64::consts::PI;

/// Occupations below e^{-TAIL_EXPONENT} are treated as empty.
const TAIL_EXPONENT: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalParams {
    pub beta: f64,
    pub mu: f64,
    pub dim: usize,
}

impl ThermalParams {
    pub fn new(beta: f64, mu: f64, dim: usize) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter { name: "beta", reason: format!("{beta} must be positive") });
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter { name: "mu", reason: format!("{mu} must be positive") });
        }
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter { name: "dim", reason: format!("{dim} outside 1..=3") });
        }
        Ok(Self { beta, mu, dim })
    }

    pub fn beta_mu(&self) -> f64 {
        self.beta * self.mu
    }
}

/// Fermi-Dirac occupation of a mode with |p|² = `p_sq`.
pub fn fermi_dirac(p_sq: f64, params: &ThermalParams) -> f64 {
    let x = params.beta * (p_sq - params.mu);
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// h(1/(1+e^x)) in nats, evaluated without cancellation for large |x|.
fn occupation_entropy_nats(x: f64) -> f64 {
    let a = x.abs();
    let e = (-a).exp();
    e.ln_1p() + a * e / (1.0 + e)
}

/// I(βμ, d) = ∫_{e^{-βμ}}^∞ du/u · h(1/(1+u)) (1 + ln u/βμ)^{d/2-1}.
///
/// Substituting 1 + ln u/βμ = s² gives 2βμ ∫_0^∞ h(1/(1 + e^{βμ(s²−1)})) s^{d−1} ds,
/// which removes the d = 1 endpoint singularity. The upper limit is cut where
/// the exponent reaches [`TAIL_EXPONENT`].
pub fn thermal_entropy_integral(beta_mu: f64, dim: usize, base: LogBase) -> Result<f64> {
    if !(beta_mu > 0.0 && beta_mu.is_finite()) {
        return Err(Error::InvalidParameter { name: "beta_mu", reason: format!("{beta_mu} must be positive") });
    }
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidParameter { name: "dim", reason: format!("{dim} outside 1..=3") });
    }
    let s_max = (1.0 + TAIL_EXPONENT / beta_mu).sqrt();
    let d = dim as i32;
    // The integrand is concentrated within |s² − 1| ≲ 1/βμ; break there so the
    // adaptive rule cannot step over the peak.
    let mut breaks = vec![0.0, s_max];
    for v in [-TAIL_EXPONENT, -10.0, -2.0, 0.0, 2.0, 10.0] {
        let s_sq = 1.0 + v / beta_mu;
        if s_sq > 0.0 && s_sq.sqrt() < s_max {
            breaks.push(s_sq.sqrt());
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let est = quad::adaptive_with_breaks(
        |s| occupation_entropy_nats(beta_mu * (s * s - 1.0)) * s.powi(d - 1),
        &breaks,
        1e-14,
        1e-11,
    )?;
    Ok(2.0 * beta_mu * est.value * base.from_nats())
}

/// (L/2π)^d |Ω| |S^{d-1}| μ^{d/2-1} β^{-1} I(βμ, d) / 2.
pub fn thermal_entropy(omega: &Region, scale: f64, params: &ThermalParams, base: LogBase) -> Result<f64> {
    if omega.dim() != params.dim {
        return Err(Error::DimensionMismatch { expected: params.dim, got: omega.dim() });
    }
    let d = params.dim as i32;
    let integral = thermal_entropy_integral(params.beta_mu(), params.dim, base)?;
    Ok((scale / (2.0 * PI)).powi(d)
        * omega.volume()
        * unit_sphere_area(params.dim)
        * params.mu.powf(0.5 * params.dim as f64 - 1.0)
        / params.beta
        * 0.5
        * integral)
}

/// (L/2π)^d |Ω| ∫_{R^d} h(k(p)) dp by iterated Cartesian quadrature over the
/// positive orthant, with the Fermi surface crossing as a breakpoint on the
/// innermost axis.
pub fn phase_space_entropy(omega: &Region, scale: f64, params: &ThermalParams, base: LogBase) -> Result<f64> {
    if omega.dim() != params.dim {
        return Err(Error::DimensionMismatch { expected: params.dim, got: omega.dim() });
    }
    let pmax = (params.mu + TAIL_EXPONENT / params.beta).sqrt();
    let h_at = |p_sq: f64| occupation_entropy_nats(params.beta * (p_sq - params.mu));
    let inner = |r_sq: f64| -> Result<f64> {
        let mut breaks = vec![0.0];
        if params.mu > r_sq {
            let c = (params.mu - r_sq).sqrt();
            if c < pmax {
                breaks.push(c);
            }
        }
        breaks.push(pmax);
        Ok(quad::adaptive_with_breaks(|p| h_at(r_sq + p * p), &breaks, 1e-15, 1e-10)?.value)
    };
    let breaks_outer = [0.0, params.mu.sqrt().min(pmax), pmax];
    let orthant = match params.dim {
        1 => inner(0.0)?,
        2 => integrate_fallible(&breaks_outer, |p1| inner(p1 * p1))?,
        _ => integrate_fallible(&breaks_outer, |p1| {
            let b = [0.0, (params.mu - p1 * p1).max(0.0).sqrt().clamp(0.0, pmax), pmax];
            let b: Vec<f64> = dedup(&b);
            integrate_fallible(&b, |p2| inner(p1 * p1 + p2 * p2))
        })?,
    };
    let full = orthant * 2f64.powi(params.dim as i32);
    Ok((scale / (2.0 * PI)).powi(params.dim as i32) * omega.volume() * full * base.from_nats())
}

fn dedup(b: &[f64]) -> Vec<f64> {
    let mut v = b.to_vec();
    v.dedup_by(|a, b| *a <= *b);
    v
}

fn integrate_fallible<F: Fn(f64) -> Result<f64>>(breaks: &[f64], f: F) -> Result<f64> {
    let failure = std::cell::Cell::new(None);
    let est = quad::adaptive_with_breaks(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.set(Some(e));
                0.0
            }
        },
        &dedup(breaks),
        1e-14,
        1e-9,
    )?;
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(est.value),
    }
}

/// T* = μ^{1−d/2} log L / L with unit proportionality constant.
pub fn crossover_temperature(scale: f64, mu: f64, dim: usize, base: LogBase) -> Result<f64> {
    if !(scale > 1.0) {
        return Err(Error::InvalidParameter { name: "L", reason: format!("{scale} must exceed 1") });
    }
    Ok(mu.powf(1.0 - 0.5 * dim as f64) * base.log(scale) / scale)
}
