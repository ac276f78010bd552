//! Cube entropies from one-dimensional spectra.
//!
//! For a box Ω and a box Fermi sea both P and Q factor over coordinates, so
//! PQP = ⊗ T_j and its eigenvalues are products a_1···a_d of per-axis
//! eigenvalues. The h1 part of the entropy then collapses to per-axis sums;
//! only the h2 part needs the product enumeration.

use crate::error::{Error, Result};
use crate::spectral::{h, h1, h2, pairwise_sum, LogBase, Spectrum};
use rayon::prelude::*;

/// Largest number of product eigenvalues enumerated without a drop threshold.
pub const ENUMERATION_CAP: u128 = 10_000_000;
pub const DEFAULT_DROP_EPS: f64 = 1e-14;

/// Per-axis spectra of T_j = P_j Q_j P_j.
#[derive(Debug, Clone)]
pub struct ProductSpectrum {
    pub axes: Vec<Spectrum>,
}

impl ProductSpectrum {
    pub fn new(axes: Vec<Spectrum>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidParameter { name: "axes", reason: "need at least one axis".into() });
        }
        for (j, a) in axes.iter().enumerate() {
            let n = a.particle_number();
            if !(n.is_finite() && n > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "axes",
                    reason: format!("axis {j} has particle number {n}"),
                });
            }
        }
        Ok(Self { axes })
    }

    /// Same spectrum on every axis.
    pub fn isotropic(axis: Spectrum, dim: usize) -> Result<Self> {
        Self::new(vec![axis; dim])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn implied_count(&self) -> u128 {
        self.axes.iter().map(|a| a.len() as u128).product()
    }

    pub fn particle_numbers(&self) -> Vec<f64> {
        self.axes.iter().map(Spectrum::particle_number).collect()
    }
}

/// Enumeration controls.
#[derive(Debug, Clone, Copy)]
pub struct EnumerationOptions {
    pub cap: u128,
    /// Per-axis eigenvalues below this are dropped before forming products.
    pub drop_eps: Option<f64>,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self { cap: ENUMERATION_CAP, drop_eps: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductEntropy {
    pub value: f64,
    pub h1_part: f64,
    pub h2_part: f64,
    pub dropped_combinations: u128,
    /// Upper bound on the entropy carried by dropped products.
    pub drop_error_bound: f64,
}

fn product_except(ns: &[f64], skip: usize) -> f64 {
    ns.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, n)| n).product()
}

/// Σ_j [Σ_a h1(a)] ∏_{i≠j} N_i, the exact h1 contribution.
pub fn h1_closed_form(ps: &ProductSpectrum, base: LogBase) -> f64 {
    let ns = ps.particle_numbers();
    ps.axes
        .iter()
        .enumerate()
        .map(|(j, a)| pairwise_sum(&a.values.iter().map(|&t| h1(t, base)).collect::<Vec<_>>()) * product_except(&ns, j))
        .sum()
}

fn enumerate_sum<F: Fn(f64) -> f64 + Sync>(axes: &[&[f64]], f: &F) -> f64 {
    fn rec<F: Fn(f64) -> f64>(prefix: f64, rest: &[&[f64]], f: &F) -> f64 {
        match rest.split_first() {
            None => f(prefix),
            Some((head, tail)) => {
                if tail.is_empty() {
                    let mut acc = 0.0;
                    for &v in head.iter() {
                        acc += f(prefix * v);
                    }
                    acc
                } else {
                    head.iter().map(|&v| rec(prefix * v, tail, f)).sum()
                }
            }
        }
    }
    let (outer, rest) = axes.split_first().expect("at least one axis");
    // fixed partition of the outer axis keeps the reduction order independent
    // of the thread count
    let partial: Vec<f64> = outer.par_iter().map(|&v| rec(v, rest, f)).collect();
    pairwise_sum(&partial)
}

/// S = Σ h(a_1···a_d), h1 part in closed form, h2 part enumerated.
pub fn entropy_product(ps: &ProductSpectrum, base: LogBase) -> Result<f64> {
    entropy_product_with(ps, base, EnumerationOptions::default()).map(|e| e.value)
}

pub fn entropy_product_with(
    ps: &ProductSpectrum,
    base: LogBase,
    opts: EnumerationOptions,
) -> Result<ProductEntropy> {
    let count = ps.implied_count();
    let filtered: Vec<Vec<f64>> = match (count > opts.cap, opts.drop_eps) {
        (true, None) => return Err(Error::EnumerationTooLarge { count, cap: opts.cap }),
        (_, Some(eps)) => ps
            .axes
            .iter()
            .map(|a| a.values.iter().copied().filter(|&v| v >= eps).collect())
            .collect(),
        (false, None) => ps.axes.iter().map(|a| a.values.clone()).collect(),
    };
    let kept: u128 = filtered.iter().map(|v| v.len() as u128).product();
    if kept > opts.cap {
        return Err(Error::EnumerationTooLarge { count: kept, cap: opts.cap });
    }
    let dropped = count - kept;
    let h1_part = h1_closed_form(ps, base);
    let h2_part = if kept == 0 {
        0.0
    } else {
        let views: Vec<&[f64]> = filtered.iter().map(Vec::as_slice).collect();
        enumerate_sum(&views, &|t| h2(t, base))
    };
    let drop_error_bound = match opts.drop_eps {
        Some(eps) => dropped as f64 * h(eps.min(0.5), base),
        None => 0.0,
    };
    Ok(ProductEntropy { value: h1_part + h2_part, h1_part, h2_part, dropped_combinations: dropped, drop_error_bound })
}

/// Σ h(∏ a) by enumerating every product, h1 included.
pub fn entropy_product_enumerated(ps: &ProductSpectrum, base: LogBase) -> Result<f64> {
    let count = ps.implied_count();
    if count > ENUMERATION_CAP {
        return Err(Error::EnumerationTooLarge { count, cap: ENUMERATION_CAP });
    }
    let views: Vec<&[f64]> = ps.axes.iter().map(|a| a.values.as_slice()).collect();
    Ok(enumerate_sum(&views, &|t| h(t, base)))
}

/// G(a) = Σ_j h2(a_j) ∏_{i≠j} a_i.
pub fn g_function(a: &[f64], base: LogBase) -> Result<f64> {
    if let Some(&bad) = a.iter().find(|&&x| !(0.0..=1.0).contains(&x)) {
        return Err(Error::InvalidParameter { name: "a", reason: format!("{bad} outside [0, 1]") });
    }
    Ok((0..a.len()).map(|j| h2(a[j], base) * product_except(a, j)).sum())
}

/// Two-sided bound on the cube entropy in terms of per-axis quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThmBounds {
    pub lower: f64,
    pub upper: f64,
}

impl ThmBounds {
    pub fn contains(&self, s: f64) -> bool {
        self.lower <= s && s <= self.upper
    }
}

/// lower = (1/2d) Σ_j S1_j ∏_{i≠j} N_i, upper = Σ_j S1_j ∏_{i≠j} N_i with
/// S1_j the measured entropy of axis j.
pub fn thm_bounds(ps: &ProductSpectrum, base: LogBase) -> ThmBounds {
    let ns = ps.particle_numbers();
    let upper: f64 = ps
        .axes
        .iter()
        .enumerate()
        .map(|(j, a)| a.entropy(base) * product_except(&ns, j))
        .sum();
    ThmBounds { lower: upper / (2.0 * ps.dim() as f64), upper }
}

/// (d/3) N^{d-1} log L, with N the per-axis particle number.
pub fn cube_prediction(dim: usize, per_axis_n: f64, scale: f64, base: LogBase) -> f64 {
    dim as f64 / 3.0 * per_axis_n.powi(dim as i32 - 1) * base.log(scale)
}
