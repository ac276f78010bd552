//! Lattice correlation matrices and spectral functionals.
//!
//! The ground-state correlation matrix g(x − y) = ⟨a†_x a_y⟩ restricted to the
//! sites of Ω is the finite-size realization of PQP. Its eigenvalues lie in
//! [0, 1]; entropy, number variance and moments are sums of a scalar function
//! over them.

use crate::error::{Error, Result};
use faer::{Mat, Side};
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

/// Dense eigensolve guard.
pub const MAX_SITES: usize = 5000;
/// Eigenvalues may overshoot [0, 1] by at most this much before clamping.
pub const CLAMP_TOL: f64 = 1e-9;
const SYMMETRY_TOL: f64 = 1e-12;

/// Logarithm base used by entropy functionals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Bits,
    Nats,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Bits => x.log2(),
            LogBase::Nats => x.ln(),
        }
    }

    /// Factor turning a natural-log quantity into this base.
    pub fn from_nats(self) -> f64 {
        match self {
            LogBase::Bits => 1.0 / LN_2,
            LogBase::Nats => 1.0,
        }
    }
}

/// -t log t with 0 log 0 = 0.
pub fn h1(t: f64, base: LogBase) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        -t * base.log(t)
    }
}

/// -(1-t) log(1-t).
pub fn h2(t: f64, base: LogBase) -> f64 {
    h1(1.0 - t, base)
}

/// Binary entropy h = h1 + h2.
pub fn h(t: f64, base: LogBase) -> f64 {
    h1(t, base) + h2(t, base)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionalKind {
    HTotal,
    H1,
    H2,
    TTimes1mt,
    Monomial { n: u32 },
    /// Σ c_k t^k, coefficients in ascending order.
    Polynomial { coefficients: Vec<f64> },
}

/// A scalar function on [0, 1] traced against a spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyFunctional {
    pub kind: FunctionalKind,
    pub base: LogBase,
}

impl EntropyFunctional {
    pub fn new(kind: FunctionalKind, base: LogBase) -> Self {
        Self { kind, base }
    }

    pub fn entropy(base: LogBase) -> Self {
        Self::new(FunctionalKind::HTotal, base)
    }

    pub fn variance() -> Self {
        Self::new(FunctionalKind::TTimes1mt, LogBase::Nats)
    }

    pub fn monomial(n: u32) -> Self {
        Self::new(FunctionalKind::Monomial { n }, LogBase::Nats)
    }

    pub fn polynomial(coefficients: Vec<f64>) -> Self {
        Self::new(FunctionalKind::Polynomial { coefficients }, LogBase::Nats)
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            FunctionalKind::HTotal => h(t, self.base),
            FunctionalKind::H1 => h1(t, self.base),
            FunctionalKind::H2 => h2(t, self.base),
            FunctionalKind::TTimes1mt => t * (1.0 - t),
            FunctionalKind::Monomial { n } => t.powi(*n as i32),
            FunctionalKind::Polynomial { coefficients } => {
                coefficients.iter().rev().fold(0.0, |acc, &c| acc * t + c)
            }
        }
    }

    pub fn label(&self) -> String {
        let b = match self.base {
            LogBase::Bits => "bits",
            LogBase::Nats => "nats",
        };
        match &self.kind {
            FunctionalKind::HTotal => format!("h[{b}]"),
            FunctionalKind::H1 => format!("h1[{b}]"),
            FunctionalKind::H2 => format!("h2[{b}]"),
            FunctionalKind::TTimes1mt => "t(1-t)".into(),
            FunctionalKind::Monomial { n } => format!("t^{n}"),
            FunctionalKind::Polynomial { coefficients } => format!("poly{coefficients:?}"),
        }
    }
}

/// Occupied momentum region of the lattice model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FermiModel {
    /// [-k_F, k_F] on every axis.
    CubeSea { k_fermi: Vec<f64> },
    /// ‖k‖ ≤ k_F, two dimensions.
    DiskSea { k_fermi: f64 },
}

impl FermiModel {
    /// Mean occupation per site.
    pub fn filling(&self) -> f64 {
        match self {
            FermiModel::CubeSea { k_fermi } => k_fermi.iter().map(|k| k / PI).product(),
            FermiModel::DiskSea { k_fermi } => k_fermi * k_fermi / (4.0 * PI),
        }
    }
}

/// Correlation matrix of the sites of Ω.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    pub sites: Vec<Vec<i64>>,
    pub entries: Mat<f64>,
    pub model: FermiModel,
}

impl CorrelationMatrix {
    pub fn size(&self) -> usize {
        self.sites.len()
    }

    pub fn trace(&self) -> f64 {
        (0..self.size()).map(|i| self.entries[(i, i)]).sum()
    }

    /// Reorders sites by `perm` (new index i takes old index perm[i]).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.size();
        assert_eq!(perm.len(), n);
        Self {
            sites: perm.iter().map(|&p| self.sites[p].clone()).collect(),
            entries: Mat::from_fn(n, n, |i, j| self.entries[(perm[i], perm[j])]),
            model: self.model.clone(),
        }
    }
}

fn check_kf(k_fermi: f64) -> Result<()> {
    if k_fermi > 0.0 && k_fermi <= PI {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name: "k_fermi", reason: format!("{k_fermi} outside (0, π]") })
    }
}

/// 1D sine kernel sin(k_F n)/(π n), k_F/π at n = 0.
pub fn sine_kernel_entry(separation: i64, k_fermi: f64) -> f64 {
    if separation == 0 {
        k_fermi / PI
    } else {
        let n = separation as f64;
        (k_fermi * n).sin() / (PI * n)
    }
}

/// Disk-sea kernel k_F J1(k_F r)/(2π r), k_F²/4π at r = 0.
pub fn disk_kernel_entry(r: f64, k_fermi: f64) -> f64 {
    if r == 0.0 {
        k_fermi * k_fermi / (4.0 * PI)
    } else {
        k_fermi * libm::j1(k_fermi * r) / (2.0 * PI * r)
    }
}

/// Sites `0..L` of the chain with the half-width `k_F` Fermi sea.
pub fn sine_kernel_1d(length: usize, k_fermi: f64) -> Result<CorrelationMatrix> {
    cube_kernel(1, length, k_fermi)
}

/// Correlation matrix of an `L × L` block of the square lattice with a disk
/// Fermi sea of radius `k_F`.
pub fn disk_kernel_2d(side: usize, k_fermi: f64) -> Result<CorrelationMatrix> {
    check_kf(k_fermi)?;
    if side == 0 {
        return Err(Error::InvalidParameter { name: "side", reason: "must be positive".into() });
    }
    let n = side * side;
    if n > MAX_SITES {
        return Err(Error::TooManySites { sites: n, limit: MAX_SITES });
    }
    // translation invariance: one Bessel evaluation per displacement
    let table: Vec<f64> = (0..n)
        .map(|idx| {
            let (dx, dy) = ((idx / side) as f64, (idx % side) as f64);
            disk_kernel_entry((dx * dx + dy * dy).sqrt(), k_fermi)
        })
        .collect();
    let sites: Vec<Vec<i64>> = (0..n).map(|i| vec![(i / side) as i64, (i % side) as i64]).collect();
    let entries = Mat::from_fn(n, n, |i, j| {
        let dx = (sites[i][0] - sites[j][0]).unsigned_abs() as usize;
        let dy = (sites[i][1] - sites[j][1]).unsigned_abs() as usize;
        table[dx * side + dy]
    });
    Ok(CorrelationMatrix { sites, entries, model: FermiModel::DiskSea { k_fermi } })
}

/// `L^d` hypercubic block with the separable sea [-k_F, k_F]^d; the entry is
/// the product of per-axis sine kernels.
pub fn cube_kernel(dim: usize, side: usize, k_fermi: f64) -> Result<CorrelationMatrix> {
    check_kf(k_fermi)?;
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidParameter { name: "dim", reason: format!("{dim} outside 1..=3") });
    }
    if side == 0 {
        return Err(Error::InvalidParameter { name: "side", reason: "must be positive".into() });
    }
    let n = side.checked_pow(dim as u32).unwrap_or(usize::MAX);
    if n > MAX_SITES {
        return Err(Error::TooManySites { sites: n, limit: MAX_SITES });
    }
    let g: Vec<f64> = (0..side as i64).map(|s| sine_kernel_entry(s, k_fermi)).collect();
    let sites: Vec<Vec<i64>> = (0..n)
        .map(|mut idx| {
            let mut x = vec![0i64; dim];
            for c in x.iter_mut().rev() {
                *c = (idx % side) as i64;
                idx /= side;
            }
            x
        })
        .collect();
    let entries = Mat::from_fn(n, n, |i, j| {
        sites[i]
            .iter()
            .zip(&sites[j])
            .map(|(a, b)| g[(a - b).unsigned_abs() as usize])
            .product()
    });
    Ok(CorrelationMatrix { sites, entries, model: FermiModel::CubeSea { k_fermi: vec![k_fermi; dim] } })
}

/// Eigenvalues of a PQP-type operator, sorted descending and clamped to [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub source_size: usize,
}

impl Spectrum {
    /// Validates, clamps and sorts raw eigenvalues.
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        for &v in &values {
            if !(-CLAMP_TOL..=1.0 + CLAMP_TOL).contains(&v) {
                return Err(Error::EigenvalueOutOfRange { value: v });
            }
        }
        for v in values.iter_mut() {
            *v = v.clamp(0.0, 1.0);
        }
        values.sort_by(|a, b| b.total_cmp(a));
        let source_size = values.len();
        Ok(Self { values, source_size })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn particle_number(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn entropy(&self, base: LogBase) -> f64 {
        spectral_sum(self, &EntropyFunctional::entropy(base))
    }

    pub fn variance(&self) -> f64 {
        spectral_sum(self, &EntropyFunctional::variance())
    }
}

/// Full symmetric eigendecomposition of an arbitrary dense matrix.
pub fn spectrum_of(matrix: &Mat<f64>) -> Result<Spectrum> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: matrix.ncols() });
    }
    let mut deviation: f64 = 0.0;
    for j in 0..n {
        for i in j + 1..n {
            deviation = deviation.max((matrix[(i, j)] - matrix[(j, i)]).abs());
        }
    }
    if deviation > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { deviation });
    }
    let values = matrix
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::EigensolverFailed)?;
    Spectrum::from_values(values)
}

pub fn spectrum(matrix: &CorrelationMatrix) -> Result<Spectrum> {
    spectrum_of(&matrix.entries)
}

/// Σ f(λ) over the spectrum.
pub fn spectral_sum(spec: &Spectrum, f: &EntropyFunctional) -> f64 {
    pairwise_sum(&spec.values.iter().map(|&t| f.eval(t)).collect::<Vec<_>>())
}

/// Pairwise summation; order-independent to O(ε log n).
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 64 {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}
