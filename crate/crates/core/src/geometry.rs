//! Real-space regions and Fermi seas.
//!
//! A [`Region`] plays both roles: the subsystem Ω in position space and the
//! Fermi sea Γ in momentum space. Everything here is a closed form or exact
//! interval arithmetic except the boundary quadratures, which are tensor
//! Gauss-Legendre (faces) or product angular rules (spheres).

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Closed interval `[lo, hi]` with `hi > lo`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::InvalidRegion(format!("interval [{lo}, {hi}] is empty")));
        }
        Ok(Self { lo, hi })
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Length of `self ∩ (other + shift)`.
    pub fn overlap_shifted(&self, other: &Interval, shift: f64) -> f64 {
        let lo = self.lo.max(other.lo + shift);
        let hi = self.hi.min(other.hi + shift);
        (hi - lo).max(0.0)
    }
}

/// Axis-aligned box, one interval per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub intervals: Vec<Interval>,
}

impl BoxRegion {
    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn volume(&self) -> f64 {
        self.intervals.iter().map(Interval::length).product()
    }

    fn interiors_overlap(&self, other: &BoxRegion) -> bool {
        self.intervals
            .iter()
            .zip(&other.intervals)
            .all(|(a, b)| a.overlap_shifted(b, 0.0) > 0.0)
    }

    fn overlap_shifted(&self, other: &BoxRegion, shift: &[f64]) -> f64 {
        self.intervals
            .iter()
            .zip(&other.intervals)
            .zip(shift)
            .map(|((a, b), &z)| a.overlap_shifted(b, z))
            .product()
    }

    /// Complex transform ∫ e^{-ik·x} dx over the box.
    fn fourier(&self, k: &[f64]) -> Complex64 {
        self.intervals
            .iter()
            .zip(k)
            .map(|(iv, &kj)| {
                let amp = iv.length() * sinc(0.5 * kj * iv.length());
                Complex64::from_polar(amp, -kj * iv.center())
            })
            .product()
    }
}

/// A geometric set in R^d (d = 1, 2, 3).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Region {
    Box(BoxRegion),
    Ball { center: Vec<f64>, radius: f64 },
    UnionOfBoxes { boxes: Vec<BoxRegion> },
    /// Middle-`ratio` Cantor construction: each interval keeps two children
    /// of relative length `(1 - ratio) / 2`, `depth` times.
    Cantor1D { base: Interval, ratio: f64, depth: u32 },
}

impl Region {
    /// Box `[0, l_1] × … × [0, l_d]`.
    pub fn cube_from_lengths(lengths: &[f64]) -> Result<Self> {
        let intervals = lengths
            .iter()
            .map(|&l| Interval::new(0.0, l))
            .collect::<Result<Vec<_>>>()?;
        Self::boxed(intervals)
    }

    /// Box `[-h_1, h_1] × … × [-h_d, h_d]`.
    pub fn centered_box(half_widths: &[f64]) -> Result<Self> {
        let intervals = half_widths
            .iter()
            .map(|&h| Interval::new(-h, h))
            .collect::<Result<Vec<_>>>()?;
        Self::boxed(intervals)
    }

    pub fn unit_cube(dim: usize) -> Self {
        Self::cube_from_lengths(&vec![1.0; dim]).expect("unit cube is valid")
    }

    pub fn boxed(intervals: Vec<Interval>) -> Result<Self> {
        check_dim(intervals.len())?;
        Ok(Self::Box(BoxRegion { intervals }))
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        check_dim(center.len())?;
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidRegion(format!("ball radius {radius} must be positive")));
        }
        Ok(Self::Ball { center, radius })
    }

    pub fn centered_ball(dim: usize, radius: f64) -> Result<Self> {
        Self::ball(vec![0.0; dim], radius)
    }

    pub fn union_of_boxes(boxes: Vec<BoxRegion>) -> Result<Self> {
        let Some(first) = boxes.first() else {
            return Err(Error::InvalidRegion("union of boxes is empty".into()));
        };
        let dim = first.dim();
        check_dim(dim)?;
        for b in &boxes {
            if b.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: b.dim() });
            }
            for iv in &b.intervals {
                Interval::new(iv.lo, iv.hi)?;
            }
        }
        for (i, a) in boxes.iter().enumerate() {
            for b in &boxes[i + 1..] {
                if a.interiors_overlap(b) {
                    return Err(Error::InvalidRegion("union members overlap".into()));
                }
            }
        }
        Ok(Self::UnionOfBoxes { boxes })
    }

    pub fn cantor(base: Interval, ratio: f64, depth: u32) -> Result<Self> {
        Interval::new(base.lo, base.hi)?;
        if !(ratio > 0.0 && ratio < 0.5) {
            return Err(Error::InvalidRegion(format!("Cantor ratio {ratio} outside (0, 1/2)")));
        }
        if depth > 40 {
            return Err(Error::InvalidRegion(format!("Cantor depth {depth} too large")));
        }
        Ok(Self::Cantor1D { base, ratio, depth })
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Box(b) => b.dim(),
            Region::Ball { center, .. } => center.len(),
            Region::UnionOfBoxes { boxes } => boxes[0].dim(),
            Region::Cantor1D { .. } => 1,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Region::Box(b) => format!("box{}d", b.dim()),
            Region::Ball { center, .. } => format!("ball{}d", center.len()),
            Region::UnionOfBoxes { boxes } => format!("union[{}]", boxes.len()),
            Region::Cantor1D { ratio, depth, .. } => format!("cantor(r={ratio}, m={depth})"),
        }
    }

    /// Lebesgue measure.
    pub fn volume(&self) -> f64 {
        match self {
            Region::Box(b) => b.volume(),
            Region::Ball { center, radius } => unit_ball_volume(center.len()) * radius.powi(center.len() as i32),
            Region::UnionOfBoxes { boxes } => boxes.iter().map(BoxRegion::volume).sum(),
            Region::Cantor1D { base, ratio, depth } => {
                base.length() * (1.0 - ratio).powi(*depth as i32)
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let in_box = |b: &BoxRegion| b.intervals.iter().zip(x).all(|(iv, &xi)| xi >= iv.lo && xi <= iv.hi);
        match self {
            Region::Box(b) => in_box(b),
            Region::Ball { center, radius } => {
                center.iter().zip(x).map(|(c, xi)| (xi - c).powi(2)).sum::<f64>() <= radius * radius
            }
            Region::UnionOfBoxes { boxes } => boxes.iter().any(in_box),
            Region::Cantor1D { .. } => self
                .cantor_intervals()
                .iter()
                .any(|iv| x[0] >= iv.lo && x[0] <= iv.hi),
        }
    }

    /// Surviving intervals of a Cantor construction, left to right. Other
    /// one-dimensional regions return their component intervals.
    pub fn cantor_intervals(&self) -> Vec<Interval> {
        match self {
            Region::Cantor1D { base, ratio, depth } => {
                let c = 0.5 * (1.0 - ratio);
                let mut out = vec![*base];
                for _ in 0..*depth {
                    out = out
                        .iter()
                        .flat_map(|iv| {
                            let child = c * iv.length();
                            [
                                Interval { lo: iv.lo, hi: iv.lo + child },
                                Interval { lo: iv.hi - child, hi: iv.hi },
                            ]
                        })
                        .collect();
                }
                out
            }
            Region::Box(b) if b.dim() == 1 => vec![b.intervals[0]],
            Region::Ball { center, radius } if center.len() == 1 => {
                vec![Interval { lo: center[0] - radius, hi: center[0] + radius }]
            }
            Region::UnionOfBoxes { boxes } if boxes[0].dim() == 1 => {
                let mut v: Vec<_> = boxes.iter().map(|b| b.intervals[0]).collect();
                v.sort_by(|a, b| a.lo.total_cmp(&b.lo));
                v
            }
            _ => Vec::new(),
        }
    }

    /// Per-axis extent of the set (bounding box side lengths).
    pub fn extents(&self) -> Vec<f64> {
        match self {
            Region::Box(b) => b.intervals.iter().map(Interval::length).collect(),
            Region::Ball { center, radius } => vec![2.0 * radius; center.len()],
            Region::UnionOfBoxes { boxes } => (0..boxes[0].dim())
                .map(|j| {
                    let lo = boxes.iter().map(|b| b.intervals[j].lo).fold(f64::INFINITY, f64::min);
                    let hi = boxes.iter().map(|b| b.intervals[j].hi).fold(f64::NEG_INFINITY, f64::max);
                    hi - lo
                })
                .collect(),
            Region::Cantor1D { base, .. } => vec![base.length()],
        }
    }

    /// Euclidean diameter (of the bounding box, exact for boxes and balls).
    pub fn diameter(&self) -> f64 {
        match self {
            Region::Ball { radius, .. } => 2.0 * radius,
            _ => self.extents().iter().map(|e| e * e).sum::<f64>().sqrt(),
        }
    }

    /// Vol(Ω ∩ (Ω + z)).
    pub fn autocorrelation(&self, shift: &[f64]) -> f64 {
        debug_assert_eq!(shift.len(), self.dim());
        match self {
            Region::Box(b) => b.overlap_shifted(b, shift),
            Region::Ball { center, radius } => {
                let r = shift.iter().map(|z| z * z).sum::<f64>().sqrt();
                ball_overlap(center.len(), *radius, r)
            }
            Region::UnionOfBoxes { boxes } => boxes
                .iter()
                .map(|a| boxes.iter().map(|b| a.overlap_shifted(b, shift)).sum::<f64>())
                .sum(),
            Region::Cantor1D { base, ratio, depth } => {
                let l = base.length();
                l * cantor_autocorrelation_unit(shift[0] / l, 0.5 * (1.0 - ratio), *depth)
            }
        }
    }

    /// Vol(Ω ∖ (Ω + h)) = Vol(Ω) − A_Ω(h).
    pub fn shift_defect(&self, shift: &[f64]) -> f64 {
        (self.volume() - self.autocorrelation(shift)).max(0.0)
    }

    /// |∫_Ω e^{-ik·x} dx|².
    pub fn indicator_ft_sq(&self, k: &[f64]) -> f64 {
        debug_assert_eq!(k.len(), self.dim());
        match self {
            Region::Box(b) => b
                .intervals
                .iter()
                .zip(k)
                .map(|(iv, &kj)| interval_ft_sq(kj, iv.length()))
                .product(),
            Region::Ball { center, radius } => {
                let knorm = k.iter().map(|x| x * x).sum::<f64>().sqrt();
                ball_ft_sq(center.len(), *radius, knorm)
            }
            Region::UnionOfBoxes { boxes } => {
                boxes.iter().map(|b| b.fourier(k)).sum::<Complex64>().norm_sqr()
            }
            Region::Cantor1D { base, ratio, depth } => {
                let l = base.length();
                l * l * cantor_ft_sq_unit(k[0] * l, 0.5 * (1.0 - ratio), *depth)
            }
        }
    }

    /// Boundary measure; for d = 1 this is the endpoint count.
    pub fn surface_area(&self) -> Result<f64> {
        match self {
            Region::Box(b) if b.dim() == 1 => Ok(2.0),
            Region::Box(b) => {
                let v = b.volume();
                Ok(b.intervals.iter().map(|iv| 2.0 * v / iv.length()).sum())
            }
            Region::Ball { center, .. } if center.len() == 1 => Ok(2.0),
            Region::Ball { center, radius } => {
                let d = center.len();
                Ok(unit_sphere_area(d) * radius.powi(d as i32 - 1))
            }
            _ => Err(Error::Unsupported { op: "surface_area", region: self.label() }),
        }
    }

    /// Boundary samples with outward unit normals.
    ///
    /// Box faces use a tensor Gauss-Legendre rule of `order` points per axis.
    /// Circles use `order` equally spaced midpoints; spheres use `order`
    /// Gauss-Legendre nodes in cos θ times `2·order` midpoints in φ.
    pub fn surface_quadrature(&self, order: usize) -> Result<Vec<SurfaceSample>> {
        if order == 0 {
            return Err(Error::InvalidParameter { name: "order", reason: "must be positive".into() });
        }
        match self {
            Region::Box(b) => Ok(box_surface(b, order)),
            Region::Ball { center, radius } => Ok(sphere_surface(center, *radius, order)),
            _ => Err(Error::Unsupported { op: "surface_quadrature", region: self.label() }),
        }
    }
}

fn check_dim(d: usize) -> Result<()> {
    if (1..=3).contains(&d) {
        Ok(())
    } else {
        Err(Error::InvalidRegion(format!("dimension {d} outside 1..=3")))
    }
}

/// A point on ∂Ω with outward normal and surface weight.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSample {
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
    pub weight: f64,
}

fn box_surface(b: &BoxRegion, order: usize) -> Vec<SurfaceSample> {
    let d = b.dim();
    let mut out = Vec::new();
    if d == 1 {
        let iv = b.intervals[0];
        out.push(SurfaceSample { point: vec![iv.lo], normal: vec![-1.0], weight: 1.0 });
        out.push(SurfaceSample { point: vec![iv.hi], normal: vec![1.0], weight: 1.0 });
        return out;
    }
    let rule = GaussLegendre::new(order);
    for axis in 0..d {
        let others: Vec<usize> = (0..d).filter(|&j| j != axis).collect();
        let per_axis: Vec<Vec<(f64, f64)>> = others
            .iter()
            .map(|&j| rule.mapped(b.intervals[j].lo, b.intervals[j].hi).collect())
            .collect();
        for (side, pos) in [(-1.0, b.intervals[axis].lo), (1.0, b.intervals[axis].hi)] {
            let mut normal = vec![0.0; d];
            normal[axis] = side;
            // tensor product over the d-1 tangential axes
            let mut idx = vec![0usize; others.len()];
            loop {
                let mut point = vec![0.0; d];
                point[axis] = pos;
                let mut weight = 1.0;
                for (t, &j) in others.iter().enumerate() {
                    let (x, w) = per_axis[t][idx[t]];
                    point[j] = x;
                    weight *= w;
                }
                out.push(SurfaceSample { point, normal: normal.clone(), weight });
                let mut t = 0;
                while t < idx.len() {
                    idx[t] += 1;
                    if idx[t] < order {
                        break;
                    }
                    idx[t] = 0;
                    t += 1;
                }
                if t == idx.len() {
                    break;
                }
            }
        }
    }
    out
}

fn sphere_surface(center: &[f64], radius: f64, order: usize) -> Vec<SurfaceSample> {
    match center.len() {
        1 => vec![
            SurfaceSample { point: vec![center[0] - radius], normal: vec![-1.0], weight: 1.0 },
            SurfaceSample { point: vec![center[0] + radius], normal: vec![1.0], weight: 1.0 },
        ],
        2 => (0..order)
            .map(|i| {
                let phi = 2.0 * PI * (i as f64 + 0.5) / order as f64;
                let n = vec![phi.cos(), phi.sin()];
                SurfaceSample {
                    point: vec![center[0] + radius * n[0], center[1] + radius * n[1]],
                    normal: n,
                    weight: 2.0 * PI * radius / order as f64,
                }
            })
            .collect(),
        _ => {
            let rule = GaussLegendre::new(order);
            let nphi = 2 * order;
            let mut out = Vec::with_capacity(order * nphi);
            for (&ct, &w) in rule.nodes.iter().zip(&rule.weights) {
                let st = (1.0 - ct * ct).max(0.0).sqrt();
                for j in 0..nphi {
                    let phi = 2.0 * PI * (j as f64 + 0.5) / nphi as f64;
                    let n = vec![st * phi.cos(), st * phi.sin(), ct];
                    let point = (0..3).map(|a| center[a] + radius * n[a]).collect();
                    out.push(SurfaceSample {
                        point,
                        normal: n,
                        weight: radius * radius * w * 2.0 * PI / nphi as f64,
                    });
                }
            }
            out
        }
    }
}

/// sin(x)/x with its removable singularity.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// |∫_0^ℓ e^{-ikx} dx|² = 4 sin²(kℓ/2)/k².
pub fn interval_ft_sq(k: f64, length: f64) -> f64 {
    let s = length * sinc(0.5 * k * length);
    s * s
}

fn ball_ft_sq(dim: usize, radius: f64, k: f64) -> f64 {
    let x = k * radius;
    let amp = match dim {
        1 => 2.0 * radius * sinc(x),
        2 => {
            // πR² · 2 J1(x)/x
            let shape = if x.abs() < 1e-4 {
                let x2 = x * x;
                1.0 - x2 / 8.0 + x2 * x2 / 192.0
            } else {
                2.0 * libm::j1(x) / x
            };
            PI * radius * radius * shape
        }
        _ => {
            // (4π/3)R³ · 3 (sin x − x cos x)/x³
            let shape = if x.abs() < 1e-2 {
                let x2 = x * x;
                1.0 - x2 / 10.0 + x2 * x2 / 280.0
            } else {
                3.0 * (x.sin() - x * x.cos()) / (x * x * x)
            };
            4.0 / 3.0 * PI * radius.powi(3) * shape
        }
    };
    amp * amp
}

/// Vol(B_R ∩ (B_R + z)) for |z| = r.
pub fn ball_overlap(dim: usize, radius: f64, r: f64) -> f64 {
    if r >= 2.0 * radius {
        return 0.0;
    }
    match dim {
        1 => 2.0 * radius - r,
        2 => {
            let rr = radius * radius;
            2.0 * rr * (r / (2.0 * radius)).acos() - 0.5 * r * (4.0 * rr - r * r).max(0.0).sqrt()
        }
        _ => PI * (4.0 * radius + r) * (2.0 * radius - r).powi(2) / 12.0,
    }
}

/// Autocorrelation of the unit-base Cantor set through its self-similarity:
/// A_m(z) = c[2A_{m-1}(z/c) + A_{m-1}((z-t)/c) + A_{m-1}((z+t)/c)], t = 1-c.
fn cantor_autocorrelation_unit(z: f64, c: f64, depth: u32) -> f64 {
    let z = z.abs();
    if z >= 1.0 {
        return 0.0;
    }
    if depth == 0 {
        return 1.0 - z;
    }
    let t = 1.0 - c;
    c * (2.0 * cantor_autocorrelation_unit(z / c, c, depth - 1)
        + cantor_autocorrelation_unit((z - t) / c, c, depth - 1)
        + cantor_autocorrelation_unit((z + t) / c, c, depth - 1))
}

/// |χ̂|² of the unit-base Cantor set from the product formula
/// χ̂_m(k) = c χ̂_{m-1}(ck)(1 + e^{-ikt}).
fn cantor_ft_sq_unit(k: f64, c: f64, depth: u32) -> f64 {
    let t = 1.0 - c;
    let mut kk = k;
    let mut acc = 1.0;
    for _ in 0..depth {
        let cs = (0.5 * kk * t).cos();
        acc *= 4.0 * c * c * cs * cs;
        kk *= c;
    }
    acc * interval_ft_sq(kk, 1.0)
}

pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => PI,
        3 => 4.0 / 3.0 * PI,
        _ => unreachable!("dimension validated at construction"),
    }
}

/// |S^{d-1}|: 2, 2π, 4π.
pub fn unit_sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => unreachable!("dimension validated at construction"),
    }
}
