//! Experiment configuration: a versioned JSON document.

use crate::error::CliError;
use fermilab::geometry::{BoxRegion, Interval, Region};
use fermilab::spectral::LogBase;
use fermilab::variance::cantor_window;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Entropy1d,
    Cube,
    Lattice2d,
    Variance,
    WidomCoeff,
    Moments1d,
    Thermal,
    Fractal,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Entropy1d => "entropy1d",
            Kind::Cube => "cube",
            Kind::Lattice2d => "lattice2d",
            Kind::Variance => "variance",
            Kind::WidomCoeff => "widom_coeff",
            Kind::Moments1d => "moments1d",
            Kind::Thermal => "thermal",
            Kind::Fractal => "fractal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Lattice,
    #[default]
    Continuum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// Either an explicit list of scales or a generated grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sweep {
    List(Vec<f64>),
    Range {
        min: f64,
        max: f64,
        count: usize,
        #[serde(default)]
        spacing: Spacing,
    },
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Sweep::List(v) => v.clone(),
            Sweep::Range { min, max, count, spacing } => {
                if *count == 1 {
                    return vec![*min];
                }
                (0..*count)
                    .map(|i| {
                        let f = i as f64 / (*count - 1) as f64;
                        match spacing {
                            Spacing::Linear => min + f * (max - min),
                            Spacing::Log => min * (max / min).powf(f),
                        }
                    })
                    .collect()
            }
        }
    }
}

/// Geometry as written in configs, e.g. `{"type": "ball", "radius": 1.0, "dim": 2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    /// Either side lengths (anchored at the origin) or explicit `[lo, hi]` pairs.
    Box {
        #[serde(default)]
        lengths: Option<Vec<f64>>,
        #[serde(default)]
        intervals: Option<Vec<[f64; 2]>>,
    },
    Ball {
        radius: f64,
        #[serde(default)]
        dim: Option<usize>,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    Union { boxes: Vec<Vec<[f64; 2]>> },
    Cantor {
        ratio: f64,
        depth: u32,
        #[serde(default)]
        base: Option<[f64; 2]>,
    },
}

fn intervals(pairs: &[[f64; 2]]) -> Result<Vec<Interval>, fermilab::Error> {
    pairs.iter().map(|p| Interval::new(p[0], p[1])).collect()
}

impl RegionSpec {
    pub fn build(&self) -> Result<Region, fermilab::Error> {
        match self {
            RegionSpec::Box { lengths: Some(l), intervals: None } => Region::cube_from_lengths(l),
            RegionSpec::Box { lengths: None, intervals: Some(iv) } => Region::boxed(intervals(iv)?),
            RegionSpec::Box { .. } => Err(fermilab::Error::InvalidRegion(
                "box needs exactly one of `lengths` or `intervals`".into(),
            )),
            RegionSpec::Ball { radius, dim, center } => match (dim, center) {
                (_, Some(c)) => {
                    if dim.is_some_and(|d| d != c.len()) {
                        return Err(fermilab::Error::InvalidRegion("ball `dim` disagrees with `center`".into()));
                    }
                    Region::ball(c.clone(), *radius)
                }
                (Some(d), None) => Region::centered_ball(*d, *radius),
                (None, None) => Err(fermilab::Error::InvalidRegion("ball needs `dim` or `center`".into())),
            },
            RegionSpec::Union { boxes } => {
                let bs = boxes
                    .iter()
                    .map(|b| intervals(b).map(|intervals| BoxRegion { intervals }))
                    .collect::<Result<Vec<_>, _>>()?;
                Region::union_of_boxes(bs)
            }
            RegionSpec::Cantor { ratio, depth, base } => {
                let [lo, hi] = base.unwrap_or([0.0, 1.0]);
                Region::cantor(Interval::new(lo, hi)?, *ratio, *depth)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub omega: RegionSpec,
    /// Momentum region; unused by the thermal kind.
    #[serde(default)]
    pub gamma: Option<RegionSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numeric {
    /// Relative tolerance for continuum quadrature.
    pub rel_tol: f64,
    /// Boundary quadrature order for the Widom coefficient.
    pub quadrature_order: usize,
    /// Gauss-Legendre nodes per panel in one-dimensional integrals.
    pub nodes_1d: usize,
    /// Cap on the number of products enumerated for tensor spectra.
    pub enumeration_cap: u64,
    /// Drop per-axis eigenvalues below this before forming products.
    pub drop_eps: Option<f64>,
    /// Monte Carlo pairs for the sphere-normal oracle (0 disables it).
    pub mc_pairs: u64,
}

impl Default for Numeric {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            quadrature_order: fermilab::widom::DEFAULT_ORDER,
            nodes_1d: 16,
            enumeration_cap: fermilab::tensorcube::ENUMERATION_CAP as u64,
            drop_eps: None,
            mc_pairs: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalSpec {
    pub beta: Vec<f64>,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub kind: Kind,
    #[serde(default)]
    pub geometry: Option<Geometry>,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    /// Fermi momentum of the lattice models; π/2 (half filling) when absent.
    #[serde(default)]
    pub k_fermi: Option<f64>,
    /// Dimension of the cube kind and of the lattice variance route.
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub route: Route,
    /// Powers n for the moments kind.
    #[serde(default)]
    pub moments: Option<Vec<u32>>,
    #[serde(default)]
    pub thermal: Option<ThermalSpec>,
    #[serde(default)]
    pub numeric: Numeric,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub base: LogBase,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn k_fermi(&self) -> f64 {
        self.k_fermi.unwrap_or(PI / 2.0)
    }

    /// Sweep values; generated grids for lattice kinds are rounded to whole
    /// sizes and deduplicated.
    pub fn scales(&self) -> Vec<f64> {
        let mut v = self.sweep.as_ref().map(Sweep::values).unwrap_or_default();
        if self.integer_scales() && matches!(self.sweep, Some(Sweep::Range { .. })) {
            v.iter_mut().for_each(|l| *l = l.round());
            v.dedup();
        }
        v
    }

    fn integer_scales(&self) -> bool {
        matches!(self.kind, Kind::Entropy1d | Kind::Cube | Kind::Lattice2d | Kind::Moments1d)
            || (self.kind == Kind::Variance && self.route == Route::Lattice)
    }

    pub fn omega(&self) -> Result<Region, CliError> {
        let g = self.geometry.as_ref().ok_or_else(|| missing(self.kind, "geometry"))?;
        g.omega.build().map_err(|e| CliError::Config(format!("geometry.omega: {e}")))
    }

    pub fn regions(&self) -> Result<(Region, Region), CliError> {
        let omega = self.omega()?;
        let spec = self.geometry.as_ref().and_then(|g| g.gamma.as_ref());
        let gamma = spec
            .ok_or_else(|| missing(self.kind, "geometry.gamma"))?
            .build()
            .map_err(|e| CliError::Config(format!("geometry.gamma: {e}")))?;
        if omega.dim() != gamma.dim() {
            return Err(CliError::Config(format!(
                "geometry: omega is {}-dimensional but gamma is {}-dimensional",
                omega.dim(),
                gamma.dim()
            )));
        }
        Ok((omega, gamma))
    }

    /// Checks everything that can be checked without running the experiment.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "version: unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.version
            )));
        }
        let n = &self.numeric;
        positive("numeric.rel_tol", n.rel_tol)?;
        if let Some(eps) = n.drop_eps {
            positive("numeric.drop_eps", eps)?;
        }
        if n.quadrature_order == 0 {
            return Err(CliError::Config("numeric.quadrature_order: must be positive".into()));
        }
        if n.nodes_1d < 4 {
            return Err(CliError::Config("numeric.nodes_1d: need at least 4 nodes".into()));
        }
        if n.enumeration_cap == 0 {
            return Err(CliError::Config("numeric.enumeration_cap: must be positive".into()));
        }
        if let Some(k) = self.k_fermi {
            if !(k > 0.0 && k < PI) {
                return Err(CliError::Config(format!("k_fermi: {k} outside (0, π)")));
            }
        }
        if let Some(sweep) = &self.sweep {
            validate_sweep(sweep)?;
        }

        let needs_sweep = !matches!(self.kind, Kind::WidomCoeff);
        if needs_sweep && self.sweep.is_none() {
            return Err(missing(self.kind, "sweep"));
        }
        if self.integer_scales() {
            if let Some(bad) = self.scales().into_iter().find(|l| l.fract() != 0.0 || *l < 1.0) {
                return Err(CliError::Config(format!("sweep: lattice sizes must be positive integers, got {bad}")));
            }
        }
        match self.kind {
            Kind::Cube => {
                let d = self.dim.ok_or_else(|| missing(self.kind, "dim"))?;
                if !(1..=3).contains(&d) {
                    return Err(CliError::Config(format!("dim: {d} outside 1..=3")));
                }
            }
            Kind::Variance => match self.route {
                Route::Continuum => {
                    self.regions()?;
                }
                Route::Lattice => {
                    if let Some(d) = self.dim {
                        if !(1..=3).contains(&d) {
                            return Err(CliError::Config(format!("dim: {d} outside 1..=3")));
                        }
                    }
                }
            },
            Kind::WidomCoeff => {
                self.regions()?;
            }
            Kind::Moments1d => {
                if let Some(bad) = self.moments.iter().flatten().find(|&&n| n < 2) {
                    return Err(CliError::Config(format!("moments: power {bad} must be at least 2")));
                }
            }
            Kind::Thermal => {
                let t = self.thermal.as_ref().ok_or_else(|| missing(self.kind, "thermal"))?;
                if t.beta.is_empty() {
                    return Err(CliError::Config("thermal.beta: empty list".into()));
                }
                for &b in &t.beta {
                    positive("thermal.beta", b)?;
                }
                positive("thermal.mu", t.mu)?;
                if self.omega()?.dim() > 3 {
                    return Err(CliError::Config("geometry.omega: thermal kind supports d ≤ 3".into()));
                }
            }
            Kind::Fractal => {
                let (omega, gamma) = self.regions()?;
                if !matches!(omega, Region::Cantor1D { .. }) {
                    return Err(CliError::Config("geometry.omega: fractal kind needs a cantor region".into()));
                }
                let window = [cantor_window(&omega), cantor_window(&gamma)]
                    .into_iter()
                    .flatten()
                    .reduce(|(a, b), (lo, hi)| (a.max(lo), b.min(hi)));
                if let Some((lo, hi)) = window {
                    if let Some(bad) = self.scales().into_iter().find(|&l| l < lo || l > hi) {
                        return Err(CliError::Config(format!(
                            "sweep: L = {bad} outside the self-similar window [{lo:.4}, {hi:.4}]"
                        )));
                    }
                }
            }
            Kind::Entropy1d | Kind::Lattice2d => {}
        }
        Ok(())
    }
}

fn missing(kind: Kind, field: &str) -> CliError {
    CliError::Config(format!("{field}: required for kind `{}`", kind.name()))
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name}: must be positive, got {v}")))
    }
}

fn validate_sweep(sweep: &Sweep) -> Result<(), CliError> {
    match sweep {
        Sweep::List(v) => {
            if v.is_empty() {
                return Err(CliError::Config("sweep: empty list".into()));
            }
            for &l in v {
                positive("sweep", l)?;
            }
        }
        Sweep::Range { min, max, count, .. } => {
            positive("sweep.min", *min)?;
            positive("sweep.max", *max)?;
            if max < min {
                return Err(CliError::Config(format!("sweep: max {max} below min {min}")));
            }
            if *count == 0 {
                return Err(CliError::Config("sweep.count: must be positive".into()));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<ExperimentConfig, CliError> {
        ExperimentConfig::from_json(s)
    }

    #[test]
    fn minimal_entropy_config() {
        let c = parse(r#"{"version": 1, "kind": "entropy1d", "sweep": [50, 100, 200, 400]}"#).unwrap();
        assert_eq!(c.base, LogBase::Bits);
        assert_eq!(c.k_fermi(), PI / 2.0);
        assert_eq!(c.scales(), vec![50.0, 100.0, 200.0, 400.0]);
    }

    #[test]
    fn generated_grids() {
        let lin = Sweep::Range { min: 10.0, max: 50.0, count: 5, spacing: Spacing::Linear };
        assert_eq!(lin.values(), vec![10.0, 20.0, 30.0, 40.0, 50.0]);
        let log = Sweep::Range { min: 1.0, max: 100.0, count: 3, spacing: Spacing::Log };
        let v = log.values();
        assert!((v[1] - 10.0).abs() < 1e-12 && (v[2] - 100.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_unknown_and_missing_fields() {
        let e = parse(r#"{"version": 1, "kind": "entropy1d", "sweep": [10], "colour": 3}"#).unwrap_err();
        assert!(e.to_string().contains("colour"), "{e}");
        let e = parse(r#"{"version": 1, "sweep": [10]}"#).unwrap_err();
        assert!(e.to_string().contains("kind"), "{e}");
        let e = parse(r#"{"version": 1, "kind": "cube", "sweep": [10]}"#).unwrap_err();
        assert!(e.to_string().contains("dim"), "{e}");
    }

    #[test]
    fn rejects_bad_numbers() {
        let e = parse(r#"{"version": 1, "kind": "entropy1d", "sweep": [10], "numeric": {"rel_tol": -1}}"#).unwrap_err();
        assert!(e.to_string().contains("rel_tol"), "{e}");
        let e = parse(r#"{"version": 1, "kind": "entropy1d", "sweep": [10.5]}"#).unwrap_err();
        assert!(e.to_string().contains("integers"), "{e}");
        let e = parse(r#"{"version": 2, "kind": "entropy1d", "sweep": [10]}"#).unwrap_err();
        assert!(e.to_string().contains("version"), "{e}");
    }

    #[test]
    fn parse_errors_carry_position() {
        let e = parse("{\n  \"version\": 1,\n  \"kind\": \"cube\",,\n}").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
    }

    #[test]
    fn region_specs() {
        let b: RegionSpec = serde_json::from_str(r#"{"type": "box", "lengths": [1, 2]}"#).unwrap();
        assert_eq!(b.build().unwrap().volume(), 2.0);
        let ball: RegionSpec = serde_json::from_str(r#"{"type": "ball", "radius": 1.0, "dim": 2}"#).unwrap();
        assert!((ball.build().unwrap().volume() - PI).abs() < 1e-12);
        let c: RegionSpec = serde_json::from_str(r#"{"type": "cantor", "ratio": 0.3333333333, "depth": 8}"#).unwrap();
        assert_eq!(c.build().unwrap().cantor_intervals().len(), 256);
        let u: RegionSpec =
            serde_json::from_str(r#"{"type": "union", "boxes": [[[0, 1]], [[2, 3.5]]]}"#).unwrap();
        assert_eq!(u.build().unwrap().volume(), 2.5);
        let bad: RegionSpec = serde_json::from_str(r#"{"type": "box"}"#).unwrap();
        assert!(bad.build().is_err());
        assert!(serde_json::from_str::<RegionSpec>(r#"{"type": "ball", "radius": 1, "dim": 2, "r": 3}"#).is_err());
    }
}
