//! Entanglement entropy and particle-number variance of free-fermion ground
//! states on lattices and in the continuum, together with the Widom-type
//! asymptotic predictions they are compared against.

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod quad;
pub mod spectral;
pub mod tensorcube;
pub mod thermal;
pub mod variance;
pub mod widom;

pub use analysis::{BasisFn, FitResult, ScalingSeries};
pub use error::{Error, Result};
pub use geometry::{BoxRegion, Interval, Region};
pub use spectral::{CorrelationMatrix, EntropyFunctional, FermiModel, LogBase, Spectrum};
pub use tensorcube::{ProductSpectrum, ThmBounds};
pub use thermal::ThermalParams;
pub use variance::{VarianceOptions, VarianceResult};
pub use widom::AsymptoticPrediction;
