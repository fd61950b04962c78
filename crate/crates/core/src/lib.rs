//! Numerical core for rank-one maps built by cutting and stacking.
//!
//! The crate turns cutting/spacer parameters into the stage polynomials
//! `P_k(z) = m_k^{-1/2} Σ_j z^{j h_k + s(k,j)}`, evaluates partial Riesz
//! products `∏ |P_k|²` on uniform circle grids, and measures them: Mahler
//! measure (grid, Jensen, Szegő and Kolmogorov engines), affinities, the
//! McGehee-type bounds and the occurrence-set oracle that ties the Fourier
//! coefficients of a partial product to exact level-set overlaps.
//!
//! Everything here is `no_std` + `alloc`. IO, file formats and the command
//! line live in the `riesz-one` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod affinity;
pub mod circlepoly;
pub mod construction;
pub mod diagnostics;
pub mod error;
pub mod fft;
pub mod mahler;
pub mod math;
pub mod rng;
pub mod roots;
pub mod tower;

pub use num_complex;
pub use affinity::{AffinityResult, QSequenceProfile};
pub use circlepoly::{GridDensity, GridOffset, SparseCirclePolynomial, StageGridTable, UnitCircleGrid};
pub use construction::{
    GeneratorSpec, HeightTable, PresetParams, RankOneConstruction, StageSpec, TotalMeasure,
};
pub use diagnostics::{ReportConfig, SpectralReport};
pub use error::{Error, Result};
pub use mahler::{MahlerEngine, MahlerEstimate, OuterCoefficients};
pub use math::Ratio;
pub use tower::OccurrenceSet;

/// Crate version, recorded in report provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
