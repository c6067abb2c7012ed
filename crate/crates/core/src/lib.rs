//! Exact spectra of a rectangular Dirichlet billiard with point scatterers,
//! and the level statistics used to tell integrable from chaotic spectra.
//!
//! The pipeline is:
//!
//! 1. [`basis`]: enumerate the unperturbed levels below an energy cutoff.
//! 2. [`green`]: evaluate the regularized Green's-function matrix `G(ω)` at
//!    the scatterer positions.
//! 3. [`secular`]: find every `ω` with `det(diag(v⁻¹) − G(ω)) = 0` in a window.
//! 4. [`stats`]: unfold, then compare `P(S)` and `Δ₃(L)` with Poisson and
//!    GOE references.
//!
//! [`coupling`] predicts, without solving anything, the energy band in which
//! a scatterer of given strength mixes the unperturbed states.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod coupling;
pub mod error;
pub mod green;
pub mod secular;
pub mod stats;

pub use basis::{
    eigenfunction_value, enumerate_basis, mean_level_density, BasisLevel, BasisTable, BilliardConfig, Point,
};
pub use coupling::{CouplingBand, CouplingVerdict};
pub use error::{Error, Result};
pub use green::{GreenEvaluation, GreenKernel, KernelSettings, ScattererSet, REFERENCE_POSITIONS};
pub use secular::{
    default_energy_cutoff, window_top, EigenfunctionExpansion, IndexConvention, PerturbedSpectrum, Root, RootStatus,
    SecularProblem, SolverSettings, Window,
};
pub use stats::{
    delta3, distribution_distance, reference_delta3, reference_pofs, rigidity_curve, spacing_histogram, unfold, Delta3,
    Reference, RigidityCurve, SpacingHistogram, UnfoldedSpectrum,
};
