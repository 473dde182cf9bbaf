//! Metropolis Monte Carlo for the discretized harmonic spectral matrix model.
//!
//! The fields of the model (a complex scalar `psi` and two or four complex
//! gauge matrices `Z_i`) live in the truncated Moyal matrix basis, so the
//! action is a trace polynomial in `N x N` complex matrices. The crate
//! provides the dense kernels, the full and incremental action, a
//! single-entry Metropolis sampler, observables, error analysis, a 2D Ising
//! calibration harness, numerical checks of the matrix-basis identities and
//! a sweep orchestrator with checkpoint/resume.

pub mod action;
pub mod error;
pub mod ising;
pub mod linalg;
pub mod model;
pub mod moyal;
pub mod observables;
pub mod runner;
pub mod sampler;
pub mod stats;

pub use action::{eval_full, ActionCache, ActionTerms};
pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
pub use model::{derive_coeffs, DerivedCoeffs, Dim, FieldConfig, LinearTermConvention, ModelParams, Site};
pub use num_complex::Complex64;
pub use observables::{ObservableRecord, TimeSeriesBundle};
pub use sampler::{ChainState, RunPlan, Start};
pub use stats::{ErrorEstimate, Method};
