//! Continuation and bifurcation toolkit for the one-dimensional stationary
//! nonlinear Schrödinger equation with a symmetric external potential.
//!
//! The crate traces ground-state branches in the eigenvalue parameter `E`,
//! detects and classifies the symmetry-breaking pitchfork bifurcation of the
//! even branch, and verifies the large-`E` soliton-concentration scaling laws.
//!
//! Module layout:
//! - [`grid`]: uniform symmetric mesh, quadrature, parity helpers, stencils
//! - [`linalg`]: symmetric banded matrices, banded LU, inertia counts,
//!   bisection eigensolver, parity reductions
//! - [`potentials`]: sech² single/double wells, tabulated potentials, linear
//!   Schrödinger modes
//! - [`schrodinger`]: the nonlinear residual `F(φ,E)` and the linearized
//!   operators `L₊`, `L₋`, eigenpairs, near-kernel solves
//! - [`stationary`]: damped Newton solver, seed generators, diagnostics
//! - [`continuation`]: adaptive natural-parameter branch tracing with
//!   spectral data and stability classification
//! - [`bifurcation`]: crossing location, pitchfork coefficients `λ′`, `Q`,
//!   `R`, branch switching
//! - [`asymptotics`]: large-`E` rescaling, scaling-law fits, localized-branch
//!   spectra

pub mod asymptotics;
pub mod bifurcation;
pub mod continuation;
pub mod error;
pub mod grid;
pub mod interp;
pub mod linalg;
pub mod potentials;
pub mod schrodinger;
pub mod stationary;

pub use error::CoreError;
pub use grid::{Grid, GridFunction};
pub use potentials::{LinearModes, Potential};
pub use schrodinger::{Normalization, ProblemParams};
pub use stationary::StationaryState;
