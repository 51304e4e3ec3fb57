//! Precision limits for frequency estimation with a single-mode Gaussian probe.
//!
//! The crate computes the quantum Fisher information (QFI) and the classical
//! Fisher information (CFI) of general-dyne measurements for two families of
//! open dynamics:
//!
//! - squeezed harmonic oscillator under a thermal GKSL (Lindblad) master
//!   equation ([`markovian`]), with closed-form and perturbative QFI
//!   expressions in [`qfi`];
//! - quantum Brownian motion with an Ohmic Lorentz–Drude bath and
//!   time-dependent dissipation/diffusion rates ([`qbm`]).
//!
//! Measurement-specific bounds and the optimization over the dyne seed live in
//! [`dyne`]. Independent brute-force cross-checks live in [`oracle`], and the
//! batch that compares them against the analytic paths lives in [`verify`].
//!
//! Units: ħ = k_B = 1, and quadratures are normalized so that a coherent state
//! has identity covariance.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![forbid(unsafe_code)]

pub mod dyne;
pub mod error;
pub mod gaussian;
pub mod markovian;
pub mod optim;
pub mod oracle;
pub mod qbm;
pub mod qfi;
pub mod quad;
pub mod verify;

pub use error::{Error, Result};
pub use gaussian::{CovarianceMatrix, GaussianState, Mat2, MeanVector, Vec2};
