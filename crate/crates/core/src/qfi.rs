//! Quantum Fisher information for the frequency ω.
//!
//! The general route is the Gaussian formula
//!
//! ```text
//! F = 2 uᵀ σ⁻¹ u + ½ vec(Σ)ᵀ M⁺ vec(Σ),   M = σ ⊗ σ − Ω ⊗ Ω,
//! ```
//!
//! with `u = ∂⟨X⟩/∂ω` and `Σ = ∂σ/∂ω`. `M` is singular for pure states, so the
//! Moore–Penrose pseudo-inverse is used; `vec(Σ)` lies in its range whenever
//! the QFI is finite. The closed forms below are the unsqueezed result, the
//! short-time expansion and the second-order small-squeezing expansion of the
//! unitary case.

use nalgebra::SVD;

use crate::error::{Error, Result};
use crate::gaussian::{kronecker, symplectic_form, vectorize, CovarianceMatrix, GaussianState, Mat2, Mat4, Vec2, Vec4};
use crate::markovian::{moments_with_derivatives, MomentDerivatives, SystemParams};

/// Relative singular-value cutoff for `M⁺`.
pub const PINV_CUTOFF: f64 = 1e-12;

/// Fisher values in `[-NEGATIVE_FLOOR, 0)` are treated as round-off and clamped.
pub const NEGATIVE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QfiMethod {
    General,
    ClosedBetaZero,
    ShortTime,
    SmallBetaUnitary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiResult {
    pub t: f64,
    pub qfi: f64,
    pub method: QfiMethod,
}

pub(crate) fn clamp_fisher(value: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -NEGATIVE_FLOOR {
        Ok(0.0)
    } else {
        Err(Error::NegativeFisher { value })
    }
}

/// `M = σ ⊗ σ − Ω ⊗ Ω`.
pub fn m_matrix(sigma: &CovarianceMatrix) -> Mat4 {
    let om = symplectic_form();
    kronecker(sigma.matrix(), sigma.matrix()) - kronecker(&om, &om)
}

/// Moore–Penrose pseudo-inverse with singular values below
/// `PINV_CUTOFF · ‖M‖₂` discarded.
pub fn pseudo_inverse(m: &Mat4) -> Mat4 {
    let svd = SVD::new(*m, true, true);
    let largest = svd.singular_values.max();
    if largest == 0.0 {
        return Mat4::zeros();
    }
    svd.pseudo_inverse(PINV_CUTOFF * largest)
        .expect("both singular vector sets were requested")
}

/// `½ vec(Σ)ᵀ M⁺ vec(Σ)`; zero when `Σ` vanishes identically.
pub fn covariance_term(sigma: &CovarianceMatrix, big_sigma: &Mat2) -> f64 {
    if big_sigma.iter().all(|&x| x == 0.0) {
        return 0.0;
    }
    let v: Vec4 = vectorize(big_sigma);
    0.5 * v.dot(&(pseudo_inverse(&m_matrix(sigma)) * v))
}

/// Gaussian QFI from the mean derivative `u`, covariance `sigma` and
/// covariance derivative `big_sigma`.
pub fn qfi_gaussian(u: &Vec2, sigma: &CovarianceMatrix, big_sigma: &Mat2) -> Result<f64> {
    let inv = sigma.inverse()?;
    let mean_term = 2.0 * u.dot(&(inv * u));
    clamp_fisher(mean_term + covariance_term(sigma, big_sigma))
}

/// QFI for `β = 0`: `4|α|²t² / (2n(e^{γt} − 1) + e^{γt})`.
pub fn qfi_closed_beta_zero(p: &SystemParams, t: f64) -> Result<f64> {
    if p.beta_mod != 0.0 {
        return Err(Error::Domain {
            operation: "qfi_closed_beta_zero",
            requirement: "beta_mod = 0",
        });
    }
    let growth = (p.gamma * t).exp();
    let a2 = p.alpha_mod * p.alpha_mod;
    Ok(4.0 * a2 * t * t / (2.0 * p.n_th * (growth - 1.0) + growth))
}

/// Short-time expansion `4|α|²t² (1 − γt(1 + 2n) + 4|β| t sin(δ − 2θ))`.
///
/// Evaluated as written for any `t`; callers decide when `t` is short enough.
pub fn qfi_short_time(p: &SystemParams, t: f64) -> f64 {
    let a2 = p.alpha_mod * p.alpha_mod;
    let phase = p.beta_arg - 2.0 * p.alpha_arg;
    4.0 * a2 * t * t * (1.0 - p.gamma * t * (1.0 + 2.0 * p.n_th) + 4.0 * p.beta_mod * t * phase.sin())
}

/// Unitary (`γ = 0`) QFI expanded to second order in `|β|`.
///
/// ```text
/// F ≈ 4|α|²t²
///   + 16 t |α|² |β|/ω² [ωt cos φ − sin(ωt) cos(φ + ωt)]
///   + 4 |β|²/ω⁴ [1 + 2|α|² + 2ω²t²(1 + 6|α|²) − cos(2ωt)(1 + 2|α|²)
///                − 2ωt sin(2ωt)(1 + 4|α|²)],            φ = δ − 2θ.
/// ```
///
/// The `|β|²` group is independent of the phases.
pub fn qfi_small_beta_unitary(p: &SystemParams, t: f64) -> Result<f64> {
    if p.gamma != 0.0 {
        return Err(Error::Domain {
            operation: "qfi_small_beta_unitary",
            requirement: "gamma = 0",
        });
    }
    let a2 = p.alpha_mod * p.alpha_mod;
    let w = p.omega;
    let wt = w * t;
    let b = p.beta_mod;
    let phase = p.beta_arg - 2.0 * p.alpha_arg;

    let zeroth = 4.0 * a2 * t * t;
    let first = 16.0 * t * a2 * b / (w * w) * (wt * phase.cos() - wt.sin() * (phase + wt).cos());
    let second = 4.0 * b * b / w.powi(4)
        * (1.0 + 2.0 * a2 + 2.0 * wt * wt * (1.0 + 6.0 * a2)
            - (2.0 * wt).cos() * (1.0 + 2.0 * a2)
            - 2.0 * wt * (2.0 * wt).sin() * (1.0 + 4.0 * a2));
    Ok(zeroth + first + second)
}

/// QFI from precomputed moments; the covariance term is skipped when
/// `skip_covariance` is set (unsqueezed dynamics, where `Σ = 0` exactly).
pub fn qfi_from_moments(m: &MomentDerivatives, skip_covariance: bool) -> Result<f64> {
    let big_sigma = if skip_covariance { Mat2::zeros() } else { m.cov_deriv };
    qfi_gaussian(&m.mean_deriv, &m.cov, &big_sigma)
}

/// Full pipeline: moment derivatives by quadrature, then [`qfi_gaussian`].
pub fn qfi_markovian(p: &SystemParams, s0: &GaussianState, t: f64) -> Result<QfiResult> {
    let m = moments_with_derivatives(p, s0, t)?;
    Ok(QfiResult {
        t,
        qfi: qfi_from_moments(&m, p.is_unsqueezed())?,
        method: QfiMethod::General,
    })
}
