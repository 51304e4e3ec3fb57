//! Classical Fisher information of general-dyne measurements.
//!
//! A general-dyne measurement with seed `σ_m` produces Gaussian outcomes with
//! covariance `Σ = (σ + σ_m)/2`. Its Fisher information for ω is
//!
//! ```text
//! F = uᵀ Σ⁻¹ u + ½ Tr[Σ⁻¹ ∂Σ Σ⁻¹ ∂Σ],   ∂Σ = ∂σ/2.
//! ```
//!
//! The seed family is `σ_m = diag(z, 1/z)`: `z = 1` is heterodyne, while
//! `z → 0` and `z → ∞` are homodyne detection of `q` and `p`. The homodyne
//! limits are evaluated analytically since `Σ` degenerates there.

use crate::error::{invalid, Error, Result};
use crate::gaussian::{CovarianceMatrix, GaussianState, Mat2, Vec2};
use crate::markovian::{moments_with_derivatives, MomentDerivatives, SystemParams};
use crate::optim::{linspace, multistart_max};
use crate::qfi::clamp_fisher;

/// Bounds of the `log10 z` search interval.
pub const LOG_Z_RANGE: (f64, f64) = (-8.0, 8.0);

/// Number of coarse seeds for the multi-start search in `log10 z`.
pub const LOG_Z_SEEDS: usize = 17;

const LOG_Z_TOL: f64 = 1e-10;

/// Quadrature read out by a homodyne measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Position,
    Momentum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DyneSetting {
    /// Seed `diag(z, 1/z)` with `z > 0`.
    General { z: f64 },
    /// `z → 0`.
    HomodyneQ,
    /// `z → ∞`.
    HomodyneP,
    /// `z = 1`.
    Heterodyne,
}

impl DyneSetting {
    /// The equivalent value of `z`, with `0` and `∞` for the homodyne limits.
    pub fn z(&self) -> f64 {
        match *self {
            DyneSetting::General { z } => z,
            DyneSetting::HomodyneQ => 0.0,
            DyneSetting::HomodyneP => f64::INFINITY,
            DyneSetting::Heterodyne => 1.0,
        }
    }
}

/// Seed covariance, or the quadrature singled out by a homodyne limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Seed {
    Finite(CovarianceMatrix),
    HomodyneLimit(Axis),
}

pub fn seed_covariance(d: DyneSetting) -> Result<Seed> {
    match d {
        DyneSetting::General { z } => {
            if !(z > 0.0 && z.is_finite()) {
                return Err(invalid("z", format!("must be positive and finite, got {z}")));
            }
            Ok(Seed::Finite(CovarianceMatrix::new(z, 0.0, 1.0 / z)))
        }
        DyneSetting::Heterodyne => Ok(Seed::Finite(CovarianceMatrix::identity())),
        DyneSetting::HomodyneQ => Ok(Seed::HomodyneLimit(Axis::Position)),
        DyneSetting::HomodyneP => Ok(Seed::HomodyneLimit(Axis::Momentum)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfiResult {
    pub t: f64,
    pub setting: DyneSetting,
    pub cfi: f64,
}

/// Scalar Fisher information of one quadrature: `2u²/v + ½(∂v/v)²`.
fn homodyne_cfi(u: f64, var: f64, dvar: f64) -> Result<f64> {
    if !(var > 0.0) {
        return Err(Error::SingularCovariance { det: var });
    }
    clamp_fisher(2.0 * u * u / var + 0.5 * (dvar / var).powi(2))
}

/// CFI of the dyne measurement `d` given the ω-derivatives of the state.
pub fn cfi_general_dyne(u: &Vec2, sigma: &CovarianceMatrix, sigma_deriv: &Mat2, d: DyneSetting) -> Result<f64> {
    match seed_covariance(d)? {
        Seed::HomodyneLimit(Axis::Position) => homodyne_cfi(u[0], sigma.qq(), sigma_deriv[(0, 0)]),
        Seed::HomodyneLimit(Axis::Momentum) => homodyne_cfi(u[1], sigma.pp(), sigma_deriv[(1, 1)]),
        Seed::Finite(seed) => {
            let out = CovarianceMatrix::from_matrix(&((sigma.matrix() + seed.matrix()) * 0.5));
            let inv = out.inverse()?;
            let d_out = sigma_deriv * 0.5;
            let x = inv * d_out;
            clamp_fisher(u.dot(&(inv * u)) + 0.5 * (x * x).trace())
        }
    }
}

/// Unsqueezed closed form
///
/// ```text
/// F = 4t²|α|² [ z cos²(ωt−θ) / ((2nz+z+1)e^{γt} − 2nz)
///             + sin²(ωt−θ) / ((2n+z+1)e^{γt} − 2n) ].
/// ```
pub fn cfi_closed_beta_zero(p: &SystemParams, t: f64, z: f64) -> Result<f64> {
    if p.beta_mod != 0.0 {
        return Err(Error::Domain {
            operation: "cfi_closed_beta_zero",
            requirement: "beta_mod = 0",
        });
    }
    if !(z > 0.0 && z.is_finite()) {
        return Err(invalid("z", format!("must be positive and finite, got {z}")));
    }
    let a2 = p.alpha_mod * p.alpha_mod;
    let n = p.n_th;
    let g = (p.gamma * t).exp();
    let phase = p.omega * t - p.alpha_arg;
    let first = z * phase.cos().powi(2) / ((2.0 * n * z + z + 1.0) * g - 2.0 * n * z);
    let second = phase.sin().powi(2) / ((2.0 * n + z + 1.0) * g - 2.0 * n);
    Ok(4.0 * t * t * a2 * (first + second))
}

/// Best dyne measurement at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyneOptimum {
    pub setting: DyneSetting,
    pub cfi: f64,
}

/// Maximizes the CFI over the seed parameter.
///
/// Both homodyne limits and heterodyne are evaluated exactly; the interior is
/// searched in `log10 z ∈ [−8, 8]` by golden-section refinement around every
/// local maximum of a 17-point coarse grid. Ties go to the named settings.
pub fn optimize_dyne(u: &Vec2, sigma: &CovarianceMatrix, sigma_deriv: &Mat2) -> Result<DyneOptimum> {
    let mut best = DyneOptimum {
        setting: DyneSetting::Heterodyne,
        cfi: cfi_general_dyne(u, sigma, sigma_deriv, DyneSetting::Heterodyne)?,
    };
    for setting in [DyneSetting::HomodyneQ, DyneSetting::HomodyneP] {
        let cfi = cfi_general_dyne(u, sigma, sigma_deriv, setting)?;
        if cfi > best.cfi {
            best = DyneOptimum { setting, cfi };
        }
    }

    // Σ is positive definite for every finite z, so the only failure mode
    // inside the search is a non-physical input, already caught above
    let mut failure = None;
    let objective =
        |log_z: f64| match cfi_general_dyne(u, sigma, sigma_deriv, DyneSetting::General { z: 10f64.powf(log_z) }) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }
        };
    let grid = linspace(LOG_Z_RANGE.0, LOG_Z_RANGE.1, LOG_Z_SEEDS);
    let interior = multistart_max(objective, &grid, LOG_Z_TOL);
    if let Some(e) = failure {
        return Err(e);
    }
    if interior.value > best.cfi {
        best = DyneOptimum {
            setting: DyneSetting::General {
                z: 10f64.powf(interior.x),
            },
            cfi: interior.value,
        };
    }
    Ok(best)
}

/// CFI of a fixed setting along the Markovian dynamics.
pub fn cfi_markovian(p: &SystemParams, s0: &GaussianState, t: f64, d: DyneSetting) -> Result<CfiResult> {
    let m = moments_with_derivatives(p, s0, t)?;
    Ok(CfiResult {
        t,
        setting: d,
        cfi: cfi_from_moments(&m, d)?,
    })
}

pub fn cfi_from_moments(m: &MomentDerivatives, d: DyneSetting) -> Result<f64> {
    cfi_general_dyne(&m.mean_deriv, &m.cov, &m.cov_deriv, d)
}

/// Dyne-optimal CFI along the Markovian dynamics.
pub fn optimize_dyne_markovian(p: &SystemParams, s0: &GaussianState, t: f64) -> Result<CfiResult> {
    let m = moments_with_derivatives(p, s0, t)?;
    let best = optimize_dyne(&m.mean_deriv, &m.cov, &m.cov_deriv)?;
    Ok(CfiResult {
        t,
        setting: best.setting,
        cfi: best.cfi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationTime {
    pub m: u32,
    pub t: f64,
    pub axis: Axis,
}

/// Times `t_m = (2θ + mπ)/(2ω)` at which homodyne detection of the stated
/// quadrature saturates the unsqueezed QFI. Even `m` reads `p`, odd `m` reads
/// `q`; negative times are dropped.
pub fn saturation_times(p: &SystemParams, m_max: u32) -> Result<Vec<SaturationTime>> {
    if p.beta_mod != 0.0 {
        return Err(Error::Domain {
            operation: "saturation_times",
            requirement: "beta_mod = 0",
        });
    }
    Ok((0..=m_max)
        .map(|m| SaturationTime {
            m,
            t: (2.0 * p.alpha_arg + m as f64 * std::f64::consts::PI) / (2.0 * p.omega),
            axis: if m % 2 == 0 { Axis::Momentum } else { Axis::Position },
        })
        .filter(|s| s.t >= 0.0)
        .collect())
}

impl Axis {
    pub fn setting(&self) -> DyneSetting {
        match self {
            Axis::Position => DyneSetting::HomodyneQ,
            Axis::Momentum => DyneSetting::HomodyneP,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfi::{qfi_closed_beta_zero, qfi_markovian};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn fig1(gamma: f64, n: f64) -> SystemParams {
        SystemParams::unitary(2.1)
            .with_alpha(1.0, FRAC_PI_2)
            .with_bath(gamma, n)
    }

    fn optdyne() -> SystemParams {
        SystemParams::unitary(2.1)
            .with_beta_cartesian(0.3, -0.5)
            .with_alpha(1.0, FRAC_PI_2)
            .with_bath(0.05, 0.1)
    }

    #[test]
    fn seeds() {
        assert_eq!(
            seed_covariance(DyneSetting::Heterodyne).unwrap(),
            Seed::Finite(CovarianceMatrix::identity())
        );
        assert_eq!(
            seed_covariance(DyneSetting::General { z: 2.0 }).unwrap(),
            Seed::Finite(CovarianceMatrix::new(2.0, 0.0, 0.5))
        );
        assert_eq!(
            seed_covariance(DyneSetting::HomodyneQ).unwrap(),
            Seed::HomodyneLimit(Axis::Position)
        );
        assert!(seed_covariance(DyneSetting::General { z: 0.0 }).is_err());
        assert!(seed_covariance(DyneSetting::General { z: -1.0 }).is_err());
    }

    #[test]
    fn zero_signal_gives_zero() {
        for d in [DyneSetting::HomodyneQ, DyneSetting::HomodyneP, DyneSetting::Heterodyne] {
            let v = cfi_general_dyne(&Vec2::zeros(), &CovarianceMatrix::identity(), &Mat2::zeros(), d).unwrap();
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn heterodyne_unitary_is_half_qfi() {
        let p = fig1(0.0, 0.0);
        for t in [0.3, 1.0, 2.7] {
            let v = cfi_closed_beta_zero(&p, t, 1.0).unwrap();
            assert!((v - 2.0 * t * t).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_matches_pipeline() {
        let p = fig1(0.05, 0.1);
        let s0 = p.initial_state();
        let t = 2.0;
        let general = cfi_markovian(&p, &s0, t, DyneSetting::General { z: 3.0 }).unwrap().cfi;
        let closed = cfi_closed_beta_zero(&p, t, 3.0).unwrap();
        assert!((general - closed).abs() <= 1e-9 * closed, "{general} vs {closed}");
        assert!(cfi_closed_beta_zero(&optdyne(), t, 3.0).is_err());
    }

    #[test]
    fn limits_match_extreme_seeds() {
        let p = optdyne();
        let m = moments_with_derivatives(&p, &p.initial_state(), 1.3).unwrap();
        let q = cfi_from_moments(&m, DyneSetting::HomodyneQ).unwrap();
        let near_q = cfi_from_moments(&m, DyneSetting::General { z: 1e-6 }).unwrap();
        assert!((q - near_q).abs() <= 1e-3 * q);
        let pp = cfi_from_moments(&m, DyneSetting::HomodyneP).unwrap();
        let near_p = cfi_from_moments(&m, DyneSetting::General { z: 1e6 }).unwrap();
        assert!((pp - near_p).abs() <= 1e-3 * pp);
    }

    #[test]
    fn saturation_schedule() {
        let s = saturation_times(&fig1(0.0, 0.0), 4).unwrap();
        assert_eq!(s.len(), 5);
        assert!((s[0].t - PI / 4.2).abs() < 1e-15);
        assert_eq!(s[0].axis, Axis::Momentum);
        assert_eq!(s[1].axis, Axis::Position);

        let q = SystemParams::unitary(1.0);
        let s = saturation_times(&q, 1).unwrap();
        assert!((s[1].t - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(s[1].axis, Axis::Position);

        let neg = SystemParams::unitary(1.0).with_alpha(1.0, -PI);
        let s = saturation_times(&neg, 3).unwrap();
        assert_eq!(s.first().unwrap().m, 2);
        assert!(saturation_times(&optdyne(), 3).is_err());
    }

    #[test]
    fn saturation_reaches_qfi() {
        let p = fig1(0.05, 0.1);
        let s0 = p.initial_state();
        for st in saturation_times(&p, 4).unwrap() {
            let cfi = cfi_markovian(&p, &s0, st.t, st.axis.setting()).unwrap().cfi;
            let qfi = qfi_closed_beta_zero(&p, st.t).unwrap();
            assert!((cfi - qfi).abs() <= 1e-6 * qfi, "m={} {cfi} vs {qfi}", st.m);
        }
    }

    #[test]
    fn odd_saturation_optimum_is_position_homodyne() {
        let p = fig1(0.05, 0.1);
        let t = (PI + PI) / (2.0 * 2.1);
        let best = optimize_dyne_markovian(&p, &p.initial_state(), t).unwrap();
        let qfi = qfi_closed_beta_zero(&p, t).unwrap();
        assert!((best.cfi - qfi).abs() <= 1e-6 * qfi);
        assert!(matches!(
            best.setting,
            DyneSetting::HomodyneQ | DyneSetting::General { .. }
        ));
    }

    #[test]
    fn optimum_dominates_named_settings_and_respects_qfi() {
        let p = optdyne();
        let s0 = p.initial_state();
        for t in [0.5, 3.0, 7.75, 20.0] {
            let m = moments_with_derivatives(&p, &s0, t).unwrap();
            let best = optimize_dyne(&m.mean_deriv, &m.cov, &m.cov_deriv).unwrap();
            for d in [DyneSetting::HomodyneQ, DyneSetting::HomodyneP, DyneSetting::Heterodyne] {
                assert!(best.cfi >= cfi_from_moments(&m, d).unwrap() - 1e-10);
            }
            let qfi = qfi_markovian(&p, &s0, t).unwrap().qfi;
            assert!(best.cfi <= qfi * (1.0 + 1e-8), "t={t}: {} > {qfi}", best.cfi);
        }
    }
}
