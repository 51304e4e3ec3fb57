//! Single-mode Gaussian states and the small amount of 2×2 / 4×4 algebra the
//! Fisher-information formulas need.
//!
//! Quadratures are ordered as `(q, p)` with `[q, p] = i`, and the covariance
//! matrix is `σ = ⟨{ΔX, ΔXᵀ}⟩`, so the vacuum and every coherent state have
//! `σ = I` and the uncertainty relation reads `det σ ≥ 1`.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};

use crate::error::{invalid, Error, Result};

pub type Mat2 = Matrix2<f64>;
pub type Vec2 = Vector2<f64>;
pub type Mat4 = Matrix4<f64>;
pub type Vec4 = Vector4<f64>;

/// Tolerance on `det σ ≥ 1` used when checking evolved states.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// First moments `(⟨q⟩, ⟨p⟩)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanVector {
    pub q: f64,
    pub p: f64,
}

impl MeanVector {
    pub fn new(q: f64, p: f64) -> Result<Self> {
        if !(q.is_finite() && p.is_finite()) {
            return Err(invalid("mean", format!("entries must be finite, got ({q}, {p})")));
        }
        Ok(Self { q, p })
    }

    pub fn zero() -> Self {
        Self { q: 0.0, p: 0.0 }
    }

    pub fn as_vector(&self) -> Vec2 {
        Vec2::new(self.q, self.p)
    }

    pub fn from_vector(v: &Vec2) -> Self {
        Self { q: v[0], p: v[1] }
    }

    pub fn norm(&self) -> f64 {
        self.q.hypot(self.p)
    }
}

/// Real symmetric 2×2 covariance matrix.
///
/// Symmetry holds by construction: [`CovarianceMatrix::from_matrix`] keeps the
/// symmetric part of its argument. Physicality (`det σ ≥ 1`) is a separate
/// check, see [`validate_state`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix(Mat2);

impl CovarianceMatrix {
    /// `[[qq, qp], [qp, pp]]`.
    pub fn new(qq: f64, qp: f64, pp: f64) -> Self {
        Self(Mat2::new(qq, qp, qp, pp))
    }

    pub fn identity() -> Self {
        Self(Mat2::identity())
    }

    pub fn scaled_identity(scale: f64) -> Self {
        Self(Mat2::identity() * scale)
    }

    pub fn from_matrix(m: &Mat2) -> Self {
        Self((m + m.transpose()) * 0.5)
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn qq(&self) -> f64 {
        self.0[(0, 0)]
    }

    pub fn qp(&self) -> f64 {
        self.0[(0, 1)]
    }

    pub fn pp(&self) -> f64 {
        self.0[(1, 1)]
    }

    pub fn det(&self) -> f64 {
        self.qq() * self.pp() - self.qp() * self.qp()
    }

    pub fn trace(&self) -> f64 {
        self.qq() + self.pp()
    }

    /// Inverse, failing when `det σ` falls below `1e-12`.
    pub fn inverse(&self) -> Result<Mat2> {
        let det = self.det();
        if det.abs() < 1e-12 || !det.is_finite() {
            return Err(Error::SingularCovariance { det });
        }
        Ok(Mat2::new(self.pp(), -self.qp(), -self.qp(), self.qq()) / det)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState {
    pub mean: MeanVector,
    pub cov: CovarianceMatrix,
}

impl GaussianState {
    pub fn new(mean: MeanVector, cov: CovarianceMatrix) -> Self {
        Self { mean, cov }
    }
}

/// `Ω = [[0, 1], [-1, 0]]`.
pub fn symplectic_form() -> Mat2 {
    Mat2::new(0.0, 1.0, -1.0, 0.0)
}

/// Coherent state `|α⟩` with `α = alpha_mod · e^{i alpha_arg}`.
pub fn coherent_state(alpha_mod: f64, alpha_arg: f64) -> GaussianState {
    let amplitude = std::f64::consts::SQRT_2 * alpha_mod;
    // arg is irrelevant for the vacuum; avoids NaN from 0 * inf style inputs
    let mean = if alpha_mod == 0.0 {
        MeanVector::zero()
    } else {
        MeanVector {
            q: amplitude * alpha_arg.cos(),
            p: amplitude * alpha_arg.sin(),
        }
    };
    GaussianState {
        mean,
        cov: CovarianceMatrix::identity(),
    }
}

/// `true` iff `det σ ≥ 1 − tol`, `tr σ > 0` and `σ` is symmetric within `tol`.
pub fn validate_state(state: &GaussianState, tol: f64) -> bool {
    let m = state.cov.matrix();
    let symmetric = (m[(0, 1)] - m[(1, 0)]).abs() <= tol;
    symmetric && state.cov.is_finite() && state.cov.trace() > 0.0 && state.cov.det() >= 1.0 - tol
}

/// Column-stacking vectorization: `vec([[a, b], [c, d]]) = (a, c, b, d)`.
pub fn vectorize(m: &Mat2) -> Vec4 {
    Vec4::new(m[(0, 0)], m[(1, 0)], m[(0, 1)], m[(1, 1)])
}

/// Kronecker product `a ⊗ b` with the standard block layout, so that
/// `vec(A X B) = (Bᵀ ⊗ A) vec(X)` under [`vectorize`].
pub fn kronecker(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut out = Mat4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    #[test]
    fn vacuum_ignores_phase() {
        for arg in [0.0, 1.3, -7.0, 1e9] {
            let s = coherent_state(0.0, arg);
            assert_eq!(s.mean, MeanVector::zero());
            assert_eq!(s.cov, CovarianceMatrix::identity());
        }
    }

    #[test]
    fn coherent_state_mean() {
        let s = coherent_state(1.0, FRAC_PI_2);
        assert!(s.mean.q.abs() < 1e-15);
        assert!((s.mean.p - SQRT_2).abs() < 1e-15);

        let s = coherent_state(0.1, 0.0);
        assert!((s.mean.q - 0.1 * SQRT_2).abs() < 1e-16);
        assert_eq!(s.mean.p, 0.0);
        assert_eq!(s.cov, CovarianceMatrix::identity());
    }

    #[test]
    fn physicality() {
        let ok = coherent_state(1.0, 0.0);
        assert!(validate_state(&ok, 1e-9));

        let squeezed_too_much = GaussianState::new(MeanVector::zero(), CovarianceMatrix::new(0.5, 0.0, 0.5));
        assert!(!validate_state(&squeezed_too_much, 1e-9));

        // thermalised coherent state, n = 0.1, γ = 0.05, t = 10
        let scale = 1.0 + 2.0 * 0.1 * (1.0 - (-0.05f64 * 10.0).exp());
        let thermal = GaussianState::new(MeanVector::zero(), CovarianceMatrix::scaled_identity(scale));
        assert!(validate_state(&thermal, 1e-9));
        assert!(thermal.cov.det() > 1.0);
    }

    #[test]
    fn from_matrix_symmetrizes() {
        let c = CovarianceMatrix::from_matrix(&Mat2::new(2.0, 0.5, 0.25, 3.0));
        assert_eq!(c.qp(), 0.375);
        assert_eq!(c.matrix()[(1, 0)], 0.375);
    }

    #[test]
    fn inverse_rejects_singular() {
        let c = CovarianceMatrix::new(1.0, 1.0, 1.0);
        assert!(matches!(c.inverse(), Err(Error::SingularCovariance { .. })));
        let c = CovarianceMatrix::new(2.0, 0.5, 1.0);
        let inv = c.inverse().unwrap();
        assert!((inv * c.matrix() - Mat2::identity()).norm() < 1e-15);
    }

    #[test]
    fn symplectic_form_identities() {
        let om = symplectic_form();
        assert_eq!(om * om, -Mat2::identity());
        assert_eq!(om.transpose(), -om);
    }

    #[test]
    fn vec_and_kron_basics() {
        assert_eq!(vectorize(&Mat2::identity()), Vec4::new(1.0, 0.0, 0.0, 1.0));
        assert_eq!(kronecker(&Mat2::identity(), &Mat2::identity()), Mat4::identity());
        let om = symplectic_form();
        let lhs = vectorize(&(om * Mat2::identity() * om.transpose()));
        let rhs = kronecker(&om, &om) * vectorize(&Mat2::identity());
        assert_eq!(lhs, rhs);
    }

    fn mat2() -> impl Strategy<Value = Mat2> {
        proptest::array::uniform4(-3.0f64..3.0).prop_map(|a| Mat2::new(a[0], a[1], a[2], a[3]))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn vec_kron_identity(a in mat2(), x in mat2(), b in mat2()) {
            let lhs = vectorize(&(a * x * b));
            let rhs = kronecker(&b.transpose(), &a) * vectorize(&x);
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
        }
    }
}
