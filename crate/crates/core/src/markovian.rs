//! Squeezed oscillator under thermal GKSL damping.
//!
//! The Hamiltonian `ω a†a + β a†² + β* a²` with damping rate `γ` and bath
//! occupation `n` generates linear moment dynamics
//!
//! ```text
//! d⟨X⟩/dt = A ⟨X⟩,      dσ/dt = A σ + σ Aᵀ + D,
//! A = B − (γ/2) I,      D = γ (2n + 1) I,
//! B = [[2β₂, ω − 2β₁], [−(ω + 2β₁), −2β₂]],   β = β₁ + iβ₂.
//! ```
//!
//! `B² = (4|β|² − ω²) I`, so `e^{Bt}` has a closed form in each of the
//! oscillatory, hyperbolic and critical regimes. The ω-derivatives of the
//! moments, `u(t) = ∂⟨X(t)⟩/∂ω` and `Σ(t) = ∂σ(t)/∂ω`, are evaluated from
//! their integral representations by adaptive quadrature.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use crate::error::{ensure_finite, invalid, Result};
use crate::gaussian::{coherent_state, symplectic_form, CovarianceMatrix, GaussianState, Mat2, MeanVector, Vec2};
use crate::quad::Quadrature;

/// Relative width of the band around `ω² = 4|β|²` treated as critical.
pub const CRITICAL_THRESHOLD: f64 = 1e-9;

/// Parameters of the squeezed Markovian scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub omega: f64,
    pub beta_mod: f64,
    pub beta_arg: f64,
    pub alpha_mod: f64,
    pub alpha_arg: f64,
    pub gamma: f64,
    pub n_th: f64,
}

impl SystemParams {
    /// Unsqueezed, undamped oscillator probed with the vacuum.
    pub fn unitary(omega: f64) -> Self {
        Self {
            omega,
            beta_mod: 0.0,
            beta_arg: 0.0,
            alpha_mod: 0.0,
            alpha_arg: 0.0,
            gamma: 0.0,
            n_th: 0.0,
        }
    }

    pub fn with_beta(mut self, beta_mod: f64, beta_arg: f64) -> Self {
        self.beta_mod = beta_mod;
        self.beta_arg = beta_arg;
        self
    }

    /// Sets `β = re + i·im`.
    pub fn with_beta_cartesian(mut self, re: f64, im: f64) -> Self {
        self.beta_mod = re.hypot(im);
        self.beta_arg = if self.beta_mod == 0.0 { 0.0 } else { im.atan2(re) };
        self
    }

    pub fn with_alpha(mut self, alpha_mod: f64, alpha_arg: f64) -> Self {
        self.alpha_mod = alpha_mod;
        self.alpha_arg = alpha_arg;
        self
    }

    pub fn with_bath(mut self, gamma: f64, n_th: f64) -> Self {
        self.gamma = gamma;
        self.n_th = n_th;
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("omega", self.omega)?;
        ensure_finite("beta_mod", self.beta_mod)?;
        ensure_finite("beta_arg", self.beta_arg)?;
        ensure_finite("alpha_mod", self.alpha_mod)?;
        ensure_finite("alpha_arg", self.alpha_arg)?;
        ensure_finite("gamma", self.gamma)?;
        ensure_finite("n_th", self.n_th)?;
        if self.omega <= 0.0 {
            return Err(invalid("omega", format!("must be positive, got {}", self.omega)));
        }
        for (name, v) in [
            ("beta_mod", self.beta_mod),
            ("alpha_mod", self.alpha_mod),
            ("gamma", self.gamma),
            ("n_th", self.n_th),
        ] {
            if v < 0.0 {
                return Err(invalid(name, format!("must be non-negative, got {v}")));
            }
        }
        Ok(())
    }

    /// `β₁ = |β| cos δ`.
    pub fn beta_re(&self) -> f64 {
        self.beta_mod * self.beta_arg.cos()
    }

    /// `β₂ = |β| sin δ`.
    pub fn beta_im(&self) -> f64 {
        self.beta_mod * self.beta_arg.sin()
    }

    pub fn is_unsqueezed(&self) -> bool {
        self.beta_mod == 0.0
    }

    /// The coherent probe `|α⟩`.
    pub fn initial_state(&self) -> GaussianState {
        coherent_state(self.alpha_mod, self.alpha_arg)
    }
}

/// Drift and diffusion matrices of the moment equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftDiffusion {
    pub drift: Mat2,
    pub diffusion: Mat2,
}

/// The traceless part `B` of the drift.
pub fn squeezing_generator(p: &SystemParams) -> Mat2 {
    let (b1, b2) = (p.beta_re(), p.beta_im());
    Mat2::new(2.0 * b2, p.omega - 2.0 * b1, -(p.omega + 2.0 * b1), -2.0 * b2)
}

pub fn drift_diffusion(p: &SystemParams) -> DriftDiffusion {
    DriftDiffusion {
        drift: squeezing_generator(p) - Mat2::identity() * (0.5 * p.gamma),
        diffusion: Mat2::identity() * (p.gamma * (2.0 * p.n_th + 1.0)),
    }
}

/// Which closed form `e^{Bt}` takes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// `ω² > 4|β|²`: `cos(κt) I + sin(κt)/κ B`.
    Oscillatory { kappa: f64 },
    /// `ω² < 4|β|²`: `cosh(κt) I + sinh(κt)/κ B`.
    Hyperbolic { kappa: f64 },
    /// `ω² = 4|β|²`: `I + B t`.
    Critical,
}

impl Regime {
    pub fn classify(omega: f64, beta_mod: f64) -> Self {
        let omega_sq = omega * omega;
        let discriminant = 4.0 * beta_mod * beta_mod - omega_sq;
        if discriminant.abs() < CRITICAL_THRESHOLD * omega_sq {
            Regime::Critical
        } else if discriminant < 0.0 {
            Regime::Oscillatory {
                kappa: (-discriminant).sqrt(),
            }
        } else {
            Regime::Hyperbolic {
                kappa: discriminant.sqrt(),
            }
        }
    }

    fn frequency(&self) -> f64 {
        match *self {
            Regime::Oscillatory { kappa } | Regime::Hyperbolic { kappa } => kappa,
            Regime::Critical => 0.0,
        }
    }
}

/// `e^{Bt}` for a traceless `B` in the given regime.
pub fn exp_traceless(b: &Mat2, regime: Regime, t: f64) -> Mat2 {
    match regime {
        Regime::Oscillatory { kappa } => Mat2::identity() * (kappa * t).cos() + b * ((kappa * t).sin() / kappa),
        Regime::Hyperbolic { kappa } => Mat2::identity() * (kappa * t).cosh() + b * ((kappa * t).sinh() / kappa),
        Regime::Critical => Mat2::identity() + b * t,
    }
}

/// Closed-form `e^{At}` for fixed parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagator {
    generator: Mat2,
    half_gamma: f64,
    regime: Regime,
}

impl Propagator {
    pub fn new(p: &SystemParams) -> Self {
        Self {
            generator: squeezing_generator(p),
            half_gamma: 0.5 * p.gamma,
            regime: Regime::classify(p.omega, p.beta_mod),
        }
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn at(&self, t: f64) -> Mat2 {
        exp_traceless(&self.generator, self.regime, t) * (-self.half_gamma * t).exp()
    }
}

pub fn propagator(p: &SystemParams, t: f64) -> Mat2 {
    Propagator::new(p).at(t)
}

pub fn evolve_mean(p: &SystemParams, s0: &GaussianState, t: f64) -> MeanVector {
    MeanVector::from_vector(&(propagator(p, t) * s0.mean.as_vector()))
}

/// `σ(t) = e^{At} σ(0) e^{Aᵀt} + ∫₀ᵗ e^{As} D e^{Aᵀs} ds`, the integral by
/// adaptive quadrature.
pub fn evolve_covariance(p: &SystemParams, s0: &GaussianState, t: f64) -> Result<CovarianceMatrix> {
    let dyn_ = Dynamics::new(p, s0)?;
    check_time(t)?;
    dyn_.covariance_by_quadrature(t)
}

/// `u(t) = ∫₀ᵗ e^{A(t−s)} Ω ⟨X(s)⟩ ds`.
pub fn mean_omega_derivative(p: &SystemParams, s0: &GaussianState, t: f64) -> Result<Vec2> {
    let dyn_ = Dynamics::new(p, s0)?;
    check_time(t)?;
    dyn_.mean_derivative_segment(0.0, t)
}

/// `Σ(t) = ∫₀ᵗ e^{A(t−s)} [Ω σ(s) − σ(s) Ω] e^{Aᵀ(t−s)} ds`.
pub fn cov_omega_derivative(p: &SystemParams, s0: &GaussianState, t: f64) -> Result<Mat2> {
    let dyn_ = Dynamics::new(p, s0)?;
    check_time(t)?;
    dyn_.cov_derivative_segment(0.0, t)
}

/// Moments at time `t` together with their ω-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentDerivatives {
    pub t: f64,
    pub mean: MeanVector,
    pub cov: CovarianceMatrix,
    pub mean_deriv: Vec2,
    pub cov_deriv: Mat2,
}

/// Evaluates mean, covariance and both ω-derivatives at a single time.
pub fn moments_with_derivatives(p: &SystemParams, s0: &GaussianState, t: f64) -> Result<MomentDerivatives> {
    let dyn_ = Dynamics::new(p, s0)?;
    check_time(t)?;
    Ok(MomentDerivatives {
        t,
        mean: dyn_.mean_at(t),
        cov: dyn_.covariance_by_quadrature(t)?,
        mean_deriv: dyn_.mean_derivative_segment(0.0, t)?,
        cov_deriv: dyn_.cov_derivative_segment(0.0, t)?,
    })
}

/// Same quantities as [`moments_with_derivatives`] on a non-decreasing grid of
/// times, stepping the integrals forward segment by segment through the
/// semigroup property instead of integrating from zero at every point.
pub fn trajectory(p: &SystemParams, s0: &GaussianState, times: &[f64]) -> Result<Vec<MomentDerivatives>> {
    let dyn_ = Dynamics::new(p, s0)?;
    let mut out = Vec::with_capacity(times.len());
    let mut prev_t = 0.0;
    let mut cov = *s0.cov.matrix();
    let mut u = Vec2::zeros();
    let mut big_sigma = Mat2::zeros();
    for &t in times {
        check_time(t)?;
        if t < prev_t {
            return Err(invalid("times", "must be non-decreasing"));
        }
        let h = t - prev_t;
        if h > 0.0 {
            let step = dyn_.prop.at(h);
            cov = step * cov * step.transpose() + dyn_.diffusion_integral(h)?;
            u = step * u + dyn_.mean_derivative_segment(prev_t, t)?;
            big_sigma = step * big_sigma * step.transpose() + dyn_.cov_derivative_segment(prev_t, t)?;
        }
        out.push(MomentDerivatives {
            t,
            mean: dyn_.mean_at(t),
            cov: CovarianceMatrix::from_matrix(&cov),
            mean_deriv: u,
            cov_deriv: (big_sigma + big_sigma.transpose()) * 0.5,
        });
        prev_t = t;
    }
    Ok(out)
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("must be finite and non-negative, got {t}")));
    }
    Ok(())
}

fn flatten(m: &Mat2) -> [f64; 4] {
    [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]
}

fn unflatten(a: [f64; 4]) -> Mat2 {
    Mat2::new(a[0], a[1], a[2], a[3])
}

/// Solves `A X + X Aᵀ = −D` for symmetric `X`, or `None` when the Lyapunov
/// operator is (numerically) singular.
fn stationary_covariance(drift: &Mat2, diffusion: &Mat2) -> Option<Mat2> {
    let (a11, a12, a21, a22) = (drift[(0, 0)], drift[(0, 1)], drift[(1, 0)], drift[(1, 1)]);
    // eigenvalues of the operator on symmetric matrices are 2λ₁, 2λ₂, λ₁+λ₂
    let scale = drift.norm().max(f64::MIN_POSITIVE);
    let op_det = 4.0 * drift.determinant() * drift.trace();
    if op_det.abs() < 1e-10 * scale.powi(3) {
        return None;
    }
    let system = Matrix3::new(
        2.0 * a11,
        2.0 * a12,
        0.0,
        a21,
        a11 + a22,
        a12,
        0.0,
        2.0 * a21,
        2.0 * a22,
    );
    let rhs = -Vector3::new(diffusion[(0, 0)], diffusion[(0, 1)], diffusion[(1, 1)]);
    let x = system.lu().solve(&rhs)?;
    Some(Mat2::new(x[0], x[1], x[1], x[2]))
}

/// Parameter-derived data shared by the moment and derivative integrals.
struct Dynamics {
    prop: Propagator,
    diffusion: Mat2,
    has_diffusion: bool,
    mean0: Vec2,
    cov0: Mat2,
    stationary: Option<Mat2>,
    freq: f64,
    quad: Quadrature,
}

impl Dynamics {
    fn new(p: &SystemParams, s0: &GaussianState) -> Result<Self> {
        p.validate()?;
        let dd = drift_diffusion(p);
        let prop = Propagator::new(p);
        let has_diffusion = p.gamma > 0.0;
        let stationary = if has_diffusion {
            stationary_covariance(&dd.drift, &dd.diffusion)
        } else {
            None
        };
        Ok(Self {
            prop,
            diffusion: dd.diffusion,
            has_diffusion,
            mean0: s0.mean.as_vector(),
            cov0: *s0.cov.matrix(),
            stationary,
            freq: prop.regime().frequency().max(p.omega),
            quad: Quadrature::default(),
        })
    }

    fn panels(&self, width: f64) -> usize {
        // roughly one panel per half period of the fastest (2κ) component
        let n = (width * 2.0 * self.freq / PI).ceil();
        (n as usize).clamp(1, 4096)
    }

    fn mean_at(&self, t: f64) -> MeanVector {
        MeanVector::from_vector(&(self.prop.at(t) * self.mean0))
    }

    fn diffusion_integral(&self, t: f64) -> Result<Mat2> {
        if !self.has_diffusion || t == 0.0 {
            return Ok(Mat2::zeros());
        }
        let quad = self.quad.with_initial_panels(self.panels(t));
        let v = quad.integrate(
            |s| {
                let e = self.prop.at(s);
                flatten(&(e * self.diffusion * e.transpose()))
            },
            0.0,
            t,
        )?;
        Ok(unflatten(v))
    }

    fn covariance_by_quadrature(&self, t: f64) -> Result<CovarianceMatrix> {
        let e = self.prop.at(t);
        let homogeneous = e * self.cov0 * e.transpose();
        Ok(CovarianceMatrix::from_matrix(
            &(homogeneous + self.diffusion_integral(t)?),
        ))
    }

    /// `σ(s)` inside the `Σ` integrand: the Lyapunov closed form when the
    /// stationary solution exists, quadrature otherwise.
    fn covariance_at(&self, s: f64) -> Result<Mat2> {
        let e = self.prop.at(s);
        if !self.has_diffusion {
            return Ok(e * self.cov0 * e.transpose());
        }
        match self.stationary {
            Some(st) => Ok(e * (self.cov0 - st) * e.transpose() + st),
            None => Ok(*self.covariance_by_quadrature(s)?.matrix()),
        }
    }

    /// `∫_{t0}^{t1} e^{A(t1−s)} Ω ⟨X(s)⟩ ds`.
    fn mean_derivative_segment(&self, t0: f64, t1: f64) -> Result<Vec2> {
        if t1 <= t0 || self.mean0 == Vec2::zeros() {
            return Ok(Vec2::zeros());
        }
        let omega = symplectic_form();
        let quad = self.quad.with_initial_panels(self.panels(t1 - t0));
        let v = quad.integrate(
            |s| {
                let x = self.prop.at(s) * self.mean0;
                let r = self.prop.at(t1 - s) * (omega * x);
                [r[0], r[1]]
            },
            t0,
            t1,
        )?;
        Ok(Vec2::new(v[0], v[1]))
    }

    /// `∫_{t0}^{t1} e^{A(t1−s)} [Ω σ(s) − σ(s) Ω] e^{Aᵀ(t1−s)} ds`.
    fn cov_derivative_segment(&self, t0: f64, t1: f64) -> Result<Mat2> {
        if t1 <= t0 {
            return Ok(Mat2::zeros());
        }
        let omega = symplectic_form();
        let quad = self.quad.with_initial_panels(self.panels(t1 - t0));
        let mut failure = None;
        let v = quad.integrate(
            |s| match self.covariance_at(s) {
                Ok(sigma) => {
                    let e = self.prop.at(t1 - s);
                    flatten(&(e * (omega * sigma - sigma * omega) * e.transpose()))
                }
                Err(err) => {
                    failure.get_or_insert(err);
                    [0.0; 4]
                }
            },
            t0,
            t1,
        )?;
        if let Some(err) = failure {
            return Err(err);
        }
        let m = unflatten(v);
        Ok((m + m.transpose()) * 0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{validate_state, PHYSICALITY_TOL};
    use std::f64::consts::FRAC_PI_2;

    fn fig1_squeezed() -> SystemParams {
        SystemParams::unitary(2.1)
            .with_beta(0.5, -FRAC_PI_2)
            .with_alpha(1.0, FRAC_PI_2)
            .with_bath(0.05, 0.1)
    }

    fn close(a: &Mat2, b: &Mat2, tol: f64) -> bool {
        (a - b).abs().max() <= tol
    }

    #[test]
    fn drift_without_squeezing_or_damping_is_rotation_generator() {
        let p = SystemParams::unitary(2.1);
        let dd = drift_diffusion(&p);
        assert_eq!(dd.drift, symplectic_form() * 2.1);
        assert_eq!(dd.diffusion, Mat2::zeros());
    }

    #[test]
    fn drift_with_thermal_bath() {
        let p = SystemParams::unitary(2.1).with_bath(0.05, 0.1);
        let dd = drift_diffusion(&p);
        assert!(close(
            &dd.drift,
            &(symplectic_form() * 2.1 - Mat2::identity() * 0.025),
            1e-15
        ));
        assert!(close(&dd.diffusion, &(Mat2::identity() * 0.06), 1e-15));
    }

    #[test]
    fn squeezing_generator_for_fig1() {
        let b = squeezing_generator(&fig1_squeezed());
        assert!(close(&b, &Mat2::new(-1.0, 2.1, -2.1, 1.0), 1e-15));
        let dd = drift_diffusion(&fig1_squeezed());
        assert!((dd.drift + Mat2::identity() * 0.025).trace().abs() < 1e-15);
    }

    #[test]
    fn rotation_when_unsqueezed() {
        let p = SystemParams::unitary(2.1);
        for t in [0.0, 0.3, 1.0, 17.0] {
            let (c, s) = ((2.1f64 * t).cos(), (2.1f64 * t).sin());
            assert!(close(&propagator(&p, t), &Mat2::new(c, s, -s, c), 1e-13));
        }
    }

    #[test]
    fn regimes() {
        assert!(matches!(Regime::classify(2.1, 0.5), Regime::Oscillatory { .. }));
        assert!(matches!(Regime::classify(1.0, 0.6), Regime::Hyperbolic { .. }));
        assert_eq!(Regime::classify(1.0, 0.5), Regime::Critical);
    }

    #[test]
    fn branches_agree_near_critical_manifold() {
        for sign in [-1.0, 1.0] {
            let omega = 1.3;
            let beta = 0.5 * omega / (1.0 + sign * 1e-7f64).sqrt();
            let p = SystemParams::unitary(omega).with_beta(beta, 0.4).with_bath(0.02, 0.0);
            let b = squeezing_generator(&p);
            let disc = 4.0 * beta * beta - omega * omega;
            let kappa = disc.abs().sqrt();
            for t in [0.1, 1.0, 3.0] {
                let osc = exp_traceless(&b, Regime::Oscillatory { kappa }, t);
                let hyp = exp_traceless(&b, Regime::Hyperbolic { kappa }, t);
                let crit = exp_traceless(&b, Regime::Critical, t);
                assert!(close(&osc, &crit, 1e-5), "t={t}");
                assert!(close(&hyp, &crit, 1e-5), "t={t}");
            }
        }
    }

    #[test]
    fn evolve_mean_decays_isometrically_without_squeezing() {
        let p = SystemParams::unitary(2.1)
            .with_alpha(1.0, FRAC_PI_2)
            .with_bath(0.05, 0.1);
        let s0 = p.initial_state();
        assert_eq!(evolve_mean(&p, &s0, 0.0), s0.mean);
        for t in [0.5, 3.0, 40.0] {
            let m = evolve_mean(&p, &s0, t);
            assert!((m.norm() - s0.mean.norm() * (-0.025 * t).exp()).abs() < 1e-13);
        }
    }

    #[test]
    fn covariance_closed_forms_without_squeezing() {
        let s0 = GaussianState::new(MeanVector::zero(), CovarianceMatrix::identity());
        let unitary = SystemParams::unitary(2.1);
        let c = evolve_covariance(&unitary, &s0, 7.0).unwrap();
        assert!(close(c.matrix(), &Mat2::identity(), 1e-13));

        let thermal = SystemParams::unitary(2.1).with_bath(0.05, 0.1);
        let c = evolve_covariance(&thermal, &s0, 10.0).unwrap();
        let expected = 1.0 + 0.2 * (1.0 - (-0.5f64).exp());
        assert!(close(c.matrix(), &(Mat2::identity() * expected), 1e-10));
    }

    #[test]
    fn lyapunov_closed_form_matches_quadrature() {
        let p = fig1_squeezed().with_beta_cartesian(0.3, -0.5);
        let s0 = p.initial_state();
        let dyn_ = Dynamics::new(&p, &s0).unwrap();
        assert!(dyn_.stationary.is_some());
        for t in [0.0, 0.7, 5.0, 30.0] {
            let quad = dyn_.covariance_by_quadrature(t).unwrap();
            let closed = dyn_.covariance_at(t).unwrap();
            assert!(close(quad.matrix(), &closed, 1e-9), "t={t}");
        }
    }

    #[test]
    fn covariance_stays_physical() {
        let p = fig1_squeezed().with_beta_cartesian(0.3, -0.5);
        let s0 = p.initial_state();
        for i in 0..=40 {
            let t = i as f64 * 2.0;
            let cov = evolve_covariance(&p, &s0, t).unwrap();
            assert_eq!(cov.qp(), cov.matrix()[(1, 0)]);
            assert!(
                validate_state(&GaussianState::new(s0.mean, cov), PHYSICALITY_TOL),
                "t={t}"
            );
        }
    }

    #[test]
    fn derivatives_vanish_at_zero_time() {
        let p = fig1_squeezed();
        let s0 = p.initial_state();
        assert_eq!(mean_omega_derivative(&p, &s0, 0.0).unwrap(), Vec2::zeros());
        assert_eq!(cov_omega_derivative(&p, &s0, 0.0).unwrap(), Mat2::zeros());
    }

    #[test]
    fn unsqueezed_derivatives_reduce_to_closed_forms() {
        for (gamma, n) in [(0.0, 0.0), (0.05, 0.0), (0.05, 0.1)] {
            let p = SystemParams::unitary(2.1)
                .with_alpha(1.0, FRAC_PI_2)
                .with_bath(gamma, n);
            let s0 = p.initial_state();
            for t in [0.5, 1.0, 13.0, 60.0] {
                let u = mean_omega_derivative(&p, &s0, t).unwrap();
                let expected = symplectic_form() * evolve_mean(&p, &s0, t).as_vector() * t;
                assert!(
                    (u - expected).abs().max() <= 1e-9 * expected.norm().max(1.0),
                    "γ={gamma} t={t}"
                );
                let big = cov_omega_derivative(&p, &s0, t).unwrap();
                assert!(big.abs().max() <= 1e-9, "γ={gamma} t={t}: {big}");
            }
        }
    }

    #[test]
    fn trajectory_matches_pointwise() {
        let p = fig1_squeezed().with_beta_cartesian(0.3, -0.5);
        let s0 = p.initial_state();
        let times: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let traj = trajectory(&p, &s0, &times).unwrap();
        for k in [0, 1, 37, 200] {
            let direct = moments_with_derivatives(&p, &s0, times[k]).unwrap();
            let step = &traj[k];
            assert_eq!(step.mean, direct.mean);
            assert!(close(step.cov.matrix(), direct.cov.matrix(), 1e-9));
            assert!((step.mean_deriv - direct.mean_deriv).abs().max() < 1e-8);
            assert!(close(&step.cov_deriv, &direct.cov_deriv, 1e-8));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = SystemParams::unitary(-1.0);
        let s0 = p.initial_state();
        assert!(evolve_covariance(&p, &s0, 1.0).is_err());
        let p = SystemParams::unitary(1.0);
        assert!(mean_omega_derivative(&p, &s0, -1.0).is_err());
        assert!(trajectory(&p, &s0, &[1.0, 0.5]).is_err());
    }
}
