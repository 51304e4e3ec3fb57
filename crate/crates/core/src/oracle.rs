//! Brute-force cross-checks.
//!
//! Nothing here calls the propagators, quadrature, closed-form coefficients or
//! Fisher formulas it is meant to check. The drift is rebuilt from the
//! Hamiltonian's quadratic form, moments are integrated with fixed-step RK4,
//! derivatives come from central differences, the bath coefficients from their
//! defining double integrals on composite Gauss–Legendre rules, and the
//! outcome Fisher information from the expected squared score on a
//! Gauss–Hermite grid.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{invalid, Error, Result};
use crate::gaussian::{CovarianceMatrix, GaussianState, Mat2, MeanVector, Vec2};
use crate::markovian::SystemParams;
use crate::qbm::QbmParams;

/// Below this magnitude a reference value is treated as zero and the
/// comparison falls back to the absolute error.
pub const ZERO_REFERENCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub quantity: String,
    pub analytic: f64,
    pub oracle: f64,
    pub rel_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleReport {
    pub fn compare(quantity: impl Into<String>, analytic: f64, oracle: f64, tolerance: f64) -> Self {
        let diff = (analytic - oracle).abs();
        Self::build(quantity.into(), analytic, oracle, diff, analytic.abs(), tolerance)
    }

    /// Compares two vectors through `‖a − o‖ / ‖a‖`; the reported values are
    /// the norms.
    pub fn compare_slices(quantity: impl Into<String>, analytic: &[f64], oracle: &[f64], tolerance: f64) -> Self {
        assert_eq!(analytic.len(), oracle.len(), "compared slices differ in length");
        let norm = |v: &mut dyn Iterator<Item = f64>| v.map(|x| x * x).sum::<f64>().sqrt();
        let a = norm(&mut analytic.iter().copied());
        let o = norm(&mut oracle.iter().copied());
        let diff = norm(&mut analytic.iter().zip(oracle).map(|(x, y)| x - y));
        Self::build(quantity.into(), a, o, diff, a, tolerance)
    }

    fn build(quantity: String, analytic: f64, oracle: f64, diff: f64, scale: f64, tolerance: f64) -> Self {
        let rel_error = if scale > ZERO_REFERENCE { diff / scale } else { diff };
        Self {
            quantity,
            analytic,
            oracle,
            rel_error,
            tolerance,
            pass: rel_error <= tolerance,
        }
    }
}

/// Drift from `H = ½ Xᵀ G X`, with
/// `ω a†a + β a†² + β* a² → G = [[ω + 2β₁, 2β₂], [2β₂, ω − 2β₁]]` (dropping
/// the constant), plus amplitude damping at rate `γ/2`.
fn drift(p: &SystemParams) -> Mat2 {
    let b1 = p.beta_mod * p.beta_arg.cos();
    let b2 = p.beta_mod * p.beta_arg.sin();
    let g = Mat2::new(p.omega + 2.0 * b1, 2.0 * b2, 2.0 * b2, p.omega - 2.0 * b1);
    let omega_form = Mat2::new(0.0, 1.0, -1.0, 0.0);
    omega_form * g - Mat2::identity() * (0.5 * p.gamma)
}

fn rk4<S, F>(mut y: S, t: f64, dt: f64, f: F) -> Result<S>
where
    S: Copy + std::ops::Add<Output = S> + std::ops::Mul<f64, Output = S>,
    F: Fn(&S) -> S,
{
    if !(dt > 0.0) {
        return Err(invalid("dt", format!("must be positive, got {dt}")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("must be finite and non-negative, got {t}")));
    }
    let steps = (t / dt).round().max(1.0) as usize;
    let h = t / steps as f64;
    for _ in 0..steps {
        let k1 = f(&y);
        let k2 = f(&(y + k1 * (0.5 * h)));
        let k3 = f(&(y + k2 * (0.5 * h)));
        let k4 = f(&(y + k3 * h));
        y = y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    Ok(y)
}

/// `e^{At}` by RK4 on `dY/dt = A Y`, `Y(0) = I`.
pub fn ode_propagator(p: &SystemParams, t: f64, dt: f64) -> Result<Mat2> {
    let a = drift(p);
    rk4(Mat2::identity(), t, dt, |y| a * y)
}

/// Mean and covariance by RK4 on `d⟨X⟩/dt = A⟨X⟩`,
/// `dσ/dt = Aσ + σAᵀ + γ(2n+1) I`. The step is `t / round(t/dt)`.
pub fn ode_moments(p: &SystemParams, s0: &GaussianState, t: f64, dt: f64) -> Result<GaussianState> {
    let a = drift(p);
    let d = Mat2::identity() * (p.gamma * (2.0 * p.n_th + 1.0));
    let mean = rk4(s0.mean.as_vector(), t, dt, |x| a * x)?;
    let cov = rk4(*s0.cov.matrix(), t, dt, |s| a * s + s * a.transpose() + d)?;
    Ok(GaussianState::new(
        MeanVector::from_vector(&mean),
        CovarianceMatrix::from_matrix(&cov),
    ))
}

/// Central difference `(f(ω+h) − f(ω−h))/2h` at `h` and `h/2`, combined as
/// `(4D(h/2) − D(h))/3`.
pub fn fd_omega<F>(f: F, omega: f64, h: f64) -> Result<(Vec2, Mat2)>
where
    F: Fn(f64) -> Result<(Vec2, Mat2)>,
{
    if !(h > 0.0) {
        return Err(invalid("h", format!("must be positive, got {h}")));
    }
    let central = |step: f64| -> Result<(Vec2, Mat2)> {
        let (up, sp) = f(omega + step)?;
        let (um, sm) = f(omega - step)?;
        Ok(((up - um) / (2.0 * step), (sp - sm) / (2.0 * step)))
    };
    let (u1, s1) = central(h)?;
    let (u2, s2) = central(0.5 * h)?;
    Ok(((u2 * 4.0 - u1) / 3.0, (s2 * 4.0 - s1) / 3.0))
}

/// Single central difference without extrapolation, for order checks.
pub fn fd_omega_plain<F>(f: F, omega: f64, h: f64) -> Result<(Vec2, Mat2)>
where
    F: Fn(f64) -> Result<(Vec2, Mat2)>,
{
    let (up, sp) = f(omega + h)?;
    let (um, sm) = f(omega - h)?;
    Ok(((up - um) / (2.0 * h), (sp - sm) / (2.0 * h)))
}

/// ω-derivatives of the RK4 moments of the Markovian dynamics.
pub fn fd_omega_markovian(p: &SystemParams, s0: &GaussianState, t: f64, h: f64, dt: f64) -> Result<(Vec2, Mat2)> {
    fd_omega(
        |w| {
            let s = ode_moments(&p.with_omega(w), s0, t, dt)?;
            Ok((s.mean.as_vector(), *s.cov.matrix()))
        },
        p.omega,
        h,
    )
}

/// Nodes and weights of an `n`-point rule from its Jacobi matrix.
fn golub_welsch(n: usize, off_diag: impl Fn(usize) -> f64, mass: f64) -> (Vec<f64>, Vec<f64>) {
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = off_diag(k);
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], mass * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Gauss–Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    golub_welsch(
        n,
        |k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        },
        2.0,
    )
}

/// Gauss–Hermite rule for the weight `e^{−x²}`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    golub_welsch(n, |k| (0.5 * k as f64).sqrt(), PI.sqrt())
}

struct Composite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Composite {
    fn new(order: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        Self { nodes, weights }
    }

    fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64, panels: usize) -> f64 {
        let panels = panels.max(1);
        let width = (b - a) / panels as f64;
        let mut total = 0.0;
        for i in 0..panels {
            let center = a + width * (i as f64 + 0.5);
            let half = 0.5 * width;
            let mut s = 0.0;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                s += w * f(center + half * x);
            }
            total += s * half;
        }
        total
    }
}

/// Result of the nested-quadrature evaluation of the bath coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NestedCoefficients {
    pub gamma: f64,
    pub delta: f64,
    /// Frequency at which the inner integrals are cut off.
    pub lambda_max: f64,
    /// Bound on the truncated `γ` tail before it is estimated.
    pub gamma_tail_bound: f64,
    /// Bound on the neglected tail of the `Δ` integral (high-temperature part).
    pub delta_tail_bound: f64,
}

const NESTED_ORDER: usize = 16;

/// `γ(t) = ξ² ∫₀ᵗ ds sin(ωs) ∫₀^∞ dΛ J(Λ) sin(Λs)` and
/// `Δ(t) = ξ² ∫₀ᵗ ds cos(ωs) ∫₀^∞ dΛ J(Λ) coth(Λ/2T) cos(Λs)`, with the
/// inner integrals cut at `Λ_max = 50 max(Λ_c, ω)`.
///
/// For `γ` the slowly decaying part of `J(Λ) sin(Λs)` is split off,
/// `Λ/(Λ_c²+Λ²) = 1/Λ − Λ_c²/(Λ(Λ_c²+Λ²))`, and the Dirichlet integral of the
/// first piece is taken as `π/2`; only the `1/Λ³` remainder is truncated,
/// and its tail is estimated by integration by parts.
pub fn nested_quadrature_coefficients(p: &QbmParams, t: f64) -> Result<NestedCoefficients> {
    p.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("must be finite and non-negative, got {t}")));
    }
    let lc = p.lambda_c;
    let lc2 = lc * lc;
    let temp = p.temp_ratio * lc;
    let lambda_max = 50.0 * lc.max(p.omega);
    let xi2 = p.xi * p.xi;
    let rule = Composite::new(NESTED_ORDER);

    // resolve both the Lorentzian width and the oscillation in Λ
    let inner_panels = |s: f64| ((lambda_max * s / PI).ceil() as usize).max((2.0 * lambda_max / lc).ceil() as usize);

    let inner_gamma = |s: f64| {
        if s == 0.0 {
            return 0.0;
        }
        let remainder = rule.integrate(
            |l| (l * s).sin() / (l * (lc2 + l * l)),
            0.0,
            lambda_max,
            inner_panels(s),
        );
        2.0 / PI * lc2 * (0.5 * PI - lc2 * (remainder + remainder_tail(&rule, lc2, lambda_max, s)))
    };
    let inner_delta = |s: f64| {
        rule.integrate(
            |l| {
                let j = 2.0 * l / PI * lc2 / (lc2 + l * l);
                j / (l / (2.0 * temp)).tanh() * (l * s).cos()
            },
            0.0,
            lambda_max,
            inner_panels(s),
        )
    };

    let outer_panels = ((t * p.omega.max(lc) / PI).ceil() as usize * 2).max(2);
    let gamma = xi2 * rule.integrate(|s| (p.omega * s).sin() * inner_gamma(s), 0.0, t, outer_panels);
    let delta = xi2 * rule.integrate(|s| (p.omega * s).cos() * inner_delta(s), 0.0, t, outer_panels);

    Ok(NestedCoefficients {
        gamma,
        delta,
        lambda_max,
        gamma_tail_bound: xi2 * t * 2.0 / PI * lc2 * lc2 / (2.0 * lambda_max * lambda_max),
        delta_tail_bound: xi2 * t * 2.0 / PI * lc2 * 2.0 * temp / lambda_max,
    })
}

/// Estimate of the truncated tail `∫_L^∞ f(Λ) sin(Λs) dΛ`, with
/// `f(Λ) = 1/(Λ(Λ_c² + Λ²))`.
///
/// For `sL > 4` two integration-by-parts terms are used (error at most
/// `|f'(L)|/s²`). Closer to `s = 0` the tail is that of `1/Λ³`,
/// `s² G(sL)` with `G(y) = sin y/(2y²) + cos y/(2y) − (π/2 − Si(y))/2`, whose
/// relative error is `O(Λ_c²/L²)`.
fn remainder_tail(rule: &Composite, lc2: f64, l: f64, s: f64) -> f64 {
    let y = l * s;
    if y > 4.0 {
        let denom = l * (lc2 + l * l);
        let f = 1.0 / denom;
        let df = -(lc2 + 3.0 * l * l) / (denom * denom);
        return f * y.cos() / s - df * y.sin() / (s * s);
    }
    let si = rule.integrate(|x| x.sin() / x, 0.0, y, 1);
    let g = y.sin() / (2.0 * y * y) + y.cos() / (2.0 * y) - 0.5 * (0.5 * PI - si);
    s * s * g
}

/// Composite trapezoid rule with `n` intervals.
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n.max(1);
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + h * i as f64)).sum();
    h * (0.5 * (f(a) + f(b)) + inner)
}

const CURVATURE_NODES: usize = 10;
const CURVATURE_AGREEMENT: f64 = 1e-9;

fn expected_squared_score(
    chol: &Mat2,
    sigma: &Mat2,
    mean_deriv: &Vec2,
    sigma_deriv: &Mat2,
    nodes: usize,
    h: f64,
) -> Result<f64> {
    let log_density = |x: &Vec2, theta: f64| -> Result<f64> {
        let s = sigma + sigma_deriv * theta;
        let inv = s
            .try_inverse()
            .ok_or(Error::SingularCovariance { det: s.determinant() })?;
        let d = x - mean_deriv * theta;
        Ok(-0.5 * d.dot(&(inv * d)) - 0.5 * s.determinant().ln() - (2.0 * PI).ln())
    };
    let (xs, ws) = gauss_hermite(nodes);
    let mut total = 0.0;
    for (xi, wi) in xs.iter().zip(&ws) {
        for (xj, wj) in xs.iter().zip(&ws) {
            let x = chol * Vec2::new(*xi, *xj) * 2f64.sqrt();
            let score = (log_density(&x, h)? - log_density(&x, -h)?) / (2.0 * h);
            total += wi * wj * score * score;
        }
    }
    Ok(total / PI)
}

/// Fisher information of `N(θu, Σ + θ∂Σ)` at `θ = 0`, as the expected squared
/// score. The score is a central difference of the log-density in `θ`; the
/// expectation uses a tensor Gauss–Hermite grid, which must agree with one of
/// double the size.
pub fn likelihood_curvature_cfi(sigma_out: &Mat2, mean_deriv: &Vec2, sigma_out_deriv: &Mat2) -> Result<f64> {
    let sym = (sigma_out + sigma_out.transpose()) * 0.5;
    let chol = sym
        .cholesky()
        .ok_or(Error::SingularCovariance { det: sym.determinant() })?
        .l();
    let inv = sym
        .try_inverse()
        .ok_or(Error::SingularCovariance { det: sym.determinant() })?;
    let scale = 1f64
        .max((inv * sigma_out_deriv).norm())
        .max(mean_deriv.dot(&(inv * mean_deriv)).sqrt());
    let h = 1e-4 / scale;
    let coarse = expected_squared_score(&chol, &sym, mean_deriv, sigma_out_deriv, CURVATURE_NODES, h)?;
    let fine = expected_squared_score(&chol, &sym, mean_deriv, sigma_out_deriv, 2 * CURVATURE_NODES, h)?;
    let difference = (coarse - fine).abs();
    if difference > CURVATURE_AGREEMENT * fine.abs().max(ZERO_REFERENCE) {
        return Err(Error::GridNonConvergence { difference });
    }
    Ok(fine)
}
