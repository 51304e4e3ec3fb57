//! Quantum Brownian motion with an Ohmic Lorentz–Drude bath.
//!
//! The bath enters through `J(Λ) = (2Λ/π) Λ_c²/(Λ_c² + Λ²)` and produces the
//! time-dependent dissipation and (high-temperature) diffusion coefficients
//!
//! ```text
//! γ(t) = ξ²ω r²/(r²+1) [1 − e^{−Λ_c t} cos ωt − r e^{−Λ_c t} sin ωt],
//! Δ(t) = 2ξ² T r²/(r²+1) [1 − e^{−Λ_c t} (cos ωt − sin(ωt)/r)],
//! ```
//!
//! with `r = Λ_c/ω` and `T = temp_ratio · Λ_c`. Negativity of
//! `Γ±(t) = Δ(t) ± γ(t)` flags a breakdown of CP-divisibility.
//!
//! Moments evolve as `⟨X(t)⟩ = e^{−Γ(t)/2} R(ωt) ⟨X(0)⟩` and
//! `σ(t) = e^{−Γ(t)} σ(0) + 𝒯(t) I`, where `Γ(t) = 2∫₀ᵗ γ` and `𝒯(t)` is
//! either the weak-coupling `∫₀ᵗ Δ` or the exact `e^{−Γ(t)} ∫₀ᵗ e^{Γ(s)} Δ(s) ds`.
//! The ω-derivatives needed by the Fisher information are taken by
//! Richardson-extrapolated central differences, since ω enters both the
//! rotation and the coefficients.

use std::f64::consts::PI;

use crate::dyne::{cfi_general_dyne, optimize_dyne, CfiResult, DyneSetting};
use crate::error::{ensure_finite, invalid, Result};
use crate::gaussian::{CovarianceMatrix, GaussianState, Mat2, MeanVector, Vec2};
use crate::markovian::MomentDerivatives;
use crate::qfi::qfi_gaussian;
use crate::quad::Quadrature;

/// Relative finite-difference step for ω.
pub const FD_RELATIVE_STEP: f64 = 1e-5;

/// Absolute resolution of sign-change endpoints.
pub const BISECTION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QbmParams {
    pub omega: f64,
    pub xi: f64,
    pub lambda_c: f64,
    /// `k_B T / Λ_c`.
    pub temp_ratio: f64,
}

impl QbmParams {
    pub fn new(omega: f64, xi: f64, lambda_c: f64, temp_ratio: f64) -> Self {
        Self {
            omega,
            xi,
            lambda_c,
            temp_ratio,
        }
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_xi(mut self, xi: f64) -> Self {
        self.xi = xi;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega", self.omega),
            ("xi", self.xi),
            ("lambda_c", self.lambda_c),
            ("temp_ratio", self.temp_ratio),
        ] {
            ensure_finite(name, v)?;
            if v <= 0.0 {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Non-Markovianity ratio `r = Λ_c/ω`.
    pub fn r(&self) -> f64 {
        self.lambda_c / self.omega
    }

    /// `k_B T` in units where `ħ = k_B = 1`.
    pub fn temperature(&self) -> f64 {
        self.temp_ratio * self.lambda_c
    }

    fn lorentz_factor(&self) -> f64 {
        let r2 = self.r() * self.r();
        r2 / (r2 + 1.0)
    }
}

/// `J(Λ) = (2Λ/π) Λ_c²/(Λ_c² + Λ²)`.
pub fn spectral_density(freq: f64, lambda_c: f64) -> f64 {
    let lc2 = lambda_c * lambda_c;
    2.0 * freq / PI * lc2 / (lc2 + freq * freq)
}

pub fn gamma_of_t(p: &QbmParams, t: f64) -> f64 {
    let decay = (-p.lambda_c * t).exp();
    let wt = p.omega * t;
    gamma_markov(p) * (1.0 - decay * wt.cos() - p.r() * decay * wt.sin())
}

/// High-temperature diffusion coefficient.
pub fn delta_of_t(p: &QbmParams, t: f64) -> f64 {
    let decay = (-p.lambda_c * t).exp();
    let wt = p.omega * t;
    delta_markov(p) * (1.0 - decay * (wt.cos() - wt.sin() / p.r()))
}

/// Stationary dissipation `γ_M = ξ²ω r²/(r²+1)`.
pub fn gamma_markov(p: &QbmParams) -> f64 {
    p.xi * p.xi * p.omega * p.lorentz_factor()
}

/// Stationary diffusion `Δ_M = 2ξ² T r²/(r²+1)`.
pub fn delta_markov(p: &QbmParams) -> f64 {
    2.0 * p.xi * p.xi * p.temperature() * p.lorentz_factor()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSample {
    pub t: f64,
    pub gamma: f64,
    pub delta: f64,
    pub rate_plus: f64,
    pub rate_minus: f64,
}

pub fn rate_sample(p: &QbmParams, t: f64) -> RateSample {
    let gamma = gamma_of_t(p, t);
    let delta = delta_of_t(p, t);
    RateSample {
        t,
        gamma,
        delta,
        rate_plus: delta + gamma,
        rate_minus: delta - gamma,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

/// Total length of a set of disjoint intervals.
pub fn total_length(intervals: &[Interval]) -> f64 {
    intervals.iter().map(Interval::len).fold(0.0, |a, b| a + b)
}

fn bisect_sign_change<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> f64 {
    let lo_negative = f(lo) < 0.0;
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Maximal sub-intervals of `grid` on which `f < 0`, with interior endpoints
/// refined by bisection. Dips that start and end between two grid points are
/// not seen.
pub fn negative_windows<F: Fn(f64) -> f64>(f: F, grid: &[f64]) -> Result<Vec<Interval>> {
    if grid.is_empty() {
        return Err(invalid("t_grid", "must not be empty"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("t_grid", "must be strictly increasing"));
    }
    let mut out = Vec::new();
    let mut open: Option<f64> = (f(grid[0]) < 0.0).then_some(grid[0]);
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let neg_b = f(b) < 0.0;
        match (open, neg_b) {
            (None, true) => open = Some(bisect_sign_change(&f, a, b)),
            (Some(start), false) => {
                out.push(Interval {
                    start,
                    end: bisect_sign_change(&f, a, b),
                });
                open = None;
            }
            _ => {}
        }
    }
    if let Some(start) = open {
        out.push(Interval {
            start,
            end: *grid.last().expect("grid is non-empty"),
        });
    }
    Ok(out)
}

/// Windows where `Γ₊(t) < 0` or `Γ₋(t) < 0`.
pub fn cp_divisibility_violations(p: &QbmParams, t_grid: &[f64]) -> Result<Vec<Interval>> {
    p.validate()?;
    negative_windows(
        |t| {
            let s = rate_sample(p, t);
            s.rate_plus.min(s.rate_minus)
        },
        t_grid,
    )
}

/// How `𝒯(t)` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Diffusion {
    /// `𝒯(t) ≈ ∫₀ᵗ Δ(s) ds`.
    #[default]
    WeakCoupling,
    /// `𝒯(t) = e^{−Γ(t)} ∫₀ᵗ e^{Γ(s)} Δ(s) ds`.
    Exact,
}

/// Amplitude decay applied to the mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MeanDecay {
    /// `e^{−Γ(t)/2}`, half the population rate.
    #[default]
    Half,
    /// `e^{−Γ(t)}`.
    Full,
}

/// Which rates drive the channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Rates {
    #[default]
    TimeDependent,
    /// `γ(t) → γ_M`, `Δ(t) → Δ_M`: the memoryless reference channel.
    Stationary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct QbmOptions {
    pub diffusion: Diffusion,
    pub mean_decay: MeanDecay,
    pub rates: Rates,
}

/// `(Γ(t), Δ_Γ(t), ∫₀ᵗ Δ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryKernels {
    pub big_gamma: f64,
    pub delta_gamma: f64,
    pub t_approx: f64,
}

fn quadrature(p: &QbmParams, t: f64) -> Quadrature {
    // tight tolerances keep the finite differences in ω smooth
    let panels = (t * p.omega.max(p.lambda_c) / PI).ceil().clamp(1.0, 4096.0) as usize;
    Quadrature::new(1e-15, 1e-13).with_initial_panels(panels)
}

/// `∫₀ᵗ γ(s) ds` in closed form, used for the inner integral of `Δ_Γ`.
fn gamma_primitive(p: &QbmParams, t: f64) -> f64 {
    let (l, w) = (p.lambda_c, p.omega);
    let norm = l * l + w * w;
    let decay = (-l * t).exp();
    let (c, s) = ((w * t).cos(), (w * t).sin());
    let cos_part = (l - decay * (l * c - w * s)) / norm;
    let sin_part = (w - decay * (l * s + w * c)) / norm;
    gamma_markov(p) * (t - cos_part - p.r() * sin_part)
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("must be finite and non-negative, got {t}")));
    }
    Ok(())
}

/// `Γ(t)`, `Δ_Γ(t)` and the weak-coupling `𝒯(t)`, all by adaptive quadrature.
pub fn memory_kernels(p: &QbmParams, t: f64) -> Result<MemoryKernels> {
    p.validate()?;
    check_time(t)?;
    let q = quadrature(p, t);
    let [g, d] = q.integrate(|s| [gamma_of_t(p, s), delta_of_t(p, s)], 0.0, t)?;
    let delta_gamma = q.integrate_scalar(|s| (2.0 * gamma_primitive(p, s)).exp() * delta_of_t(p, s), 0.0, t)?;
    Ok(MemoryKernels {
        big_gamma: 2.0 * g,
        delta_gamma,
        t_approx: d,
    })
}

/// `(Γ(t), 𝒯(t))` for the selected options.
fn channel(p: &QbmParams, t: f64, opts: QbmOptions) -> Result<(f64, f64)> {
    if opts.rates == Rates::Stationary {
        let (g, d) = (gamma_markov(p), delta_markov(p));
        let big_gamma = 2.0 * g * t;
        let diffusion = match opts.diffusion {
            Diffusion::WeakCoupling => d * t,
            Diffusion::Exact if big_gamma > 0.0 => d * (-(-big_gamma).exp_m1()) / (2.0 * g),
            Diffusion::Exact => d * t,
        };
        return Ok((big_gamma, diffusion));
    }
    let q = quadrature(p, t);
    match opts.diffusion {
        Diffusion::WeakCoupling => {
            let [g, d] = q.integrate(|s| [gamma_of_t(p, s), delta_of_t(p, s)], 0.0, t)?;
            Ok((2.0 * g, d))
        }
        Diffusion::Exact => {
            let k = memory_kernels(p, t)?;
            Ok((k.big_gamma, (-k.big_gamma).exp() * k.delta_gamma))
        }
    }
}

fn rotation(angle: f64) -> Mat2 {
    let (s, c) = angle.sin_cos();
    Mat2::new(c, s, -s, c)
}

fn moments(p: &QbmParams, s0: &GaussianState, t: f64, opts: QbmOptions) -> Result<(Vec2, Mat2)> {
    let (big_gamma, diffusion) = channel(p, t, opts)?;
    let decay = match opts.mean_decay {
        MeanDecay::Half => (-0.5 * big_gamma).exp(),
        MeanDecay::Full => (-big_gamma).exp(),
    };
    let mean = rotation(p.omega * t) * s0.mean.as_vector() * decay;
    let cov = s0.cov.matrix() * (-big_gamma).exp() + Mat2::identity() * diffusion;
    Ok((mean, cov))
}

pub fn evolve_qbm(p: &QbmParams, s0: &GaussianState, t: f64, opts: QbmOptions) -> Result<GaussianState> {
    p.validate()?;
    check_time(t)?;
    let (mean, cov) = moments(p, s0, t, opts)?;
    Ok(GaussianState::new(
        MeanVector::from_vector(&mean),
        CovarianceMatrix::from_matrix(&cov),
    ))
}

/// Moments and their ω-derivatives with base step `h`: central differences at
/// `h` and `h/2`, combined as `(4 D(h/2) − D(h))/3`.
pub fn qbm_derivatives_with_step(
    p: &QbmParams,
    s0: &GaussianState,
    t: f64,
    h: f64,
    opts: QbmOptions,
) -> Result<MomentDerivatives> {
    p.validate()?;
    check_time(t)?;
    if !(h > 0.0 && h < p.omega) {
        return Err(invalid("h", format!("must lie in (0, omega), got {h}")));
    }
    let central = |step: f64| -> Result<(Vec2, Mat2)> {
        let (mp, cp) = moments(&p.with_omega(p.omega + step), s0, t, opts)?;
        let (mm, cm) = moments(&p.with_omega(p.omega - step), s0, t, opts)?;
        Ok(((mp - mm) / (2.0 * step), (cp - cm) / (2.0 * step)))
    };
    let (u1, c1) = central(h)?;
    let (u2, c2) = central(0.5 * h)?;
    let (mean, cov) = moments(p, s0, t, opts)?;
    let cov_deriv = (c2 * 4.0 - c1) / 3.0;
    Ok(MomentDerivatives {
        t,
        mean: MeanVector::from_vector(&mean),
        cov: CovarianceMatrix::from_matrix(&cov),
        mean_deriv: (u2 * 4.0 - u1) / 3.0,
        cov_deriv: (cov_deriv + cov_deriv.transpose()) * 0.5,
    })
}

pub fn qbm_derivatives(p: &QbmParams, s0: &GaussianState, t: f64, opts: QbmOptions) -> Result<MomentDerivatives> {
    qbm_derivatives_with_step(p, s0, t, FD_RELATIVE_STEP * p.omega, opts)
}

pub fn qfi_qbm_with_step(p: &QbmParams, s0: &GaussianState, t: f64, h: f64, opts: QbmOptions) -> Result<f64> {
    let m = qbm_derivatives_with_step(p, s0, t, h, opts)?;
    qfi_gaussian(&m.mean_deriv, &m.cov, &m.cov_deriv)
}

pub fn qfi_qbm(p: &QbmParams, s0: &GaussianState, t: f64, opts: QbmOptions) -> Result<f64> {
    qfi_qbm_with_step(p, s0, t, FD_RELATIVE_STEP * p.omega, opts)
}

pub fn cfi_qbm(p: &QbmParams, s0: &GaussianState, t: f64, d: DyneSetting, opts: QbmOptions) -> Result<CfiResult> {
    let m = qbm_derivatives(p, s0, t, opts)?;
    Ok(CfiResult {
        t,
        setting: d,
        cfi: cfi_general_dyne(&m.mean_deriv, &m.cov, &m.cov_deriv, d)?,
    })
}

pub fn optimize_dyne_qbm(p: &QbmParams, s0: &GaussianState, t: f64, opts: QbmOptions) -> Result<CfiResult> {
    let m = qbm_derivatives(p, s0, t, opts)?;
    let best = optimize_dyne(&m.mean_deriv, &m.cov, &m.cov_deriv)?;
    Ok(CfiResult {
        t,
        setting: best.setting,
        cfi: best.cfi,
    })
}
