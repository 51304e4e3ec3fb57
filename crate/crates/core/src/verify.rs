//! The verification batch: every analytic pipeline against its oracle.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dyne::{cfi_general_dyne, saturation_times, DyneSetting};
use crate::error::Result;
use crate::gaussian::{GaussianState, Mat2};
use crate::markovian::{moments_with_derivatives, propagator, SystemParams};
use crate::oracle::{
    fd_omega, fd_omega_markovian, fd_omega_plain, likelihood_curvature_cfi, nested_quadrature_coefficients,
    ode_moments, ode_propagator, trapezoid, OracleReport,
};
use crate::qbm::{
    delta_of_t, gamma_of_t, memory_kernels, qfi_qbm_with_step, MeanDecay, QbmOptions, QbmParams, FD_RELATIVE_STEP,
};
use crate::qfi::{qfi_closed_beta_zero, qfi_markovian};

pub const PROPAGATOR_TOL: f64 = 1e-8;
pub const MEAN_TOL: f64 = 1e-8;
pub const COVARIANCE_TOL: f64 = 1e-7;
pub const DERIVATIVE_TOL: f64 = 1e-6;
pub const GAMMA_TOL: f64 = 1e-6;
pub const DELTA_TOL: f64 = 1e-2;
pub const KERNEL_TOL: f64 = 1e-8;
pub const CURVATURE_TOL: f64 = 1e-4;
pub const SATURATION_TOL: f64 = 1e-6;
pub const CLOSED_FORM_TOL: f64 = 1e-9;
pub const FD_CONVERGENCE_TOL: f64 = 1e-5;
pub const ORDER_TOL: f64 = 0.05;

/// Step of the RK4 oracle in the moment comparisons.
pub const ODE_STEP: f64 = 1e-4;

/// Number of randomly drawn bath configurations.
pub const RANDOM_BATH_SAMPLES: usize = 20;

const SEED: u64 = 0x6761_7573_7366_6973;

fn flat(m: &Mat2) -> [f64; 4] {
    [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]
}

fn squeezed_fig1() -> SystemParams {
    SystemParams::unitary(2.1)
        .with_beta_cartesian(0.0, -0.5)
        .with_alpha(1.0, FRAC_PI_2)
        .with_bath(0.05, 0.1)
}

fn optdyne() -> SystemParams {
    SystemParams::unitary(2.1)
        .with_beta_cartesian(0.3, -0.5)
        .with_alpha(1.0, FRAC_PI_2)
        .with_bath(0.05, 0.1)
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

fn markovian_reports(out: &mut Vec<OracleReport>) -> Result<()> {
    for (label, p) in [("squeezed", squeezed_fig1()), ("optdyne", optdyne())] {
        let s0 = p.initial_state();
        let t = 1.0;
        out.push(OracleReport::compare_slices(
            format!("propagator[{label},t=1]"),
            &flat(&propagator(&p, t)),
            &flat(&ode_propagator(&p, t, ODE_STEP)?),
            PROPAGATOR_TOL,
        ));
        let m = moments_with_derivatives(&p, &s0, t)?;
        let ode = ode_moments(&p, &s0, t, ODE_STEP)?;
        out.push(OracleReport::compare_slices(
            format!("mean[{label},t=1]"),
            m.mean.as_vector().as_slice(),
            ode.mean.as_vector().as_slice(),
            MEAN_TOL,
        ));
        out.push(OracleReport::compare_slices(
            format!("covariance[{label},t=1]"),
            &flat(m.cov.matrix()),
            &flat(ode.cov.matrix()),
            COVARIANCE_TOL,
        ));

        for t in [1.0, 5.0] {
            let m = moments_with_derivatives(&p, &s0, t)?;
            let (u, big_sigma) = fd_omega_markovian(&p, &s0, t, FD_RELATIVE_STEP * p.omega, 1e-3)?;
            out.push(OracleReport::compare_slices(
                format!("mean_omega_derivative[{label},t={t}]"),
                m.mean_deriv.as_slice(),
                u.as_slice(),
                DERIVATIVE_TOL,
            ));
            out.push(OracleReport::compare_slices(
                format!("cov_omega_derivative[{label},t={t}]"),
                &flat(&m.cov_deriv),
                &flat(&big_sigma),
                DERIVATIVE_TOL,
            ));
        }
    }

    // convergence orders
    let p = optdyne();
    let s0 = p.initial_state();
    let exact = propagator(&p, 1.0);
    let steps = [0.04, 0.02, 0.01];
    let errors: Vec<f64> = steps
        .iter()
        .map(|&dt| ode_propagator(&p, 1.0, dt).map(|y| (y - exact).norm()))
        .collect::<Result<_>>()?;
    out.push(OracleReport::compare(
        "rk4_order",
        4.0,
        log_slope(&steps, &errors),
        ORDER_TOL,
    ));

    let m = moments_with_derivatives(&p, &s0, 2.0)?;
    let moments_at = |w: f64| -> Result<(crate::gaussian::Vec2, Mat2)> {
        let q = p.with_omega(w);
        let m = moments_with_derivatives(&q, &s0, 2.0)?;
        Ok((m.mean.as_vector(), *m.cov.matrix()))
    };
    let hs = [2e-2, 1e-2, 5e-3];
    let fd_errors: Vec<f64> = hs
        .iter()
        .map(|&h| fd_omega_plain(moments_at, p.omega, h).map(|(u, _)| (u - m.mean_deriv).norm()))
        .collect::<Result<_>>()?;
    out.push(OracleReport::compare(
        "central_difference_order",
        2.0,
        log_slope(&hs, &fd_errors),
        ORDER_TOL,
    ));
    let (u_rich, _) = fd_omega(moments_at, p.omega, 1e-3)?;
    out.push(OracleReport::compare_slices(
        "richardson_mean_derivative[optdyne,t=2]",
        m.mean_deriv.as_slice(),
        u_rich.as_slice(),
        DERIVATIVE_TOL,
    ));

    let unsqueezed = SystemParams::unitary(2.1)
        .with_alpha(1.0, FRAC_PI_2)
        .with_bath(0.05, 0.1);
    for t in [1.0, 10.0, 40.0] {
        out.push(OracleReport::compare(
            format!("qfi_beta_zero_closed_form[t={t}]"),
            qfi_closed_beta_zero(&unsqueezed, t)?,
            qfi_markovian(&unsqueezed, &unsqueezed.initial_state(), t)?.qfi,
            CLOSED_FORM_TOL,
        ));
    }
    Ok(())
}

fn dyne_reports(out: &mut Vec<OracleReport>) -> Result<()> {
    let p = optdyne();
    let m = moments_with_derivatives(&p, &p.initial_state(), 1.0)?;
    for (label, setting, seed) in [
        ("heterodyne", DyneSetting::Heterodyne, Mat2::identity()),
        (
            "z=3",
            DyneSetting::General { z: 3.0 },
            Mat2::new(3.0, 0.0, 0.0, 1.0 / 3.0),
        ),
    ] {
        let analytic = cfi_general_dyne(&m.mean_deriv, &m.cov, &m.cov_deriv, setting)?;
        let sigma_out = (m.cov.matrix() + seed) * 0.5;
        let oracle = likelihood_curvature_cfi(&sigma_out, &m.mean_deriv, &(m.cov_deriv * 0.5))?;
        out.push(OracleReport::compare(
            format!("cfi_likelihood_curvature[{label},t=1]"),
            analytic,
            oracle,
            CURVATURE_TOL,
        ));
    }

    let unsqueezed = SystemParams::unitary(2.1)
        .with_alpha(1.0, FRAC_PI_2)
        .with_bath(0.05, 0.1);
    let s0 = unsqueezed.initial_state();
    for st in saturation_times(&unsqueezed, 4)? {
        let m = moments_with_derivatives(&unsqueezed, &s0, st.t)?;
        out.push(OracleReport::compare(
            format!("saturation[m={}]", st.m),
            qfi_closed_beta_zero(&unsqueezed, st.t)?,
            cfi_general_dyne(&m.mean_deriv, &m.cov, &m.cov_deriv, st.axis.setting())?,
            SATURATION_TOL,
        ));
    }
    Ok(())
}

fn qbm_reports(out: &mut Vec<OracleReport>) -> Result<()> {
    let fig2 = QbmParams::new(7.0, 0.3, 1.0, 1000.0);
    let c = nested_quadrature_coefficients(&fig2, 1.0)?;
    out.push(OracleReport::compare(
        "gamma_nested[fig2,t=1]",
        gamma_of_t(&fig2, 1.0),
        c.gamma,
        GAMMA_TOL,
    ));
    let c = nested_quadrature_coefficients(&fig2, 0.5)?;
    out.push(OracleReport::compare(
        "delta_nested[fig2,t=0.5]",
        delta_of_t(&fig2, 0.5),
        c.delta,
        DELTA_TOL,
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for i in 0..RANDOM_BATH_SAMPLES {
        let p = QbmParams::new(
            rng.random_range(0.5..8.0),
            rng.random_range(0.1..0.5),
            rng.random_range(0.5..3.0),
            1000.0,
        );
        let t = rng.random_range(0.1..4.0);
        let c = nested_quadrature_coefficients(&p, t)?;
        let tag = format!(
            "[{i}:omega={:.3},xi={:.3},lambda_c={:.3},t={:.3}]",
            p.omega, p.xi, p.lambda_c, t
        );
        out.push(OracleReport::compare(
            format!("gamma_nested{tag}"),
            gamma_of_t(&p, t),
            c.gamma,
            GAMMA_TOL,
        ));
        out.push(OracleReport::compare(
            format!("delta_nested{tag}"),
            delta_of_t(&p, t),
            c.delta,
            DELTA_TOL,
        ));
    }

    let k = memory_kernels(&fig2, 2.0)?;
    out.push(OracleReport::compare(
        "big_gamma_trapezoid[fig2,t=2]",
        k.big_gamma,
        2.0 * trapezoid(|s| gamma_of_t(&fig2, s), 0.0, 2.0, 200_000),
        KERNEL_TOL,
    ));

    let s0: GaussianState = crate::gaussian::coherent_state(0.1, 0.0);
    let h = FD_RELATIVE_STEP * fig2.omega;
    for (label, mean_decay) in [("half", MeanDecay::Half), ("full", MeanDecay::Full)] {
        let opts = QbmOptions {
            mean_decay,
            ..Default::default()
        };
        for t in [0.7, 3.0, 8.0] {
            out.push(OracleReport::compare(
                format!("qfi_qbm_step_halving[mean_decay={label},t={t}]"),
                qfi_qbm_with_step(&fig2, &s0, t, h, opts)?,
                qfi_qbm_with_step(&fig2, &s0, t, 0.5 * h, opts)?,
                FD_CONVERGENCE_TOL,
            ));
        }
    }
    Ok(())
}

/// Runs the whole batch. Rows are returned in a fixed order.
pub fn run_verification() -> Result<Vec<OracleReport>> {
    let mut out = Vec::new();
    markovian_reports(&mut out)?;
    dyne_reports(&mut out)?;
    qbm_reports(&mut out)?;
    Ok(out)
}
