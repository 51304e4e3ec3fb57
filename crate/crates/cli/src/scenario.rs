//! Scenario execution: time grids and sweeps in, tables out.

use rayon::prelude::*;

use gaussfisher_core::dyne::{cfi_from_moments, optimize_dyne, DyneOptimum, DyneSetting};
use gaussfisher_core::gaussian::{coherent_state, GaussianState};
use gaussfisher_core::markovian::{moments_with_derivatives, trajectory, MomentDerivatives, SystemParams};
use gaussfisher_core::optim::golden_section_max;
use gaussfisher_core::qbm::{qbm_derivatives, rate_sample, QbmOptions, QbmParams, Rates};
use gaussfisher_core::qfi::{qfi_from_moments, qfi_gaussian};
use gaussfisher_core::verify::run_verification;

use crate::config::{Model, Params, ScenarioConfig, ScenarioKind};
use crate::error::{CliError, Result};

pub const FISHER_COLUMNS: [&str; 10] = [
    "series",
    "t",
    "qfi",
    "cfi_homodyne_q",
    "cfi_homodyne_p",
    "cfi_heterodyne",
    "cfi_optimal",
    "z_optimal",
    "rate_plus",
    "rate_minus",
];

pub const GAP_COLUMNS: [&str; 4] = ["beta_I", "qfi_opt_over_t", "cfi_opt_over_t", "relative_gap"];

pub const REPORT_COLUMNS: [&str; 6] = ["quantity", "analytic", "oracle", "rel_error", "tolerance", "pass"];

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Empty,
    Num(f64),
    Text(String),
    Bool(bool),
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

/// Header plus rows, in output order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// One time point of a Fisher series; `None` marks a column the scenario
/// does not populate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FisherRow {
    pub t: f64,
    pub qfi: Option<f64>,
    pub cfi_homodyne_q: Option<f64>,
    pub cfi_homodyne_p: Option<f64>,
    pub cfi_heterodyne: Option<f64>,
    pub cfi_optimal: Option<f64>,
    pub z_optimal: Option<f64>,
    pub rate_plus: Option<f64>,
    pub rate_minus: Option<f64>,
}

impl FisherRow {
    fn cells(&self, series: &str) -> Vec<Cell> {
        vec![
            Cell::Text(series.to_string()),
            Cell::Num(self.t),
            self.qfi.into(),
            self.cfi_homodyne_q.into(),
            self.cfi_homodyne_p.into(),
            self.cfi_heterodyne.into(),
            self.cfi_optimal.into(),
            self.z_optimal.into(),
            self.rate_plus.into(),
            self.rate_minus.into(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub rows: Vec<FisherRow>,
}

/// What to compute at each time point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Columns {
    dyne: bool,
    optimal: bool,
    rates: bool,
}

const QFI_ONLY: Columns = Columns {
    dyne: false,
    optimal: false,
    rates: false,
};
const ALL: Columns = Columns {
    dyne: true,
    optimal: true,
    rates: true,
};

fn fisher_row(m: &MomentDerivatives, qfi: f64, cols: Columns) -> gaussfisher_core::Result<FisherRow> {
    let mut row = FisherRow {
        t: m.t,
        qfi: Some(qfi),
        ..Default::default()
    };
    if cols.dyne {
        row.cfi_homodyne_q = Some(cfi_from_moments(m, DyneSetting::HomodyneQ)?);
        row.cfi_homodyne_p = Some(cfi_from_moments(m, DyneSetting::HomodyneP)?);
        row.cfi_heterodyne = Some(cfi_from_moments(m, DyneSetting::Heterodyne)?);
    }
    if cols.optimal {
        let best = optimize_dyne(&m.mean_deriv, &m.cov, &m.cov_deriv)?;
        row.cfi_optimal = Some(best.cfi);
        row.z_optimal = Some(best.setting.z());
    }
    Ok(row)
}

fn with_context<T>(r: gaussfisher_core::Result<T>, scenario: ScenarioKind, series: &str, t: f64) -> Result<T> {
    r.map_err(CliError::numeric(format!(
        "scenario {scenario}, series {series}, t={t}"
    )))
}

fn markovian_series(
    name: &str,
    p: &SystemParams,
    times: &[f64],
    cols: Columns,
    scenario: ScenarioKind,
) -> Result<Series> {
    let s0 = p.initial_state();
    let moments =
        trajectory(p, &s0, times).map_err(CliError::numeric(format!("scenario {scenario}, series {name}")))?;
    let skip = p.is_unsqueezed();
    let rows = moments
        .par_iter()
        .map(|m| {
            let r = qfi_from_moments(m, skip).and_then(|q| fisher_row(m, q, cols));
            with_context(r, scenario, name, m.t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Series {
        name: name.to_string(),
        rows,
    })
}

fn qbm_series(
    name: &str,
    p: &QbmParams,
    s0: &GaussianState,
    times: &[f64],
    opts: QbmOptions,
    cols: Columns,
    scenario: ScenarioKind,
) -> Result<Series> {
    let rows = times
        .par_iter()
        .map(|&t| {
            let r = qbm_derivatives(p, s0, t, opts).and_then(|m| {
                let q = qfi_gaussian(&m.mean_deriv, &m.cov, &m.cov_deriv)?;
                let mut row = fisher_row(&m, q, cols)?;
                if cols.rates {
                    let s = rate_sample(p, t);
                    row.rate_plus = Some(s.rate_plus);
                    row.rate_minus = Some(s.rate_minus);
                }
                Ok(row)
            });
            with_context(r, scenario, name, t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Series {
        name: name.to_string(),
        rows,
    })
}

fn rates_series(name: &str, p: &QbmParams, times: &[f64]) -> Series {
    let rows = times
        .par_iter()
        .map(|&t| {
            let s = rate_sample(p, t);
            FisherRow {
                t,
                rate_plus: Some(s.rate_plus),
                rate_minus: Some(s.rate_minus),
                ..Default::default()
            }
        })
        .collect();
    Series {
        name: name.to_string(),
        rows,
    }
}

/// Closed-system reference with the same initial state.
fn unitary_series(p: &Params, times: &[f64], scenario: ScenarioKind) -> Result<Series> {
    let sys = SystemParams::unitary(p.omega).with_alpha(p.alpha_mod, p.alpha_arg);
    markovian_series("unitary", &sys, times, QFI_ONLY, scenario)
}

/// Every series of one parameter set.
pub fn run_series(cfg: &ScenarioConfig, p: &Params) -> Result<Vec<Series>> {
    let kind = cfg.scenario;
    let times = cfg.grid.points();
    let qbm = p.qbm();
    let s0 = coherent_state(p.alpha_mod, p.alpha_arg);
    let opts = cfg.qbm_options;
    let stationary = QbmOptions {
        rates: Rates::Stationary,
        ..opts
    };
    let series = match kind {
        ScenarioKind::Fig1a | ScenarioKind::Fig1b => {
            let dyne = Columns {
                dyne: true,
                optimal: false,
                rates: false,
            };
            vec![markovian_series("markovian", &p.system(), &times, dyne, kind)?]
        }
        ScenarioKind::Fig2 => vec![rates_series("non_markovian", &qbm, &times)],
        ScenarioKind::Fig3a | ScenarioKind::Fig3b => vec![
            unitary_series(p, &times, kind)?,
            qbm_series("non_markovian", &qbm, &s0, &times, opts, QFI_ONLY, kind)?,
            qbm_series("markovian", &qbm, &s0, &times, stationary, QFI_ONLY, kind)?,
        ],
        ScenarioKind::Fig4 => {
            let squeezed = p.system();
            let unsqueezed = SystemParams {
                beta_mod: 0.0,
                ..squeezed
            };
            vec![
                markovian_series("markovian_squeezed", &squeezed, &times, QFI_ONLY, kind)?,
                markovian_series("markovian_unsqueezed", &unsqueezed, &times, QFI_ONLY, kind)?,
                qbm_series("non_markovian", &qbm, &s0, &times, opts, QFI_ONLY, kind)?,
            ]
        }
        ScenarioKind::FigOptdyne | ScenarioKind::Fig5Gap => {
            vec![markovian_series("markovian", &p.system(), &times, ALL, kind)?]
        }
        ScenarioKind::Fig6QbmDyne => vec![qbm_series("non_markovian", &qbm, &s0, &times, opts, ALL, kind)?],
        ScenarioKind::Custom => match cfg.model {
            Model::Markovian => vec![markovian_series("markovian", &p.system(), &times, ALL, kind)?],
            Model::Qbm => vec![qbm_series("non_markovian", &qbm, &s0, &times, opts, ALL, kind)?],
        },
        ScenarioKind::Verify => Vec::new(),
    };
    Ok(series)
}

/// Long-format Fisher table, with a leading sweep column when sweeping.
pub fn fisher_table(cfg: &ScenarioConfig) -> Result<Table> {
    let mut header: Vec<String> = FISHER_COLUMNS.iter().map(|s| s.to_string()).collect();
    if let Some(s) = &cfg.sweep {
        header.insert(0, s.field.clone());
    }
    let mut rows = Vec::new();
    for (value, p) in cfg.sweep_params()? {
        for series in run_series(cfg, &p)? {
            for r in &series.rows {
                let mut cells = r.cells(&series.name);
                if let Some(v) = value {
                    cells.insert(0, Cell::Num(v));
                }
                rows.push(cells);
            }
        }
    }
    Ok(Table { header, rows })
}

/// Time-maximized Fisher information of one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapPoint {
    pub qfi_max: f64,
    pub qfi_t: f64,
    pub cfi_max: f64,
    pub cfi_t: f64,
}

impl GapPoint {
    pub fn relative_gap(&self) -> f64 {
        if self.qfi_max > 0.0 {
            (self.qfi_max - self.cfi_max) / self.qfi_max
        } else {
            0.0
        }
    }
}

const REFINE_TOL: f64 = 1e-9;

fn refine<F>(f: F, times: &[f64], i: usize, grid_value: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let lo = times[i.saturating_sub(1)];
    let hi = times[(i + 1).min(times.len() - 1)];
    let m = golden_section_max(f, lo, hi, REFINE_TOL);
    if m.value > grid_value {
        (m.x, m.value)
    } else {
        (times[i], grid_value)
    }
}

/// Maximizes QFI and dyne-optimal CFI over the time grid, then refines both
/// maxima between neighbouring grid points.
///
/// Since CFI ≤ QFI pointwise, the dyne optimization visits grid points in
/// order of decreasing QFI and stops once the QFI drops below the best CFI
/// found so far.
pub fn time_maximized(p: &SystemParams, times: &[f64]) -> gaussfisher_core::Result<GapPoint> {
    let s0 = p.initial_state();
    let skip = p.is_unsqueezed();
    let moments = trajectory(p, &s0, times)?;
    let qfi = moments
        .par_iter()
        .map(|m| qfi_from_moments(m, skip))
        .collect::<gaussfisher_core::Result<Vec<f64>>>()?;

    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| qfi[b].total_cmp(&qfi[a]).then(a.cmp(&b)));

    let mut best: Option<(usize, f64)> = None;
    for chunk in order.chunks(256) {
        if let Some((_, c)) = best {
            if qfi[chunk[0]] <= c {
                break;
            }
        }
        let found = chunk
            .par_iter()
            .map(|&i| {
                let m = &moments[i];
                optimize_dyne(&m.mean_deriv, &m.cov, &m.cov_deriv).map(|o: DyneOptimum| (i, o.cfi))
            })
            .collect::<gaussfisher_core::Result<Vec<_>>>()?;
        for (i, c) in found {
            match best {
                Some((bi, bc)) if c < bc || (c == bc && i > bi) => {}
                _ => best = Some((i, c)),
            }
        }
    }
    let (ci, cfi_grid) = best.unwrap_or((0, 0.0));
    let qi = order[0];

    let mut failure = None;
    let mut eval = |t: f64, optimal: bool| -> f64 {
        let r = moments_with_derivatives(p, &s0, t).and_then(|m| {
            if optimal {
                optimize_dyne(&m.mean_deriv, &m.cov, &m.cov_deriv).map(|o| o.cfi)
            } else {
                qfi_from_moments(&m, skip)
            }
        });
        r.unwrap_or_else(|e| {
            failure.get_or_insert(e);
            f64::NEG_INFINITY
        })
    };
    let (qfi_t, qfi_max) = refine(|t| eval(t, false), times, qi, qfi[qi]);
    let (cfi_t, cfi_max) = refine(|t| eval(t, true), times, ci, cfi_grid);
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(GapPoint {
        qfi_max,
        qfi_t,
        cfi_max,
        cfi_t,
    })
}

/// One row per sweep value: the time-maximized QFI and CFI and their gap.
pub fn gap_table(cfg: &ScenarioConfig) -> Result<Table> {
    let times = cfg.grid.points();
    let runs = cfg.sweep_params()?;
    let points = runs
        .par_iter()
        .map(|(value, p)| {
            time_maximized(&p.system(), &times).map_err(CliError::numeric(format!(
                "scenario {}, sweep value {}",
                cfg.scenario,
                value.map_or("none".to_string(), |v| v.to_string())
            )))
        })
        .collect::<Result<Vec<_>>>()?;
    let label = match &cfg.sweep {
        Some(s) if s.field == "beta_i" => GAP_COLUMNS[0].to_string(),
        Some(s) => s.field.clone(),
        None => GAP_COLUMNS[0].to_string(),
    };
    let mut header = vec![label];
    header.extend(GAP_COLUMNS[1..].iter().map(|s| s.to_string()));
    let rows = runs
        .iter()
        .zip(&points)
        .map(|((value, p), g)| {
            // without a sweep the row is labelled by the current β_I = −Im β
            let v = value.unwrap_or(-p.beta_mod * p.beta_arg.sin());
            vec![
                Cell::Num(v),
                Cell::Num(g.qfi_max),
                Cell::Num(g.cfi_max),
                Cell::Num(g.relative_gap()),
            ]
        })
        .collect();
    Ok(Table { header, rows })
}

pub fn verification_table() -> Result<(Table, usize)> {
    let reports = run_verification().map_err(CliError::numeric("verification batch"))?;
    let failed = reports.iter().filter(|r| !r.pass).count();
    let rows = reports
        .into_iter()
        .map(|r| {
            vec![
                Cell::Text(r.quantity),
                Cell::Num(r.analytic),
                Cell::Num(r.oracle),
                Cell::Num(r.rel_error),
                Cell::Num(r.tolerance),
                Cell::Bool(r.pass),
            ]
        })
        .collect();
    Ok((
        Table {
            header: REPORT_COLUMNS.iter().map(|s| s.to_string()).collect(),
            rows,
        },
        failed,
    ))
}

/// Runs a validated configuration. The second value counts failed
/// verification rows and is zero for every other scenario.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<(Table, usize)> {
    cfg.validate()?;
    match cfg.scenario {
        ScenarioKind::Verify => verification_table(),
        ScenarioKind::Fig5Gap => Ok((gap_table(cfg)?, 0)),
        _ => Ok((fisher_table(cfg)?, 0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::TimeGrid;

    fn small(kind: ScenarioKind, end: f64, steps: usize) -> ScenarioConfig {
        let mut c = ScenarioConfig::defaults(kind);
        c.grid = TimeGrid { start: 0.0, end, steps };
        c
    }

    #[test]
    fn fig1a_unsqueezed_curve_is_quadratic() {
        let c = small(ScenarioKind::Fig1a, 10.0, 21);
        let t = fisher_table(&c).unwrap();
        assert_eq!(t.header[0], "beta_mod");
        assert_eq!(t.rows.len(), 42);
        for row in t.rows.iter().take(21) {
            let (Cell::Num(time), Cell::Num(q)) = (&row[2], &row[3]) else {
                panic!("missing values")
            };
            assert!((q - 4.0 * time * time).abs() <= 1e-12 * (1.0 + q));
        }
    }

    #[test]
    fn fig2_populates_rates_only() {
        let c = small(ScenarioKind::Fig2, 10.0, 50);
        let t = fisher_table(&c).unwrap();
        let row = &t.rows[10];
        assert_eq!(row[2], Cell::Empty);
        assert!(matches!(row[8], Cell::Num(_)) && matches!(row[9], Cell::Num(_)));
    }

    #[test]
    fn fig3_has_three_series() {
        let c = small(ScenarioKind::Fig3b, 2.0, 5);
        let t = fisher_table(&c).unwrap();
        let names: Vec<_> = t.rows.iter().map(|r| r[0].clone()).collect();
        assert_eq!(names.len(), 15);
        assert_eq!(names[0], Cell::Text("unitary".into()));
        assert_eq!(names[14], Cell::Text("markovian".into()));
    }

    #[test]
    fn optimum_dominates_named_settings() {
        let c = small(ScenarioKind::FigOptdyne, 20.0, 41);
        let t = fisher_table(&c).unwrap();
        for row in &t.rows {
            let num = |i: usize| match row[i] {
                Cell::Num(v) => v,
                _ => panic!("column {i} empty"),
            };
            let best = num(3).max(num(4)).max(num(5));
            assert!(num(6) >= best - 1e-12 * (1.0 + best));
            assert!(num(6) <= num(2) * (1.0 + 1e-9) + 1e-12);
        }
    }

    #[test]
    fn gap_is_small_without_squeezing() {
        // CFI touches QFI only at discrete saturation times, so the gap is
        // the QFI drop between the peak and the nearest such time
        let p = SystemParams::unitary(2.1)
            .with_alpha(1.0, std::f64::consts::FRAC_PI_2)
            .with_bath(0.05, 0.0);
        let times = gaussfisher_core::optim::linspace(0.0, 80.0, 801);
        let g = time_maximized(&p, &times).unwrap();
        assert!(g.relative_gap() >= 0.0);
        assert!(g.relative_gap() < 1e-4, "{}", g.relative_gap());
        assert!((g.qfi_t - 40.0).abs() < 1e-4, "{}", g.qfi_t);
    }
}
