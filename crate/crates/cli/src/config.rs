//! Flat `key = value` scenario configuration.
//!
//! Lines are `key = value` (a `:` separator is accepted too); `#` starts a
//! comment. Command-line `--set key=value` overrides are applied after the
//! file, in order. Complex parameters are polar (`beta_mod`, `beta_arg`,
//! `alpha_mod`, `alpha_arg`); `beta_re`/`beta_im` are converted to polar form
//! as they are read.
//!
//! A sweep is written `sweep = field: v1, v2, ...`. Any numeric field can be
//! swept, plus `beta_i`, which sets `β = −iβ_I`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use gaussfisher_core::markovian::SystemParams;
use gaussfisher_core::qbm::{Diffusion, MeanDecay, QbmOptions, QbmParams};

use crate::error::{config, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    Fig1a,
    Fig1b,
    Fig2,
    Fig3a,
    Fig3b,
    Fig4,
    FigOptdyne,
    Fig5Gap,
    Fig6QbmDyne,
    Verify,
    Custom,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 11] = [
        ScenarioKind::Fig1a,
        ScenarioKind::Fig1b,
        ScenarioKind::Fig2,
        ScenarioKind::Fig3a,
        ScenarioKind::Fig3b,
        ScenarioKind::Fig4,
        ScenarioKind::FigOptdyne,
        ScenarioKind::Fig5Gap,
        ScenarioKind::Fig6QbmDyne,
        ScenarioKind::Verify,
        ScenarioKind::Custom,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Fig1a => "fig1a",
            ScenarioKind::Fig1b => "fig1b",
            ScenarioKind::Fig2 => "fig2",
            ScenarioKind::Fig3a => "fig3a",
            ScenarioKind::Fig3b => "fig3b",
            ScenarioKind::Fig4 => "fig4",
            ScenarioKind::FigOptdyne => "fig_optdyne",
            ScenarioKind::Fig5Gap => "fig5_gap",
            ScenarioKind::Fig6QbmDyne => "fig6_qbm_dyne",
            ScenarioKind::Verify => "verify",
            ScenarioKind::Custom => "custom",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ScenarioKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = ScenarioKind::ALL.iter().map(|k| k.name()).collect();
                format!("unknown scenario `{s}` (expected one of {})", names.join(", "))
            })
    }
}

/// Dynamics used by the `custom` scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Markovian,
    Qbm,
}

/// Every physical parameter any scenario reads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub omega: f64,
    pub beta_mod: f64,
    pub beta_arg: f64,
    pub alpha_mod: f64,
    pub alpha_arg: f64,
    pub gamma: f64,
    pub n_th: f64,
    pub xi: f64,
    pub lambda_c: f64,
    pub temp_ratio: f64,
}

pub const NUMERIC_FIELDS: [&str; 14] = [
    "omega",
    "beta_mod",
    "beta_arg",
    "beta_re",
    "beta_im",
    "beta_i",
    "alpha_mod",
    "alpha_arg",
    "gamma",
    "n_th",
    "xi",
    "lambda_c",
    "temp_ratio",
    "t_start",
];

impl Params {
    fn set_polar_beta(&mut self, re: f64, im: f64) {
        self.beta_mod = re.hypot(im);
        self.beta_arg = if self.beta_mod == 0.0 { 0.0 } else { im.atan2(re) };
    }

    /// Assigns one physical field; `false` if `key` is not one.
    pub fn set(&mut self, key: &str, v: f64) -> bool {
        let (re, im) = (self.beta_mod * self.beta_arg.cos(), self.beta_mod * self.beta_arg.sin());
        match key {
            "omega" => self.omega = v,
            "beta_mod" => self.beta_mod = v,
            "beta_arg" => self.beta_arg = v,
            "beta_re" => self.set_polar_beta(v, im),
            "beta_im" => self.set_polar_beta(re, v),
            "beta_i" => self.set_polar_beta(0.0, -v),
            "alpha_mod" => self.alpha_mod = v,
            "alpha_arg" => self.alpha_arg = v,
            "gamma" => self.gamma = v,
            "n_th" => self.n_th = v,
            "xi" => self.xi = v,
            "lambda_c" => self.lambda_c = v,
            "temp_ratio" => self.temp_ratio = v,
            _ => return false,
        }
        true
    }

    pub fn system(&self) -> SystemParams {
        SystemParams {
            omega: self.omega,
            beta_mod: self.beta_mod,
            beta_arg: self.beta_arg,
            alpha_mod: self.alpha_mod,
            alpha_arg: self.alpha_arg,
            gamma: self.gamma,
            n_th: self.n_th,
        }
    }

    pub fn qbm(&self) -> QbmParams {
        QbmParams::new(self.omega, self.xi, self.lambda_c, self.temp_ratio)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub field: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn points(&self) -> Vec<f64> {
        gaussfisher_core::optim::linspace(self.start, self.end, self.steps)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub params: Params,
    pub grid: TimeGrid,
    pub sweep: Option<Sweep>,
    pub output_path: Option<PathBuf>,
    pub model: Model,
    pub qbm_options: QbmOptions,
}

pub const DEFAULT_STEPS: usize = 2000;

impl ScenarioConfig {
    /// Captioned defaults for `kind`.
    pub fn defaults(kind: ScenarioKind) -> Self {
        let markovian = Params {
            omega: 2.1,
            beta_mod: 0.0,
            beta_arg: 0.0,
            alpha_mod: 1.0,
            alpha_arg: FRAC_PI_2,
            gamma: 0.0,
            n_th: 0.0,
            xi: 0.3,
            lambda_c: 1.0,
            temp_ratio: 1000.0,
        };
        let qbm = Params {
            omega: 7.0,
            alpha_mod: 0.1,
            alpha_arg: 0.0,
            ..markovian
        };
        let grid = |end: f64| TimeGrid {
            start: 0.0,
            end,
            steps: DEFAULT_STEPS,
        };
        let beta_sweep = Some(Sweep {
            field: "beta_mod".into(),
            values: vec![0.0, 0.5],
        });
        let (params, grid, sweep, model) = match kind {
            ScenarioKind::Fig1a => (
                Params {
                    beta_arg: -FRAC_PI_2,
                    ..markovian
                },
                grid(10.0),
                beta_sweep,
                Model::Markovian,
            ),
            ScenarioKind::Fig1b => (
                Params {
                    beta_arg: -FRAC_PI_2,
                    gamma: 0.05,
                    n_th: 0.1,
                    ..markovian
                },
                grid(80.0),
                beta_sweep,
                Model::Markovian,
            ),
            ScenarioKind::Fig2 => (qbm, grid(10.0), None, Model::Qbm),
            ScenarioKind::Fig3a => (
                Params {
                    omega: 1.0,
                    lambda_c: 2.0,
                    ..qbm
                },
                grid(10.0),
                None,
                Model::Qbm,
            ),
            ScenarioKind::Fig3b | ScenarioKind::Fig6QbmDyne => (qbm, grid(10.0), None, Model::Qbm),
            ScenarioKind::Fig4 => (
                Params {
                    omega: 5.0,
                    beta_mod: 0.2,
                    beta_arg: 0.0,
                    alpha_mod: 0.025,
                    alpha_arg: 0.0,
                    gamma: 0.07,
                    n_th: 0.4,
                    xi: 0.3,
                    lambda_c: 1.0,
                    temp_ratio: 4.0,
                },
                grid(10.0),
                None,
                Model::Qbm,
            ),
            ScenarioKind::FigOptdyne => {
                let mut p = Params {
                    gamma: 0.05,
                    n_th: 0.1,
                    ..markovian
                };
                p.set_polar_beta(0.3, -0.5);
                (p, grid(60.0), None, Model::Markovian)
            }
            ScenarioKind::Fig5Gap => (
                Params {
                    gamma: 0.05,
                    n_th: 0.1,
                    ..markovian
                },
                TimeGrid {
                    start: 0.0,
                    end: 80.0,
                    steps: 80_001,
                },
                Some(Sweep {
                    field: "beta_i".into(),
                    values: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
                }),
                Model::Markovian,
            ),
            ScenarioKind::Verify | ScenarioKind::Custom => (markovian, grid(10.0), None, Model::Markovian),
        };
        Self {
            scenario: kind,
            params,
            grid,
            sweep,
            output_path: None,
            model,
            qbm_options: QbmOptions::default(),
        }
    }

    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let number = || -> Result<f64> {
            let v: f64 = value
                .parse()
                .map_err(|_| config(format!("field `{key}`: `{value}` is not a number")))?;
            if !v.is_finite() {
                return Err(config(format!("field `{key}`: must be finite, got {value}")));
            }
            Ok(v)
        };
        match key {
            "scenario" => {
                let kind: ScenarioKind = value
                    .parse()
                    .map_err(|e: String| config(format!("field `scenario`: {e}")))?;
                if kind != self.scenario {
                    return Err(config(format!(
                        "field `scenario`: config names `{kind}` but `{}` was requested",
                        self.scenario
                    )));
                }
            }
            "t_start" => self.grid.start = number()?,
            "t_end" => self.grid.end = number()?,
            "t_steps" => {
                self.grid.steps = value
                    .parse()
                    .map_err(|_| config(format!("field `t_steps`: `{value}` is not a non-negative integer")))?
            }
            "sweep" => self.sweep = parse_sweep(value)?,
            "out" => self.output_path = Some(PathBuf::from(value)),
            "model" => {
                self.model = match value {
                    "markovian" => Model::Markovian,
                    "qbm" => Model::Qbm,
                    _ => {
                        return Err(config(format!(
                            "field `model`: expected markovian or qbm, got `{value}`"
                        )))
                    }
                }
            }
            "mean_decay" => {
                self.qbm_options.mean_decay = match value {
                    "half" => MeanDecay::Half,
                    "full" => MeanDecay::Full,
                    _ => {
                        return Err(config(format!(
                            "field `mean_decay`: expected half or full, got `{value}`"
                        )))
                    }
                }
            }
            "diffusion" => {
                self.qbm_options.diffusion = match value {
                    "weak" => Diffusion::WeakCoupling,
                    "exact" => Diffusion::Exact,
                    _ => {
                        return Err(config(format!(
                            "field `diffusion`: expected weak or exact, got `{value}`"
                        )))
                    }
                }
            }
            _ => {
                let v = number().map_err(|e| {
                    if self.params.set(key, 0.0) || key == "t_start" {
                        e
                    } else {
                        config(format!("unknown field `{key}`"))
                    }
                })?;
                if !self.params.set(key, v) {
                    return Err(config(format!("unknown field `{key}`")));
                }
            }
        }
        Ok(())
    }

    /// Applies a config file's assignments.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = split_assignment(line)
                .ok_or_else(|| config(format!("line {}: expected `key = value`, got `{line}`", i + 1)))?;
            self.apply(key, value).map_err(|e| match e {
                crate::error::CliError::Config(m) => config(format!("line {}: {m}", i + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text =
            std::fs::read_to_string(path).map_err(|e| config(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    /// `key=value` from the command line.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| config(format!("--set expects key=value, got `{assignment}`")))?;
        self.apply(key, value)
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if !(g.start >= 0.0) {
            return Err(config(format!(
                "field `t_start`: must be non-negative, got {}",
                g.start
            )));
        }
        if !(g.end > g.start) {
            return Err(config(format!(
                "field `t_end`: must exceed t_start ({}), got {}",
                g.start, g.end
            )));
        }
        if g.steps < 2 {
            return Err(config(format!("field `t_steps`: must be at least 2, got {}", g.steps)));
        }
        let check = |p: &Params| -> Result<()> {
            let tag = |e: gaussfisher_core::Error| config(e.to_string());
            if self.uses_markovian() {
                p.system().validate().map_err(tag)?;
            }
            if self.uses_qbm() {
                p.qbm().validate().map_err(tag)?;
                if p.alpha_mod < 0.0 {
                    return Err(config(format!(
                        "field `alpha_mod`: must be non-negative, got {}",
                        p.alpha_mod
                    )));
                }
            }
            Ok(())
        };
        match &self.sweep {
            None => check(&self.params),
            Some(s) => {
                for p in self.sweep_params()? {
                    check(&p.1).map_err(|e| match e {
                        crate::error::CliError::Config(m) => config(format!("sweep over `{}`: {m}", s.field)),
                        other => other,
                    })?;
                }
                Ok(())
            }
        }
    }

    fn uses_markovian(&self) -> bool {
        match self.scenario {
            ScenarioKind::Fig1a
            | ScenarioKind::Fig1b
            | ScenarioKind::Fig4
            | ScenarioKind::FigOptdyne
            | ScenarioKind::Fig5Gap => true,
            ScenarioKind::Custom => self.model == Model::Markovian,
            _ => false,
        }
    }

    fn uses_qbm(&self) -> bool {
        match self.scenario {
            ScenarioKind::Fig2
            | ScenarioKind::Fig3a
            | ScenarioKind::Fig3b
            | ScenarioKind::Fig4
            | ScenarioKind::Fig6QbmDyne => true,
            ScenarioKind::Custom => self.model == Model::Qbm,
            _ => false,
        }
    }

    /// `(sweep value, parameters)` for every sweep entry, or the base
    /// parameters alone.
    pub fn sweep_params(&self) -> Result<Vec<(Option<f64>, Params)>> {
        match &self.sweep {
            None => Ok(vec![(None, self.params)]),
            Some(s) => s
                .values
                .iter()
                .map(|&v| {
                    let mut p = self.params;
                    if p.set(&s.field, v) {
                        Ok((Some(v), p))
                    } else {
                        Err(config(format!("field `sweep`: `{}` is not a sweepable field", s.field)))
                    }
                })
                .collect(),
        }
    }
}

fn split_assignment(line: &str) -> Option<(&str, &str)> {
    let idx = line.find(['=', ':'])?;
    let (k, v) = line.split_at(idx);
    let key = k.trim();
    if key.is_empty() {
        return None;
    }
    Some((key, v[1..].trim()))
}

fn parse_sweep(value: &str) -> Result<Option<Sweep>> {
    if value.is_empty() || value == "none" {
        return Ok(None);
    }
    let (field, list) = value
        .split_once(':')
        .ok_or_else(|| config(format!("field `sweep`: expected `field: v1, v2, ...`, got `{value}`")))?;
    let field = field.trim().to_string();
    let mut probe = ScenarioConfig::defaults(ScenarioKind::Custom).params;
    if !probe.set(&field, 0.0) {
        return Err(config(format!("field `sweep`: `{field}` is not a sweepable field")));
    }
    let values = list
        .split(',')
        .map(|v| {
            let v = v.trim();
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| config(format!("field `sweep`: `{v}` is not a finite number")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.is_empty() {
        return Err(config("field `sweep`: needs at least one value"));
    }
    Ok(Some(Sweep { field, values }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in ScenarioKind::ALL {
            assert_eq!(k.name().parse::<ScenarioKind>().unwrap(), k);
        }
        assert!("fig9".parse::<ScenarioKind>().is_err());
    }

    #[test]
    fn file_and_overrides() {
        let mut c = ScenarioConfig::defaults(ScenarioKind::Custom);
        c.apply_text("# comment\nomega = 3.5\nbeta_re = 0.3 # trailing\nbeta_im: -0.5\n\nt_end = 4\nt_steps = 11\n")
            .unwrap();
        c.apply_override("n_th=0.2").unwrap();
        assert_eq!(c.params.omega, 3.5);
        assert!((c.params.beta_mod - 0.34f64.sqrt()).abs() < 1e-15);
        assert!((c.params.beta_arg - (-0.5f64).atan2(0.3)).abs() < 1e-15);
        assert_eq!(c.params.n_th, 0.2);
        assert_eq!(c.grid.points().len(), 11);
        c.validate().unwrap();
    }

    #[test]
    fn errors_name_the_field() {
        let mut c = ScenarioConfig::defaults(ScenarioKind::Custom);
        let e = c.apply_text("omega = fast\n").unwrap_err().to_string();
        assert!(e.contains("omega") && e.contains("line 1"), "{e}");
        let e = c.apply_override("warp = 9").unwrap_err().to_string();
        assert!(e.contains("warp"), "{e}");
        assert!(c.apply_override("noequals").is_err());
        c.apply_override("omega=-1").unwrap();
        assert!(c.validate().unwrap_err().to_string().contains("omega"));
        let mut c = ScenarioConfig::defaults(ScenarioKind::Custom);
        c.apply_override("t_end=0").unwrap();
        assert!(c.validate().unwrap_err().to_string().contains("t_end"));
        assert!(c.apply_override("t_steps=-3").is_err());
        assert!(c.apply_override("omega=inf").is_err());
    }

    #[test]
    fn scenario_mismatch_is_rejected() {
        let mut c = ScenarioConfig::defaults(ScenarioKind::Fig2);
        assert!(c.apply("scenario", "fig2").is_ok());
        assert!(c.apply("scenario", "fig3a").is_err());
    }

    #[test]
    fn sweeps() {
        let mut c = ScenarioConfig::defaults(ScenarioKind::Fig1b);
        c.apply_override("sweep=n_th: 0, 0.5, 1").unwrap();
        let runs = c.sweep_params().unwrap();
        assert_eq!(runs.len(), 3);
        assert_eq!(runs[2].1.n_th, 1.0);
        c.apply_override("sweep=beta_i: 0.2").unwrap();
        let runs = c.sweep_params().unwrap();
        assert!((runs[0].1.beta_mod - 0.2).abs() < 1e-15);
        assert!((runs[0].1.beta_arg + FRAC_PI_2).abs() < 1e-15);
        assert!(c.apply_override("sweep=t_end: 1").is_err());
        assert!(c.apply_override("sweep=omega: 1, x").is_err());
        c.apply_override("sweep=none").unwrap();
        assert!(c.sweep.is_none());
    }

    #[test]
    fn captioned_defaults() {
        let f = ScenarioConfig::defaults(ScenarioKind::FigOptdyne).params;
        assert!((f.beta_mod * f.beta_arg.cos() - 0.3).abs() < 1e-15);
        assert!((f.beta_mod * f.beta_arg.sin() + 0.5).abs() < 1e-15);
        let f4 = ScenarioConfig::defaults(ScenarioKind::Fig4).params;
        assert_eq!(
            (f4.omega, f4.beta_mod, f4.alpha_mod, f4.temp_ratio),
            (5.0, 0.2, 0.025, 4.0)
        );
        assert_eq!(ScenarioConfig::defaults(ScenarioKind::Fig3a).params.lambda_c, 2.0);
        for k in ScenarioKind::ALL {
            ScenarioConfig::defaults(k).validate().unwrap();
        }
    }
}
