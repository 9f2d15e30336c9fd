//! JSON scenario configuration. Frequencies are ordinary frequencies in MHz
//! (the value of ω/2π); conversion to rad/s happens in [`Config::resolve`].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tprf_core::correlations::{
    uniform_delays, Window, DEFAULT_DELAY_POINTS, DEFAULT_TAU_MAX_OVER_GAMMA,
};
use tprf_core::detection::{omega_from_power, PowerCalibration};
use tprf_core::units::mhz_to_angular;
use tprf_core::{LadderParams, Line};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Spectrum,
    G2,
    SweepOmega,
    SweepDelta,
    Validate,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Spectrum => "spectrum",
            Task::G2 => "g2",
            Task::SweepOmega => "sweep-omega",
            Task::SweepDelta => "sweep-delta",
            Task::Validate => "validate",
        }
    }
}

/// The task family selected on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    G2,
    Sweep,
    Validate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    pub params: ParamsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<Line>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<FilterConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validate: Option<ValidateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(default = "default_levels")]
    pub n_levels: usize,
    pub alpha_mhz: f64,
    #[serde(default)]
    pub delta_mhz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_mhz: Option<f64>,
    /// Drive power at the instrument input, W; needs `calibration`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_w: Option<f64>,
    pub gamma_mhz: f64,
}

fn default_levels() -> usize {
    3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_tau_max")]
    pub tau_max_over_gamma: f64,
    #[serde(default = "default_points")]
    pub delay_points: usize,
    #[serde(default)]
    pub window: Window,
}

fn default_tau_max() -> f64 {
    DEFAULT_TAU_MAX_OVER_GAMMA
}

fn default_points() -> usize {
    DEFAULT_DELAY_POINTS
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            tau_max_over_gamma: DEFAULT_TAU_MAX_OVER_GAMMA,
            delay_points: DEFAULT_DELAY_POINTS,
            window: Window::None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    Omega,
    Delta,
}

/// `mhz`: values are ω/2π in MHz. `normalized`: Ω in units of √(|α|Γ), δ in
/// units of Γ.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepUnit {
    #[default]
    Mhz,
    Normalized,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    #[serde(default)]
    pub unit: SweepUnit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<RangeConfig>,
}

/// `points` evenly spaced values from `start` to `stop` inclusive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeConfig {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FilterConfig {
    Boxcar {
        #[serde(default = "default_bandwidth")]
        bandwidth_mhz: f64,
    },
    RaisedCosine {
        #[serde(default = "default_bandwidth")]
        bandwidth_mhz: f64,
    },
    /// One tap per line; relative paths are taken from the config file's
    /// directory.
    File {
        path: PathBuf,
        sample_period_ns: f64,
    },
}

fn default_bandwidth() -> f64 {
    tprf_core::detection::DEFAULT_BANDWIDTH_HZ / 1e6
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    /// Rabi rate per √W at the device, rad/s/√W.
    pub k: f64,
    #[serde(default)]
    pub reference_attenuation_db: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_epsilons() -> Vec<f64> {
    vec![0.05, 0.1, 0.15, 0.2]
}

fn default_tolerance() -> f64 {
    0.05
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self {
            epsilons: default_epsilons(),
            tolerance: default_tolerance(),
        }
    }
}

/// One point of a resolved sweep: the value as written and the parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub params: LadderParams,
}

/// A validated scenario with every quantity in rad/s and seconds.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub task: Task,
    pub params: LadderParams,
    pub line: Line,
    pub delays: Vec<f64>,
    pub window: Window,
    pub sweep: Vec<SweepPoint>,
    pub filter: Option<FilterConfig>,
    pub validate: ValidateConfig,
    /// Directory used to resolve relative paths.
    pub base_dir: PathBuf,
    pub config: Config,
}

fn invalid(path: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            invalid(&path, e.into_inner().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid("", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn task_for(&self, command: Command) -> Result<Task, CliError> {
        let from_sweep = || match &self.sweep {
            Some(s) => Ok(match s.variable {
                SweepVariable::Omega => Task::SweepOmega,
                SweepVariable::Delta => Task::SweepDelta,
            }),
            None => Err(invalid("sweep", "sweep task needs a sweep grid")),
        };
        let task = match command {
            Command::Spectrum => Task::Spectrum,
            Command::G2 => Task::G2,
            Command::Validate => Task::Validate,
            Command::Sweep => from_sweep()?,
        };
        if let Some(declared) = self.task {
            if declared != task {
                return Err(invalid(
                    "task",
                    format!(
                        "config declares {} but the command runs {}",
                        declared.name(),
                        task.name()
                    ),
                ));
            }
        }
        Ok(task)
    }

    fn calibration(&self) -> Result<Option<PowerCalibration>, CliError> {
        self.calibration
            .as_ref()
            .map(|c| {
                PowerCalibration::new(c.k, c.reference_attenuation_db)
                    .map_err(|e| invalid("calibration.k", e.to_string()))
            })
            .transpose()
    }

    fn ladder(&self, task: Task) -> Result<(LadderParams, Vec<String>), CliError> {
        let p = &self.params;
        let mut notes = Vec::new();
        for (name, v) in [
            ("alpha_mhz", p.alpha_mhz),
            ("delta_mhz", p.delta_mhz),
            ("gamma_mhz", p.gamma_mhz),
        ] {
            if !v.is_finite() {
                return Err(invalid(&format!("params.{name}"), "must be finite"));
            }
        }
        let omega = match (p.omega_mhz, p.power_w) {
            (Some(_), Some(_)) => {
                return Err(invalid(
                    "params",
                    "give either omega_mhz or power_w, not both",
                ))
            }
            (Some(o), None) => mhz_to_angular(o),
            (None, Some(power)) => {
                let cal = self
                    .calibration()?
                    .ok_or_else(|| invalid("calibration", "power_w needs a calibration"))?;
                omega_from_power(power, &cal)
                    .map_err(|e| invalid("params.power_w", e.to_string()))?
            }
            (None, None) if task == Task::Validate => 0.0,
            (None, None) => {
                return Err(invalid("params", "one of omega_mhz or power_w is required"))
            }
        };
        let lp = LadderParams::new(
            p.n_levels,
            mhz_to_angular(p.alpha_mhz),
            mhz_to_angular(p.delta_mhz),
            omega,
            mhz_to_angular(p.gamma_mhz),
        )
        .map_err(|e| invalid("params", e.to_string()))?;
        notes.extend(lp.warnings());
        Ok((lp, notes))
    }

    fn sweep_points(&self, task: Task, base: &LadderParams) -> Result<Vec<SweepPoint>, CliError> {
        if !matches!(task, Task::SweepOmega | Task::SweepDelta) {
            return Ok(Vec::new());
        }
        let s = self.sweep.as_ref().expect("sweep task has a grid");
        let values = match (&s.values, &s.range) {
            (Some(v), None) => v.clone(),
            (None, Some(r)) => {
                if r.points < 2 || !r.start.is_finite() || !r.stop.is_finite() {
                    return Err(invalid(
                        "sweep.range",
                        "need finite bounds and at least 2 points",
                    ));
                }
                let step = (r.stop - r.start) / (r.points - 1) as f64;
                (0..r.points).map(|i| r.start + step * i as f64).collect()
            }
            _ => return Err(invalid("sweep", "give exactly one of values or range")),
        };
        if values.is_empty() {
            return Err(invalid("sweep.values", "sweep grid is empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("sweep.values", "values must be finite"));
        }
        let increasing = values.windows(2).all(|w| w[1] > w[0]);
        let decreasing = values.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(invalid("sweep.values", "values must be strictly monotone"));
        }
        let unit = (base.alpha.abs() * base.gamma).sqrt();
        values
            .into_iter()
            .map(|value| {
                let params = match (s.variable, s.unit) {
                    (SweepVariable::Omega, SweepUnit::Mhz) => {
                        base.with_omega(mhz_to_angular(value))
                    }
                    (SweepVariable::Omega, SweepUnit::Normalized) => base.with_omega(value * unit),
                    (SweepVariable::Delta, SweepUnit::Mhz) => {
                        base.with_delta(mhz_to_angular(value))
                    }
                    (SweepVariable::Delta, SweepUnit::Normalized) => {
                        base.with_delta(value * base.gamma)
                    }
                };
                params
                    .validate()
                    .map_err(|e| invalid("sweep.values", format!("at {value}: {e}")))?;
                Ok(SweepPoint { value, params })
            })
            .collect()
    }

    /// Validates the configuration for `command` and converts units.
    pub fn resolve(
        &self,
        command: Command,
        base_dir: &Path,
    ) -> Result<(Scenario, Vec<String>), CliError> {
        let task = self.task_for(command)?;
        let (params, mut warnings) = self.ladder(task)?;

        let line = self.line.unwrap_or(match task {
            Task::Spectrum | Task::G2 => Line::Full,
            _ => Line::Tprf,
        });
        let needs_three = line != Line::Full || !matches!(task, Task::Spectrum | Task::G2);
        if needs_three && params.n_levels != 3 && task != Task::Validate {
            return Err(invalid(
                "params.n_levels",
                format!("line {line} and task {} need n_levels = 3", task.name()),
            ));
        }

        let g = &self.grid;
        if !g.tau_max_over_gamma.is_finite() || g.tau_max_over_gamma <= 0.0 {
            return Err(invalid("grid.tau_max_over_gamma", "must be > 0"));
        }
        if g.delay_points < 2 {
            return Err(invalid("grid.delay_points", "need at least 2 points"));
        }
        let delays = uniform_delays(g.tau_max_over_gamma / params.gamma, g.delay_points)
            .map_err(|e| invalid("grid", e.to_string()))?;

        if let Some(f) = &self.filter {
            if task != Task::G2 {
                warnings.push(format!("filter ignored for task {}", task.name()));
            }
            let bad_bw = |b: f64| !b.is_finite() || b <= 0.0;
            match f {
                FilterConfig::Boxcar { bandwidth_mhz }
                | FilterConfig::RaisedCosine { bandwidth_mhz }
                    if bad_bw(*bandwidth_mhz) =>
                {
                    return Err(invalid("filter.bandwidth_mhz", "must be > 0"));
                }
                FilterConfig::File {
                    sample_period_ns, ..
                } if bad_bw(*sample_period_ns) => {
                    return Err(invalid("filter.sample_period_ns", "must be > 0"));
                }
                _ => {}
            }
        }

        let validate = self.validate.clone().unwrap_or_default();
        if task == Task::Validate {
            if validate.epsilons.is_empty() {
                return Err(invalid("validate.epsilons", "grid is empty"));
            }
            if validate
                .epsilons
                .iter()
                .any(|e| !e.is_finite() || *e <= 0.0)
            {
                return Err(invalid("validate.epsilons", "values must be > 0"));
            }
            if params.n_levels != 3 || params.delta != 0.0 {
                warnings.push("validation always runs at n_levels = 3, delta = 0".into());
            }
        }

        let sweep = self.sweep_points(task, &params)?;
        Ok((
            Scenario {
                task,
                params,
                line,
                delays,
                window: g.window,
                sweep,
                filter: self.filter.clone(),
                validate,
                base_dir: base_dir.to_path_buf(),
                config: self.clone(),
            },
            warnings,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> &'static str {
        r#"{"params": {"alpha_mhz": -233, "omega_mhz": 20, "gamma_mhz": 2.5}}"#
    }

    #[test]
    fn defaults() {
        let c = Config::parse(base()).unwrap();
        assert_eq!(c.params.n_levels, 3);
        assert_eq!(c.grid, GridConfig::default());
        let (s, w) = c.resolve(Command::Spectrum, Path::new(".")).unwrap();
        assert!(w.is_empty());
        assert_eq!(s.line, Line::Full);
        assert_eq!(s.delays.len(), DEFAULT_DELAY_POINTS);
        assert!((s.params.omega - mhz_to_angular(20.0)).abs() < 1e-6);
    }

    #[test]
    fn unknown_field_reports_path() {
        let err =
            Config::parse(r#"{"params": {"alpha_mhz": -233, "gamma_mhz": 2.5, "omgea_mhz": 1}}"#)
                .unwrap_err();
        match err {
            CliError::Config { path, .. } => assert_eq!(path, "params.omgea_mhz"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn wrong_type_reports_path() {
        let err = Config::parse(r#"{"params": {"alpha_mhz": "x", "gamma_mhz": 2.5}}"#).unwrap_err();
        assert!(matches!(err, CliError::Config { ref path, .. } if path == "params.alpha_mhz"));
    }

    #[test]
    fn sweep_grids() {
        let with = |sweep: &str| {
            let text = format!(
                r#"{{"params": {{"alpha_mhz": -233, "omega_mhz": 20, "gamma_mhz": 2.5}}, "sweep": {sweep}}}"#
            );
            Config::parse(&text)
                .unwrap()
                .resolve(Command::Sweep, Path::new("."))
        };
        let (s, _) = with(r#"{"variable": "delta", "unit": "normalized", "range": {"start": -1, "stop": 1, "points": 5}}"#)
            .unwrap();
        assert_eq!(s.task, Task::SweepDelta);
        assert_eq!(s.line, Line::Tprf);
        assert_eq!(s.sweep.len(), 5);
        assert!((s.sweep[0].params.delta + s.params.gamma).abs() < 1e-6);
        assert!(with(r#"{"variable": "omega", "values": []}"#).is_err());
        assert!(with(r#"{"variable": "omega", "values": [1, 3, 2]}"#).is_err());
        assert!(with(r#"{"variable": "omega"}"#).is_err());
        assert!(with(r#"{"variable": "omega", "values": [3, 2, 1]}"#).is_ok());
    }

    #[test]
    fn sweep_command_needs_grid() {
        let c = Config::parse(base()).unwrap();
        assert!(c.resolve(Command::Sweep, Path::new(".")).is_err());
    }

    #[test]
    fn declared_task_must_match() {
        let c = Config::parse(
            r#"{"task": "g2", "params": {"alpha_mhz": -233, "omega_mhz": 20, "gamma_mhz": 2.5}}"#,
        )
        .unwrap();
        assert!(c.resolve(Command::G2, Path::new(".")).is_ok());
        assert!(matches!(
            c.resolve(Command::Spectrum, Path::new(".")),
            Err(CliError::Config { ref path, .. }) if path == "task"
        ));
    }

    #[test]
    fn line_needs_three_levels() {
        let c = Config::parse(
            r#"{"line": "GE", "params": {"n_levels": 4, "alpha_mhz": -233, "omega_mhz": 20, "gamma_mhz": 2.5}}"#,
        )
        .unwrap();
        assert!(c.resolve(Command::Spectrum, Path::new(".")).is_err());
    }

    #[test]
    fn power_drive_uses_calibration() {
        let c = Config::parse(
            r#"{"params": {"alpha_mhz": -233, "power_w": 4e-16, "gamma_mhz": 2.5},
                "calibration": {"k": 1e15, "reference_attenuation_db": 0}}"#,
        )
        .unwrap();
        let (s, _) = c.resolve(Command::Spectrum, Path::new(".")).unwrap();
        assert!((s.params.omega - 2e7).abs() < 1e-3);
        let missing =
            Config::parse(r#"{"params": {"alpha_mhz": -233, "power_w": 1e-15, "gamma_mhz": 2.5}}"#)
                .unwrap();
        assert!(missing.resolve(Command::Spectrum, Path::new(".")).is_err());
    }

    #[test]
    fn echo_round_trips() {
        let c = Config::parse(
            r#"{"params": {"alpha_mhz": -233, "omega_mhz": 20, "gamma_mhz": 2.5},
                "filter": {"kind": "raised_cosine"}, "grid": {"window": "hann"}}"#,
        )
        .unwrap();
        let again = Config::parse(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, again);
    }
}
