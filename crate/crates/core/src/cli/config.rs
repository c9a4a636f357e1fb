//! JSON experiment configuration.
//!
//! Every section is optional; `{}` describes the smooth benchmark
//! (`k1 = 1, k2 = 4, a = b = 1`, `f = u^2`, unit Gaussian, `L = 30`,
//! `n = 1024`, `t_end = 1`). Unknown keys are rejected at every level.

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::domain::{
    Epsilon, Grid1D, InitialConditionSpec, InitialKind, NonlinearitySpec, PhysParams, Profile, Term,
};
use crate::error::Error;
use crate::full_solver::SolverConfig;
use crate::verifier::MIN_EPS;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub params: ParamsConfig,
    /// Used by the single-run commands.
    pub epsilon: f64,
    /// Used by `sweep`; strictly decreasing.
    pub epsilon_list: Vec<f64>,
    pub nonlinearity: NonlinearityConfig,
    pub grid: GridConfig,
    pub kdv_grid: KdvGridConfig,
    pub time: TimeConfig,
    pub initial: InitialConfig,
    pub outputs: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            params: ParamsConfig::default(),
            epsilon: 0.2,
            epsilon_list: vec![0.4, 0.3, 0.2],
            nonlinearity: NonlinearityConfig::default(),
            grid: GridConfig::default(),
            kdv_grid: KdvGridConfig::default(),
            time: TimeConfig::default(),
            initial: InitialConfig::default(),
            outputs: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    pub k1: f64,
    pub k2: f64,
    pub a: f64,
    pub b: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        let p = PhysParams::canonical();
        ParamsConfig {
            k1: p.k1,
            k2: p.k2,
            a: p.a,
            b: p.b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NonlinearityConfig {
    pub terms: Vec<Term>,
    pub eps_power: u32,
}

impl Default for NonlinearityConfig {
    fn default() -> Self {
        NonlinearityConfig {
            terms: vec![Term::new(2, 0, 1.0)],
            eps_power: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    #[serde(rename = "L")]
    pub half_length: f64,
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            half_length: 30.0,
            n: 1024,
        }
    }
}

/// Stretched-coordinate grid for the KdV profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KdvGridConfig {
    #[serde(rename = "L")]
    pub half_length: f64,
    pub n: usize,
}

impl Default for KdvGridConfig {
    fn default() -> Self {
        KdvGridConfig {
            half_length: 40.0,
            n: 512,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub t_end: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_times: Option<Vec<f64>>,
    /// `n` equally spaced snapshots ending at `t_end` (starting at 0 when `n > 1`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_count: Option<usize>,
    pub cfl: f64,
    pub substeps_per_oscillation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_dt: Option<f64>,
}

impl Default for TimeConfig {
    fn default() -> Self {
        let s = SolverConfig::default();
        TimeConfig {
            t_end: s.t_end,
            output_times: None,
            output_count: None,
            cfl: s.cfl,
            substeps_per_oscillation: s.substeps_per_oscillation,
            max_dt: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Zero,
    Gaussian,
    SmoothedStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileConfig {
    pub profile: ProfileKind,
    pub amplitude: f64,
    pub width: f64,
    pub center: f64,
    /// Plateau half-width, used by `smoothed_step` only.
    pub half_width: f64,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig {
            profile: ProfileKind::Zero,
            amplitude: 0.0,
            width: 1.0,
            center: 0.0,
            half_width: 1.0,
        }
    }
}

impl ProfileConfig {
    fn build(&self) -> Profile {
        match self.profile {
            ProfileKind::Zero => Profile::Zero,
            ProfileKind::Gaussian => Profile::gaussian(self.amplitude, self.width, self.center),
            ProfileKind::SmoothedStep => Profile::SmoothedStep {
                amplitude: self.amplitude,
                width: self.width,
                center: self.center,
                half_width: self.half_width,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConfig {
    pub kind: InitialKind,
    pub profile: ProfileKind,
    pub amplitude: f64,
    pub width: f64,
    pub center: f64,
    pub half_width: f64,
    /// Initial velocity profile; zero when absent.
    pub phi_profile: ProfileConfig,
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig {
            kind: InitialKind::Smooth,
            profile: ProfileKind::Gaussian,
            amplitude: 1.0,
            width: 1.0,
            center: 0.0,
            half_width: 1.0,
            phi_profile: ProfileConfig::default(),
        }
    }
}

impl InitialConfig {
    fn u0(&self) -> ProfileConfig {
        ProfileConfig {
            profile: self.profile,
            amplitude: self.amplitude,
            width: self.width,
            center: self.center,
            half_width: self.half_width,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Relative paths are resolved against `--out-dir`; defaults to `<command>.csv`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg_path: Option<String>,
    /// Significant digits written for every number.
    pub precision: usize,
    /// Writes wall-clock seconds into the sweep summary; breaks byte-identical output.
    pub record_runtime: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            csv_path: None,
            svg_path: None,
            precision: 17,
            record_runtime: false,
        }
    }
}

/// A configuration turned into validated domain objects.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub params: PhysParams,
    pub eps: Epsilon,
    pub eps_list: Vec<f64>,
    pub f: NonlinearitySpec,
    pub grid: Grid1D,
    pub kdv_grid: Grid1D,
    pub solver: SolverConfig,
    pub initial: InitialConditionSpec,
}

/// Parses and validates a JSON document.
pub fn parse_config(text: &str) -> Result<Experiment, CliError> {
    let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    config.validate()
}

fn invalid(path: &str, message: impl Into<String>) -> CliError {
    CliError::Validation {
        path: path.to_string(),
        message: message.into(),
    }
}

/// Prefixes the parameter name carried by a domain error with `section`.
fn under(section: &'static str) -> impl Fn(Error) -> CliError {
    move |e| match e {
        Error::InvalidParameter { name, reason } => invalid(&format!("{section}.{name}"), reason),
        other => invalid(section, other.to_string()),
    }
}

impl ExperimentConfig {
    pub fn validate(self) -> Result<Experiment, CliError> {
        let p = self.params;
        for (name, value) in [("k1", p.k1), ("k2", p.k2), ("a", p.a), ("b", p.b)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(invalid(&format!("params.{name}"), format!("must be finite and > 0, got {value}")));
            }
        }
        let params = PhysParams::new(p.k1, p.k2, p.a, p.b).map_err(under("params"))?;

        let eps = Epsilon::new(self.epsilon).map_err(|e| invalid("epsilon", reason(e)))?;
        if self.epsilon_list.is_empty() {
            return Err(invalid("epsilon_list", "must not be empty"));
        }
        for (k, &e) in self.epsilon_list.iter().enumerate() {
            if !(e.is_finite() && (MIN_EPS..=1.0).contains(&e)) {
                return Err(invalid(
                    &format!("epsilon_list[{k}]"),
                    format!("must lie in [{MIN_EPS}, 1], got {e}"),
                ));
            }
        }
        if self.epsilon_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("epsilon_list", "must be strictly decreasing"));
        }

        let f = NonlinearitySpec::with_eps_power(self.nonlinearity.terms.clone(), self.nonlinearity.eps_power)
            .map_err(|e| match e {
                Error::InvalidParameter { name, reason } if name == "eps_power" => {
                    invalid("nonlinearity.eps_power", reason)
                }
                other => invalid("nonlinearity.terms", self::reason(other)),
            })?;

        let grid = Grid1D::new(self.grid.half_length, self.grid.n).map_err(under("grid"))?;
        let kdv_grid = Grid1D::new(self.kdv_grid.half_length, self.kdv_grid.n).map_err(under("kdv_grid"))?;

        let solver = self.solver_config()?;

        let initial = InitialConditionSpec {
            kind: self.initial.kind,
            u0: self.initial.u0().build(),
            phi: self.initial.phi_profile.build(),
        };
        initial.u0.validate().map_err(under("initial"))?;
        initial.phi.validate().map_err(under("initial.phi_profile"))?;

        if !(1..=17).contains(&self.outputs.precision) {
            return Err(invalid(
                "outputs.precision",
                format!("must lie in [1, 17], got {}", self.outputs.precision),
            ));
        }

        Ok(Experiment {
            eps_list: self.epsilon_list.clone(),
            config: self,
            params,
            eps,
            f,
            grid,
            kdv_grid,
            solver,
            initial,
        })
    }

    fn solver_config(&self) -> Result<SolverConfig, CliError> {
        let t = &self.time;
        let output_times = match (&t.output_times, t.output_count) {
            (Some(_), Some(_)) => {
                return Err(invalid("time", "give either output_times or output_count, not both"));
            }
            (Some(times), None) => times.clone(),
            (None, Some(0)) => return Err(invalid("time.output_count", "must be >= 1")),
            (None, Some(1)) | (None, None) => vec![t.t_end],
            (None, Some(n)) => (0..n).map(|k| t.t_end * k as f64 / (n - 1) as f64).collect(),
        };
        let solver = SolverConfig {
            t_end: t.t_end,
            cfl: t.cfl,
            substeps_per_oscillation: t.substeps_per_oscillation,
            output_times,
            max_dt: t.max_dt,
            relaxation: true,
        };
        solver.validate().map_err(under("time"))?;
        Ok(solver)
    }
}

fn reason(e: Error) -> String {
    match e {
        Error::InvalidParameter { reason, .. } => reason,
        other => other.to_string(),
    }
}
