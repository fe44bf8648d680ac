//! Run configuration: a flat JSON object with a strict key set.
//!
//! Every key has an explicit default; the resolved values (including the
//! mass-dependent test-function defaults) are what the manifest records.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use charge_class::illposed::TestFunction;
use charge_class::system::Preset;
use charge_class::{make_grid, Grid1D, SystemSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    Picard,
    IllposedSweep,
    Keybound,
    Diagnostics,
    Convergence,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Simulate,
        Command::Picard,
        Command::IllposedSweep,
        Command::Keybound,
        Command::Diagnostics,
        Command::Convergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Picard => "picard",
            Command::IllposedSweep => "illposed-sweep",
            Command::Keybound => "keybound",
            Command::Diagnostics => "diagnostics",
            Command::Convergence => "convergence",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown command `{s}`")))
    }
}

/// Initial-data families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataFamily {
    /// `psi_0 = 0`.
    Zero,
    /// `u_0 = v_0 = chi_[-1,1] (eps + |x|)^(-1/2)` with `eps = data_eps`.
    EpsFamily,
    /// `u_0 = A e^{-((x - c)/w)^2}`, `v_0 = A e^{-((x + c)/w)^2}`.
    Gaussian,
    /// Compactly supported smooth bumps, `u_0` centred at `c`, `v_0 = i * bump` at `-c`.
    Bump,
    /// Three bumps per component with complex amplitudes drawn from `seed`.
    RandomBumps,
}

/// Strict flat configuration. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Overridden by the command given on the command line.
    pub command: Option<Command>,
    pub preset: Preset,
    pub dirac_mass: f64,
    /// Ignored by MD (massless photon).
    pub boson_mass: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
    /// Final time `T`; must be a multiple of `dt = dx`.
    pub horizon: f64,
    pub stride: usize,
    pub data: DataFamily,
    pub data_eps: f64,
    pub data_amplitude: f64,
    pub data_center: f64,
    pub data_width: f64,
    /// Amplitude of the smooth initial potential `V_j(0) = a * bump(c, 2w)`, all `j`.
    pub potential_amplitude: f64,
    /// MD only: replace the potential data with constraint-compatible Lorenz data.
    pub compatible: bool,
    pub seed: u64,
    pub eps_list: Vec<f64>,
    /// Test-function centre and radius; `None` resolves to the massless or massive default.
    pub theta_t: Option<f64>,
    pub theta_x: Option<f64>,
    pub theta_radius: Option<f64>,
    pub picard_max_iter: usize,
    pub picard_tol: f64,
    pub c_cal: f64,
    /// Number of distances `rho` sampled for the Gronwall envelope.
    pub rho_samples: usize,
    /// Perturbation sizes for the continuity check.
    pub deltas: Vec<f64>,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            preset: Preset::MaxwellDirac,
            dirac_mass: 0.0,
            boson_mass: 0.0,
            x_min: -2.0,
            x_max: 2.0,
            n_cells: 800,
            horizon: 0.5,
            stride: 1,
            data: DataFamily::EpsFamily,
            data_eps: 1e-2,
            data_amplitude: 1.0,
            data_center: 0.0,
            data_width: 0.5,
            potential_amplitude: 0.0,
            compatible: false,
            seed: 0,
            eps_list: vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
            theta_t: None,
            theta_x: None,
            theta_radius: None,
            picard_max_iter: 60,
            picard_tol: 1e-12,
            c_cal: charge_class::picard::DEFAULT_C_CAL,
            rho_samples: 20,
            deltas: vec![1e-2, 1e-3, 1e-4],
            out_dir: PathBuf::from("out"),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub command: Option<Command>,
    pub out_dir: Option<PathBuf>,
    pub n_cells: Option<usize>,
    pub eps_list: Option<Vec<f64>>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| invalid(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: Overrides) {
        if let Some(c) = o.command {
            self.command = Some(c);
        }
        if let Some(d) = o.out_dir {
            self.out_dir = d;
        }
        if let Some(n) = o.n_cells {
            self.n_cells = n;
        }
        if let Some(e) = o.eps_list {
            self.eps_list = e;
        }
    }

    pub fn command(&self) -> Result<Command, CliError> {
        self.command
            .ok_or_else(|| invalid("no command given on the command line or in the config"))
    }

    /// Checks every invariant and fills the test-function defaults.
    pub fn resolve(mut self) -> Result<Self, CliError> {
        self.command()?;
        let finite = [
            ("dirac_mass", self.dirac_mass),
            ("boson_mass", self.boson_mass),
            ("x_min", self.x_min),
            ("x_max", self.x_max),
            ("horizon", self.horizon),
            ("data_amplitude", self.data_amplitude),
            ("data_center", self.data_center),
            ("potential_amplitude", self.potential_amplitude),
            ("c_cal", self.c_cal),
        ];
        for (k, v) in finite {
            if !v.is_finite() {
                return Err(invalid(format!("{k} must be finite")));
            }
        }
        if self.n_cells < 2 {
            return Err(invalid(format!(
                "n_cells must be at least 2 (got {})",
                self.n_cells
            )));
        }
        let grid = self.grid()?;
        if !(self.horizon >= 0.0) {
            return Err(invalid("horizon must be nonnegative"));
        }
        grid.steps_for(self.horizon)
            .map_err(|e| invalid(format!("horizon: {e}")))?;
        if self.stride == 0 {
            return Err(invalid("stride must be at least 1"));
        }
        if !(self.data_eps > 0.0 && self.data_eps.is_finite()) {
            return Err(invalid("data_eps must be positive"));
        }
        if !(self.data_width > 0.0 && self.data_width.is_finite()) {
            return Err(invalid("data_width must be positive"));
        }
        if self.eps_list.is_empty() || self.eps_list.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(invalid("eps_list must hold positive finite values"));
        }
        if !(self.picard_tol > 0.0) || self.picard_max_iter == 0 {
            return Err(invalid("need picard_tol > 0 and picard_max_iter >= 1"));
        }
        if !(self.c_cal > 0.0) {
            return Err(invalid("c_cal must be positive"));
        }
        if self.rho_samples == 0 {
            return Err(invalid("rho_samples must be at least 1"));
        }
        if self.deltas.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(invalid("deltas must be positive"));
        }
        if self.compatible {
            if self.preset != Preset::MaxwellDirac {
                return Err(invalid("compatible data exist only for the MD preset"));
            }
            if self.potential_amplitude != 0.0 {
                return Err(invalid(
                    "compatible = true determines the potentials; set potential_amplitude = 0",
                ));
            }
        }
        let default = if self.dirac_mass == 0.0 {
            TestFunction::default_massless()
        } else {
            TestFunction::default_massive()
        };
        let theta = TestFunction::new(
            self.theta_t.unwrap_or(default.center_t),
            self.theta_x.unwrap_or(default.center_x),
            self.theta_radius.unwrap_or(default.radius),
        )
        .map_err(|e| invalid(format!("theta: {e}")))?;
        self.theta_t = Some(theta.center_t);
        self.theta_x = Some(theta.center_x);
        self.theta_radius = Some(theta.radius);
        Ok(self)
    }

    pub fn grid(&self) -> Result<Grid1D, CliError> {
        make_grid(self.x_min, self.x_max, self.n_cells).map_err(|e| invalid(format!("grid: {e}")))
    }

    pub fn spec(&self) -> SystemSpec {
        SystemSpec::preset(self.preset, self.dirac_mass, self.boson_mass)
    }

    /// Only valid after [`RunConfig::resolve`].
    pub fn theta(&self) -> Result<TestFunction, CliError> {
        match (self.theta_t, self.theta_x, self.theta_radius) {
            (Some(t), Some(x), Some(r)) => {
                TestFunction::new(t, x, r).map_err(|e| invalid(format!("theta: {e}")))
            }
            _ => Err(invalid("test function not resolved")),
        }
    }
}

/// Parses `a,b,c` into floats.
pub fn parse_eps_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad eps value `{p}`: {e}"))
        })
        .collect()
}
