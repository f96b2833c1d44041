// SPDX-License-Identifier: Apache-2.0

//! JSON run configuration and the flag overrides layered on top of it.

use std::path::Path;

use photon_window::sweep::{Engine, SweepVariable, Tolerances};
use photon_window::validation::ValidationConfig;
use photon_window::{scale_to_rf_units, PhysicalParams, ScaledParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl From<photon_window::Error> for ConfigError {
    fn from(e: photon_window::Error) -> Self {
        ConfigError::Invalid(e.to_string())
    }
}

/// Physical-unit entry. Frequencies are `omega / 2 pi` in MHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalBlock {
    pub units: String,
    pub omega_rf: f64,
    pub gamma: f64,
    pub rabi: f64,
    #[serde(default)]
    pub detuning: f64,
    #[serde(default)]
    pub v_g: f64,
    #[serde(default)]
    pub v_e: f64,
}

impl PhysicalBlock {
    pub fn to_scaled(&self) -> Result<ScaledParams, ConfigError> {
        if self.units != "MHz" {
            return Err(ConfigError::Invalid(format!(
                "unsupported units '{}' (only \"MHz\" is accepted)",
                self.units
            )));
        }
        let w = std::f64::consts::TAU * 1e6;
        Ok(scale_to_rf_units(&PhysicalParams {
            omega_rf: w * self.omega_rf,
            gamma: w * self.gamma,
            rabi: w * self.rabi,
            detuning: w * self.detuning,
            v_g: w * self.v_g,
            v_e: w * self.v_e,
        })?)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub variable: Option<SweepVariable>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub step: Option<f64>,
    pub engines: Option<Vec<Engine>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Scaled couplings (units of the rf angular frequency).
    pub gamma: Option<f64>,
    pub rabi: Option<f64>,
    pub detuning: Option<f64>,
    pub xi: Option<f64>,
    pub physical: Option<PhysicalBlock>,
    pub engine: Option<Engine>,
    pub sweep: Option<SweepBlock>,
    pub t_end: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub bloch_tol: Option<f64>,
    pub xi_lo: Option<f64>,
    pub xi_hi: Option<f64>,
    pub pairs: Option<usize>,
    pub validation: Option<ValidationConfig>,
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    serde_json::from_str(text).map_err(|e| {
        let mut message = e.to_string();
        if let Some(i) = message.rfind(" at line ") {
            message.truncate(i);
        }
        ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message,
        }
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub gamma: Option<f64>,
    pub rabi: Option<f64>,
    pub xi: Option<f64>,
    pub delta: Option<f64>,
    pub engine: Option<Vec<Engine>>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

pub const DEFAULT_GAMMA: f64 = 0.5;
pub const DEFAULT_RABI: f64 = 0.1;
pub const DEFAULT_XI: f64 = 1.0;
pub const DEFAULT_SEED: u64 = 1;

/// Fully resolved inputs shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub params: ScaledParams,
    pub engines: Vec<Engine>,
    pub seed: u64,
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn resolve(&self, o: &Overrides) -> Result<Resolved, ConfigError> {
        let scaled_given = self.gamma.is_some() || self.rabi.is_some() || self.detuning.is_some() || self.xi.is_some();
        let base = match (&self.physical, scaled_given) {
            (Some(_), true) => {
                return Err(ConfigError::Invalid(
                    "give either the physical block or scaled gamma/rabi/detuning/xi, not both".into(),
                ))
            }
            (Some(p), false) => p.to_scaled()?,
            (None, _) => ScaledParams::with_xi(
                self.gamma.unwrap_or(DEFAULT_GAMMA),
                self.rabi.unwrap_or(DEFAULT_RABI),
                self.detuning.unwrap_or(0.0),
                self.xi.unwrap_or(DEFAULT_XI),
            )?,
        };
        let mut p = base;
        if let Some(g) = o.gamma {
            p = p.set_gamma(g);
        }
        if let Some(r) = o.rabi {
            p = p.set_rabi(r);
        }
        if let Some(d) = o.delta {
            p = p.set_detuning(d);
        }
        if let Some(x) = o.xi {
            p = p.set_xi(x);
        }
        p.validate()?;
        let engines = o
            .engine
            .clone()
            .or_else(|| self.engine.map(|e| vec![e]))
            .unwrap_or_default();
        let defaults = Tolerances::default();
        let tolerances = Tolerances {
            ode: o.tol.or(self.tol).unwrap_or(defaults.ode),
            bloch: self.bloch_tol.unwrap_or(defaults.bloch),
        };
        if !(tolerances.ode > 0.0) || !(tolerances.bloch > 0.0) {
            return Err(ConfigError::Invalid("tolerances must be positive".into()));
        }
        Ok(Resolved {
            params: p,
            engines,
            seed: o.seed.or(self.seed).unwrap_or(DEFAULT_SEED),
            tolerances,
        })
    }

    /// Validation settings: the `validation` block, with the top-level
    /// couplings, seed and tolerance (and flags) applied to the sampler point.
    pub fn validation(&self, o: &Overrides) -> ValidationConfig {
        let mut v = self.validation.clone().unwrap_or_default();
        if let Some(g) = o.gamma.or(self.gamma) {
            v.gamma = g;
        }
        if let Some(r) = o.rabi.or(self.rabi) {
            v.rabi = r;
        }
        if let Some(x) = o.xi.or(self.xi) {
            v.xi = x;
        }
        if let Some(s) = o.seed.or(self.seed) {
            v.seed = s;
        }
        if let Some(t) = o.tol.or(self.tol) {
            v.tol = t;
        }
        if let Some(t) = self.bloch_tol {
            v.bloch_tol = t;
        }
        if let Some(n) = self.samples {
            v.samples = n;
        }
        v
    }
}
