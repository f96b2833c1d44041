// SPDX-License-Identifier: Apache-2.0

//! Parameter records and unit scaling.
//!
//! Everything downstream of [`scale_to_rf_units`] works in units where the
//! rf angular frequency is one: times are measured in `1/omega_rf` and all
//! rates in `omega_rf`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rabi frequency below `WEAK_DRIVE_RATIO * min(gamma, 1)` counts as weak drive.
pub const WEAK_DRIVE_RATIO: f64 = 0.2;
/// Upper bound on the scaled Rabi frequency for the strong-drive formulas.
pub const STRONG_DRIVE_MAX_RABI: f64 = 0.5;

/// Couplings in physical angular-frequency units (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub omega_rf: f64,
    pub gamma: f64,
    pub rabi: f64,
    pub detuning: f64,
    pub v_g: f64,
    pub v_e: f64,
}

/// Dimensionless couplings in units of the rf angular frequency.
///
/// `xi` is kept equal to `v_e - v_g`; construct through [`ScaledParams::new`]
/// or the builder-style setters so the two never drift apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScaledRecord")]
pub struct ScaledParams {
    pub gamma: f64,
    pub rabi: f64,
    pub detuning: f64,
    pub v_g: f64,
    pub v_e: f64,
    xi: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScaledRecord {
    gamma: f64,
    rabi: f64,
    #[serde(default)]
    detuning: f64,
    #[serde(default)]
    v_g: f64,
    v_e: f64,
    #[serde(default)]
    xi: Option<f64>,
}

impl TryFrom<ScaledRecord> for ScaledParams {
    type Error = Error;

    fn try_from(r: ScaledRecord) -> Result<Self> {
        let s = Self::new(r.gamma, r.rabi, r.detuning, r.v_g, r.v_e)?;
        match r.xi {
            Some(xi) if xi != s.xi => Err(Error::InvalidInput(format!(
                "xi = {xi} does not equal v_e - v_g = {}",
                s.xi
            ))),
            _ => Ok(s),
        }
    }
}

impl ScaledParams {
    pub fn new(gamma: f64, rabi: f64, detuning: f64, v_g: f64, v_e: f64) -> Result<Self> {
        let s = Self {
            gamma,
            rabi,
            detuning,
            v_g,
            v_e,
            xi: v_e - v_g,
        };
        s.validate()?;
        Ok(s)
    }

    /// Parameters with `v_g = 0` and `v_e = xi`.
    pub fn with_xi(gamma: f64, rabi: f64, detuning: f64, xi: f64) -> Result<Self> {
        Self::new(gamma, rabi, detuning, 0.0, xi)
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// Shifts `v_e` so that the modulation index becomes `xi` (exactly so
    /// when `v_g = 0`; otherwise up to the rounding of `v_g + xi`).
    pub fn set_xi(self, xi: f64) -> Self {
        let v_e = self.v_g + xi;
        Self {
            v_e,
            xi: v_e - self.v_g,
            ..self
        }
    }

    pub fn set_gamma(self, gamma: f64) -> Self {
        Self { gamma, ..self }
    }

    pub fn set_rabi(self, rabi: f64) -> Self {
        Self { rabi, ..self }
    }

    pub fn set_detuning(self, detuning: f64) -> Self {
        Self { detuning, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [self.gamma, self.rabi, self.detuning, self.v_g, self.v_e];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("parameters must be finite".into()));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidInput(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if self.rabi < 0.0 {
            return Err(Error::InvalidInput(format!("rabi must be >= 0, got {}", self.rabi)));
        }
        Ok(())
    }

    pub fn regime(&self) -> Regime {
        classify_regime(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// Rabi frequency small against both the decay rate and the rf frequency.
    WeakDrive,
    /// Decay rate below the Rabi frequency, both small against the rf frequency.
    StrongDrive,
    Outside,
}

pub fn scale_to_rf_units(p: &PhysicalParams) -> Result<ScaledParams> {
    if !(p.omega_rf > 0.0) {
        return Err(Error::NonPositiveFrequency(p.omega_rf));
    }
    let w = p.omega_rf;
    let s = ScaledParams {
        gamma: p.gamma / w,
        rabi: p.rabi / w,
        detuning: p.detuning / w,
        v_g: p.v_g / w,
        v_e: p.v_e / w,
        xi: (p.v_e - p.v_g) / w,
    };
    s.validate()?;
    Ok(s)
}

pub fn classify_regime(s: &ScaledParams) -> Regime {
    if s.rabi <= WEAK_DRIVE_RATIO * s.gamma.min(1.0) {
        Regime::WeakDrive
    } else if s.gamma < s.rabi && s.rabi <= STRONG_DRIVE_MAX_RABI {
        Regime::StrongDrive
    } else {
        Regime::Outside
    }
}
