// SPDX-License-Identifier: Apache-2.0

//! Closed-form emission rates `1/<tau>` from the renormalization-group
//! treatment, for weak and strong laser drive.

use serde::Serialize;

use crate::bessel::{truncated_row, DEFAULT_TAIL_TOL};
use crate::error::Result;
use crate::params::{classify_regime, Regime, ScaledParams};
use crate::series::lorentz_sum_with_row;

/// Above this (scaled) width neighbouring sideband resonances overlap.
pub const OVERLAP_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatePrediction {
    /// Emission rate `1/<tau>` in units of `omega_rf`.
    pub inverse_tau: f64,
    pub regime: Regime,
    pub validity_warnings: Vec<String>,
}

impl RatePrediction {
    fn new(inverse_tau: f64, regime: Regime) -> Self {
        let mut validity_warnings = Vec::new();
        if inverse_tau == 0.0 {
            validity_warnings.push("zero emission rate: mean waiting time diverges".to_string());
        }
        Self {
            inverse_tau,
            regime,
            validity_warnings,
        }
    }

    /// `<tau>`; infinite when the rate vanishes.
    pub fn mean_tau(&self) -> f64 {
        1.0 / self.inverse_tau
    }
}

fn regime_of(xi: f64, gamma: f64, rabi: f64, delta: f64) -> Regime {
    ScaledParams::with_xi(gamma, rabi, delta, xi).map_or(Regime::Outside, |p| classify_regime(&p))
}

/// Weak-drive rate at zero detuning,
/// `1/<tau> = Gamma Omega^2 sum_k J_k^2 / (Gamma^2 + 4k^2)`.
pub fn mean_tau_rg(xi: f64, gamma: f64, rabi: f64) -> Result<RatePrediction> {
    mean_tau_rg_detuned(xi, gamma, rabi, 0.0)
}

/// Weak-drive rate at detuning `delta`,
/// `1/<tau> = Gamma Omega^2 sum_k J_k^2 / (Gamma^2 + 4(k - delta)^2)`.
pub fn mean_tau_rg_detuned(xi: f64, gamma: f64, rabi: f64, delta: f64) -> Result<RatePrediction> {
    let row = truncated_row(xi, DEFAULT_TAIL_TOL, 0);
    let s = lorentz_sum_with_row(&row, gamma, delta)?;
    let regime = regime_of(xi, gamma, rabi, delta);
    let mut out = RatePrediction::new(gamma * rabi * rabi * s, regime);
    if regime != Regime::WeakDrive {
        out.validity_warnings
            .push(format!("weak-drive formula used outside its regime ({regime:?})"));
    }
    Ok(out)
}

/// Strong-drive rate with saturation,
/// `1/<tau>(delta) = sum_k Gamma Omega^2 J_k^2 / (Gamma^2 + 2 Omega^2 J_k^2 + 4(k - delta)^2)`.
///
/// Only meaningful while the sideband resonances stay separated; a warning
/// is attached when `Gamma` or any `Omega |J_k|` exceeds [`OVERLAP_THRESHOLD`].
pub fn emission_rate_strong_drive(xi: f64, gamma: f64, rabi: f64, delta: f64) -> Result<RatePrediction> {
    let row = truncated_row(xi, DEFAULT_TAIL_TOL, 0);
    let term = |k: i64| {
        let j = row.get(k);
        let j2 = j * j;
        let d = k as f64 - delta;
        // grouped so that xi = 0, delta = 0 reproduces the single-level formula bit for bit
        let num = gamma * rabi * rabi * j2;
        if num == 0.0 {
            0.0
        } else {
            num / (gamma * gamma + 2.0 * rabi * rabi * j2 + 4.0 * d * d)
        }
    };
    let top = row.order() as i64;
    let mut rate = term(0);
    for k in 1..=top {
        rate += term(k) + term(-k);
    }
    let regime = regime_of(xi, gamma, rabi, delta);
    let mut out = RatePrediction::new(rate, regime);
    let widest = row.non_negative().iter().map(|j| rabi * j.abs()).fold(0.0, f64::max);
    if gamma > OVERLAP_THRESHOLD || widest > OVERLAP_THRESHOLD {
        out.validity_warnings.push(format!(
            "sideband resonances overlap (gamma = {gamma}, max Omega|J_k| = {widest:.3})"
        ));
    }
    Ok(out)
}
