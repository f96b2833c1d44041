// SPDX-License-Identifier: Apache-2.0

//! Optical Bloch equations with an rf-modulated detuning, used as an
//! independent reference for the strong-drive emission spectrum.
//!
//! With `Delta(t) = delta + xi cos t` and `rho_eg = x + i y`:
//!
//! ```text
//! rho_ee' = -Gamma rho_ee - Omega y
//! x'      = -Gamma/2 x + Delta y
//! y'      = -Gamma/2 y - Delta x - Omega/2 (1 - 2 rho_ee)
//! ```
//!
//! `rho_gg = 1 - rho_ee`, so the trace is preserved by construction.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ode::{Dopri5, StepControl};
use crate::parallel::Executor;
use crate::params::ScaledParams;

/// Simpson samples per rf period for the limit-cycle average.
pub const SAMPLES_PER_PERIOD: usize = 256;
pub const MAX_PERIODS: usize = 10_000;
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    pub rho_ee: f64,
    pub rho_eg: Complex64,
}

impl DensityMatrix {
    pub const GROUND: Self = Self {
        rho_ee: 0.0,
        rho_eg: Complex64::new(0.0, 0.0),
    };

    fn to_array(self) -> [f64; 3] {
        [self.rho_ee, self.rho_eg.re, self.rho_eg.im]
    }

    fn from_array(y: &[f64; 3]) -> Self {
        Self {
            rho_ee: y[0],
            rho_eg: Complex64::new(y[1], y[2]),
        }
    }

    /// `rho_ee (1 - rho_ee) - |rho_eg|^2`; non-negative for a physical state.
    pub fn positivity_margin(&self) -> f64 {
        self.rho_ee * (1.0 - self.rho_ee) - self.rho_eg.norm_sqr()
    }
}

struct Bloch<'a>(&'a ScaledParams);

impl crate::ode::OdeSystem<3> for Bloch<'_> {
    fn rhs(&self, t: f64, y: &[f64; 3], dy: &mut [f64; 3]) {
        let p = self.0;
        let delta = p.detuning + p.xi() * t.cos();
        let half = 0.5 * p.gamma;
        dy[0] = -p.gamma * y[0] - p.rabi * y[2];
        dy[1] = -half * y[1] + delta * y[2];
        dy[2] = -half * y[2] - delta * y[1] - 0.5 * p.rabi * (1.0 - 2.0 * y[0]);
    }
}

pub fn bloch_rhs(t: f64, rho: &DensityMatrix, p: &ScaledParams) -> DensityMatrix {
    let mut dy = [0.0; 3];
    crate::ode::OdeSystem::rhs(&Bloch(p), t, &rho.to_array(), &mut dy);
    DensityMatrix::from_array(&dy)
}

/// Steady-state excited population for a constant detuning.
pub fn stationary_population(gamma: f64, rabi: f64, delta: f64) -> f64 {
    let r2 = 0.25 * rabi * rabi;
    r2 / (delta * delta + 0.25 * gamma * gamma + 2.0 * r2)
}

fn control() -> StepControl {
    StepControl {
        rtol: 1e-11,
        atol: 1e-14,
        ..StepControl::default()
    }
}

/// Integrates from the ground state until successive one-period averages
/// of `rho_ee` differ by less than `tol`, and returns the last average.
pub fn period_averaged_population(p: &ScaledParams, tol: f64) -> Result<f64> {
    if !(p.gamma > 0.0) {
        return Err(Error::InvalidInput("population average needs gamma > 0".into()));
    }
    let sys = Bloch(p);
    let mut stepper = Dopri5::new(&sys, 0.0, DensityMatrix::GROUND.to_array(), control());
    let period = std::f64::consts::TAU;
    let dt = period / SAMPLES_PER_PERIOD as f64;
    let mut prev: Option<f64> = None;
    let mut start_value = 0.0;
    for m in 0..MAX_PERIODS {
        let t0 = m as f64 * period;
        let mut acc = start_value;
        for i in 1..=SAMPLES_PER_PERIOD {
            let t = t0 + i as f64 * dt;
            while stepper.t() < t {
                stepper.step(f64::INFINITY)?;
            }
            let v = if t == stepper.t() {
                stepper.y()[0]
            } else {
                stepper.interpolate(t)[0]
            };
            let w = if i == SAMPLES_PER_PERIOD {
                start_value = v;
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w * v;
        }
        let avg = acc / (3.0 * SAMPLES_PER_PERIOD as f64);
        if let Some(last) = prev {
            if (avg - last).abs() < tol {
                return Ok(avg);
            }
        }
        prev = Some(avg);
    }
    Err(Error::NoConvergence { periods: MAX_PERIODS })
}

/// `Gamma * <rho_ee>` at each detuning of `delta_grid`.
pub fn emission_spectrum_bloch(p: &ScaledParams, delta_grid: &[f64]) -> Result<Vec<f64>> {
    emission_spectrum_bloch_with(&Executor::default(), p, delta_grid, DEFAULT_TOL)
}

pub fn emission_spectrum_bloch_with(
    exec: &Executor,
    p: &ScaledParams,
    delta_grid: &[f64],
    tol: f64,
) -> Result<Vec<f64>> {
    exec.map(delta_grid, |&d| {
        let q = p.set_detuning(d);
        period_averaged_population(&q, tol).map(|rho| q.gamma * rho)
    })
    .into_iter()
    .collect()
}
