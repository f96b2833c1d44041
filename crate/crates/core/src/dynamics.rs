// SPDX-License-Identifier: Apache-2.0

//! Conditional (no-emission) evolution of the driven two-level emitter.
//!
//! Between photon emissions the wavefunction `(psi_g, psi_e)` evolves under
//! the non-Hermitian Hamiltonian
//!
//! ```text
//! H(t) = V_g cos t |g><g| + (Omega/2)(|g><e| + |e><g|)
//!      + (V_e cos t + delta - i Gamma/2) |e><e|
//! ```
//!
//! in rf units. Its norm is the survival probability `P0(t)`: the chance
//! that no photon has been emitted by time `t`. `P0` is the complementary
//! CDF of the first-emission waiting time, which gives both the mean
//! waiting time (its integral) and an inverse-CDF sampler.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bessel::{truncated_row, BesselRow, DEFAULT_TAIL_TOL};
use crate::error::{Error, Result};
use crate::ode::{integrate_sampled, OdeSystem, StepControl};
use crate::params::ScaledParams;
use crate::series::lorentz_sum;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default relative integration tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Survival level at which quadrature stops and the exponential tail takes over.
pub const DEFAULT_TAIL: f64 = 1e-8;
/// Quadrature / sampling points per rf period.
pub const DEFAULT_SAMPLES_PER_PERIOD: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub psi_g: Complex64,
    pub psi_e: Complex64,
}

impl StateVector {
    pub const GROUND: StateVector = StateVector {
        psi_g: Complex64::new(1.0, 0.0),
        psi_e: Complex64::new(0.0, 0.0),
    };

    pub fn new(psi_g: Complex64, psi_e: Complex64) -> Self {
        Self { psi_g, psi_e }
    }

    /// `|psi_g|^2 + |psi_e|^2`.
    pub fn norm_sqr(&self) -> f64 {
        self.psi_g.norm_sqr() + self.psi_e.norm_sqr()
    }

    fn to_real(self) -> [f64; 4] {
        [self.psi_g.re, self.psi_g.im, self.psi_e.re, self.psi_e.im]
    }

    fn from_real(y: &[f64; 4]) -> Self {
        Self::new(Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3]))
    }
}

/// Sampled evolution. `survival[i]` is the norm of `states[i]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub survival: Vec<f64>,
}

impl Trajectory {
    fn push(&mut self, t: f64, s: StateVector) {
        self.times.push(t);
        self.survival.push(s.norm_sqr());
        self.states.push(s);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// `d/dt (psi_g, psi_e) = -i H(t) psi`.
pub fn rhs_schrodinger(t: f64, s: &StateVector, p: &ScaledParams) -> StateVector {
    let c = t.cos();
    let half_rabi = 0.5 * p.rabi;
    let h_gg = p.v_g * c;
    let h_ee = Complex64::new(p.v_e * c + p.detuning, -0.5 * p.gamma);
    StateVector {
        psi_g: -I * (h_gg * s.psi_g + half_rabi * s.psi_e),
        psi_e: -I * (half_rabi * s.psi_g + h_ee * s.psi_e),
    }
}

struct Schrodinger<'a>(&'a ScaledParams);

impl OdeSystem<4> for Schrodinger<'_> {
    #[inline]
    fn rhs(&self, t: f64, y: &[f64; 4], dy: &mut [f64; 4]) {
        let d = rhs_schrodinger(t, &StateVector::from_real(y), self.0);
        *dy = d.to_real();
    }
}

fn default_times(t_end: f64) -> Vec<f64> {
    let dt = TAU / DEFAULT_SAMPLES_PER_PERIOD as f64;
    let n = (t_end / dt).ceil() as usize;
    let mut times: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
    times.push(t_end);
    times
}

/// Direct integration from the ground state, sampled every 1/64 of an rf
/// period plus at `t_end`.
pub fn evolve(p: &ScaledParams, t_end: f64, tol: f64) -> Result<Trajectory> {
    if !(t_end > 0.0) {
        return Err(Error::InvalidInput(format!("t_end must be positive, got {t_end}")));
    }
    evolve_at(p, &default_times(t_end), tol)
}

/// Direct integration sampled at the given non-decreasing times (`>= 0`).
pub fn evolve_at(p: &ScaledParams, times: &[f64], tol: f64) -> Result<Trajectory> {
    p.validate()?;
    check_times(times)?;
    let sys = Schrodinger(p);
    let mut traj = Trajectory::default();
    integrate_sampled(
        &sys,
        0.0,
        StateVector::GROUND.to_real(),
        StepControl::from_tol(tol),
        times.iter().copied(),
        |t, y| {
            traj.push(t, StateVector::from_real(y));
            true
        },
    )?;
    Ok(traj)
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.first().is_some_and(|&t| t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput(
            "sample times must be non-decreasing and >= 0".into(),
        ));
    }
    Ok(())
}

/// Which interaction-picture amplitude system to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplitudeForm {
    /// `c_e` carries the factor `exp(Gamma t / 2)`; zero detuning only.
    WeakDrive,
    /// Decay kept as an explicit `-Gamma/2 c_e` term; any detuning.
    StrongDrive,
}

impl AmplitudeForm {
    /// Weak-drive form at zero detuning, strong-drive form otherwise.
    pub fn for_params(p: &ScaledParams) -> Self {
        if p.detuning == 0.0 {
            Self::WeakDrive
        } else {
            Self::StrongDrive
        }
    }
}

struct Amplitudes<'a> {
    p: &'a ScaledParams,
    row: BesselRow,
    form: AmplitudeForm,
}

impl Amplitudes<'_> {
    /// `sum_k J_k(xi) e^{ikt}`, the truncated Jacobi–Anger series of `e^{i xi sin t}`.
    #[inline]
    fn sideband_sum(&self, t: f64) -> Complex64 {
        let step = Complex64::from_polar(1.0, t);
        let inv = step.conj();
        let mut up = Complex64::new(1.0, 0.0);
        let mut down = Complex64::new(1.0, 0.0);
        let values = self.row.non_negative();
        let mut sum = Complex64::new(values[0], 0.0);
        for (k, &j) in values.iter().enumerate().skip(1) {
            up *= step;
            down *= inv;
            let neg = if k % 2 == 0 { j } else { -j };
            sum += j * up + neg * down;
        }
        sum
    }

    fn to_state(&self, t: f64, c_g: Complex64, c_e: Complex64) -> StateVector {
        let s = t.sin();
        let psi_g = c_g * Complex64::from_polar(1.0, -self.p.v_g * s);
        let psi_e = match self.form {
            AmplitudeForm::WeakDrive => c_e * Complex64::from_polar((-0.5 * self.p.gamma * t).exp(), -self.p.v_e * s),
            AmplitudeForm::StrongDrive => c_e * Complex64::from_polar(1.0, -self.p.v_e * s - self.p.detuning * t),
        };
        StateVector::new(psi_g, psi_e)
    }
}

impl OdeSystem<4> for Amplitudes<'_> {
    #[inline]
    fn rhs(&self, t: f64, y: &[f64; 4], dy: &mut [f64; 4]) {
        let c_g = Complex64::new(y[0], y[1]);
        let c_e = Complex64::new(y[2], y[3]);
        let z = self.sideband_sum(t);
        let half_rabi = 0.5 * self.p.rabi;
        let (dg, de) = match self.form {
            AmplitudeForm::WeakDrive => {
                let g = (0.5 * self.p.gamma * t).exp();
                (-I * half_rabi * c_e * z.conj() / g, -I * half_rabi * c_g * z * g)
            }
            AmplitudeForm::StrongDrive => {
                let phase = Complex64::from_polar(1.0, self.p.detuning * t);
                (
                    -I * half_rabi * c_e * (z * phase).conj(),
                    -I * half_rabi * c_g * z * phase - 0.5 * self.p.gamma * c_e,
                )
            }
        };
        *dy = [dg.re, dg.im, de.re, de.im];
    }
}

/// Integrates the slowly varying amplitudes `c_g, c_e` (Bessel series
/// truncated at the default tail tolerance) and maps back to `psi`.
pub fn evolve_amplitude_basis(p: &ScaledParams, t_end: f64, tol: f64, form: AmplitudeForm) -> Result<Trajectory> {
    if !(t_end > 0.0) {
        return Err(Error::InvalidInput(format!("t_end must be positive, got {t_end}")));
    }
    evolve_amplitude_basis_at(p, &default_times(t_end), tol, form)
}

pub fn evolve_amplitude_basis_at(p: &ScaledParams, times: &[f64], tol: f64, form: AmplitudeForm) -> Result<Trajectory> {
    p.validate()?;
    check_times(times)?;
    if form == AmplitudeForm::WeakDrive && p.detuning != 0.0 {
        return Err(Error::InvalidInput(
            "weak-drive amplitude form requires zero detuning".into(),
        ));
    }
    let sys = Amplitudes {
        p,
        row: truncated_row(p.xi(), DEFAULT_TAIL_TOL, 0),
        form,
    };
    let mut traj = Trajectory::default();
    integrate_sampled(
        &sys,
        0.0,
        [1.0, 0.0, 0.0, 0.0],
        StepControl::from_tol(tol),
        times.iter().copied(),
        |t, y| {
            let s = sys.to_state(t, Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3]));
            traj.push(t, s);
            true
        },
    )?;
    Ok(traj)
}

/// Long-time perturbative solution: the ground amplitude decays at the
/// renormalized rate `zeta = (Omega^2 / 2) Gamma S(xi, Gamma, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSolution {
    pub zeta: f64,
    pub params: ScaledParams,
    row: BesselRow,
}

impl AnalyticSolution {
    pub fn new(p: &ScaledParams) -> Result<Self> {
        p.validate()?;
        let row = truncated_row(p.xi(), DEFAULT_TAIL_TOL, 0);
        let s = lorentz_sum(p.xi(), p.gamma, 0.0)?;
        Ok(Self {
            zeta: 0.5 * p.rabi * p.rabi * p.gamma * s,
            params: *p,
            row,
        })
    }

    pub fn mean_waiting_time(&self) -> f64 {
        1.0 / (2.0 * self.zeta)
    }

    pub fn state(&self, t: f64) -> StateVector {
        let p = &self.params;
        let g = p.gamma;
        let s = t.sin();
        let decay = (-self.zeta * t).exp();
        let psi_g = Complex64::from_polar(decay, -p.v_g * s);
        let damp = (-0.5 * g * t).exp();
        let mut sum = Complex64::new(0.0, 0.0);
        for k in -(self.row.order() as i64)..=self.row.order() as i64 {
            let j = self.row.get(k);
            if j == 0.0 {
                continue;
            }
            let term = if k == 0 {
                // (1 - e^{-g t/2}) / g, finite as g -> 0
                let v = if g == 0.0 {
                    0.5 * t
                } else {
                    -(-0.5 * g * t).exp_m1() / g
                };
                Complex64::new(v, 0.0)
            } else {
                let kf = k as f64;
                (Complex64::from_polar(1.0, kf * t) - damp) * Complex64::new(g, -2.0 * kf) / (g * g + 4.0 * kf * kf)
            };
            sum += j * term;
        }
        let psi_e = -I * p.rabi * Complex64::from_polar(decay, -p.v_e * s) * sum;
        StateVector::new(psi_g, psi_e)
    }
}

pub fn analytic_wavefunction(p: &ScaledParams, t: f64) -> Result<StateVector> {
    Ok(AnalyticSolution::new(p)?.state(t))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaitingTimeOptions {
    pub tol: f64,
    pub tail: f64,
    pub samples_per_period: usize,
}

impl Default for WaitingTimeOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            tail: DEFAULT_TAIL,
            samples_per_period: DEFAULT_SAMPLES_PER_PERIOD,
        }
    }
}

impl WaitingTimeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// `P0` on a uniform grid from `t = 0` until it first drops below the tail
/// level, with the fitted exponential rate of the last decade.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalGrid {
    pub dt: f64,
    pub survival: Vec<f64>,
    /// Decay rate of `P0` fitted over the last decade.
    pub tail_rate: f64,
    /// RMS residual of the log-linear tail fit.
    pub tail_fit_residual: f64,
}

impl SurvivalGrid {
    pub fn compute(p: &ScaledParams, opts: &WaitingTimeOptions) -> Result<Self> {
        p.validate()?;
        if p.rabi == 0.0 {
            return Err(Error::DivergentWaitingTime("rabi = 0 decouples the ground state"));
        }
        if p.gamma == 0.0 {
            return Err(Error::DivergentWaitingTime("gamma = 0 conserves the norm"));
        }
        let per_period = opts.samples_per_period.max(2) & !1;
        let dt = TAU / per_period as f64;
        let sys = Schrodinger(p);
        let mut survival = Vec::new();
        integrate_sampled(
            &sys,
            0.0,
            StateVector::GROUND.to_real(),
            StepControl::from_tol(opts.tol),
            (0..).map(|i| i as f64 * dt),
            |_, y| {
                let v = StateVector::from_real(y).norm_sqr();
                survival.push(v);
                // stop on an even index so Simpson's rule closes cleanly
                !(v < opts.tail && survival.len() % 2 == 1)
            },
        )?;
        let (tail_rate, tail_fit_residual) = fit_tail(&survival, dt, opts.tail, per_period);
        Ok(Self {
            dt,
            survival,
            tail_rate,
            tail_fit_residual,
        })
    }

    pub fn t_cut(&self) -> f64 {
        (self.survival.len() - 1) as f64 * self.dt
    }

    /// Composite Simpson integral of `P0` over `[0, t_cut]`.
    pub fn simpson(&self) -> f64 {
        let v = &self.survival;
        let n = v.len() - 1;
        let mut odd = 0.0;
        let mut even = 0.0;
        for (i, &x) in v.iter().enumerate().take(n).skip(1) {
            if i % 2 == 1 {
                odd += x;
            } else {
                even += x;
            }
        }
        self.dt / 3.0 * (v[0] + v[n] + 4.0 * odd + 2.0 * even)
    }

    pub fn tail_correction(&self) -> f64 {
        self.survival[self.survival.len() - 1] / self.tail_rate
    }

    /// Inverse of the waiting-time CDF `F = 1 - P0`, for `u` in `[0, 1)`.
    pub fn inverse_cdf(&self, envelope: &[f64], u: f64) -> f64 {
        let target = 1.0 - u;
        let idx = envelope.partition_point(|&s| s > target);
        if idx == 0 {
            return 0.0;
        }
        if idx == envelope.len() {
            let last = envelope[idx - 1];
            return self.t_cut() + (last / target).ln() / self.tail_rate;
        }
        let (s0, s1) = (envelope[idx - 1], envelope[idx]);
        let frac = if s0 > s1 { (s0 - target) / (s0 - s1) } else { 0.0 };
        ((idx - 1) as f64 + frac) * self.dt
    }

    /// Running minimum of `P0`, which is non-increasing up to integration error.
    pub fn monotone_envelope(&self) -> Vec<f64> {
        let mut m = f64::INFINITY;
        self.survival
            .iter()
            .map(|&s| {
                m = m.min(s);
                m
            })
            .collect()
    }
}

/// Log-linear least squares on the final decade of `P0`. Uses stroboscopic
/// samples (one per rf period) when there are enough of them, which removes
/// the intra-period ripple from the fit.
fn fit_tail(survival: &[f64], dt: f64, tail: f64, per_period: usize) -> (f64, f64) {
    let start = survival.iter().rposition(|&s| s > 10.0 * tail).map_or(0, |i| i + 1);
    let strobe: Vec<usize> = (start..survival.len()).filter(|i| i % per_period == 0).collect();
    let idx: Vec<usize> = if strobe.len() >= 4 {
        strobe
    } else {
        let lo = start.saturating_sub(1);
        (lo..survival.len()).collect()
    };
    let pts: Vec<(f64, f64)> = idx.iter().map(|&i| (i as f64 * dt, survival[i].ln())).collect();
    let (slope, _, rms) = crate::fit::linear_fit(&pts);
    (-slope, rms)
}

/// Result of the waiting-time quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaitingTime {
    pub mean: f64,
    pub t_cut: f64,
    pub tail_correction: f64,
    pub tail_rate: f64,
    pub tail_fit_residual: f64,
}

pub fn waiting_time(p: &ScaledParams, opts: &WaitingTimeOptions) -> Result<WaitingTime> {
    let grid = SurvivalGrid::compute(p, opts)?;
    let tail_correction = grid.tail_correction();
    Ok(WaitingTime {
        mean: grid.simpson() + tail_correction,
        t_cut: grid.t_cut(),
        tail_correction,
        tail_rate: grid.tail_rate,
        tail_fit_residual: grid.tail_fit_residual,
    })
}

/// `<tau> = integral of P0 over [0, inf)`.
pub fn mean_waiting_time_numeric(p: &ScaledParams, tol: f64) -> Result<f64> {
    waiting_time(p, &WaitingTimeOptions::with_tol(tol)).map(|w| w.mean)
}

/// `n` first-emission waiting times by inverse-CDF sampling of `1 - P0`.
/// Deterministic for a given seed.
pub fn sample_waiting_times(p: &ScaledParams, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidInput("sample count must be at least 1".into()));
    }
    let grid = SurvivalGrid::compute(p, &WaitingTimeOptions::default())?;
    let envelope = grid.monotone_envelope();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| grid.inverse_cdf(&envelope, rng.gen::<f64>())).collect())
}
