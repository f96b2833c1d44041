// SPDX-License-Identifier: Apache-2.0

//! Data behind the four reference figures, as plain curves and as CSV.

use std::path::{Path, PathBuf};

use crate::bessel::{bessel_j, bessel_zero};
use crate::bloch;
use crate::dynamics::mean_waiting_time_numeric;
use crate::error::{Error, Result};
use crate::parallel::Executor;
use crate::params::{scale_to_rf_units, PhysicalParams, ScaledParams};
use crate::resonance::{crossing_function, find_critical_point, track_maximum, CriticalPoint};
use crate::rg::{emission_rate_strong_drive, mean_tau_rg};
use crate::roots::grid;
use crate::sweep::Tolerances;

use crate::table::{num, Table};

pub const FIG1_RABI: f64 = 0.1;
pub const FIG1_GAMMAS: [f64; 3] = [0.5, 1.5, 3.0];
pub const FIG1_XI: (f64, f64, f64) = (0.0, 8.0, 0.05);
pub const FIG2_GAMMAS: [f64; 2] = [1.0, 2.5];
pub const FIG2_XI: (f64, f64, f64) = (0.5, 8.0, 0.01);
pub const FIG3_GAMMA_STEP: f64 = 0.05;
pub const FIG4_XI: f64 = 1.14;
pub const FIG4_RATIOS: [f64; 3] = [0.29, 0.9, 3.2];
pub const FIG4_DELTA: (f64, f64, f64) = (-2.0, 2.0, 0.02);

/// rf and decay frequencies of the experiment, `omega / 2 pi` in MHz.
pub const EXPERIMENT_RF_MHZ: f64 = 140.0;
pub const EXPERIMENT_GAMMA_MHZ: f64 = 20.0;

/// Scaled decay rate of the experiment.
pub fn experiment_gamma() -> f64 {
    let tau = std::f64::consts::TAU * 1e6;
    let p = PhysicalParams {
        omega_rf: tau * EXPERIMENT_RF_MHZ,
        gamma: tau * EXPERIMENT_GAMMA_MHZ,
        rabi: 0.0,
        detuning: 0.0,
        v_g: 0.0,
        v_e: 0.0,
    };
    scale_to_rf_units(&p).expect("positive rf frequency").gamma
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaitingTimeCurve {
    pub gamma: f64,
    pub rabi: f64,
    pub xi: Vec<f64>,
    /// Numerically integrated `<tau>`; `Err` holds the failure message.
    pub ode: Vec<std::result::Result<f64, String>>,
    pub rg: Vec<f64>,
}

impl WaitingTimeCurve {
    /// Largest `|ode - rg| / rg` over points where both are available.
    pub fn worst_relative_gap(&self) -> (f64, f64) {
        let mut worst = (0.0, f64::NAN);
        for ((x, o), r) in self.xi.iter().zip(&self.ode).zip(&self.rg) {
            let gap = match o {
                Ok(o) => (o - r).abs() / r,
                Err(_) => f64::INFINITY,
            };
            if !(gap <= worst.0) {
                worst = (gap, *x);
            }
        }
        worst
    }

    pub fn ode_values(&self) -> Vec<f64> {
        self.ode.iter().map(|o| *o.as_ref().unwrap_or(&f64::NAN)).collect()
    }
}

/// `<tau>(xi)` from both engines for one decay rate.
pub fn waiting_time_curve(
    gamma: f64,
    rabi: f64,
    xi: &[f64],
    tol: &Tolerances,
    exec: &Executor,
) -> Result<WaitingTimeCurve> {
    let ode = exec.map(xi, |&x| {
        let p = ScaledParams::with_xi(gamma, rabi, 0.0, x).map_err(|e| e.to_string())?;
        mean_waiting_time_numeric(&p, tol.ode).map_err(|e| e.to_string())
    });
    let rg = xi
        .iter()
        .map(|&x| mean_tau_rg(x, gamma, rabi).map(|p| p.mean_tau()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(WaitingTimeCurve {
        gamma,
        rabi,
        xi: xi.to_vec(),
        ode,
        rg,
    })
}

pub fn fig1_curves(tol: &Tolerances, exec: &Executor) -> Result<Vec<WaitingTimeCurve>> {
    let xi = grid(FIG1_XI.0, FIG1_XI.1, FIG1_XI.2);
    FIG1_GAMMAS
        .iter()
        .map(|&g| waiting_time_curve(g, FIG1_RABI, &xi, tol, exec))
        .collect()
}

pub fn fig1_table(curves: &[WaitingTimeCurve]) -> Table {
    let mut t = Table::new(["gamma", "xi", "gamma_tau_ode", "gamma_tau_rg"]);
    for c in curves {
        for ((x, o), r) in c.xi.iter().zip(&c.ode).zip(&c.rg) {
            let ode = o.as_ref().map(|o| num(c.gamma * o)).unwrap_or_default();
            t.push(vec![num(c.gamma), num(*x), ode, num(c.gamma * r)]);
        }
    }
    t
}

pub fn fig2_table() -> Table {
    let mut header = vec!["xi".to_string(), "j0".into()];
    header.extend(FIG2_GAMMAS.iter().map(|g| format!("g_gamma_{}", num(*g))));
    let mut t = Table::new(header);
    for x in grid(FIG2_XI.0, FIG2_XI.1, FIG2_XI.2) {
        let mut row = vec![num(x), num(bessel_j(0, x))];
        row.extend(FIG2_GAMMAS.iter().map(|&g| num(crossing_function(x, g))));
        t.push(row);
    }
    t
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftCurve {
    pub n: usize,
    pub gamma: Vec<f64>,
    pub xi_star: Vec<f64>,
    pub critical: CriticalPoint,
}

impl ShiftCurve {
    pub fn zero(&self) -> f64 {
        bessel_zero(0, self.n)
    }

    pub fn relative_shift(&self) -> Vec<f64> {
        let z = self.zero();
        self.xi_star.iter().map(|x| (x - z) / z).collect()
    }
}

/// Position of the `n`-th maximum on a decay-rate grid up to its fold.
pub fn shift_curve(n: usize) -> Result<ShiftCurve> {
    let critical = find_critical_point(n)?;
    let gammas: Vec<f64> = grid(FIG3_GAMMA_STEP, critical.gamma_cr, FIG3_GAMMA_STEP)
        .into_iter()
        .filter(|&g| g < critical.gamma_cr)
        .collect();
    let tracked = track_maximum(n, &gammas)?;
    let mut gamma = Vec::new();
    let mut xi_star = Vec::new();
    for (g, x) in gammas.into_iter().zip(tracked) {
        if let Some(x) = x {
            gamma.push(g);
            xi_star.push(x);
        }
    }
    Ok(ShiftCurve {
        n,
        gamma,
        xi_star,
        critical,
    })
}

pub fn fig3_curves(exec: &Executor) -> Result<Vec<ShiftCurve>> {
    exec.map(&[1usize, 2], |&n| shift_curve(n)).into_iter().collect()
}

pub fn fig3_table(curves: &[ShiftCurve]) -> Table {
    let mut t = Table::new(["n", "gamma", "xi_star", "relative_shift", "is_critical"]);
    for c in curves {
        let z = c.zero();
        for ((g, x), s) in c.gamma.iter().zip(&c.xi_star).zip(c.relative_shift()) {
            t.push(vec![c.n.to_string(), num(*g), num(*x), num(s), "0".into()]);
        }
        let cp = &c.critical;
        t.push(vec![
            c.n.to_string(),
            num(cp.gamma_cr),
            num(cp.xi_cr),
            num((cp.xi_cr - z) / z),
            "1".into(),
        ]);
    }
    t
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumCurve {
    pub ratio: f64,
    pub gamma: f64,
    pub rabi: f64,
    pub xi: f64,
    pub delta: Vec<f64>,
    pub rg_strong: Vec<f64>,
    pub bloch: Vec<f64>,
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let peak = v.iter().copied().fold(0.0, f64::max);
    v.iter().map(|x| x / peak).collect()
}

impl SpectrumCurve {
    pub fn rg_normalized(&self) -> Vec<f64> {
        normalized(&self.rg_strong)
    }

    pub fn bloch_normalized(&self) -> Vec<f64> {
        normalized(&self.bloch)
    }

    /// Largest pointwise difference of the peak-normalized curves.
    pub fn worst_normalized_gap(&self) -> (f64, f64) {
        let (a, b) = (self.rg_normalized(), self.bloch_normalized());
        let mut worst = (0.0, f64::NAN);
        for ((d, x), y) in self.delta.iter().zip(a).zip(b) {
            let gap = (x - y).abs();
            if !(gap <= worst.0) {
                worst = (gap, *d);
            }
        }
        worst
    }
}

/// Interior local maxima of `v` on `x`.
pub fn local_maxima(x: &[f64], v: &[f64]) -> Vec<f64> {
    (1..v.len().saturating_sub(1))
        .filter(|&i| v[i] > v[i - 1] && v[i] >= v[i + 1])
        .map(|i| x[i])
        .collect()
}

pub fn spectrum_curve(ratio: f64, tol: &Tolerances, exec: &Executor) -> Result<SpectrumCurve> {
    let gamma = experiment_gamma();
    let rabi = ratio * gamma;
    let delta = grid(FIG4_DELTA.0, FIG4_DELTA.1, FIG4_DELTA.2);
    let rg_strong = delta
        .iter()
        .map(|&d| emission_rate_strong_drive(FIG4_XI, gamma, rabi, d).map(|p| p.inverse_tau))
        .collect::<Result<Vec<f64>>>()?;
    let p = ScaledParams::with_xi(gamma, rabi, 0.0, FIG4_XI)?;
    let bloch = bloch::emission_spectrum_bloch_with(exec, &p, &delta, tol.bloch)?;
    Ok(SpectrumCurve {
        ratio,
        gamma,
        rabi,
        xi: FIG4_XI,
        delta,
        rg_strong,
        bloch,
    })
}

pub fn fig4_curves(tol: &Tolerances, exec: &Executor) -> Result<Vec<SpectrumCurve>> {
    FIG4_RATIOS.iter().map(|&r| spectrum_curve(r, tol, exec)).collect()
}

pub fn fig4_table(curves: &[SpectrumCurve]) -> Table {
    let mut t = Table::new([
        "omega_over_gamma",
        "delta",
        "rg_strong_rate",
        "bloch_rate",
        "rg_strong_norm",
        "bloch_norm",
    ]);
    for c in curves {
        let (a, b) = (c.rg_normalized(), c.bloch_normalized());
        for i in 0..c.delta.len() {
            t.push(vec![
                num(c.ratio),
                num(c.delta[i]),
                num(c.rg_strong[i]),
                num(c.bloch[i]),
                num(a[i]),
                num(b[i]),
            ]);
        }
    }
    t
}

pub fn figure_table(id: u32, tol: &Tolerances, exec: &Executor) -> Result<Table> {
    match id {
        1 => Ok(fig1_table(&fig1_curves(tol, exec)?)),
        2 => Ok(fig2_table()),
        3 => Ok(fig3_table(&fig3_curves(exec)?)),
        4 => Ok(fig4_table(&fig4_curves(tol, exec)?)),
        _ => Err(Error::InvalidInput(format!("figure id must be 1..=4, got {id}"))),
    }
}

/// Writes `fig<id>.csv` into `out_dir` and returns its path.
pub fn emit_figure_data(id: u32, out_dir: &Path, tol: &Tolerances, exec: &Executor) -> Result<PathBuf> {
    let table = figure_table(id, tol, exec)?;
    let path = out_dir.join(format!("fig{id}.csv"));
    table
        .write_path(&path)
        .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}
