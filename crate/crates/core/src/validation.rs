// SPDX-License-Identifier: Apache-2.0

//! The acceptance checklist: each criterion is a set of measured values
//! compared against declared tolerances.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_zero, truncated_row, DEFAULT_TAIL_TOL};
use crate::dynamics::{evolve, evolve_at, mean_waiting_time_numeric, sample_waiting_times, AnalyticSolution};
use crate::error::{Error, Result};
use crate::figures::{self, local_maxima, SpectrumCurve, WaitingTimeCurve, FIG1_XI};
use crate::parallel::Executor;
use crate::params::ScaledParams;
use crate::resonance::{
    branch_end, critical_exponent_fit_at, find_critical_point, find_extrema, fold_residuals, pair_at,
    small_gamma_shift, ExtremumKind,
};
use crate::rg::{emission_rate_strong_drive, mean_tau_rg, mean_tau_rg_detuned};
use crate::roots::grid;
use crate::series::{lorentz_sum, lorentz_sum_dxi};
use crate::sweep::Tolerances;

/// Two-sided Kolmogorov-Smirnov critical value at significance 0.01,
/// multiplied by `sqrt(n)`.
pub const KS_CRITICAL_01: f64 = 1.628;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidationConfig {
    /// Criteria to run, by number.
    pub criteria: Vec<u32>,
    /// Rabi frequency of the weak-drive checks.
    pub rabi: f64,
    /// Decay rates of the waiting-time curves.
    pub gammas: Vec<f64>,
    /// Allowed relative gap between the integrated and closed-form `<tau>`.
    pub agreement: f64,
    /// Decay rate and modulation index of the sampler check.
    pub gamma: f64,
    pub xi: f64,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub bloch_tol: f64,
    /// Decay rates at which extremum positions are checked against the ODE.
    pub argmax_gammas: Vec<f64>,
    /// `Omega / Gamma` of the three spectra.
    pub spectrum_ratios: Vec<f64>,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            criteria: (1..=6).collect(),
            rabi: figures::FIG1_RABI,
            gammas: figures::FIG1_GAMMAS.to_vec(),
            agreement: 0.02,
            gamma: 0.5,
            xi: 1.0,
            samples: 100_000,
            seed: 1,
            tol: crate::dynamics::DEFAULT_TOL,
            bloch_tol: crate::bloch::DEFAULT_TOL,
            argmax_gammas: vec![0.25, 0.5, 1.0],
            spectrum_ratios: figures::FIG4_RATIOS.to_vec(),
        }
    }
}

impl ValidationConfig {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            ode: self.tol,
            bloch: self.bloch_tol,
        }
    }

    pub fn check(&self) -> Result<()> {
        if let Some(c) = self.criteria.iter().find(|c| !(1..=6).contains(*c)) {
            return Err(Error::InvalidInput(format!("criterion {c} does not exist (1..=6)")));
        }
        if !(self.tol > 0.0) || !(self.bloch_tol > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub measured: f64,
    /// Human-readable bound, e.g. `<= 0.02`.
    pub tolerance: String,
    pub passed: bool,
}

impl Check {
    fn at_most(label: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            label: label.into(),
            measured,
            tolerance: format!("<= {bound:e}"),
            passed: measured <= bound,
        }
    }

    fn within(label: impl Into<String>, measured: f64, lo: f64, hi: f64) -> Self {
        Self {
            label: label.into(),
            measured,
            tolerance: format!("in ({lo}, {hi})"),
            passed: measured > lo && measured < hi,
        }
    }

    fn holds(label: impl Into<String>, measured: f64, passed: bool, tolerance: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            measured,
            tolerance: tolerance.into(),
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub title: &'static str,
    pub checks: Vec<Check>,
    /// Set when the criterion could not be evaluated at all.
    pub error: Option<String>,
    pub seconds: f64,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    /// One `PASS`/`FAIL` line for the criterion followed by one indented
    /// line per check.
    pub fn render(&self) -> String {
        let mut out = format!(
            "{} criterion {}: {} ({:.1} s)\n",
            if self.passed() { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.seconds
        );
        if let Some(e) = &self.error {
            out.push_str(&format!("    error: {e}\n"));
        }
        for c in &self.checks {
            out.push_str(&format!(
                "    [{}] {}: measured {:.6e}, required {}\n",
                if c.passed { "ok" } else { "xx" },
                c.label,
                c.measured,
                c.tolerance
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub criteria: Vec<CriterionReport>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(CriterionReport::passed)
    }

    pub fn render(&self) -> String {
        let mut out: String = self.criteria.iter().map(CriterionReport::render).collect();
        let failed = self.criteria.iter().filter(|c| !c.passed()).count();
        out.push_str(&format!(
            "{} of {} criteria passed\n",
            self.criteria.len() - failed,
            self.criteria.len()
        ));
        out
    }
}

pub fn title(id: u32) -> &'static str {
    match id {
        1 => "integrated waiting time vs weak-drive closed form",
        2 => "extremum crossings present at gamma = 1.0, absent at gamma = 2.5",
        3 => "critical points, pairwise annihilation and square-root exponent",
        4 => "strong-drive spectrum vs Bloch reference",
        5 => "property suite",
        6 => "inverse-CDF waiting-time sampler",
        _ => "unknown",
    }
}

pub fn run_criterion(id: u32, cfg: &ValidationConfig, exec: &Executor) -> CriterionReport {
    let start = Instant::now();
    let result = match id {
        1 => criterion_waiting_time(cfg, exec),
        2 => criterion_crossings(),
        3 => criterion_critical(cfg, exec),
        4 => criterion_spectrum(cfg, exec),
        5 => criterion_properties(cfg),
        6 => criterion_sampler(cfg),
        _ => Err(Error::InvalidInput(format!("criterion {id} does not exist"))),
    };
    let (checks, error) = match result {
        Ok(c) => (c, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    CriterionReport {
        id,
        title: title(id),
        checks,
        error,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn validate(cfg: &ValidationConfig, exec: &Executor) -> Result<ValidationReport> {
    cfg.check()?;
    Ok(ValidationReport {
        criteria: cfg.criteria.iter().map(|&id| run_criterion(id, cfg, exec)).collect(),
    })
}

/// Vertex of the parabola through the grid maximum at `i` and its neighbours.
fn refine_peak(x: &[f64], v: &[f64], i: usize) -> f64 {
    let (a, b, c) = (v[i - 1], v[i], v[i + 1]);
    let curv = a - 2.0 * b + c;
    if curv == 0.0 {
        return x[i];
    }
    let h = x[i + 1] - x[i];
    x[i] + 0.5 * h * (a - c) / curv
}

fn refined_maxima(x: &[f64], v: &[f64]) -> Vec<f64> {
    (1..v.len().saturating_sub(1))
        .filter(|&i| v[i] > v[i - 1] && v[i] >= v[i + 1])
        .map(|i| refine_peak(x, v, i))
        .collect()
}

fn criterion_waiting_time(cfg: &ValidationConfig, exec: &Executor) -> Result<Vec<Check>> {
    let start = Instant::now();
    let xi = grid(FIG1_XI.0, FIG1_XI.1, FIG1_XI.2);
    let tol = cfg.tolerances();
    let curves: Vec<WaitingTimeCurve> = cfg
        .gammas
        .iter()
        .map(|&g| figures::waiting_time_curve(g, cfg.rabi, &xi, &tol, exec))
        .collect::<Result<_>>()?;
    let elapsed = start.elapsed().as_secs_f64();
    let mut checks = Vec::new();
    for c in &curves {
        let (gap, at) = c.worst_relative_gap();
        checks.push(Check::at_most(
            format!("gamma = {}: max relative gap, worst at xi = {at}", c.gamma),
            gap,
            cfg.agreement,
        ));
    }
    if let Some(c) = curves.iter().find(|c| c.gamma == 0.5) {
        let scaled: Vec<f64> = c.ode_values().iter().map(|t| c.gamma * t).collect();
        let peaks = refined_maxima(&c.xi, &scaled);
        for n in 1..=2 {
            let z = bessel_zero(0, n);
            let Some(&peak) = peaks.iter().min_by(|a, b| (*a - z).abs().total_cmp(&(*b - z).abs())) else {
                checks.push(Check::holds(
                    format!("maximum near zero {n} of J_0"),
                    f64::NAN,
                    false,
                    "exists",
                ));
                continue;
            };
            let shift = peak - z;
            let predicted = small_gamma_shift(n, c.gamma);
            checks.push(Check::at_most(
                format!("gamma = 0.5: |xi_max{n} - {z:.6}|"),
                shift.abs(),
                0.1,
            ));
            // closer to the predicted location than to the bare zero
            let toward = (shift - predicted).abs() < shift.abs();
            checks.push(Check::holds(
                format!("gamma = 0.5: |shift {n} - predicted {predicted:.5}| relative to |shift|"),
                (shift - predicted).abs() / shift.abs(),
                toward,
                "< 1",
            ));
        }
    }
    checks.push(Check::at_most(
        format!("wall time for the curves ({} jobs)", exec.jobs()),
        elapsed,
        300.0,
    ));
    Ok(checks)
}

fn criterion_crossings() -> Result<Vec<Check>> {
    let (z1, z2) = (bessel_zero(0, 1), bessel_zero(0, 2));
    let lo = z1 - 1.0;
    let hi = z2 + 1.0;
    let mut checks = Vec::new();
    let at_one = find_extrema(1.0, lo, hi);
    for z in [z1, z2] {
        let nearest = at_one
            .iter()
            .map(|e| (e.xi_star - z).abs())
            .fold(f64::INFINITY, f64::min);
        checks.push(Check::at_most(
            format!("gamma = 1.0: distance of nearest zero of F to {z:.6}"),
            nearest,
            0.5,
        ));
    }
    checks.push(Check::holds(
        format!("gamma = 2.5: zeros of F on [{lo:.3}, {hi:.3}]"),
        find_extrema(2.5, lo, hi).len() as f64,
        find_extrema(2.5, lo, hi).is_empty(),
        "== 0",
    ));
    Ok(checks)
}

/// Location of the ODE maximum of `<tau>` on a 0.01 grid around `center`.
fn ode_argmax(gamma: f64, rabi: f64, center: f64, tol: &Tolerances, exec: &Executor) -> Result<f64> {
    let xs: Vec<f64> = (-10..=10).map(|i| center + 0.01 * i as f64).collect();
    let taus = exec
        .map(&xs, |&x| {
            let p = ScaledParams::with_xi(gamma, rabi, 0.0, x)?;
            mean_waiting_time_numeric(&p, tol.ode)
        })
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let i = (1..taus.len() - 1)
        .max_by(|&a, &b| taus[a].total_cmp(&taus[b]))
        .expect("non-empty grid");
    Ok(refine_peak(&xs, &taus, i))
}

fn criterion_critical(cfg: &ValidationConfig, exec: &Executor) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let tol = cfg.tolerances();
    for n in 1..=2 {
        let cp = find_critical_point(n)?;
        checks.push(Check::within(format!("n = {n}: gamma_cr"), cp.gamma_cr, 1.0, 2.5));
        let (r1, r2) = fold_residuals(&cp);
        checks.push(Check::at_most(
            format!("n = {n}: fold residual max(|S'|, |S''|)"),
            r1.abs().max(r2.abs()),
            1e-8,
        ));
        let max_end = branch_end(n, ExtremumKind::Max, 1e-10)?;
        let min_end = branch_end(n, ExtremumKind::Min, 1e-10)?;
        checks.push(Check::at_most(
            format!("n = {n}: |gamma where max ends - gamma where min ends|"),
            (max_end - min_end).abs(),
            1e-6,
        ));
        checks.push(Check::at_most(
            format!("n = {n}: |gamma where max ends - gamma_cr|"),
            (max_end - cp.gamma_cr).abs(),
            1e-6,
        ));
        let fit = critical_exponent_fit_at(&cp)?;
        checks.push(Check::at_most(
            format!("n = {n}: |beta - 0.5| (beta = {:.4})", fit.beta),
            (fit.beta - 0.5).abs(),
            0.05,
        ));
        checks.push(Check::at_most(
            format!("n = {n}: log-log RMS residual"),
            fit.rms_residual,
            0.02,
        ));
    }
    for &g in &cfg.argmax_gammas {
        for n in 1..=2 {
            let Some((max, _)) = pair_at(n, g) else {
                checks.push(Check::holds(
                    format!("gamma = {g}: maximum {n} exists"),
                    f64::NAN,
                    false,
                    "exists",
                ));
                continue;
            };
            let ode = ode_argmax(g, cfg.rabi, max.xi_star, &tol, exec)?;
            checks.push(Check::at_most(
                format!("gamma = {g}: |ODE argmax - xi* {:.6}| for maximum {n}", max.xi_star),
                (ode - max.xi_star).abs(),
                0.02,
            ));
        }
    }
    Ok(checks)
}

fn integer_distance(x: f64) -> f64 {
    (x - x.round()).abs()
}

fn criterion_spectrum(cfg: &ValidationConfig, exec: &Executor) -> Result<Vec<Check>> {
    let tol = cfg.tolerances();
    let curves: Vec<SpectrumCurve> = cfg
        .spectrum_ratios
        .iter()
        .map(|&r| figures::spectrum_curve(r, &tol, exec))
        .collect::<Result<_>>()?;
    let mut checks = Vec::new();
    for c in &curves {
        let (gap, at) = c.worst_normalized_gap();
        let bound = if c.ratio == 0.29 {
            Some(0.10)
        } else if c.ratio == 3.2 {
            Some(0.20)
        } else {
            None
        };
        let label = format!(
            "Omega = {} Gamma: max normalized gap, worst at delta = {at:.2}",
            c.ratio
        );
        match bound {
            Some(b) => checks.push(Check::at_most(label, gap, b)),
            None => checks.push(Check::holds(label, gap, true, "reported only")),
        }
        for (name, v) in [("strong-drive formula", &c.rg_strong), ("Bloch", &c.bloch)] {
            let peaks = local_maxima(&c.delta, v);
            let worst = peaks.iter().map(|&d| integer_distance(d)).fold(0.0, f64::max);
            checks.push(Check::holds(
                format!("Omega = {} Gamma, {name}: peaks {:?} off integer by", c.ratio, peaks),
                worst,
                !peaks.is_empty() && worst <= figures::FIG4_DELTA.2,
                format!("<= {} (grid step)", figures::FIG4_DELTA.2),
            ));
        }
    }
    Ok(checks)
}

fn criterion_properties(cfg: &ValidationConfig) -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    let mut worst_rise: f64 = 0.0;
    for p in [
        ScaledParams::with_xi(0.5, 0.1, 0.0, 2.4)?,
        ScaledParams::with_xi(1.0 / 7.0, 0.457, 0.3, 1.14)?,
        ScaledParams::with_xi(3.0, 0.1, 0.0, 5.5)?,
    ] {
        let traj = evolve(&p, 500.0, cfg.tol)?;
        for w in traj.survival.windows(2) {
            worst_rise = worst_rise.max(w[1] - w[0]);
        }
    }
    checks.push(Check::at_most("largest single-step rise of P0", worst_rise, 1e-9));

    let traj = evolve(&ScaledParams::with_xi(0.0, 0.3, 0.0, 2.0)?, 1000.0, 1e-12)?;
    let drift = traj.survival.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
    checks.push(Check::at_most("gamma = 0: max |P0 - 1| over t <= 1000", drift, 1e-9));

    let deficit = grid(0.0, 10.0, 0.1)
        .iter()
        .map(|&x| 1.0 - truncated_row(x, DEFAULT_TAIL_TOL, 0).norm_sqr())
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::at_most(
        "max of 1 - sum J_k^2 on xi = 0..10 step 0.1",
        deficit,
        1e-12,
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let h = 1e-5;
    let mut worst_fd: f64 = 0.0;
    for _ in 0..50 {
        let x = rng.gen_range(0.0..8.0);
        let g = rng.gen_range(0.2..3.0);
        let fd = (lorentz_sum(x + h, g, 0.0)? - lorentz_sum(x - h, g, 0.0)?) / (2.0 * h);
        worst_fd = worst_fd.max((fd - lorentz_sum_dxi(x, g)).abs());
    }
    checks.push(Check::at_most(
        "|dS/dxi - central difference| on 50 random points",
        worst_fd,
        1e-6,
    ));

    let mut mismatches = 0;
    let mut zeta_gap: f64 = 0.0;
    for x in grid(0.0, 8.0, 0.25) {
        for g in [0.14, 0.5, 1.5, 3.0] {
            let a = mean_tau_rg(x, g, 0.1)?.inverse_tau;
            let b = mean_tau_rg_detuned(x, g, 0.1, 0.0)?.inverse_tau;
            mismatches += usize::from(a.to_bits() != b.to_bits());
            let p = ScaledParams::with_xi(g, 0.1, 0.0, x)?;
            let tau = AnalyticSolution::new(&p)?.mean_waiting_time();
            let want = 1.0 / a;
            zeta_gap = zeta_gap.max((tau - want).abs() / want);
        }
    }
    checks.push(Check::holds(
        "detuned formula at delta = 0: bitwise mismatches",
        mismatches as f64,
        mismatches == 0,
        "== 0",
    ));

    let mut k0 = 0;
    for (g, r) in [(1.0 / 7.0, 0.457), (0.5, 0.1), (0.3, 0.9), (1.0 / 7.0, 0.04)] {
        let got = emission_rate_strong_drive(0.0, g, r, 0.0)?.inverse_tau;
        k0 += usize::from(got != g * r * r / (g * g + 2.0 * r * r));
    }
    checks.push(Check::holds(
        "strong-drive rate at xi = 0, delta = 0: inexact cases",
        k0 as f64,
        k0 == 0,
        "== 0",
    ));
    checks.push(Check::at_most(
        "|1/(2 zeta) - closed-form <tau>| relative",
        zeta_gap,
        1e-12,
    ));
    Ok(checks)
}

/// Two-sided KS distance between sorted samples and the CDF values at them.
pub fn ks_statistic(cdf_at_sorted: &[f64]) -> f64 {
    let n = cdf_at_sorted.len() as f64;
    cdf_at_sorted
        .iter()
        .enumerate()
        .map(|(i, &f)| (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs()))
        .fold(0.0, f64::max)
}

fn criterion_sampler(cfg: &ValidationConfig) -> Result<Vec<Check>> {
    let p = ScaledParams::with_xi(cfg.gamma, cfg.rabi, 0.0, cfg.xi)?;
    let tau = mean_waiting_time_numeric(&p, cfg.tol)?;
    let mut samples = sample_waiting_times(&p, cfg.samples, cfg.seed)?;
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    samples.sort_by(f64::total_cmp);
    let traj = evolve_at(&p, &samples, cfg.tol)?;
    let cdf: Vec<f64> = traj.survival.iter().map(|s| 1.0 - s).collect();
    let d = ks_statistic(&cdf);
    let critical = KS_CRITICAL_01 / n.sqrt();
    Ok(vec![
        Check::at_most(
            format!("|sample mean - <tau>| / standard error (mean {mean:.4}, <tau> {tau:.4})"),
            (mean - tau).abs() / se,
            3.0,
        ),
        Check::at_most(
            format!("KS distance against 1 - P0 (n = {})", samples.len()),
            d,
            critical,
        ),
    ])
}
