// SPDX-License-Identifier: Apache-2.0

//! One-dimensional parameter sweeps over any of the scaled couplings,
//! evaluated with one or more engines per grid point.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bloch;
use crate::dynamics::{mean_waiting_time_numeric, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::parallel::Executor;
use crate::params::{Regime, ScaledParams};
use crate::rg::{emission_rate_strong_drive, mean_tau_rg, mean_tau_rg_detuned, RatePrediction};
use crate::roots::grid;
use crate::table::{num, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Quadrature of the integrated survival probability.
    Ode,
    RgWeak,
    RgDetuned,
    RgStrong,
    /// `Gamma * <rho_ee>` from the modulated Bloch equations.
    Bloch,
}

impl Engine {
    pub const ALL: [Engine; 5] = [
        Engine::Ode,
        Engine::RgWeak,
        Engine::RgDetuned,
        Engine::RgStrong,
        Engine::Bloch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Engine::Ode => "ode",
            Engine::RgWeak => "rg_weak",
            Engine::RgDetuned => "rg_detuned",
            Engine::RgStrong => "rg_strong",
            Engine::Bloch => "bloch",
        }
    }

    fn intended_regime(self) -> Option<Regime> {
        match self {
            Engine::RgWeak | Engine::RgDetuned => Some(Regime::WeakDrive),
            Engine::RgStrong => Some(Regime::StrongDrive),
            Engine::Ode | Engine::Bloch => None,
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Engine::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown engine '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Xi,
    Gamma,
    Delta,
    Rabi,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Xi => "xi",
            SweepVariable::Gamma => "gamma",
            SweepVariable::Delta => "delta",
            SweepVariable::Rabi => "rabi",
        }
    }

    pub fn apply(self, p: ScaledParams, value: f64) -> ScaledParams {
        match self {
            SweepVariable::Xi => p.set_xi(value),
            SweepVariable::Gamma => p.set_gamma(value),
            SweepVariable::Delta => p.set_detuning(value),
            SweepVariable::Rabi => p.set_rabi(value),
        }
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xi" => Ok(Self::Xi),
            "gamma" => Ok(Self::Gamma),
            "delta" => Ok(Self::Delta),
            "rabi" => Ok(Self::Rabi),
            _ => Err(Error::InvalidInput(format!("unknown sweep variable '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    pub fixed: ScaledParams,
    pub engines: Vec<Engine>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative ODE tolerance for the waiting-time quadrature.
    pub ode: f64,
    /// Cauchy tolerance on successive period averages.
    pub bloch: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ode: DEFAULT_TOL,
            bloch: bloch::DEFAULT_TOL,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::InvalidInput(format!(
                "sweep needs lo < hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::InvalidInput(format!(
                "sweep step must be positive, got {}",
                self.step
            )));
        }
        if self.engines.is_empty() {
            return Err(Error::InvalidInput("sweep needs at least one engine".into()));
        }
        self.fixed.validate()
    }

    pub fn grid(&self) -> Vec<f64> {
        grid(self.lo, self.hi, self.step)
    }

    pub fn points(&self) -> Vec<ScaledParams> {
        self.grid()
            .into_iter()
            .map(|v| self.variable.apply(self.fixed, v))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineResult {
    pub engine: Engine,
    /// `1/<tau>`, or the steady emission rate for [`Engine::Bloch`].
    pub inverse_tau: Option<f64>,
    pub warnings: Vec<String>,
    pub error: Option<String>,
}

impl EngineResult {
    pub fn mean_tau(&self) -> Option<f64> {
        self.inverse_tau.map(|r| 1.0 / r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub value: f64,
    pub params: ScaledParams,
    pub results: Vec<EngineResult>,
}

impl SweepRow {
    pub fn result(&self, engine: Engine) -> Option<&EngineResult> {
        self.results.iter().find(|r| r.engine == engine)
    }
}

fn from_prediction(engine: Engine, r: Result<RatePrediction>) -> EngineResult {
    match r {
        Ok(pred) => EngineResult {
            engine,
            inverse_tau: Some(pred.inverse_tau),
            warnings: pred.validity_warnings,
            error: None,
        },
        Err(e) => failed(engine, e),
    }
}

fn failed(engine: Engine, e: Error) -> EngineResult {
    EngineResult {
        engine,
        inverse_tau: None,
        warnings: Vec::new(),
        error: Some(e.to_string()),
    }
}

pub fn evaluate(engine: Engine, p: &ScaledParams, tol: &Tolerances) -> EngineResult {
    let (xi, g, r, d) = (p.xi(), p.gamma, p.rabi, p.detuning);
    let mut out = match engine {
        Engine::Ode => match mean_waiting_time_numeric(p, tol.ode) {
            Ok(tau) => EngineResult {
                engine,
                inverse_tau: Some(1.0 / tau),
                warnings: Vec::new(),
                error: None,
            },
            Err(e) => failed(engine, e),
        },
        Engine::RgWeak => {
            let mut res = from_prediction(engine, mean_tau_rg(xi, g, r));
            if d != 0.0 {
                res.warnings.push(format!("rg_weak ignores detuning {d}"));
            }
            res
        }
        Engine::RgDetuned => from_prediction(engine, mean_tau_rg_detuned(xi, g, r, d)),
        Engine::RgStrong => from_prediction(engine, emission_rate_strong_drive(xi, g, r, d)),
        Engine::Bloch => match bloch::period_averaged_population(p, tol.bloch) {
            Ok(rho) => EngineResult {
                engine,
                inverse_tau: Some(g * rho),
                warnings: Vec::new(),
                error: None,
            },
            Err(e) => failed(engine, e),
        },
    };
    if let Some(want) = engine.intended_regime() {
        let got = p.regime();
        let noted = out.warnings.iter().any(|w| w.contains("regime"));
        if got != want && !noted {
            out.warnings.push(format!("{engine} used outside its regime ({got:?})"));
        }
    }
    out
}

/// Evaluates every engine at every grid point. Point failures are stored in
/// the row, never propagated; only an invalid spec is an error.
pub fn run_sweep(spec: &SweepSpec, tol: &Tolerances, exec: &Executor) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let grid: Vec<(usize, f64)> = spec.grid().into_iter().enumerate().collect();
    Ok(exec.map(&grid, |&(index, value)| {
        let params = spec.variable.apply(spec.fixed, value);
        let results = spec.engines.iter().map(|&e| evaluate(e, &params, tol)).collect();
        SweepRow {
            index,
            value,
            params,
            results,
        }
    }))
}

/// CSV layout: grid index and the full parameter set, then `<engine>_inverse_tau` and `<engine>_mean_tau`
/// per engine, then `;`-joined warnings and errors.
pub fn sweep_table(spec: &SweepSpec, rows: &[SweepRow]) -> Table {
    let mut header = vec![
        "index".to_string(),
        "gamma".into(),
        "rabi".into(),
        "delta".into(),
        "xi".into(),
    ];
    for e in &spec.engines {
        header.push(format!("{e}_inverse_tau"));
        header.push(format!("{e}_mean_tau"));
    }
    header.push("warnings".into());
    header.push("error".into());
    let mut table = Table::new(header);
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    for row in rows {
        let p = &row.params;
        let mut cells = vec![
            row.index.to_string(),
            num(p.gamma),
            num(p.rabi),
            num(p.detuning),
            num(p.xi()),
        ];
        let mut warnings = Vec::new();
        let mut errors = Vec::new();
        for r in &row.results {
            cells.push(opt(r.inverse_tau));
            cells.push(opt(r.mean_tau()));
            warnings.extend(r.warnings.iter().map(|w| format!("{}: {w}", r.engine)));
            errors.extend(r.error.iter().map(|w| format!("{}: {w}", r.engine)));
        }
        warnings.dedup();
        cells.push(warnings.join("; "));
        cells.push(errors.join("; "));
        table.push(cells);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(variable: SweepVariable, lo: f64, hi: f64, step: f64, engines: Vec<Engine>) -> SweepSpec {
        SweepSpec {
            variable,
            lo,
            hi,
            step,
            fixed: ScaledParams::with_xi(0.5, 0.1, 0.0, 0.0).unwrap(),
            engines,
        }
    }

    #[test]
    fn narrow_range_gives_single_point() {
        let s = spec(SweepVariable::Xi, 1.0, 1.0 + 1e-9, 0.05, vec![Engine::RgWeak]);
        let rows = run_sweep(&s, &Tolerances::default(), &Executor::Sequential).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].value, 1.0);
    }

    #[test]
    fn invalid_specs() {
        let t = Tolerances::default();
        let ex = Executor::Sequential;
        assert!(run_sweep(&spec(SweepVariable::Xi, 1.0, 1.0, 0.1, vec![Engine::RgWeak]), &t, &ex).is_err());
        assert!(run_sweep(&spec(SweepVariable::Xi, 0.0, 1.0, 0.0, vec![Engine::RgWeak]), &t, &ex).is_err());
        assert!(run_sweep(&spec(SweepVariable::Xi, 0.0, 1.0, 0.1, vec![]), &t, &ex).is_err());
    }

    #[test]
    fn point_errors_do_not_abort() {
        // gamma = 0 at the first point: the ODE waiting time diverges there
        let s = spec(SweepVariable::Gamma, 0.0, 0.2, 0.1, vec![Engine::Ode, Engine::RgStrong]);
        let rows = run_sweep(&s, &Tolerances::default(), &Executor::Sequential).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].result(Engine::Ode).unwrap().error.is_some());
        assert!(rows[2].result(Engine::Ode).unwrap().inverse_tau.is_some());
        let table = sweep_table(&s, &rows);
        let err = table.column("error").unwrap();
        assert!(table.rows[0][err].contains("ode"));
        assert!(table.rows[2][err].is_empty());
    }

    #[test]
    fn parallel_and_sequential_tables_identical() {
        let s = spec(
            SweepVariable::Delta,
            -1.0,
            1.0,
            0.25,
            vec![Engine::RgDetuned, Engine::RgStrong],
        );
        let t = Tolerances::default();
        let a = sweep_table(&s, &run_sweep(&s, &t, &Executor::Sequential).unwrap()).to_csv_string();
        let b = sweep_table(&s, &run_sweep(&s, &t, &Executor::with_jobs(Some(3))).unwrap()).to_csv_string();
        assert_eq!(a, b);
        assert!(a.starts_with("index,gamma,rabi,delta,xi,rg_detuned_inverse_tau"));
    }

    #[test]
    fn engine_names_round_trip() {
        for e in Engine::ALL {
            assert_eq!(e.name().parse::<Engine>().unwrap(), e);
        }
        assert!("fast".parse::<Engine>().is_err());
    }

    #[test]
    fn regime_warning() {
        let p = ScaledParams::with_xi(1.0 / 7.0, 0.457, 0.0, 1.14).unwrap();
        let r = evaluate(Engine::RgDetuned, &p, &Tolerances::default());
        assert!(r.warnings.iter().any(|w| w.contains("regime")));
        let r = evaluate(Engine::RgStrong, &p, &Tolerances::default());
        assert!(!r.warnings.iter().any(|w| w.contains("regime")));
    }
}
