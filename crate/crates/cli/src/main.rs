// SPDX-License-Identifier: Apache-2.0

//! `photon-window`: sweeps, figure data and validation reports for the
//! first-photon waiting time of an rf-modulated two-level emitter.

mod config;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use photon_window::dynamics::{evolve, sample_waiting_times, waiting_time, WaitingTimeOptions};
use photon_window::figures::emit_figure_data;
use photon_window::parallel::Executor;
use photon_window::resonance::{critical_exponent_fit_at, find_critical_point, find_extrema, fold_residuals};
use photon_window::sweep::{run_sweep, sweep_table, Engine, SweepSpec, SweepVariable};
use photon_window::table::{num, Table};
use photon_window::validation::validate;
use serde_json::json;

use config::{ConfigError, Overrides, Resolved, RunConfig};
use manifest::RunManifest;

const JOBS_ENV: &str = "PHOTON_WINDOW_JOBS";

#[derive(Debug, Parser)]
#[command(
    name = "photon-window",
    version,
    about = "First-photon waiting times under laser and rf driving"
)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Decay rate in units of the rf frequency.
    #[arg(long, global = true, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Rabi frequency in units of the rf frequency.
    #[arg(long, global = true, allow_negative_numbers = true)]
    rabi: Option<f64>,
    /// Modulation index V_e - V_g.
    #[arg(long, global = true, allow_negative_numbers = true)]
    xi: Option<f64>,
    /// Laser detuning in units of the rf frequency.
    #[arg(long, global = true, allow_negative_numbers = true)]
    delta: Option<f64>,
    /// Comma-separated engines: ode, rg_weak, rg_detuned, rg_strong, bloch.
    #[arg(long, global = true, value_delimiter = ',')]
    engine: Vec<Engine>,
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Relative ODE tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads; PHOTON_WINDOW_JOBS takes precedence.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the no-emission wavefunction and report the mean waiting time.
    Simulate {
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Evaluate engines over a one-dimensional parameter grid.
    Sweep {
        #[arg(long)]
        variable: Option<SweepVariable>,
        #[arg(long, allow_negative_numbers = true)]
        lo: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        hi: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Locate maxima and minima of the mean waiting time in xi.
    Extrema {
        #[arg(long)]
        xi_lo: Option<f64>,
        #[arg(long)]
        xi_hi: Option<f64>,
    },
    /// Critical decay rates where max-min pairs merge, with the exponent fit.
    Critical {
        /// Number of pairs, starting from the first.
        #[arg(long)]
        pairs: Option<usize>,
    },
    /// Regenerate the data behind figure 1, 2, 3 or 4.
    Figure { id: u32 },
    /// Run the acceptance checklist.
    Validate,
    /// Draw first-emission waiting times.
    Sample {
        #[arg(long)]
        samples: Option<usize>,
    },
}

const DEFAULT_T_END: f64 = 200.0;
const DEFAULT_XI_RANGE: (f64, f64) = (0.5, 8.0);
const DEFAULT_PAIRS: usize = 2;
const DEFAULT_SAMPLES: usize = 10_000;

/// Failure classes mapped onto exit codes.
enum Failure {
    Validation,
    Config(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Config(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation) => ExitCode::from(1),
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn jobs(flag: Option<usize>) -> anyhow::Result<Option<usize>> {
    match std::env::var(JOBS_ENV) {
        Ok(v) => {
            let n = v
                .trim()
                .parse()
                .with_context(|| format!("{JOBS_ENV}={v:?} is not a thread count"))?;
            Ok(Some(n))
        }
        Err(std::env::VarError::NotPresent) => Ok(flag),
        Err(e) => bail!("{JOBS_ENV}: {e}"),
    }
}

struct RunContext {
    cli_config: Option<PathBuf>,
    cfg: RunConfig,
    overrides: Overrides,
    out_dir: PathBuf,
    exec: Executor,
}

impl RunContext {
    fn resolve(&self) -> Result<Resolved, ConfigError> {
        self.cfg.resolve(&self.overrides)
    }

    fn manifest(&self, command: &str, r: &Resolved, outputs: &[&Path], summary: serde_json::Value) -> RunManifest {
        RunManifest {
            command: command.into(),
            config_path: self.cli_config.clone(),
            params: r.params,
            spec: None,
            engines: r.engines.clone(),
            tolerances: r.tolerances,
            seed: r.seed,
            jobs: self.exec.jobs(),
            artifact_version: env!("CARGO_PKG_VERSION").into(),
            timestamp: manifest::timestamp(),
            outputs: outputs.iter().map(|p| file_name(p)).collect(),
            summary,
        }
    }

    fn emit(&self, name: &str, table: &Table) -> anyhow::Result<PathBuf> {
        let path = self.out_dir.join(name);
        table
            .write_path(&path)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = match &cli.config {
        Some(path) => config::load_config(path)?,
        None => RunConfig::default(),
    };
    let overrides = Overrides {
        gamma: cli.gamma,
        rabi: cli.rabi,
        xi: cli.xi,
        delta: cli.delta,
        engine: (!cli.engine.is_empty()).then(|| cli.engine.clone()),
        seed: cli.seed,
        tol: cli.tol,
    };
    std::fs::create_dir_all(&cli.out_dir).with_context(|| format!("creating {}", cli.out_dir.display()))?;
    let ctx = RunContext {
        cli_config: cli.config.clone(),
        cfg,
        overrides,
        out_dir: cli.out_dir.clone(),
        exec: Executor::with_jobs(jobs(cli.jobs)?),
    };
    match cli.command {
        Command::Simulate { t_end } => simulate(&ctx, t_end),
        Command::Sweep { variable, lo, hi, step } => sweep(&ctx, variable, lo, hi, step),
        Command::Extrema { xi_lo, xi_hi } => extrema(&ctx, xi_lo, xi_hi),
        Command::Critical { pairs } => critical(&ctx, pairs),
        Command::Figure { id } => figure(&ctx, id),
        Command::Validate => validation(&ctx),
        Command::Sample { samples } => sample(&ctx, samples),
    }
}

fn simulate(ctx: &RunContext, t_end: Option<f64>) -> Result<(), Failure> {
    let r = ctx.resolve()?;
    let t_end = t_end.or(ctx.cfg.t_end).unwrap_or(DEFAULT_T_END);
    let traj = evolve(&r.params, t_end, r.tolerances.ode)?;
    let mut table = Table::new(["t", "psi_g_re", "psi_g_im", "psi_e_re", "psi_e_im", "survival"]);
    for ((t, s), p0) in traj.times.iter().zip(&traj.states).zip(&traj.survival) {
        table.push(vec![
            num(*t),
            num(s.psi_g.re),
            num(s.psi_g.im),
            num(s.psi_e.re),
            num(s.psi_e.im),
            num(*p0),
        ]);
    }
    let wt = waiting_time(&r.params, &WaitingTimeOptions::with_tol(r.tolerances.ode))?;
    let path = ctx.emit("trajectory.csv", &table)?;
    let summary = json!({
        "t_end": t_end,
        "mean_tau": wt.mean,
        "t_cut": wt.t_cut,
        "tail_correction": wt.tail_correction,
        "tail_rate": wt.tail_rate,
    });
    ctx.manifest("simulate", &r, &[&path], summary).write_beside(&path)?;
    println!("mean waiting time {}", num(wt.mean));
    println!("wrote {}", path.display());
    Ok(())
}

fn sweep(
    ctx: &RunContext,
    variable: Option<SweepVariable>,
    lo: Option<f64>,
    hi: Option<f64>,
    step: Option<f64>,
) -> Result<(), Failure> {
    let r = ctx.resolve()?;
    let block = ctx.cfg.sweep.clone().unwrap_or_default();
    let missing = |name: &str| ConfigError::Invalid(format!("sweep needs '{name}' (flag or config sweep block)"));
    let engines = if r.engines.is_empty() {
        block
            .engines
            .clone()
            .unwrap_or_else(|| vec![Engine::Ode, Engine::RgWeak])
    } else {
        r.engines.clone()
    };
    let spec = SweepSpec {
        variable: variable.or(block.variable).ok_or_else(|| missing("variable"))?,
        lo: lo.or(block.lo).ok_or_else(|| missing("lo"))?,
        hi: hi.or(block.hi).ok_or_else(|| missing("hi"))?,
        step: step.or(block.step).ok_or_else(|| missing("step"))?,
        fixed: r.params,
        engines: engines.clone(),
    };
    spec.validate().map_err(ConfigError::from)?;
    let rows = run_sweep(&spec, &r.tolerances, &ctx.exec)?;
    let failed = rows
        .iter()
        .flat_map(|row| &row.results)
        .filter(|e| e.error.is_some())
        .count();
    let path = ctx.emit("sweep.csv", &sweep_table(&spec, &rows))?;
    let mut m = ctx.manifest(
        "sweep",
        &r,
        &[&path],
        json!({ "points": rows.len(), "failed_evaluations": failed }),
    );
    m.engines = engines;
    m.spec = Some(spec);
    m.write_beside(&path)?;
    println!("{} points, {} failed evaluations", rows.len(), failed);
    println!("wrote {}", path.display());
    Ok(())
}

fn extrema(ctx: &RunContext, xi_lo: Option<f64>, xi_hi: Option<f64>) -> Result<(), Failure> {
    let r = ctx.resolve()?;
    let lo = xi_lo.or(ctx.cfg.xi_lo).unwrap_or(DEFAULT_XI_RANGE.0);
    let hi = xi_hi.or(ctx.cfg.xi_hi).unwrap_or(DEFAULT_XI_RANGE.1);
    if !(lo < hi) {
        return Err(ConfigError::Invalid(format!("extrema needs xi_lo < xi_hi, got [{lo}, {hi}]")).into());
    }
    let found = find_extrema(r.params.gamma, lo, hi);
    let mut table = Table::new(["xi_star", "kind", "gamma", "n"]);
    for e in &found {
        let kind = serde_json::to_value(e.kind)?.as_str().unwrap_or_default().to_string();
        table.push(vec![num(e.xi_star), kind, num(e.gamma), e.n.to_string()]);
    }
    let path = ctx.emit("extrema.csv", &table)?;
    ctx.manifest(
        "extrema",
        &r,
        &[&path],
        json!({ "xi_lo": lo, "xi_hi": hi, "count": found.len() }),
    )
    .write_beside(&path)?;
    println!("{} extrema at gamma = {}", found.len(), num(r.params.gamma));
    println!("wrote {}", path.display());
    Ok(())
}

fn critical(ctx: &RunContext, pairs: Option<usize>) -> Result<(), Failure> {
    let r = ctx.resolve()?;
    let pairs = pairs.or(ctx.cfg.pairs).unwrap_or(DEFAULT_PAIRS);
    if pairs == 0 {
        return Err(ConfigError::Invalid("pairs must be at least 1".into()).into());
    }
    let ns: Vec<usize> = (1..=pairs).collect();
    let results = ctx.exec.map(&ns, |&n| {
        let cp = find_critical_point(n)?;
        let fit = critical_exponent_fit_at(&cp)?;
        Ok::<_, photon_window::Error>((cp, fit))
    });
    let mut table = Table::new([
        "n",
        "xi_cr",
        "gamma_cr",
        "fold_d1",
        "fold_d2",
        "beta",
        "beta_ci_half_width",
        "fit_rms_residual",
        "fit_points",
    ]);
    for res in results {
        let (cp, fit) = res?;
        let (d1, d2) = fold_residuals(&cp);
        table.push(vec![
            cp.n.to_string(),
            num(cp.xi_cr),
            num(cp.gamma_cr),
            num(d1),
            num(d2),
            num(fit.beta),
            num(fit.ci_half_width),
            num(fit.rms_residual),
            fit.points.to_string(),
        ]);
        println!(
            "n = {}: gamma_cr = {}, xi_cr = {}, beta = {} +- {}",
            cp.n,
            num(cp.gamma_cr),
            num(cp.xi_cr),
            num(fit.beta),
            num(fit.ci_half_width)
        );
    }
    let path = ctx.emit("critical.csv", &table)?;
    ctx.manifest("critical", &r, &[&path], json!({ "pairs": pairs }))
        .write_beside(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn figure(ctx: &RunContext, id: u32) -> Result<(), Failure> {
    if !(1..=4).contains(&id) {
        return Err(ConfigError::Invalid(format!("figure id must be 1, 2, 3 or 4, got {id}")).into());
    }
    let r = ctx.resolve()?;
    let path = emit_figure_data(id, &ctx.out_dir, &r.tolerances, &ctx.exec)?;
    ctx.manifest(&format!("figure {id}"), &r, &[&path], json!({ "figure": id }))
        .write_beside(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn validation(ctx: &RunContext) -> Result<(), Failure> {
    let r = ctx.resolve()?;
    let vcfg = ctx.cfg.validation(&ctx.overrides);
    vcfg.check().map_err(ConfigError::from)?;
    let report = validate(&vcfg, &ctx.exec)?;
    print!("{}", report.render());
    let path = ctx.out_dir.join("validation.json");
    let mut text = serde_json::to_string_pretty(&json!({ "config": vcfg, "report": report }))?;
    text.push('\n');
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    let mut m = ctx.manifest("validate", &r, &[&path], json!({ "passed": report.passed() }));
    m.tolerances = vcfg.tolerances();
    m.seed = vcfg.seed;
    m.write_beside(&path)?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Validation)
    }
}

fn sample(ctx: &RunContext, samples: Option<usize>) -> Result<(), Failure> {
    let r = ctx.resolve()?;
    let n = samples.or(ctx.cfg.samples).unwrap_or(DEFAULT_SAMPLES);
    let taus = sample_waiting_times(&r.params, n, r.seed)?;
    let mut table = Table::new(["index", "tau"]);
    for (i, t) in taus.iter().enumerate() {
        table.push(vec![i.to_string(), num(*t)]);
    }
    let mean = taus.iter().sum::<f64>() / n as f64;
    let path = ctx.emit("samples.csv", &table)?;
    ctx.manifest("sample", &r, &[&path], json!({ "samples": n, "sample_mean": mean }))
        .write_beside(&path)?;
    println!("{} samples, mean {}", n, num(mean));
    println!("wrote {}", path.display());
    Ok(())
}
