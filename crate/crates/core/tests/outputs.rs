// SPDX-License-Identifier: Apache-2.0

use photon_window::figures::{self, emit_figure_data, local_maxima};
use photon_window::parallel::Executor;
use photon_window::sweep::{run_sweep, sweep_table, Engine, SweepSpec, SweepVariable, Tolerances};
use photon_window::ScaledParams;

#[test]
fn figure_files_are_reproducible() {
    let dir = std::env::temp_dir().join(format!("photon-window-figs-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let tol = Tolerances::default();
    let a = std::fs::read(emit_figure_data(2, &dir, &tol, &Executor::Sequential).unwrap()).unwrap();
    let b = std::fs::read(emit_figure_data(2, &dir, &tol, &Executor::with_jobs(Some(2))).unwrap()).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("xi,j0,g_gamma_1,g_gamma_2.5\n"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn fig3_table_schema() {
    let t = figures::fig3_table(&figures::fig3_curves(&Executor::default()).unwrap());
    assert_eq!(t.header, ["n", "gamma", "xi_star", "relative_shift", "is_critical"]);
    for n in ["1", "2"] {
        let crit: Vec<&Vec<String>> = t.rows.iter().filter(|r| r[0] == n && r[4] == "1").collect();
        assert_eq!(crit.len(), 1);
        let g: f64 = crit[0][1].parse().unwrap();
        assert!(g > 1.0 && g < 2.5);
    }
}

#[test]
fn spectrum_sweep_with_both_engines() {
    let gamma = figures::experiment_gamma();
    let spec = SweepSpec {
        variable: SweepVariable::Delta,
        lo: -2.0,
        hi: 2.0,
        step: 0.02,
        fixed: ScaledParams::with_xi(gamma, 0.29 * gamma, 0.0, 1.14).unwrap(),
        engines: vec![Engine::RgStrong, Engine::Bloch],
    };
    let rows = run_sweep(&spec, &Tolerances::default(), &Executor::default()).unwrap();
    assert_eq!(rows.len(), 201);
    let table = sweep_table(&spec, &rows);
    let delta = table.numeric("delta");
    for col in ["rg_strong_inverse_tau", "bloch_inverse_tau"] {
        let v = table.numeric(col);
        assert!(v.iter().all(|x| x.is_finite() && *x > 0.0));
        let peaks = local_maxima(&delta, &v);
        assert_eq!(peaks.len(), 3, "{col}: {peaks:?}");
        for (p, want) in peaks.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((p - want).abs() < 1e-9, "{col}: {peaks:?}");
        }
    }
}

#[test]
fn sweep_csv_identical_across_executors() {
    let spec = SweepSpec {
        variable: SweepVariable::Xi,
        lo: 0.0,
        hi: 4.0,
        step: 0.5,
        fixed: ScaledParams::with_xi(1.5, 0.1, 0.0, 0.0).unwrap(),
        engines: vec![Engine::Ode, Engine::RgWeak],
    };
    let tol = Tolerances::default();
    let seq = sweep_table(&spec, &run_sweep(&spec, &tol, &Executor::Sequential).unwrap()).to_csv_string();
    let par = sweep_table(&spec, &run_sweep(&spec, &tol, &Executor::with_jobs(Some(4))).unwrap()).to_csv_string();
    assert_eq!(seq, par);
    let t = sweep_table(&spec, &run_sweep(&spec, &tol, &Executor::Sequential).unwrap());
    for (o, r) in t.numeric("ode_mean_tau").iter().zip(t.numeric("rg_weak_mean_tau")) {
        assert!(((o - r) / r).abs() < 0.02);
    }
}
