// SPDX-License-Identifier: Apache-2.0

//! Extrema of the weak-drive waiting time `<tau>(xi)` and the folds where
//! neighbouring maxima and minima annihilate as the decay rate grows.
//!
//! Extrema are the zeros of the stationarity residual
//!
//! ```text
//! F(xi, Gamma) = J_0 J_1 - Gamma^2 sum_{k>=1} J_k (J_{k-1} - J_{k+1}) / (Gamma^2 + 4k^2)
//!             = -(Gamma^2 / 2) dS/dxi,
//! ```
//!
//! which is `J_1 (J_0 - G(Gamma, xi))` without the division by `J_1`. A
//! maximum of `<tau>` is a minimum of `S`, i.e. a `+ -> -` crossing of `F`.
//!
//! The `n`-th pair is the maximum that starts at the `n`-th zero of `J_0`
//! for vanishing `Gamma` together with the minimum that starts at the
//! `n`-th zero of `J_1`. Between them `S'` has a local maximum (an
//! inflection of `S`); the pair exists exactly while that local maximum is
//! positive, and both members vanish together when it reaches zero.

use serde::Serialize;

use crate::bessel::{bessel_zero, truncated_row, DEFAULT_TAIL_TOL};
use crate::error::{Error, Result};
use crate::fit::line_fit;
use crate::roots::bisect;
use crate::series::{lorentz_sum_derivatives, SumDerivatives};

/// Scan step used to bracket sign changes of `F`.
pub const SCAN_STEP: f64 = 0.01;
/// Bisection tolerance for extremum locations.
pub const ROOT_TOL: f64 = 1e-10;
/// Decay rate at which continuation of a pair starts.
pub const CONTINUATION_START: f64 = 0.25;
/// Relative width of the exponent-fit ladder, `Gamma = Gamma_cr (1 - 2^-j w)`.
pub const LADDER_WIDTH: f64 = 0.1;
pub const LADDER_POINTS: u32 = 8;
pub const LADDER_MIN_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    /// Maximum of `<tau>`: locally suppressed emission.
    Max,
    /// Minimum of `<tau>`: locally enhanced emission.
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtremumRecord {
    pub xi_star: f64,
    pub kind: ExtremumKind,
    pub gamma: f64,
    /// Index of the nearest zero of `J_0` (maxima) or `J_1` (minima).
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub xi_cr: f64,
    pub gamma_cr: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    pub beta: f64,
    pub ci_half_width: f64,
    /// `(lowest, highest)` decay rate on the ladder.
    pub window: (f64, f64),
    pub rms_residual: f64,
    pub points: usize,
}

/// `F(xi, Gamma)`. Zeros are the extrema of `<tau>` in `xi`.
pub fn stationarity_residual(xi: f64, gamma: f64) -> f64 {
    let row = truncated_row(xi, DEFAULT_TAIL_TOL, 1);
    let g2 = gamma * gamma;
    let top = row.order() as i64 - 1;
    let mut sum = 0.0;
    for k in (1..=top).rev() {
        let kf = k as f64;
        sum += row.get(k) * (row.get(k - 1) - row.get(k + 1)) / (g2 + 4.0 * kf * kf);
    }
    row.get(0) * row.get(1) - g2 * sum
}

/// Right-hand side `G(Gamma, xi)` of `J_0 = G`; singular at zeros of `J_1`.
pub fn crossing_function(xi: f64, gamma: f64) -> f64 {
    let row = truncated_row(xi, DEFAULT_TAIL_TOL, 1);
    let j1 = row.get(1);
    (row.get(0) * j1 - stationarity_residual(xi, gamma)) / j1
}

fn nearest_zero_index(order: i64, xi: f64) -> usize {
    let mut best = (1, f64::INFINITY);
    for n in 1.. {
        let z = bessel_zero(order, n);
        let d = (z - xi).abs();
        if d < best.1 {
            best = (n, d);
        }
        if z > xi + 4.0 {
            break;
        }
    }
    best.0
}

/// All extrema of `<tau>` with `xi` in `[xi_lo, xi_hi]`.
pub fn find_extrema(gamma: f64, xi_lo: f64, xi_hi: f64) -> Vec<ExtremumRecord> {
    if !(gamma > 0.0) || !(xi_hi > xi_lo) {
        return Vec::new();
    }
    let f = |x: f64| stationarity_residual(x, gamma);
    let grid = crate::roots::grid(xi_lo, xi_hi, SCAN_STEP);
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let mut out = Vec::new();
    for i in 0..grid.len() - 1 {
        let (a, b) = (grid[i], grid[i + 1]);
        let (fa, fb) = (values[i], values[i + 1]);
        // a zero sitting exactly on a grid node is claimed by the interval to its right
        if fb == 0.0 && i + 1 < grid.len() - 1 {
            continue;
        }
        if fa != 0.0 && fa.signum() == fb.signum() {
            continue;
        }
        let Some(root) = bisect(f, a, b, ROOT_TOL) else {
            continue;
        };
        let kind = if classify_slope(gamma, root, fa, fb) < 0.0 {
            ExtremumKind::Max
        } else {
            ExtremumKind::Min
        };
        let n = match kind {
            ExtremumKind::Max => nearest_zero_index(0, root),
            ExtremumKind::Min => nearest_zero_index(1, root),
        };
        out.push(ExtremumRecord {
            xi_star: root,
            kind,
            gamma,
            n,
        });
    }
    out
}

fn classify_slope(gamma: f64, root: f64, fa: f64, fb: f64) -> f64 {
    let h = 1e-6;
    let d = (stationarity_residual(root + h, gamma) - stationarity_residual(root - h, gamma)) / (2.0 * h);
    if d != 0.0 {
        d
    } else {
        fb - fa
    }
}

/// Leading-order shift `xi - xi_n` of the `n`-th maximum for small `Gamma`.
pub fn small_gamma_shift(n: usize, gamma: f64) -> f64 {
    let xi_n = bessel_zero(0, n.max(1));
    if gamma == 0.0 {
        return 0.0;
    }
    let row = truncated_row(xi_n, DEFAULT_TAIL_TOL, 1);
    let g2 = gamma * gamma;
    let top = row.order() as i64 - 1;
    let mut sum = 0.0;
    for k in (1..=top).rev() {
        let kf = k as f64;
        sum += row.get(k) * (row.get(k + 1) - row.get(k - 1)) / (g2 + 4.0 * kf * kf);
    }
    let j1 = row.get(1);
    g2 / (j1 * j1) * sum
}

fn derivs(xi: f64, gamma: f64) -> SumDerivatives {
    lorentz_sum_derivatives(xi, gamma)
}

/// Newton on `S'(xi) = 0` at fixed `gamma`, accepted only if it converges to
/// a root on the requested branch (`S'' > 0` for a maximum of `<tau>`).
fn newton_extremum(xi0: f64, gamma: f64, kind: ExtremumKind, window: (f64, f64)) -> Option<f64> {
    let mut xi = xi0;
    for _ in 0..100 {
        let d = derivs(xi, gamma);
        if d.d2 == 0.0 {
            return None;
        }
        let step = d.d1 / d.d2;
        xi -= step;
        if !(window.0..=window.1).contains(&xi) {
            return None;
        }
        if step.abs() < 1e-13 * xi.abs().max(1.0) {
            let curv = derivs(xi, gamma).d2;
            let on_branch = match kind {
                ExtremumKind::Max => curv > 0.0,
                ExtremumKind::Min => curv < 0.0,
            };
            return on_branch.then_some(xi);
        }
    }
    None
}

/// Newton on `S''(xi) = 0`: the inflection of `S` between a pair.
fn newton_inflection(xi0: f64, gamma: f64) -> Option<f64> {
    let mut xi = xi0;
    for _ in 0..100 {
        let d = derivs(xi, gamma);
        if d.d3 >= 0.0 {
            return None;
        }
        let step = d.d2 / d.d3;
        xi -= step;
        if step.abs() < 1e-14 * xi.abs().max(1.0) {
            return Some(xi);
        }
    }
    None
}

/// Maximum and minimum of pair `n` at decay rate `gamma`, if both exist.
pub fn pair_at(n: usize, gamma: f64) -> Option<(ExtremumRecord, ExtremumRecord)> {
    let lo = bessel_zero(0, n) - 1.2;
    let hi = bessel_zero(1, n) + 1.2;
    let ext = find_extrema(gamma, lo.max(0.05), hi);
    let max = ext.iter().find(|e| e.kind == ExtremumKind::Max && e.n == n)?;
    let min = ext
        .iter()
        .find(|e| e.kind == ExtremumKind::Min && e.xi_star > max.xi_star)?;
    Some((*max, *min))
}

/// Pair `n` tracked by its inflection point: `(xi_infl, S'(xi_infl))`.
/// The pair exists while the second component is positive.
fn inflection_height(xi_guess: f64, gamma: f64) -> Option<(f64, f64)> {
    let xi = newton_inflection(xi_guess, gamma)?;
    Some((xi, derivs(xi, gamma).d1))
}

/// Saddle-node point where the `n`-th max-min pair of `<tau>(xi)` merges.
pub fn find_critical_point(n: usize) -> Result<CriticalPoint> {
    if n == 0 {
        return Err(Error::InvalidInput("pair index starts at 1".into()));
    }
    let g0 = CONTINUATION_START;
    let (max, min) = pair_at(n, g0).ok_or(Error::NoPairFound { n, gamma: g0 })?;
    let start =
        bisect(|x| derivs(x, g0).d2, max.xi_star, min.xi_star, 1e-12).ok_or(Error::NoPairFound { n, gamma: g0 })?;

    // march until the pair is gone, then bisect on existence
    let mut g_lo = g0;
    let mut xi_lo = start;
    let mut step = 0.05;
    let mut g_hi = None;
    while g_hi.is_none() {
        let g = g_lo + step;
        match inflection_height(xi_lo, g) {
            Some((xi, h)) if h > 0.0 => {
                g_lo = g;
                xi_lo = xi;
            }
            Some(_) => g_hi = Some(g),
            None => {
                step *= 0.5;
                if step < 1e-6 {
                    return Err(Error::NoPairFound { n, gamma: g_lo });
                }
            }
        }
        if g_lo > 20.0 {
            return Err(Error::NoPairFound { n, gamma: g_lo });
        }
    }
    let mut g_hi = g_hi.unwrap_or(g_lo);
    while g_hi - g_lo > 1e-13 * g_lo {
        let g = 0.5 * (g_lo + g_hi);
        match inflection_height(xi_lo, g) {
            Some((xi, h)) if h > 0.0 => {
                g_lo = g;
                xi_lo = xi;
            }
            _ => g_hi = g,
        }
    }

    // polish on {S' = 0, S'' = 0}
    let (mut xi, mut gamma) = (xi_lo, g_lo);
    for _ in 0..30 {
        let d = derivs(xi, gamma);
        let det = d.d2 * d.d2_gamma - d.d1_gamma * d.d3;
        if det == 0.0 {
            break;
        }
        let dxi = (d.d1 * d.d2_gamma - d.d1_gamma * d.d2) / det;
        let dg = (d.d2 * d.d2 - d.d3 * d.d1) / det;
        xi -= dxi;
        gamma -= dg;
        if dxi.abs() < 1e-15 * xi && dg.abs() < 1e-15 * gamma {
            break;
        }
    }
    Ok(CriticalPoint {
        xi_cr: xi,
        gamma_cr: gamma,
        n,
    })
}

/// `(S', S'')` at a critical point; both vanish at a fold.
pub fn fold_residuals(cp: &CriticalPoint) -> (f64, f64) {
    let d = derivs(cp.xi_cr, cp.gamma_cr);
    (d.d1, d.d2)
}

/// Continues one member of pair `n` in `gamma` from [`CONTINUATION_START`]
/// with adaptive steps and returns the last `gamma` at which it still
/// exists, resolved to `gamma_tol`.
pub fn branch_end(n: usize, kind: ExtremumKind, gamma_tol: f64) -> Result<f64> {
    let g0 = CONTINUATION_START;
    let (max, min) = pair_at(n, g0).ok_or(Error::NoPairFound { n, gamma: g0 })?;
    let mut xi = match kind {
        ExtremumKind::Max => max.xi_star,
        ExtremumKind::Min => min.xi_star,
    };
    let window = (max.xi_star - 1.0, min.xi_star + 1.0);
    let mut gamma = g0;
    let mut step = 0.05;
    while step > gamma_tol {
        match newton_extremum(xi, gamma + step, kind, window) {
            Some(next) => {
                xi = next;
                gamma += step;
                step *= 1.5;
            }
            None => step *= 0.5,
        }
        if gamma > 20.0 {
            break;
        }
    }
    Ok(gamma)
}

/// Location of the pair-`n` maximum at each `gamma` in increasing order,
/// continued from [`CONTINUATION_START`]. `None` where the maximum is gone.
pub fn track_maximum(n: usize, gammas: &[f64]) -> Result<Vec<Option<f64>>> {
    let g0 = CONTINUATION_START;
    let (max, min) = pair_at(n, g0).ok_or(Error::NoPairFound { n, gamma: g0 })?;
    let window = (max.xi_star - 1.0, min.xi_star + 1.0);
    let mut xi = max.xi_star;
    let mut gamma = g0;
    let mut out = Vec::with_capacity(gammas.len());
    for &target in gammas {
        // walk to the target in modest increments so Newton stays on the branch
        let mut alive = true;
        while alive && gamma < target {
            let mut step = (target - gamma).min(0.05);
            loop {
                if let Some(next) = newton_extremum(xi, gamma + step, ExtremumKind::Max, window) {
                    xi = next;
                    gamma += step;
                    break;
                }
                step *= 0.5;
                if step < 1e-14 * target {
                    alive = false;
                    break;
                }
            }
        }
        if alive && gamma > target {
            // requested below the current continuation point; solve directly
            out.push(newton_extremum(max.xi_star, target, ExtremumKind::Max, window));
        } else {
            out.push(alive.then_some(xi));
        }
    }
    Ok(out)
}

/// Least-squares exponent of `y ~ x^beta` in log-log space.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> ExponentFit {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(&x, &y)| (x.ln(), y.ln())).collect();
    let f = line_fit(&pts);
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    ExponentFit {
        beta: f.slope,
        ci_half_width: 2.0 * f.slope_stderr,
        window: (lo, hi),
        rms_residual: f.rms,
        points: xs.len(),
    }
}

/// Exponent of `xi_cr - xi_max ~ (Gamma_cr - Gamma)^beta` on the ladder
/// `Gamma = Gamma_cr (1 - 2^-j w)`, `j = 1..=8`.
pub fn critical_exponent_fit(n: usize) -> Result<ExponentFit> {
    let cp = find_critical_point(n)?;
    critical_exponent_fit_at(&cp)
}

pub fn critical_exponent_fit_at(cp: &CriticalPoint) -> Result<ExponentFit> {
    let gammas: Vec<f64> = (1..=LADDER_POINTS)
        .map(|j| cp.gamma_cr * (1.0 - LADDER_WIDTH * 0.5f64.powi(j as i32)))
        .collect();
    let xis = track_maximum(cp.n, &gammas)?;
    let mut dx = Vec::new();
    let mut dy = Vec::new();
    for (g, xi) in gammas.iter().zip(&xis) {
        if let Some(xi) = xi {
            let gap = cp.xi_cr - xi;
            if gap > 0.0 {
                dx.push(cp.gamma_cr - g);
                dy.push(gap);
            }
        }
    }
    if dx.len() < LADDER_MIN_POINTS {
        return Err(Error::FitWindowTooNarrow {
            found: dx.len(),
            needed: LADDER_MIN_POINTS,
        });
    }
    let mut fit = fit_power_law(&dx, &dy);
    fit.window = (gammas[0], gammas[gammas.len() - 1]);
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::bessel_j;
    use crate::series::lorentz_sum;

    #[test]
    fn vanishing_gamma_recovers_bessel_product() {
        for &xi in &[0.5, 1.7, 3.3, 6.1] {
            let f = stationarity_residual(xi, 1e-9);
            assert!((f - bessel_j(0, xi) * bessel_j(1, xi)).abs() < 1e-15);
        }
        let ext = find_extrema(1e-4, 0.5, 8.0);
        let want = [
            (bessel_zero(0, 1), ExtremumKind::Max),
            (bessel_zero(1, 1), ExtremumKind::Min),
            (bessel_zero(0, 2), ExtremumKind::Max),
            (bessel_zero(1, 2), ExtremumKind::Min),
        ];
        assert_eq!(ext.len(), want.len(), "{ext:?}");
        for (e, (z, kind)) in ext.iter().zip(want) {
            assert_eq!(e.kind, kind);
            assert!((e.xi_star - z).abs() < 1e-6);
        }
    }

    #[test]
    fn residual_is_scaled_derivative() {
        let h = 1e-5;
        for i in 0..40 {
            let xi = 0.2 + 0.2 * i as f64;
            for &g in &[0.3, 1.0, 2.0] {
                let fd = (lorentz_sum(xi + h, g, 0.0).unwrap() - lorentz_sum(xi - h, g, 0.0).unwrap()) / (2.0 * h);
                let f = stationarity_residual(xi, g);
                assert!((f + 0.5 * g * g * fd).abs() < 1e-7, "xi={xi} g={g}");
            }
        }
    }

    #[test]
    fn two_forms_of_extremum_condition_agree() {
        let z1: Vec<f64> = (1..=3).map(|n| bessel_zero(1, n)).collect();
        for &g in &[0.5, 1.0, 2.5] {
            for i in 0..=750 {
                let xi = 0.5 + 0.01 * i as f64;
                if z1.iter().any(|z| (xi - z).abs() < 0.05) {
                    continue;
                }
                let lhs = stationarity_residual(xi, g).signum();
                let rhs = (bessel_j(0, xi) - crossing_function(xi, g)).signum() * bessel_j(1, xi).signum();
                assert_eq!(lhs, rhs, "xi={xi} g={g}");
            }
        }
    }

    #[test]
    fn extrema_at_moderate_gamma() {
        let ext = find_extrema(0.5, 0.5, 8.0);
        let maxima: Vec<&ExtremumRecord> = ext.iter().filter(|e| e.kind == ExtremumKind::Max).collect();
        assert_eq!(maxima.len(), 2);
        for (m, n) in maxima.iter().zip([1, 2]) {
            assert_eq!(m.n, n);
            let shift = m.xi_star - bessel_zero(0, n);
            assert!(shift > 0.0 && shift < 0.1, "n={n} shift={shift}");
            assert!(stationarity_residual(m.xi_star, 0.5).abs() < 1e-10);
        }
        // maxima and minima alternate
        for w in ext.windows(2) {
            assert_ne!(w[0].kind, w[1].kind);
        }
    }

    #[test]
    fn pairs_present_then_gone() {
        let at1 = find_extrema(1.0, 2.0, 6.0);
        assert!(
            at1.iter().filter(|e| e.kind == ExtremumKind::Max).count() >= 2,
            "{at1:?}"
        );
        assert!(at1.iter().filter(|e| e.kind == ExtremumKind::Min).count() >= 1);
        assert!(find_extrema(2.5, 2.0, 6.0).is_empty());
    }

    #[test]
    fn small_gamma_shift_behaviour() {
        assert_eq!(small_gamma_shift(1, 0.0), 0.0);
        let max = find_extrema(0.2, 2.0, 3.0)
            .into_iter()
            .find(|e| e.kind == ExtremumKind::Max)
            .unwrap();
        let exact = max.xi_star - bessel_zero(0, 1);
        let approx = small_gamma_shift(1, 0.2);
        assert!(((approx - exact) / exact).abs() < 0.05, "{approx} vs {exact}");
        let ratio = small_gamma_shift(1, 2e-3) / small_gamma_shift(1, 1e-3);
        assert!((ratio - 4.0).abs() < 1e-4, "{ratio}");
    }

    #[test]
    fn critical_points_of_first_two_pairs() {
        for n in 1..=2 {
            let cp = find_critical_point(n).unwrap();
            assert!(cp.gamma_cr > 1.0 && cp.gamma_cr < 2.5, "{cp:?}");
            let (r1, r2) = fold_residuals(&cp);
            assert!(r1.abs() <= 1e-8 && r2.abs() <= 1e-8, "{r1} {r2}");
            let max_end = branch_end(n, ExtremumKind::Max, 1e-9).unwrap();
            let min_end = branch_end(n, ExtremumKind::Min, 1e-9).unwrap();
            assert!((max_end - cp.gamma_cr).abs() < 1e-6, "{max_end} vs {}", cp.gamma_cr);
            assert!((min_end - cp.gamma_cr).abs() < 1e-6, "{min_end} vs {}", cp.gamma_cr);
        }
    }

    #[test]
    fn missing_pair() {
        assert!(find_critical_point(0).is_err());
    }

    #[test]
    fn fit_recovers_exact_square_root() {
        let xs: Vec<f64> = (1..=8).map(|j| 0.1 * 0.5f64.powi(j)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.7 * x.sqrt()).collect();
        let f = fit_power_law(&xs, &ys);
        assert!((f.beta - 0.5).abs() < 1e-3);
        assert!(f.rms_residual < 1e-12);
    }

    #[test]
    fn square_root_exponent() {
        for n in 1..=2 {
            let fit = critical_exponent_fit(n).unwrap();
            assert!((fit.beta - 0.5).abs() <= 0.05, "n={n} {fit:?}");
            assert!(fit.rms_residual < 0.02);
        }
    }
}
