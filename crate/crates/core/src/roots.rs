// SPDX-License-Identifier: Apache-2.0

//! Scalar root bracketing helpers.

/// Bisection on a sign-changing bracket `[a, b]`.
///
/// Stops once the bracket is narrower than `xtol` or can no longer be split
/// in floating point. Returns `None` if `f(a)` and `f(b)` share a sign.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, xtol: f64) -> Option<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a.min(b) || m >= a.max(b) || (b - a).abs() <= xtol {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Uniform grid `lo, lo + step, ...` up to and including `hi` (within a
/// small rounding allowance). Always contains at least `lo`.
pub fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = if hi > lo && step > 0.0 {
        ((hi - lo) / step + 1e-9).floor() as usize
    } else {
        0
    };
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 0.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn no_bracket() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 0.0).is_none());
    }

    #[test]
    fn grid_endpoints() {
        let g = grid(0.0, 8.0, 0.05);
        assert_eq!(g.len(), 161);
        assert!((g[160] - 8.0).abs() < 1e-12);
        assert_eq!(grid(1.0, 1.0 + 1e-3, 0.5), vec![1.0]);
    }
}
