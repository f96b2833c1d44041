// SPDX-License-Identifier: Apache-2.0

//! Integer-order Bessel functions of the first kind, `J_k(x)`.
//!
//! A whole row `J_0 .. J_K` is produced at once by Miller's backward
//! recurrence, normalized with `J_0 + 2 sum_{m>=1} J_{2m} = 1`. Very small
//! arguments use the power series instead.

/// Smallest truncation order ever returned by [`truncation_order`].
pub const MIN_TRUNCATION: usize = 12;

/// Default tail tolerance for truncated Bessel sums.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

const SERIES_CUTOFF: f64 = 1e-3;
const RESCALE_ABOVE: f64 = 1e250;

/// `J_k(xi)` for `k = -K ..= K`.
///
/// Only non-negative orders are stored; negative orders follow from
/// `J_{-k} = (-1)^k J_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselRow {
    xi: f64,
    positive: Vec<f64>,
}

impl BesselRow {
    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// Truncation order `K`.
    pub fn order(&self) -> usize {
        self.positive.len() - 1
    }

    /// `J_k(xi)`; zero for `|k| > K`.
    #[inline]
    pub fn get(&self, k: i64) -> f64 {
        let m = k.unsigned_abs() as usize;
        match self.positive.get(m) {
            Some(&v) if k < 0 && m % 2 == 1 => -v,
            Some(&v) => v,
            None => 0.0,
        }
    }

    /// Non-negative orders `J_0 ..= J_K`.
    pub fn non_negative(&self) -> &[f64] {
        &self.positive
    }

    /// All orders `J_{-K} ..= J_K` in increasing order of `k`.
    pub fn values(&self) -> Vec<f64> {
        let k = self.order() as i64;
        (-k..=k).map(|m| self.get(m)).collect()
    }

    /// `sum_{k=-K}^{K} J_k^2`.
    pub fn norm_sqr(&self) -> f64 {
        let tail: f64 = self.positive[1..].iter().rev().map(|v| v * v).sum();
        self.positive[0] * self.positive[0] + 2.0 * tail
    }
}

/// Bessel row `J_0 ..= J_K` at `xi`.
pub fn bessel_row(xi: f64, order: usize) -> BesselRow {
    let order = order.max(1);
    let x = xi.abs();
    let mut positive = if x == 0.0 {
        let mut v = vec![0.0; order + 1];
        v[0] = 1.0;
        v
    } else if x < SERIES_CUTOFF {
        power_series_row(x, order)
    } else {
        miller_row(x, order)
    };
    if xi < 0.0 {
        for (k, v) in positive.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
    }
    BesselRow { xi, positive }
}

/// Single value `J_k(x)` for integer `k`.
pub fn bessel_j(k: i64, x: f64) -> f64 {
    bessel_row(x, k.unsigned_abs() as usize).get(k)
}

fn power_series_row(x: f64, order: usize) -> Vec<f64> {
    let half = 0.5 * x;
    let q = -half * half;
    let mut lead = 1.0; // (x/2)^k / k!
    let mut out = Vec::with_capacity(order + 1);
    for k in 0..=order {
        if k > 0 {
            lead *= half / k as f64;
        }
        let mut term = 1.0;
        let mut sum = 1.0;
        for m in 1..20 {
            term *= q / (m as f64 * (m + k) as f64);
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        out.push(lead * sum);
    }
    out
}

fn miller_start(x: f64, order: usize) -> usize {
    let top = (order as f64).max(x);
    let m = top + 20.0 + (40.0 * top).sqrt();
    // even start so the normalization sum picks up the top order cleanly
    2 * ((m as usize + 1) / 2)
}

fn miller_row(x: f64, order: usize) -> Vec<f64> {
    let start = miller_start(x, order);
    let mut j = vec![0.0; start + 2];
    j[start] = 1e-300_f64.max(f64::MIN_POSITIVE * 1e10);
    let two_over_x = 2.0 / x;
    for k in (1..=start).rev() {
        let next = k as f64 * two_over_x * j[k] - j[k + 1];
        j[k - 1] = next;
        if next.abs() > RESCALE_ABOVE {
            for v in &mut j[k - 1..=start] {
                *v /= RESCALE_ABOVE;
            }
        }
    }
    let even_sum: f64 = j[2..=start].iter().step_by(2).rev().sum();
    let norm = j[0] + 2.0 * even_sum;
    j.truncate(order + 1);
    for v in &mut j {
        *v /= norm;
    }
    j
}

/// Smallest `K >= 12` such that `sum_{|k|>K} J_k(xi)^2 < tol`.
pub fn truncation_order(xi: f64, tol: f64) -> usize {
    let x = xi.abs();
    let probe = miller_start(x, MIN_TRUNCATION) + 10;
    let row = bessel_row(x, probe);
    let values = row.non_negative();
    let mut tail = 0.0;
    let mut k = values.len() - 1;
    // walk down while the two-sided tail beyond k-1 is still below tol
    while k > MIN_TRUNCATION {
        let next = tail + 2.0 * values[k] * values[k];
        if next >= tol {
            break;
        }
        tail = next;
        k -= 1;
    }
    k
}

/// Bessel row truncated at `truncation_order(xi, tol) + extra`.
pub fn truncated_row(xi: f64, tol: f64, extra: usize) -> BesselRow {
    bessel_row(xi, truncation_order(xi, tol) + extra)
}

/// `n`-th positive zero (`n >= 1`) of `J_order`, located by a coarse scan
/// and refined by bisection to machine precision.
pub fn bessel_zero(order: i64, n: usize) -> f64 {
    assert!(n >= 1, "zero index starts at 1");
    let f = |x: f64| bessel_j(order, x);
    let step = 0.05;
    let mut count = 0;
    let mut a = if order == 0 {
        step
    } else {
        order.unsigned_abs() as f64 * 0.5 + step
    };
    let mut fa = f(a);
    loop {
        let b = a + step;
        let fb = f(b);
        if fa == 0.0 || fa.signum() != fb.signum() {
            count += 1;
            if count == n {
                return crate::roots::bisect(f, a, b, 0.0).unwrap_or(a);
            }
        }
        a = b;
        fa = fb;
    }
}
