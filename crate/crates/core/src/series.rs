// SPDX-License-Identifier: Apache-2.0

//! Bessel-weighted Lorentzian sums
//! `S(xi, gamma, delta) = sum_k J_k(xi)^2 / (gamma^2 + 4 (k - delta)^2)`
//! and their derivatives in `xi` and `gamma`.

use crate::bessel::{truncated_row, BesselRow, DEFAULT_TAIL_TOL};
use crate::error::{Error, Result};

#[inline]
fn lorentz_weight(gamma: f64, k: f64, delta: f64) -> f64 {
    let d = k - delta;
    1.0 / (gamma * gamma + 4.0 * d * d)
}

/// `S(xi, gamma, delta)`.
pub fn lorentz_sum(xi: f64, gamma: f64, delta: f64) -> Result<f64> {
    let row = truncated_row(xi, DEFAULT_TAIL_TOL, 0);
    lorentz_sum_with_row(&row, gamma, delta)
}

pub(crate) fn lorentz_sum_with_row(row: &BesselRow, gamma: f64, delta: f64) -> Result<f64> {
    let singular = gamma == 0.0 && delta.fract() == 0.0;
    let term = |k: i64, j: f64| -> Result<f64> {
        let j2 = j * j;
        if singular && k as f64 == delta {
            if j2 != 0.0 {
                return Err(Error::DivergentTerm { order: k });
            }
            return Ok(0.0);
        }
        Ok(j2 * lorentz_weight(gamma, k as f64, delta))
    };
    let values = row.non_negative();
    let mut sum = term(0, values[0])?;
    for (k, &j) in values.iter().enumerate().skip(1) {
        let k = k as i64;
        // J_{-k}^2 = J_k^2, so the +k and -k terms share a numerator
        sum += term(k, j)? + term(-k, j)?;
    }
    Ok(sum)
}

/// `dS/dxi` at zero detuning, using `J_k' = (J_{k-1} - J_{k+1}) / 2`.
pub fn lorentz_sum_dxi(xi: f64, gamma: f64) -> f64 {
    let row = truncated_row(xi, DEFAULT_TAIL_TOL, 1);
    let top = row.order() as i64 - 1;
    let mut sum = 0.0;
    for k in (1..=top).rev() {
        let j = row.get(k);
        sum += j * (row.get(k - 1) - row.get(k + 1)) * lorentz_weight(gamma, k as f64, 0.0);
    }
    let k0 = row.get(0) * (row.get(-1) - row.get(1)) * lorentz_weight(gamma, 0.0, 0.0);
    k0 + 2.0 * sum
}

/// `S` at zero detuning together with the derivatives needed for locating
/// and following extrema and folds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumDerivatives {
    pub s: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    /// `d^2 S / (d xi d gamma)`
    pub d1_gamma: f64,
    /// `d^3 S / (d xi^2 d gamma)`
    pub d2_gamma: f64,
}

/// `d^m J_k / dx^m = 2^{-m} sum_j (-1)^j C(m, j) J_{k-m+2j}` for `m <= 3`.
#[inline]
fn bessel_derivative(row: &BesselRow, k: i64, m: u32) -> f64 {
    match m {
        0 => row.get(k),
        1 => 0.5 * (row.get(k - 1) - row.get(k + 1)),
        2 => 0.25 * (row.get(k - 2) - 2.0 * row.get(k) + row.get(k + 2)),
        3 => 0.125 * (row.get(k - 3) - 3.0 * row.get(k - 1) + 3.0 * row.get(k + 1) - row.get(k + 3)),
        _ => unreachable!("derivative order above 3"),
    }
}

pub fn lorentz_sum_derivatives(xi: f64, gamma: f64) -> SumDerivatives {
    let row = truncated_row(xi, DEFAULT_TAIL_TOL, 3);
    let top = row.order() as i64 - 3;
    let mut acc = [0.0f64; 6];
    let mut add = |k: i64, factor: f64| {
        let j0 = bessel_derivative(&row, k, 0);
        let j1 = bessel_derivative(&row, k, 1);
        let j2 = bessel_derivative(&row, k, 2);
        let j3 = bessel_derivative(&row, k, 3);
        let sq = [
            j0 * j0,
            2.0 * j0 * j1,
            2.0 * (j1 * j1 + j0 * j2),
            2.0 * (3.0 * j1 * j2 + j0 * j3),
        ];
        let w = lorentz_weight(gamma, k as f64, 0.0);
        let dw = -2.0 * gamma * w * w;
        acc[0] += factor * sq[0] * w;
        acc[1] += factor * sq[1] * w;
        acc[2] += factor * sq[2] * w;
        acc[3] += factor * sq[3] * w;
        acc[4] += factor * sq[1] * dw;
        acc[5] += factor * sq[2] * dw;
    };
    for k in (1..=top).rev() {
        add(k, 2.0);
    }
    add(0, 1.0);
    SumDerivatives {
        s: acc[0],
        d1: acc[1],
        d2: acc[2],
        d3: acc[3],
        d1_gamma: acc[4],
        d2_gamma: acc[5],
    }
}

#[cfg(test)]
pub(crate) mod oracle {
    use crate::bessel::oracle::power_series;

    /// Direct summation with a fixed wide window and power-series Bessel values.
    pub fn direct_sum(xi: f64, gamma: f64, delta: f64, kmax: i64) -> f64 {
        (-kmax..=kmax)
            .map(|k| {
                let j = power_series(k.unsigned_abs() as u32, xi.abs());
                j * j / (gamma * gamma + 4.0 * (k as f64 - delta).powi(2))
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_index_collapses_to_single_term() {
        for &g in &[0.1, 0.5, 1.0, 3.0] {
            assert_eq!(lorentz_sum(0.0, g, 0.0).unwrap(), 1.0 / (g * g));
        }
    }

    #[test]
    fn large_gamma_normalization() {
        for &xi in &[0.7, 2.4, 5.0] {
            let g: f64 = 200.0;
            let v = g * g * lorentz_sum(xi, g, 0.0).unwrap();
            // sum_k J_k^2 (1 - 4k^2/g^2 + ...) with sum k^2 J_k^2 = xi^2/2
            assert!((v - 1.0).abs() < 4.0 * xi * xi / (g * g), "{v}");
        }
    }

    #[test]
    fn golden_value_at_first_zero() {
        // frozen from a 30-digit direct summation over k = -200..=200
        let want = oracle::direct_sum(2.404825557695773, 0.5, 0.0, 60);
        assert!((want - GOLDEN_S_FIRST_ZERO).abs() < 1e-13, "{want:.15}");
        let got = lorentz_sum(2.404825557695773, 0.5, 0.0).unwrap();
        assert!((got - GOLDEN_S_FIRST_ZERO).abs() < 1e-12 * GOLDEN_S_FIRST_ZERO);
    }

    pub(crate) const GOLDEN_S_FIRST_ZERO: f64 = 0.152_094_115_869_117;

    #[test]
    fn divergent_term() {
        assert_eq!(lorentz_sum(1.0, 0.0, 0.0), Err(Error::DivergentTerm { order: 0 }));
        assert_eq!(lorentz_sum(1.0, 0.0, -2.0), Err(Error::DivergentTerm { order: -2 }));
        // J_3(0) = 0 exactly, so the k = 3 term is absent rather than singular
        assert!(lorentz_sum(0.0, 0.0, 3.0).is_ok());
        assert!(lorentz_sum(1.0, 0.0, 0.5).unwrap().is_finite());
    }

    #[test]
    fn monotone_in_gamma() {
        for &xi in &[0.0, 1.0, 2.4, 4.0, 7.5] {
            let mut prev = f64::INFINITY;
            for i in 1..60 {
                let s = lorentz_sum(xi, 0.05 * i as f64, 0.0).unwrap();
                assert!(s > 0.0 && s < prev);
                prev = s;
            }
        }
    }

    #[test]
    fn derivative_at_origin_is_zero() {
        assert_eq!(lorentz_sum_dxi(0.0, 0.7), 0.0);
    }

    fn sign_changes(gamma: f64, lo: f64, hi: f64) -> usize {
        let n = ((hi - lo) / 0.01).round() as usize;
        let vals: Vec<f64> = (0..=n).map(|i| lorentz_sum_dxi(lo + 0.01 * i as f64, gamma)).collect();
        vals.windows(2).filter(|w| w[0].signum() != w[1].signum()).count()
    }

    #[test]
    fn first_maximum_present_at_unit_gamma() {
        assert_eq!(sign_changes(1.0, 2.0, 3.0), 1);
    }

    #[test]
    fn first_pair_gone_at_large_gamma() {
        assert_eq!(sign_changes(2.5, 2.0, 6.0), 0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = 1e-5;
        for _ in 0..50 {
            let xi = rng.gen_range(0.0..8.0);
            let g = rng.gen_range(0.2..3.0);
            let fd = (lorentz_sum(xi + h, g, 0.0).unwrap() - lorentz_sum(xi - h, g, 0.0).unwrap()) / (2.0 * h);
            let an = lorentz_sum_dxi(xi, g);
            assert!((fd - an).abs() < 1e-6, "xi={xi} g={g} fd={fd} an={an}");
        }
    }

    #[test]
    fn higher_derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-4;
        for _ in 0..30 {
            let xi = rng.gen_range(0.1..8.0);
            let g = rng.gen_range(0.3..3.0);
            let d = lorentz_sum_derivatives(xi, g);
            let at = |x: f64, gg: f64| lorentz_sum_derivatives(x, gg);
            assert!((d.s - lorentz_sum(xi, g, 0.0).unwrap()).abs() < 1e-14 * d.s);
            assert!((d.d1 - lorentz_sum_dxi(xi, g)).abs() < 1e-13);
            let fd2 = (at(xi + h, g).d1 - at(xi - h, g).d1) / (2.0 * h);
            let fd3 = (at(xi + h, g).d2 - at(xi - h, g).d2) / (2.0 * h);
            let fdg1 = (at(xi, g + h).d1 - at(xi, g - h).d1) / (2.0 * h);
            let fdg2 = (at(xi, g + h).d2 - at(xi, g - h).d2) / (2.0 * h);
            for (name, an, fd) in [
                ("d2", d.d2, fd2),
                ("d3", d.d3, fd3),
                ("d1g", d.d1_gamma, fdg1),
                ("d2g", d.d2_gamma, fdg2),
            ] {
                assert!((an - fd).abs() < 1e-6 * (1.0 + an.abs()), "{name}: {an} vs {fd}");
            }
        }
    }

    proptest! {
        #[test]
        fn even_in_index(xi in 0.0f64..10.0, g in 0.05f64..5.0) {
            let a = lorentz_sum(xi, g, 0.0).unwrap();
            let b = lorentz_sum(-xi, g, 0.0).unwrap();
            prop_assert!((a - b).abs() <= 1e-14 * a);
        }

        #[test]
        fn matches_direct_summation(xi in 0.0f64..6.0, g in 0.05f64..4.0, d in -3.0f64..3.0) {
            let got = lorentz_sum(xi, g, d).unwrap();
            let want = oracle::direct_sum(xi, g, d, 40);
            prop_assert!((got - want).abs() <= 1e-11 * want);
        }
    }
}
