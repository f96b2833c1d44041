// SPDX-License-Identifier: Apache-2.0

//! Dormand–Prince 5(4) integrator with continuous (dense) output.
//!
//! The stepper advances one accepted step at a time so callers can read
//! the dense interpolant over `[t_prev, t]` and stop on their own
//! criteria (survival threshold, periodic convergence, ...).

use crate::error::{Error, Result};

/// Right-hand side of `y' = f(t, y)` on a fixed-size real state.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N], dy: &mut [f64; N]);
}

impl<const N: usize, F> OdeSystem<N> for F
where
    F: Fn(f64, &[f64; N], &mut [f64; N]),
{
    fn rhs(&self, t: f64, y: &[f64; N], dy: &mut [f64; N]) {
        self(t, y, dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl StepControl {
    /// Relative tolerance `tol`, absolute tolerance `1e-3 * tol`.
    pub fn from_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol * 1e-3,
            ..Self::default()
        }
    }
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            h_min: 1e-14,
            h_max: 1.0,
            max_steps: 50_000_000,
        }
    }
}

// Butcher tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// error coefficients (5th minus embedded 4th order)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

// step-size controller (Hairer's DOPRI5 defaults with PI stabilization)
const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

pub struct Dopri5<'a, const N: usize, S: OdeSystem<N>> {
    system: &'a S,
    control: StepControl,
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    fac_old: f64,
    t_prev: f64,
    h_prev: f64,
    cont: [[f64; N]; 5],
    steps: usize,
    rejected: usize,
    evaluations: usize,
}

impl<'a, const N: usize, S: OdeSystem<N>> Dopri5<'a, N, S> {
    pub fn new(system: &'a S, t0: f64, y0: [f64; N], control: StepControl) -> Self {
        let mut k1 = [0.0; N];
        system.rhs(t0, &y0, &mut k1);
        let mut s = Self {
            system,
            control,
            t: t0,
            y: y0,
            k1,
            h: 0.0,
            fac_old: 1e-4,
            t_prev: t0,
            h_prev: 0.0,
            cont: [y0; 5],
            steps: 0,
            rejected: 0,
            evaluations: 1,
        };
        s.h = s.initial_step();
        s.cont = [y0, [0.0; N], [0.0; N], [0.0; N], [0.0; N]];
        s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64; N] {
        &self.y
    }

    /// Start of the last accepted step.
    pub fn t_prev(&self) -> f64 {
        self.t_prev
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn rejected(&self) -> usize {
        self.rejected
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    fn scale(&self, a: f64, b: f64) -> f64 {
        self.control.atol + self.control.rtol * a.abs().max(b.abs())
    }

    fn initial_step(&mut self) -> f64 {
        let mut dnf = 0.0;
        let mut dny = 0.0;
        for i in 0..N {
            let sk = self.scale(self.y[i], self.y[i]);
            dnf += (self.k1[i] / sk).powi(2);
            dny += (self.y[i] / sk).powi(2);
        }
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
            1e-6
        } else {
            0.01 * (dny / dnf).sqrt()
        };
        h = h.min(self.control.h_max);
        let mut y1 = [0.0; N];
        for i in 0..N {
            y1[i] = self.y[i] + h * self.k1[i];
        }
        let mut k2 = [0.0; N];
        self.system.rhs(self.t + h, &y1, &mut k2);
        self.evaluations += 1;
        let mut der2 = 0.0;
        for i in 0..N {
            let sk = self.scale(self.y[i], self.y[i]);
            der2 += ((k2[i] - self.k1[i]) / sk).powi(2);
        }
        let der2 = der2.sqrt() / h;
        let der12 = der2.max(dnf.sqrt());
        let h1 = if der12 <= 1e-15 {
            (1e-6f64).max(h * 1e-3)
        } else {
            (0.01 / der12).powf(0.2)
        };
        (100.0 * h).min(h1).min(self.control.h_max)
    }

    /// Advances by one accepted step, never past `t_bound`.
    pub fn step(&mut self, t_bound: f64) -> Result<()> {
        if self.steps >= self.control.max_steps {
            return Err(Error::TooManySteps(self.control.max_steps));
        }
        let sys = self.system;
        let expo = 0.2 - BETA * 0.75;
        let mut last = false;
        loop {
            let mut h = self.h;
            if self.t + h >= t_bound {
                h = t_bound - self.t;
                last = true;
            }
            if h.abs() < self.control.h_min {
                return Err(Error::StepSizeUnderflow { t: self.t, step: h });
            }
            let t = self.t;
            let y = &self.y;
            let k1 = &self.k1;
            let mut tmp = [0.0; N];
            let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
                ([0.0; N], [0.0; N], [0.0; N], [0.0; N], [0.0; N], [0.0; N]);

            for i in 0..N {
                tmp[i] = y[i] + h * A21 * k1[i];
            }
            sys.rhs(t + C2 * h, &tmp, &mut k2);
            for i in 0..N {
                tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            sys.rhs(t + C3 * h, &tmp, &mut k3);
            for i in 0..N {
                tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            sys.rhs(t + C4 * h, &tmp, &mut k4);
            for i in 0..N {
                tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            sys.rhs(t + C5 * h, &tmp, &mut k5);
            for i in 0..N {
                tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            sys.rhs(t + h, &tmp, &mut k6);
            let mut y_new = [0.0; N];
            for i in 0..N {
                y_new[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            sys.rhs(t + h, &y_new, &mut k7);
            self.evaluations += 6;

            let mut err = 0.0;
            for i in 0..N {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sk = self.scale(y[i], y_new[i]);
                err += (e / sk).powi(2);
            }
            let err = (err / N as f64).sqrt();

            let fac11 = err.powf(expo);
            if err <= 1.0 {
                let mut fac = fac11 / self.fac_old.powf(BETA);
                fac = (1.0 / FAC_MAX).max((1.0 / FAC_MIN).min(fac / SAFETY));
                let h_next = (h / fac).min(self.control.h_max);
                self.fac_old = err.max(1e-4);

                for i in 0..N {
                    let ydiff = y_new[i] - y[i];
                    let bspl = h * k1[i] - ydiff;
                    self.cont[0][i] = y[i];
                    self.cont[1][i] = ydiff;
                    self.cont[2][i] = bspl;
                    self.cont[3][i] = ydiff - h * k7[i] - bspl;
                    self.cont[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                }
                self.t_prev = t;
                self.h_prev = h;
                self.t = if last { t_bound } else { t + h };
                self.y = y_new;
                self.k1 = k7;
                if !last || h_next < self.h {
                    self.h = h_next;
                }
                self.steps += 1;
                return Ok(());
            }
            self.rejected += 1;
            last = false;
            self.h = h / (1.0 / FAC_MIN).min(fac11 / SAFETY);
        }
    }

    /// Dense output on the last accepted step, `t` in `[t_prev, t]`.
    pub fn interpolate(&self, t: f64) -> [f64; N] {
        if self.steps == 0 {
            return self.y;
        }
        let s = (t - self.t_prev) / self.h_prev;
        let s1 = 1.0 - s;
        let c = &self.cont;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * c[4][i])));
        }
        out
    }
}

/// Integrates from `t0` and reports the solution at each of `times`
/// (non-decreasing, all `>= t0`) through `sample`. Returning `false` from
/// `sample` stops the integration early.
pub fn integrate_sampled<const N: usize, S, I, F>(
    system: &S,
    t0: f64,
    y0: [f64; N],
    control: StepControl,
    times: I,
    mut sample: F,
) -> Result<()>
where
    S: OdeSystem<N>,
    I: IntoIterator<Item = f64>,
    F: FnMut(f64, &[f64; N]) -> bool,
{
    let mut stepper = Dopri5::new(system, t0, y0, control);
    for t in times {
        while stepper.t() < t {
            stepper.step(f64::INFINITY)?;
        }
        let y = if t == stepper.t() {
            *stepper.y()
        } else {
            stepper.interpolate(t)
        };
        if !sample(t, &y) {
            break;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_accuracy() {
        let sys = |_t: f64, y: &[f64; 2], dy: &mut [f64; 2]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let times: Vec<f64> = (0..=200).map(|i| 0.5 * i as f64).collect();
        let control = StepControl {
            rtol: 1e-10,
            atol: 1e-13,
            ..Default::default()
        };
        let mut worst: f64 = 0.0;
        integrate_sampled(&sys, 0.0, [1.0, 0.0], control, times, |t, y| {
            worst = worst.max((y[0] - t.cos()).abs()).max((y[1] + t.sin()).abs());
            true
        })
        .unwrap();
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn dense_output_between_steps() {
        let sys = |_t: f64, y: &[f64; 1], dy: &mut [f64; 1]| dy[0] = -0.5 * y[0];
        let mut st = Dopri5::new(&sys, 0.0, [1.0], StepControl::from_tol(1e-10));
        st.step(f64::INFINITY).unwrap();
        st.step(f64::INFINITY).unwrap();
        let mid = 0.5 * (st.t_prev() + st.t());
        let y = st.interpolate(mid)[0];
        assert!((y - (-0.5 * mid).exp()).abs() < 1e-9);
        assert_eq!(st.interpolate(st.t())[0], st.y()[0]);
    }

    #[test]
    fn stops_at_bound() {
        let sys = |_t: f64, _y: &[f64; 1], dy: &mut [f64; 1]| dy[0] = 1.0;
        let mut st = Dopri5::new(&sys, 0.0, [0.0], StepControl::default());
        while st.t() < 2.5 {
            st.step(2.5).unwrap();
        }
        assert_eq!(st.t(), 2.5);
        assert!((st.y()[0] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn underflow_is_reported() {
        // finite-time blow-up forces the step size down
        let sys = |_t: f64, y: &[f64; 1], dy: &mut [f64; 1]| dy[0] = y[0] * y[0];
        let mut st = Dopri5::new(&sys, 0.0, [1.0], StepControl::default());
        let mut res = Ok(());
        while res.is_ok() && st.t() < 2.0 {
            res = st.step(2.0);
        }
        assert!(matches!(res, Err(Error::StepSizeUnderflow { .. })), "{res:?}");
    }
}
