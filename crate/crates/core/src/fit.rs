// SPDX-License-Identifier: Apache-2.0

//! Ordinary least squares on a straight line.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS of the residuals.
    pub rms: f64,
    /// Standard error of the slope.
    pub slope_stderr: f64,
}

pub fn line_fit(points: &[(f64, f64)]) -> LineFit {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let dof = (points.len() as f64 - 2.0).max(1.0);
    LineFit {
        slope,
        intercept,
        rms: (ss / n).sqrt(),
        slope_stderr: if sxx > 0.0 {
            (ss / dof / sxx).sqrt()
        } else {
            f64::INFINITY
        },
    }
}

/// `(slope, intercept, rms residual)`.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let f = line_fit(points);
    (f.slope, f.intercept, f.rms)
}
