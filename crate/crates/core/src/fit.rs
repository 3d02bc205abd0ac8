//! Least-squares line fits used by the rate and decay measurements.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Standard error of the slope (0 for an exact fit or two points).
    pub slope_se: f64,
}

/// Ordinary least squares y = slope x + intercept.
pub fn ols(x: &[f64], y: &[f64]) -> Result<LineFit> {
    wls(x, y, &vec![1.0; x.len()])
}

/// Weighted least squares with weights w_i (typically 1/sigma_i^2).
/// R^2 is the weighted coefficient of determination.
pub fn wls(x: &[f64], y: &[f64], w: &[f64]) -> Result<LineFit> {
    assert!(x.len() == y.len() && x.len() == w.len());
    let n = x.len();
    if n < 2 {
        return Err(Error::FitDegenerate(n));
    }
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxx += w[i] * dx * dx;
        sxy += w[i] * dx * dy;
        syy += w[i] * dy * dy;
    }
    if sxx <= 0.0 || !sxx.is_finite() {
        return Err(Error::FitDegenerate(n));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = (0..n).map(|i| w[i] * (y[i] - slope * x[i] - intercept).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let slope_se = if n > 2 {
        (sse / (n as f64 - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LineFit {
        slope,
        intercept,
        r2,
        slope_se,
    })
}

/// Slope of log y against log x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    ols(&lx, &ly)
}
