//! Least-squares line fits.

use crate::{Error, Result};

/// Fit of `y ≈ intercept + slope · x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; 1 when `y` is constant and fitted exactly.
    pub r2: f64,
    /// Root-mean-square residual.
    pub rms_residual: f64,
    pub count: usize,
}

/// Ordinary least squares on paired samples.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len().min(y.len());
    if n < 2 {
        return Err(Error::TooFewSamples { got: n, need: 2 });
    }
    let nf = n as f64;
    let mx = x[..n].iter().sum::<f64>() / nf;
    let my = y[..n].iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for k in 0..n {
        let dx = x[k] - mx;
        let dy = y[k] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateFit { usable: n, need: 2 });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss_res = 0.0;
    for k in 0..n {
        let r = y[k] - intercept - slope * x[k];
        ss_res += r * r;
    }
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(LineFit {
        slope,
        intercept,
        r2,
        rms_residual: crate::math::sqrt(ss_res / nf),
        count: n,
    })
}
