//! Verification of an expansion against direct traces.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// One grid point of a verification run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyRow {
    pub beta: f64,
    pub mu: f64,
    pub direct: f64,
    pub expansion: f64,
    pub abs_residual: f64,
    pub rel_residual: f64,
    pub pass: bool,
}

/// Least-squares line through `(ln β, ln |residual|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% confidence half-width of the slope.
    pub half_width: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub rows: Vec<VerifyRow>,
    /// `None` when fewer than five residuals are nonzero.
    pub fit: Option<SlopeFit>,
    /// First `β`-power left out of the truncated series.
    pub predicted_exponent: f64,
    pub slope_tol: f64,
    pub residual_tol: Option<f64>,
    pub slope_pass: bool,
    pub passed: bool,
}

pub const MIN_FIT_POINTS: usize = 5;

/// Fits `ln y = a + b ln x`, skipping points with `y == 0`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Result<Option<SlopeFit>> {
    if xs.len() != ys.len() {
        return Err(Error::Precondition("fit_slope: length mismatch".into()));
    }
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, y)| **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len();
    if n < MIN_FIT_POINTS {
        return Ok(None);
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Precondition("fit_slope: abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let se = (sse / (nf - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, nf - 2.0)
        .map_err(|e| Error::Precondition(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(Some(SlopeFit { slope, intercept, half_width: t * se, points: n }))
}

impl VerificationReport {
    pub fn new(rows: Vec<VerifyRow>, predicted_exponent: f64, slope_tol: f64, residual_tol: Option<f64>) -> Result<Self> {
        let betas: Vec<f64> = rows.iter().map(|r| r.beta).collect();
        let res: Vec<f64> = rows.iter().map(|r| r.abs_residual).collect();
        let fit = fit_slope(&betas, &res)?;
        let slope_pass = fit.is_some_and(|f| (f.slope - predicted_exponent).abs() <= slope_tol);
        let passed = slope_pass && rows.iter().all(|r| r.pass);
        Ok(VerificationReport { rows, fit, predicted_exponent, slope_tol, residual_tol, slope_pass, passed })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_has_zero_width() {
        let xs: Vec<f64> = (1..=8).map(|i| 0.01 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powi(3)).collect();
        let f = fit_slope(&xs, &ys).unwrap().unwrap();
        assert!((f.slope - 3.0).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-10);
        assert!(f.half_width < 1e-10);
    }

    #[test]
    fn noisy_fit_covers_true_slope() {
        let xs: Vec<f64> = (0..9).map(|i| 0.02 * 10f64.powf(i as f64 / 8.0)).collect();
        let noise = [0.03, -0.02, 0.01, -0.04, 0.02, 0.0, -0.01, 0.03, -0.02];
        let ys: Vec<f64> = xs.iter().zip(noise).map(|(x, e)| x.powi(2) * (1.0 + e)).collect();
        let f = fit_slope(&xs, &ys).unwrap().unwrap();
        assert!(f.half_width > 0.0);
        assert!((f.slope - 2.0).abs() <= f.half_width);
    }

    #[test]
    fn too_few_nonzero_points() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let ys = [1.0, 0.0, 3.0, 0.0, 5.0, 6.0];
        assert!(fit_slope(&xs, &ys).unwrap().is_none());
    }
}
