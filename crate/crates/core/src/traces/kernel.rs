//! The kernels `h_{b,f}(t, x)` that turn the classical heat trace into the
//! quantum ones:
//!
//! `h_b(t, x) = (4π)^{−1/2} t^{−3/2} Σ_{k≥1} k e^{−k²/(4t) + kx}`,
//! `h_f(t, x) = (4π)^{−1/2} t^{−3/2} Σ_{k≥1} (−1)^{k+1} k e^{−k²/(4t) + kx}`.

use std::f64::consts::PI;

use crate::error::{precondition, Error, Result};
use crate::specfun::bernoulli_f64;
use crate::sum::Neumaier;
use crate::{Estimate, Statistics};

const MAX_KERNEL_TERMS: usize = 10_000_000;

/// `h_{b,f}(t, x)` for `t > 0`, `x ≤ 0`, to relative tolerance `tol`.
pub fn h_kernel(t: f64, x: f64, stat: Statistics, tol: f64) -> Result<f64> {
    Ok(h_kernel_estimate(t, x, stat, tol)?.value)
}

/// [`h_kernel`] with an absolute error estimate (truncation plus rounding).
pub fn h_kernel_estimate(t: f64, x: f64, stat: Statistics, tol: f64) -> Result<Estimate> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(precondition(format!("h kernel needs t > 0, got {t}")));
    }
    if x > 0.0 || x.is_nan() {
        return Err(precondition(format!(
            "h kernel needs x <= 0, got {x} (the contour representation for x > 0 is not implemented)"
        )));
    }
    let ln_pref = -0.5 * (4.0 * PI).ln() - 1.5 * t.ln();
    let inv4t = 0.25 / t;
    let peak = (2.0 * t).sqrt();
    let alternating = stat == Statistics::Fermi;
    let mut acc = Neumaier::new();
    for k in 1..=MAX_KERNEL_TERMS {
        let kf = k as f64;
        let e = ln_pref + kf.ln() - kf * kf * inv4t + kf * x;
        let mut term = e.exp();
        if alternating && k % 2 == 0 {
            term = -term;
        }
        acc.add(term);
        if kf >= peak {
            // Σ_{j>k} j e^{−j²/4t + jx} ≤ 2t e^{−k²/4t + kx} past the peak
            let tail = (ln_pref + (2.0 * t).ln() - kf * kf * inv4t + kf * x).exp();
            let sum = acc.value().abs();
            if tail <= 1e-3 * tol * sum || tail < f64::MIN_POSITIVE {
                return Ok(Estimate::new(acc.value(), tail + acc.rounding_bound()));
            }
        }
    }
    Err(Error::Tolerance(format!(
        "h kernel at t = {t} did not converge in {MAX_KERNEL_TERMS} terms"
    )))
}

/// Leading large-t behaviour of `h_{b,f}(t, x)`.
///
/// For `x < 0` both kernels decay like `t^{−3/2}` with the coefficient
/// `Σ (±1)^{k+1} k e^{kx}`; at `x = 0`, `h_b ∼ t^{−1/2}/√π` and
/// `h_f ∼ t^{−3/2}/(8√π)`.
pub fn h_kernel_large_t(t: f64, x: f64, stat: Statistics) -> f64 {
    let pref = (4.0 * PI).powf(-0.5) * t.powf(-1.5);
    if x < 0.0 {
        let e = x.exp();
        match stat {
            Statistics::Bose => pref * e / ((1.0 - e) * (1.0 - e)),
            Statistics::Fermi => pref * e / ((1.0 + e) * (1.0 + e)),
        }
    } else {
        match stat {
            Statistics::Bose => 1.0 / (PI * t).sqrt(),
            Statistics::Fermi => t.powf(-1.5) / (8.0 * PI.sqrt()),
        }
    }
}

/// Large-t asymptotic series of `h_{b,f}(t, 0)` through `t^{−terms−1/2}`,
/// with coefficients given by Bernoulli numbers:
///
/// `h_b(t, 0) ∼ t^{−1/2}/√π − (4π)^{−1/2} Σ_k c_k t^{−k−1/2}`,
/// `h_f(t, 0) ∼ (4π)^{−1/2} Σ_k (2^{2k} − 1) c_k t^{−k−1/2}`,
/// `c_k = (−1)^{k+1} B_{2k} / (2^{2k−1} k!)`.
pub fn h_kernel_zero_mu_series(t: f64, stat: Statistics, terms: usize) -> Result<f64> {
    let pref = (4.0 * PI).powf(-0.5);
    let mut acc = Neumaier::new();
    if stat == Statistics::Bose {
        acc.add(1.0 / (PI * t).sqrt());
    }
    let mut fact = 1.0;
    for k in 1..=terms {
        fact *= k as f64;
        let b = bernoulli_f64(2 * k, 2 * terms.max(32))?;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let ck = sign * b / (2f64.powi(2 * k as i32 - 1) * fact);
        let tp = t.powf(-(k as f64) - 0.5);
        match stat {
            Statistics::Bose => acc.add(-pref * ck * tp),
            Statistics::Fermi => acc.add(pref * (4f64.powi(k as i32) - 1.0) * ck * tp),
        }
    }
    Ok(acc.value())
}
