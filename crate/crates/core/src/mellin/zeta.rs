//! Spectral zeta functions: `ζ_H(s) = Σ λ^{−s}`, the relativistic
//! `Z_r(s, μ) = Σ (ω − μ)^{−s}` and the quantum `Z_{b,f}(s, μ)`.

use std::f64::consts::PI;

use super::{a_q, a_q_prime, a_q_with_order, leading_coefficient, log_mellin, regularization_order};
use crate::error::{precondition, Error, Result};
use crate::quad;
use crate::spectra::Spectrum;
use crate::specfun::{digamma, gamma, gamma_sign, ln_gamma, rgamma, riemann_zeta, EULER_GAMMA};
use crate::sum::par_sum;
use crate::traces::{check_tol, theta_quantum_estimate, TracePath};
use crate::{Estimate, Statistics};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZetaMethod {
    /// `Σ mult λ^{−s}`, needs `s > n/2`.
    Direct,
    /// `(4π)^{−n/2} Γ(s − n/2)/Γ(s) A_{n/2−s}`.
    ViaA,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZrMethod {
    Direct,
    MuSeries,
    ClosedMu0,
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// `Σ mult (ω − μ)^{−s}` for `s > n`, `μ ≤ 0`.
///
/// The sum is cut halfway between two levels and the rest is replaced by
/// the Weyl integral `∫ (ω − μ)^{−s} dN(ω)`, `dN = 2(4π)^{−n/2} A_0 ω^{n−1}/Γ(n/2) dω`,
/// when `A_0` is known. The error estimate is the change between two
/// cutoffs. Without `A_0` the growth bound gives a rigorous tail instead.
fn power_sum(spec: &Spectrum, s: f64, mu: f64, tol: f64) -> Result<Estimate> {
    let n = spec.dim() as f64;
    if !(s > n) {
        return Err(precondition(format!("direct sum needs s > n = {n}, got s = {s}")));
    }
    if mu > 0.0 {
        return Err(precondition(format!("direct sum needs mu <= 0, got {mu}")));
    }
    let term = |w: f64| (w - mu).powf(-s);
    if spec.is_finite() {
        let levels = spec.levels(f64::INFINITY)?;
        let acc = par_sum(&levels, |l| l.mult as f64 * term(l.omega()));
        return Ok(Estimate::new(acc.value(), acc.rounding_bound()));
    }
    let weyl = leading_coefficient(spec)
        .map(|a0| 2.0 * (4.0 * PI).powf(-0.5 * n) * a0 * rgamma(0.5 * n));
    let g = spec.growth();
    let tail = |wc: f64| -> f64 {
        match weyl {
            Some(k) if mu == 0.0 => k * wc.powf(n - s) / (s - n),
            Some(k) => {
                // ω = wc/u
                let r = quad::integrate::<1, _>(
                    |u: f64| {
                        if u <= 0.0 {
                            return [0.0];
                        }
                        let w = wc / u;
                        [k * (w - mu).powf(-s) * w.powf(n - 1.0) * wc / (u * u)]
                    },
                    0.0,
                    1.0,
                    1e-13,
                    0.0,
                    500,
                );
                r.value[0]
            }
            None => 0.0,
        }
    };
    let bound = |wc: f64| s * g.c * (1.0 + 1.0 / wc).powf(n) * wc.powf(n - s) / (s - n);
    let eval = |cut_omega: f64| -> Result<(f64, f64, f64)> {
        let levels = spec.levels(cut_omega * cut_omega)?;
        let k = levels.len();
        if k < 2 {
            return Err(Error::Tolerance("too few levels below the cutoff".into()));
        }
        let wc = 0.5 * (levels[k - 2].omega() + levels[k - 1].omega());
        let acc = par_sum(&levels[..k - 1], |l| l.mult as f64 * term(l.omega()));
        Ok((acc.value() + tail(wc), acc.rounding_bound(), wc))
    };
    let mut cut = spec.omega_min() + 64.0;
    let mut prev = eval(cut)?;
    let mut prev_err = f64::INFINITY;
    loop {
        cut *= 2.0;
        let cur = match eval(cut) {
            Ok(c) => c,
            // level budget exhausted: keep the last estimate
            Err(Error::Precondition(_)) | Err(Error::Tolerance(_)) if prev_err.is_finite() => {
                return Ok(Estimate::new(prev.0, prev_err));
            }
            Err(e) => return Err(e),
        };
        let err = match weyl {
            Some(_) => (cur.0 - prev.0).abs(),
            None => bound(cur.2),
        } + cur.1;
        if err <= tol * cur.0.abs() || (weyl.is_some() && cut > 1e7) {
            return Ok(Estimate::new(cur.0, err));
        }
        prev = cur;
        prev_err = err;
    }
}

/// `ζ_H(s)`.
pub fn zeta_h(spec: &Spectrum, s: f64, method: ZetaMethod, tol: f64) -> Result<Estimate> {
    check_tol(tol)?;
    let n = spec.dim() as f64;
    match method {
        ZetaMethod::Direct => {
            if !(s > 0.5 * n) {
                return Err(precondition(format!(
                    "direct zeta sum needs s > n/2 = {}, got s = {s}",
                    0.5 * n
                )));
            }
            power_sum(spec, 2.0 * s, 0.0, tol)
        }
        ZetaMethod::ViaA => {
            let h = s - 0.5 * n;
            let ratio = if is_nonpositive_integer(h) {
                if !is_nonpositive_integer(s) {
                    return Err(Error::Pole(format!("zeta_H has a pole at s = {s}")));
                }
                // Γ(−m−i)/Γ(−i) → (−1)^m i!/(m+i)!
                let i = -s;
                let m = 0.5 * n;
                let sign = if (m as i64) % 2 == 0 { 1.0 } else { -1.0 };
                sign * (ln_gamma(i + 1.0)? - ln_gamma(m + i + 1.0)?).exp()
            } else {
                gamma(h)? * rgamma(s)
            };
            if ratio == 0.0 {
                return Ok(Estimate::exact(0.0));
            }
            let a = a_q(spec, -h, tol)?;
            let pref = (4.0 * PI).powf(-0.5 * n) * ratio;
            Ok(Estimate::new(pref * a.value, (pref * a.err_estimate).abs()))
        }
    }
}

/// `(ζ_H(0), ζ′_H(0))`. Odd `n = 2m+1`: `ζ_H(0) = 0`,
/// `ζ′_H(0) = (−1)^{m+1} π^{−m} m!/(2m+1)! A_{m+1/2}`. Even `n = 2m`:
/// `ζ_H(0) = (4π)^{−m} (−1)^m/m! A_m`,
/// `ζ′_H(0) = (4π)^{−m} (−1)^m/m! [(ψ(m+1) + 𝐂) A_m − A′_m]`.
pub fn zeta_h_special(spec: &Spectrum, tol: f64) -> Result<(Estimate, Estimate)> {
    check_tol(tol)?;
    let n = spec.dim();
    let m = n / 2;
    let mf = m as f64;
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    if n % 2 == 1 {
        let a = a_q(spec, mf + 0.5, tol)?;
        let c = -sign * PI.powf(-mf) * (ln_gamma(mf + 1.0)? - ln_gamma(2.0 * mf + 2.0)?).exp();
        return Ok((Estimate::exact(0.0), Estimate::new(c * a.value, (c * a.err_estimate).abs())));
    }
    let a = a_q(spec, mf, tol)?;
    let d = a_q_prime(spec, mf, tol)?;
    let c = sign * (4.0 * PI).powf(-mf) * rgamma(mf + 1.0);
    let psi = digamma(mf + 1.0)? + EULER_GAMMA;
    let z0 = Estimate::new(c * a.value, (c * a.err_estimate).abs());
    let z1 = Estimate::new(
        c * (psi * a.value - d.value),
        c.abs() * (psi.abs() * a.err_estimate + d.err_estimate),
    );
    Ok((z0, z1))
}

/// `ln|Γ(x)|` and the sign of `Γ(x)`; errors at the poles.
fn signed_ln_gamma(x: f64) -> Result<(f64, f64)> {
    Ok((ln_gamma(x)?, gamma_sign(x)))
}

/// `Z_r(s, μ)`.
pub fn z_relativistic(spec: &Spectrum, s: f64, mu: f64, method: ZrMethod, tol: f64) -> Result<Estimate> {
    check_tol(tol)?;
    if mu > 0.0 || mu.is_nan() {
        return Err(precondition(format!("Z_r needs mu <= 0, got {mu}")));
    }
    let n = spec.dim() as f64;
    let pref_ln = -0.5 * (n + 1.0) * (4.0 * PI).ln();
    match method {
        ZrMethod::Direct => power_sum(spec, s, mu, tol),
        ZrMethod::ClosedMu0 => {
            if mu != 0.0 {
                return Err(precondition(format!("closed form needs mu = 0, got {mu}")));
            }
            let a = a_q(spec, 0.5 * (n - s), tol)?;
            let (l1, s1) = signed_ln_gamma(0.5 * (s + 1.0))?;
            let (l2, s2) = signed_ln_gamma(0.5 * (s - n))?;
            let rg = rgamma(s);
            let c = s1 * s2 * rg * (pref_ln + s * 2f64.ln() + l1 + l2).exp();
            Ok(Estimate::new(c * a.value, (c * a.err_estimate).abs()))
        }
        ZrMethod::MuSeries => {
            let w1 = spec.omega_min();
            if mu.abs() >= 0.9 * w1 {
                return Err(precondition(format!(
                    "mu series needs |mu| < 0.9 omega_1 = {}, got mu = {mu}",
                    0.9 * w1
                )));
            }
            let rg = rgamma(s);
            let mut sum = 0.0;
            let mut err = 0.0;
            let mut prev = f64::NAN;
            let mut ln_fact = 0.0;
            for k in 0..400usize {
                let kf = k as f64;
                if k > 0 {
                    ln_fact += kf.ln();
                }
                let q = 0.5 * (n - s - kf);
                let a = a_q_with_order(spec, q, regularization_order(q), 0.1 * tol)?.0;
                let (l1, s1) = signed_ln_gamma(0.5 * (s + kf + 1.0))?;
                let (l2, s2) = signed_ln_gamma(0.5 * (s + kf - n))?;
                let mu_sign = if mu < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
                let ln_mu = if k == 0 { 0.0 } else { kf * mu.abs().ln() };
                let c = mu_sign * s1 * s2 * rg
                    * (pref_ln + ln_mu - ln_fact + (s + kf) * 2f64.ln() + l1 + l2).exp();
                let t = c * a.value;
                sum += t;
                err += (c * a.err_estimate).abs();
                if k >= 2 && prev != 0.0 {
                    let r = (t / prev).abs();
                    if r < 0.9 && t.abs() <= 0.1 * tol * sum.abs() {
                        err += t.abs() * r / (1.0 - r);
                        return Ok(Estimate::new(sum, err));
                    }
                }
                if mu == 0.0 {
                    return Ok(Estimate::new(sum, err));
                }
                prev = t;
            }
            Err(Error::Tolerance("mu series did not converge".into()))
        }
    }
}

/// `Z_{b,f}(s, μ)` computed two ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumZeta {
    /// `ζ(s) Z_r(s, μ)` (bose) or `(1 − 2^{1−s}) ζ(s) Z_r(s, μ)` (fermi).
    pub relation: Estimate,
    /// `Γ(s)^{−1} ∫_0^∞ β^{s−1} Θ_{b,f}(β, μ) dβ`.
    pub quadrature: Estimate,
}

fn check_quantum_zeta(spec: &Spectrum, s: f64, mu: f64, stat: Statistics) -> Result<()> {
    let n = spec.dim() as f64;
    if !(s > n) {
        return Err(precondition(format!("Z_{} needs s > n = {n}, got s = {s}", stat.name())));
    }
    if mu > 0.0 || mu.is_nan() {
        return Err(precondition(format!("Z_{} needs mu <= 0, got {mu}", stat.name())));
    }
    if stat == Statistics::Bose && mu >= spec.omega_min() {
        return Err(precondition("bose zeta needs mu < omega_1"));
    }
    Ok(())
}

fn relation(spec: &Spectrum, s: f64, mu: f64, stat: Statistics, tol: f64) -> Result<Estimate> {
    let zr = power_sum(spec, s, mu, tol)?;
    let z = riemann_zeta(s)?;
    let f = match stat {
        Statistics::Bose => z,
        Statistics::Fermi => (1.0 - 2f64.powf(1.0 - s)) * z,
    };
    Ok(Estimate::new(f * zr.value, (f * zr.err).abs() + 2.0 * f64::EPSILON * (f * zr.value).abs()))
}

/// `Z_{b,f}(s, μ)` from the closed relation with `Z_r`.
pub fn z_quantum(spec: &Spectrum, s: f64, mu: f64, stat: Statistics, tol: f64) -> Result<Estimate> {
    check_tol(tol)?;
    check_quantum_zeta(spec, s, mu, stat)?;
    relation(spec, s, mu, stat, tol)
}

/// [`z_quantum`] together with the Mellin quadrature of the trace.
pub fn z_quantum_checked(spec: &Spectrum, s: f64, mu: f64, stat: Statistics, tol: f64) -> Result<QuantumZeta> {
    check_tol(tol)?;
    check_quantum_zeta(spec, s, mu, stat)?;
    let rel = relation(spec, s, mu, stat, tol)?;
    let inner = (0.01 * tol).max(1e-15);
    let theta = |beta: f64| theta_quantum_estimate(spec, beta, mu, stat, inner, TracePath::DirectSum);
    let scale = spec.omega_min() - mu;
    let [i0, _] = log_mellin(theta, s, scale, 1e-2 / scale, tol)?;
    let rg = rgamma(s);
    Ok(QuantumZeta {
        relation: rel,
        quadrature: Estimate::new(rg * i0.value, (rg * i0.err).abs()),
    })
}
