//! Occupation functions `E_{b,f}` and the Bose/Fermi sums
//! `F_b(s, x) = Σ_k e^{kx} k^{−s}`, `F_f(s, x) = Σ_k (−1)^{k+1} e^{kx} k^{−s}`
//! for `x ≤ 0`, with their s-derivatives.
//!
//! Far from `x = 0` the defining series converges geometrically and is summed
//! directly. Close to `x = 0` the expansions in powers of `x` are used:
//! `F_f(s, x) = Σ_k η(s−k) x^k/k!` (radius π, regular) and
//! `F_b(s, x) = Γ(1−s)(−x)^{s−1} + Σ_k ζ(s−k) x^k/k!` (radius 2π), with the
//! logarithmic form at positive integer `s`.

use super::gamma::{digamma, gamma, EULER_GAMMA};
use super::zeta::{dirichlet_eta, dirichlet_eta_prime, riemann_zeta, riemann_zeta_prime};
use crate::error::{precondition, Error, Result};
use crate::sum::Neumaier;
use crate::{Estimate, Statistics};

const MAX_TERMS: usize = 1_000_000;
const MAX_TAYLOR_TERMS: usize = 600;
/// Below this |x| the fermionic power series is tried first.
const FERMI_TAYLOR_RADIUS: f64 = 2.5;
/// Below this |x| the bosonic expansion around x = 0 is tried first.
const BOSE_TAYLOR_RADIUS: f64 = 1.0;

/// `E_b(x) = 1/(e^x − 1)` (requires `x > 0`) or `E_f(x) = 1/(e^x + 1)`.
pub fn occupation(x: f64, stat: Statistics) -> Result<f64> {
    match stat {
        Statistics::Bose => {
            if !(x > 0.0) {
                return Err(Error::Pole(format!("bose occupation at x = {x} <= 0")));
            }
            if x > 1.0 {
                let e = (-x).exp();
                Ok(e / -(-x).exp_m1())
            } else {
                Ok(1.0 / x.exp_m1())
            }
        }
        Statistics::Fermi => {
            if x.is_nan() {
                return Err(precondition("fermi occupation argument is NaN"));
            }
            if x > 0.0 {
                let e = (-x).exp();
                Ok(e / (1.0 + e))
            } else {
                Ok(1.0 / (1.0 + x.exp()))
            }
        }
    }
}

/// `F_{b,f}(s, x)` (deriv = 0) or `∂_s F_{b,f}(s, x)` (deriv = 1), `x ≤ 0`,
/// to relative tolerance `tol`.
pub fn f_statistic(s: f64, x: f64, stat: Statistics, deriv: u8, tol: f64) -> Result<f64> {
    let est = f_statistic_estimate(s, x, stat, deriv, tol)?;
    if est.err > tol * est.value.abs() && est.err > f64::MIN_POSITIVE {
        return Err(Error::Tolerance(format!(
            "F_{}({s}, {x}) deriv {deriv}: error estimate {:e} exceeds tol {tol:e}",
            stat.name(),
            est.rel_err()
        )));
    }
    Ok(est.value)
}

/// Like [`f_statistic`] but returns the best available value with its
/// error estimate instead of failing when rounding limits the accuracy.
pub fn f_statistic_estimate(
    s: f64,
    x: f64,
    stat: Statistics,
    deriv: u8,
    tol: f64,
) -> Result<Estimate> {
    if deriv > 1 {
        return Err(precondition(format!("derivative order {deriv} not supported")));
    }
    if x.is_nan() || s.is_nan() {
        return Err(precondition("NaN argument"));
    }
    if x > 0.0 {
        return Err(precondition(format!(
            "F_{}(s, x) requires x <= 0, got x = {x}",
            stat.name()
        )));
    }
    let d = deriv == 1;
    if x == 0.0 {
        return at_zero(s, stat, d);
    }
    let ax = -x;
    let mut candidates: Vec<Estimate> = Vec::new();
    let taylor = match stat {
        Statistics::Fermi if ax < FERMI_TAYLOR_RADIUS => Some(fermi_taylor(s, x, d, tol)?),
        Statistics::Bose if ax < BOSE_TAYLOR_RADIUS => bose_taylor(s, x, d, tol)?,
        _ => None,
    };
    if let Some(t) = taylor {
        if t.err <= tol * t.value.abs() {
            return Ok(t);
        }
        candidates.push(t);
    }
    match direct(s, x, stat, d, tol) {
        Ok(e) => candidates.push(e),
        Err(e) if candidates.is_empty() => return Err(e),
        Err(_) => {}
    }
    Ok(candidates
        .into_iter()
        .min_by(|a, b| a.rel_err().total_cmp(&b.rel_err()))
        .expect("at least one candidate"))
}

fn at_zero(s: f64, stat: Statistics, d: bool) -> Result<Estimate> {
    let v = match stat {
        Statistics::Bose => {
            if s <= 1.0 {
                return Err(precondition(format!(
                    "F_b(s, 0) diverges for s <= 1 (s = {s})"
                )));
            }
            if d {
                riemann_zeta_prime(s)?
            } else {
                riemann_zeta(s)?
            }
        }
        Statistics::Fermi => {
            if d {
                dirichlet_eta_prime(s)
            } else {
                dirichlet_eta(s)
            }
        }
    };
    Ok(Estimate::new(v, 4.0 * f64::EPSILON * v.abs()))
}

/// Direct summation of the defining series with a geometric tail bound.
fn direct(s: f64, x: f64, stat: Statistics, d: bool, tol: f64) -> Result<Estimate> {
    let alternating = stat == Statistics::Fermi;
    let ex = x.exp();
    let mut acc = Neumaier::new();
    for k in 1..=MAX_TERMS {
        let kf = k as f64;
        let lk = kf.ln();
        let mag = (kf * x - s * lk).exp();
        let mut term = if d { -lk * mag } else { mag };
        if alternating && k % 2 == 0 {
            term = -term;
        }
        acc.add(term);
        // bound on |t_{j+1}/t_j| for all j ≥ k
        let mut r = if s > 0.0 {
            ex
        } else {
            ex * (kf / (kf + 1.0)).powf(s)
        };
        if d && k > 1 {
            r *= (kf + 1.0).ln() / lk;
        }
        if k >= 2 && r < 0.99 {
            let tail = if alternating {
                term.abs() * r
            } else {
                term.abs() * r / (1.0 - r)
            };
            let sum = acc.value();
            if tail <= 0.01 * tol * sum.abs() || (tail == 0.0 && mag == 0.0) {
                let err = tail + acc.rounding_bound();
                return Ok(Estimate::new(sum, err));
            }
        }
    }
    Err(Error::Tolerance(format!(
        "F_{}({s}, {x}) series did not converge within {MAX_TERMS} terms",
        stat.name()
    )))
}

/// Sums Σ_k c(k) x^k/k! until two consecutive terms are negligible.
fn power_series<F: FnMut(usize) -> f64>(x: f64, s: f64, tol: f64, mut coeff: F) -> Estimate {
    let k_min = 2 + (5.0 * (-s).max(0.0)).ceil() as usize;
    let mut acc = Neumaier::new();
    let mut xk = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..MAX_TAYLOR_TERMS {
        if k > 0 {
            xk *= x / k as f64;
        }
        let term = coeff(k) * xk;
        acc.add(term);
        let small = 0.01 * tol * acc.value().abs();
        if k >= k_min && term.abs() <= small && prev <= small {
            // the remainder is geometric with ratio < |x|/π < 0.8
            let err = 5.0 * (term.abs() + prev) + acc.rounding_bound();
            return Estimate::new(acc.value(), err);
        }
        prev = term.abs();
    }
    Estimate::new(acc.value(), f64::INFINITY)
}

fn fermi_taylor(s: f64, x: f64, d: bool, tol: f64) -> Result<Estimate> {
    Ok(power_series(x, s, tol, |k| {
        let arg = s - k as f64;
        if d {
            dirichlet_eta_prime(arg)
        } else {
            dirichlet_eta(arg)
        }
    }))
}

/// Returns `None` where the expansion around zero is not usable (positive
/// integer s with a derivative, or s close to a positive integer).
fn bose_taylor(s: f64, x: f64, d: bool, tol: f64) -> Result<Option<Estimate>> {
    let nearest = s.round();
    let positive_int = s == nearest && s >= 1.0;
    if s > 0.0 && !positive_int && (s - nearest).abs() < 0.05 && nearest >= 1.0 {
        return Ok(None);
    }
    let lx = (-x).ln();
    if positive_int {
        if d {
            return Ok(None);
        }
        // F_b(j, x) = [ψ(j) + γ − ln(−x)] x^{j−1}/(j−1)! + Σ_{k≠j−1} ζ(j−k) x^k/k!
        let j = s as usize;
        let psi = digamma(s)?;
        let est = power_series(x, s, tol, |k| {
            if k == j - 1 {
                psi + EULER_GAMMA - lx
            } else {
                riemann_zeta(s - k as f64).expect("k != j-1 avoids the pole")
            }
        });
        return Ok(Some(est));
    }
    // singular part Γ(1−s)(−x)^{s−1}
    let g = gamma(1.0 - s)?;
    let sing = g * ((s - 1.0) * lx).exp();
    let sing = if d {
        sing * (lx - digamma(1.0 - s)?)
    } else {
        sing
    };
    let series = power_series(x, s, tol, |k| {
        let arg = s - k as f64;
        if d {
            riemann_zeta_prime(arg).expect("arg != 1")
        } else {
            riemann_zeta(arg).expect("arg != 1")
        }
    });
    let value = sing + series.value;
    let err = series.err + 4.0 * f64::EPSILON * sing.abs();
    Ok(Some(Estimate::new(value, err)))
}
