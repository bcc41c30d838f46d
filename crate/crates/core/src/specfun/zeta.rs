//! Riemann zeta function, its derivative, and the alternating (eta) variant
//! `η(s) = (1 − 2^{1−s}) ζ(s)` for real arguments.
//!
//! For `s > 0` the Dirichlet series is summed to `N = 20` terms and the tail
//! is corrected by Euler–Maclaurin; negative arguments go through the
//! functional equation, with exact Bernoulli values at negative integers.

use std::f64::consts::{LN_2, PI};

use super::bernoulli::{bernoulli_with_max, rational_to_f64};
use super::gamma::{cos_pi, digamma, gamma, ln_gamma, sin_pi};
use crate::error::{Error, Result};
use crate::sum::Neumaier;

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const EM_N: usize = 20;
const EM_TERMS: usize = 12;
/// Bernoulli numbers up to this index are taken from the exact table.
const EXACT_BERNOULLI_LIMIT: usize = 128;

// B_{2k}/(2k)! for k = 1..12
const EM_COEFF: [f64; EM_TERMS] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
    43867.0 / 5109094217170944000.0,
    -174611.0 / 802857662698291200000.0,
    77683.0 / 14101100039391805440000.0,
    -236364091.0 / 1693824136731743669452800000.0,
];

fn is_integer(s: f64) -> bool {
    s == s.floor()
}

/// Euler–Maclaurin evaluation of (ζ(s), ζ'(s)) for `s > 0`, `s ≠ 1`.
fn euler_maclaurin(s: f64) -> (f64, f64) {
    let mut z = Neumaier::new();
    let mut dz = Neumaier::new();
    for n in 1..EM_N {
        let nf = n as f64;
        let t = nf.powf(-s);
        z.add(t);
        dz.add(-nf.ln() * t);
    }
    let n = EM_N as f64;
    let ln_n = n.ln();
    let n_s = n.powf(-s);
    // ∫_N^∞ x^{-s} dx and the endpoint half-term
    z.add(n * n_s / (s - 1.0));
    dz.add(n * n_s * (-ln_n / (s - 1.0) - 1.0 / ((s - 1.0) * (s - 1.0))));
    z.add(0.5 * n_s);
    dz.add(-0.5 * ln_n * n_s);
    // correction terms B_{2k}/(2k)! · s(s+1)...(s+2k−2) · N^{−s−2k+1}
    let mut poch = s;
    let mut dlog = 1.0 / s;
    let mut npow = n_s / n;
    for (k, c) in EM_COEFF.iter().enumerate() {
        if k > 0 {
            let j = (2 * k - 1) as f64;
            poch *= (s + j) * (s + j + 1.0);
            dlog += 1.0 / (s + j) + 1.0 / (s + j + 1.0);
            npow /= n * n;
        }
        let term = c * poch * npow;
        z.add(term);
        dz.add(term * (dlog - ln_n));
    }
    (z.value(), dz.value())
}

fn direct_large_s(s: f64) -> (f64, f64) {
    let mut z = Neumaier::new();
    let mut dz = Neumaier::new();
    z.add(1.0);
    let mut n = 2.0_f64;
    loop {
        let t = n.powf(-s);
        z.add(t);
        dz.add(-n.ln() * t);
        if t < 1e-18 {
            break;
        }
        n += 1.0;
    }
    (z.value(), dz.value())
}

fn positive_branch(s: f64) -> (f64, f64) {
    if s > 60.0 {
        direct_large_s(s)
    } else {
        euler_maclaurin(s)
    }
}

/// `n! / (2π)^n`, in log form when the factorial overflows.
fn factorial_over_2pi_pow(n: usize) -> f64 {
    if n <= 170 {
        gamma(n as f64 + 1.0).expect("positive argument") / (2.0 * PI).powi(n as i32)
    } else {
        (ln_gamma(n as f64 + 1.0).expect("positive argument") - n as f64 * LN_2PI).exp()
    }
}

/// `ζ(2k)` for `k ≥ 1`.
fn zeta_even(k: usize) -> f64 {
    positive_branch(2.0 * k as f64).0
}

/// ζ(1 − 2k) = −B_{2k}/(2k), exact table for moderate k.
fn zeta_negative_odd(k: usize) -> f64 {
    let idx = 2 * k;
    if idx <= EXACT_BERNOULLI_LIMIT {
        let b = bernoulli_with_max(idx, EXACT_BERNOULLI_LIMIT).expect("even index within limit");
        -rational_to_f64(&b) / idx as f64
    } else {
        // ζ(1−2k) = (−1)^k 2 (2k−1)! ζ(2k) / (2π)^{2k}
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sign * 2.0 * factorial_over_2pi_pow(idx - 1) / (2.0 * PI) * zeta_even(k)
    }
}

/// ζ(s) for real `s ≠ 1`.
pub fn riemann_zeta(s: f64) -> Result<f64> {
    if s == 1.0 {
        return Err(Error::Pole("riemann zeta at s = 1".into()));
    }
    if s.is_nan() {
        return Err(Error::Precondition("riemann zeta argument is NaN".into()));
    }
    if s == 0.0 {
        return Ok(-0.5);
    }
    if s > 0.0 {
        return Ok(positive_branch(s).0);
    }
    if is_integer(s) {
        let n = (-s) as usize;
        if n % 2 == 0 {
            return Ok(0.0);
        }
        return Ok(zeta_negative_odd((n + 1) / 2));
    }
    // ζ(s) = 2^s π^{s−1} sin(πs/2) Γ(1−s) ζ(1−s)
    let z1 = positive_branch(1.0 - s).0;
    Ok(chi(s) * z1)
}

/// χ(s) = 2^s π^{s−1} sin(πs/2) Γ(1−s), so that ζ(s) = χ(s) ζ(1−s).
fn chi(s: f64) -> f64 {
    let sn = sin_pi(0.5 * s);
    if 1.0 - s < 170.0 {
        2f64.powf(s) * PI.powf(s - 1.0) * sn * gamma(1.0 - s).expect("1-s > 1")
    } else {
        let l = s * LN_2 + (s - 1.0) * PI.ln() + ln_gamma(1.0 - s).expect("1-s > 1");
        sn.signum() * (l + sn.abs().ln()).exp()
    }
}

/// ζ'(s) for real `s ≠ 1`.
///
/// Negative integers use the closed forms in terms of ζ(2k+1), ζ(2k),
/// ζ'(2k) and ψ(2k); `s > 0` differentiates the Euler–Maclaurin sum term by
/// term; other negative arguments differentiate the functional equation.
pub fn riemann_zeta_prime(s: f64) -> Result<f64> {
    if s == 1.0 {
        return Err(Error::Pole("riemann zeta derivative at s = 1".into()));
    }
    if s.is_nan() {
        return Err(Error::Precondition("riemann zeta argument is NaN".into()));
    }
    if s == 0.0 {
        return Ok(-0.5 * LN_2PI);
    }
    if s > 0.0 {
        return Ok(positive_branch(s).1);
    }
    if is_integer(s) {
        let n = (-s) as usize;
        if n % 2 == 0 {
            // ζ'(−2k) = (−1)^k (2k)! ζ(2k+1) / (2 (2π)^{2k})
            let k = n / 2;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let z = positive_branch(n as f64 + 1.0).0;
            return Ok(sign * factorial_over_2pi_pow(n) * z / 2.0);
        }
        // ζ'(1−2k) = −(−1)^k 2 (2k−1)!/(2π)^{2k} {ζ'(2k) + [ψ(2k) − ln 2π] ζ(2k)}
        let k = (n + 1) / 2;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let two_k = 2 * k;
        let (z, dz) = positive_branch(two_k as f64);
        let psi = digamma(two_k as f64)?;
        let pre = 2.0 * factorial_over_2pi_pow(two_k - 1) / (2.0 * PI);
        return Ok(-sign * pre * (dz + (psi - LN_2PI) * z));
    }
    // ζ'(s) = χ(s) [(ln 2π + (π/2) cot(πs/2) − ψ(1−s)) ζ(1−s) − ζ'(1−s)]
    let (z1, dz1) = positive_branch(1.0 - s);
    let cot = cos_pi(0.5 * s) / sin_pi(0.5 * s);
    let bracket = (LN_2PI + 0.5 * PI * cot - digamma(1.0 - s)?) * z1 - dz1;
    Ok(chi(s) * bracket)
}

/// `1 − 2^{1−s}`, accurate near `s = 1`.
fn eta_factor(s: f64) -> f64 {
    -((1.0 - s) * LN_2).exp_m1()
}

/// η(s) = Σ (−1)^{k+1} k^{−s} = (1 − 2^{1−s}) ζ(s), entire; η(1) = ln 2.
pub fn dirichlet_eta(s: f64) -> f64 {
    if s == 1.0 {
        return LN_2;
    }
    eta_factor(s) * riemann_zeta(s).expect("s != 1")
}

/// η'(s) = 2^{1−s} ln 2 · ζ(s) + (1 − 2^{1−s}) ζ'(s); η'(1) = γ ln 2 − (ln 2)²/2.
pub fn dirichlet_eta_prime(s: f64) -> f64 {
    if s == 1.0 {
        return super::gamma::EULER_GAMMA * LN_2 - 0.5 * LN_2 * LN_2;
    }
    let z = riemann_zeta(s).expect("s != 1");
    let dz = riemann_zeta_prime(s).expect("s != 1");
    2f64.powf(1.0 - s) * LN_2 * z + eta_factor(s) * dz
}
