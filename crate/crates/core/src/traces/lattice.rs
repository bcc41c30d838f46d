//! Heat traces of flat lattices through theta-function identities.
//!
//! For one period `L`, `φ(t) = √(4πt) Σ_{z∈Z} e^{−t(2πz/L)²}` equals
//! `L Σ_{j∈Z} e^{−L²j²/(4t)}` (Poisson summation). The first form converges
//! fast for large t, the second for small t. Derivatives are taken in closed
//! form in whichever representation is used, so the small-t derivatives of
//! `Φ(t) = (4π t)^{n/2} Θ(t) = e^{−tm²} Π_i φ_i(t)` carry no cancellation.

use std::f64::consts::PI;

use crate::spectra::Lattice;
use crate::Estimate;

fn binomial(n: usize, k: usize) -> f64 {
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// `d^p/dt^p φ(t)` for `p = 0..=order`, each with an absolute error estimate.
pub fn period_factor_derivs(length: f64, t: f64, order: usize) -> Vec<Estimate> {
    if t >= length * length / (4.0 * PI) {
        direct_derivs(length, t, order)
    } else {
        dual_derivs(length, t, order)
    }
}

/// `√(4π) Σ_z d^p[t^{1/2} e^{−κz²t}]`, `κ = (2π/L)²`.
fn direct_derivs(length: f64, t: f64, order: usize) -> Vec<Estimate> {
    let kappa = (2.0 * PI / length).powi(2);
    // falling factorials (1/2)(1/2 − 1)… and powers of t
    let mut fall = vec![1.0; order + 1];
    for i in 1..=order {
        fall[i] = fall[i - 1] * (0.5 - (i - 1) as f64);
    }
    let sqrt_4pi = (4.0 * PI).sqrt();
    let mut out = Vec::with_capacity(order + 1);
    for p in 0..=order {
        let mut acc = crate::sum::Neumaier::new();
        // z = 0 term: d^p t^{1/2}
        acc.add(fall[p] * t.powf(0.5 - p as f64));
        let mut prev = f64::INFINITY;
        let mut z = 1u64;
        loop {
            let a = kappa * (z * z) as f64;
            let e = (-a * t).exp();
            let mut inner = 0.0;
            for i in 0..=p {
                inner += binomial(p, i) * fall[i] * t.powf(0.5 - i as f64) * (-a).powi((p - i) as i32);
            }
            let term = 2.0 * inner * e;
            acc.add(term);
            let mag = term.abs();
            if (mag < prev && mag <= 1e-18 * acc.abs_sum()) || e == 0.0 {
                break;
            }
            prev = mag;
            z += 1;
        }
        let v = sqrt_4pi * acc.value();
        out.push(Estimate::new(v, sqrt_4pi * 8.0 * acc.rounding_bound()));
    }
    out
}

/// `L [δ_{p0} + 2 Σ_{j≥1} d^p/dt^p e^{−c_j/t}]`, `c_j = L² j²/4`.
///
/// With `u = 1/t`, `d^p/dt^p e^{−c/t} = P_p(u) e^{−cu}` where `P_0 = 1` and
/// `P_{p+1}(u) = u² (c P_p(u) − P_p'(u))`.
fn dual_derivs(length: f64, t: f64, order: usize) -> Vec<Estimate> {
    let u = 1.0 / t;
    let mut accs = vec![crate::sum::Neumaier::new(); order + 1];
    accs[0].add(1.0);
    let mut prev = vec![f64::INFINITY; order + 1];
    let mut done = vec![false; order + 1];
    let mut j = 1u64;
    while !done.iter().all(|d| *d) {
        let c = 0.25 * length * length * (j * j) as f64;
        let e = (-c * u).exp();
        // coefficients of P_p in powers of u
        let mut poly = vec![1.0];
        for p in 0..=order {
            if p > 0 {
                let mut next = vec![0.0; poly.len() + 2];
                for (k, &a) in poly.iter().enumerate() {
                    next[k + 2] += c * a;
                    if k > 0 {
                        next[k + 1] -= k as f64 * a;
                    }
                }
                poly = next;
            }
            if done[p] {
                continue;
            }
            let mut val = 0.0;
            for &a in poly.iter().rev() {
                val = val * u + a;
            }
            let term = 2.0 * val * e;
            accs[p].add(term);
            let mag = term.abs();
            if (mag < prev[p] && mag <= 1e-18 * accs[p].abs_sum()) || e == 0.0 {
                done[p] = true;
            }
            prev[p] = mag;
        }
        j += 1;
    }
    accs.iter()
        .map(|a| Estimate::new(length * a.value(), length * 8.0 * a.rounding_bound()))
        .collect()
}

/// `(−d/dt)^order Φ(t)` with `Φ(t) = (4πt)^{n/2} Θ(t)` for a flat lattice.
pub fn phi_neg_deriv(lattice: &Lattice, t: f64, order: usize) -> Estimate {
    // start from e^{−t m²} and multiply in one period factor at a time
    let em = (-t * lattice.mass_sq).exp();
    let mut cur: Vec<Estimate> = (0..=order)
        .map(|p| {
            let v = (-lattice.mass_sq).powi(p as i32) * em;
            Estimate::new(v, 2.0 * f64::EPSILON * v.abs())
        })
        .collect();
    for &l in &lattice.lengths {
        let f = period_factor_derivs(l, t, order);
        let mut next = Vec::with_capacity(order + 1);
        for p in 0..=order {
            let mut v = 0.0;
            let mut err = 0.0;
            let mut mag = 0.0;
            for j in 0..=p {
                let b = binomial(p, j);
                let a = &cur[j];
                let g = &f[p - j];
                v += b * a.value * g.value;
                mag += (b * a.value * g.value).abs();
                err += b * (a.err * g.value.abs() + a.value.abs() * g.err);
            }
            next.push(Estimate::new(v, err + 4.0 * f64::EPSILON * mag));
        }
        cur = next;
    }
    let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
    let last = cur[order];
    Estimate::new(sign * last.value, last.err)
}

/// `Θ(t)` of a flat lattice, from [`phi_neg_deriv`] at order zero.
pub fn theta_lattice(lattice: &Lattice, t: f64) -> Estimate {
    let phi = phi_neg_deriv(lattice, t, 0);
    let n = lattice.lengths.len() as f64;
    let scale = (4.0 * PI * t).powf(-0.5 * n);
    Estimate::new(phi.value * scale, phi.err * scale)
}
