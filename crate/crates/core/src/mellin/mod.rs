//! The function `A_q` from the Mellin transform of the heat trace,
//!
//! `A_q = (4π)^{n/2} Γ(−q)^{−1} ∫_0^∞ t^{−q−1+n/2} Θ(t) dt`,
//!
//! continued to all real q by integrating by parts N times:
//! `A_q = Γ(N−q)^{−1} ∫_0^∞ t^{N−q−1} (−d/dt)^N Φ(t) dt`, `Φ(t) = (4πt)^{n/2} Θ(t)`.

pub mod zeta;

pub use zeta::{
    z_quantum, z_quantum_checked, z_relativistic, zeta_h, zeta_h_special, QuantumZeta, ZetaMethod,
    ZrMethod,
};

use std::cell::{Cell, RefCell};
use std::f64::consts::PI;

use crate::error::{precondition, Error, Result};
use crate::quad;
use crate::spectra::{Lattice, Spectrum, SpectrumKind};
use crate::specfun::{digamma, rgamma};
use crate::sum::par_sum;
use crate::traces::lattice::phi_neg_deriv;
use crate::traces::{check_tol, ln_tail_bound};
use crate::Estimate;

/// Whether a [`MellinResult`] holds `A_q` or `∂A_q/∂q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MellinKind {
    Value,
    QDerivative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MellinResult {
    pub q: f64,
    pub value: f64,
    /// Absolute.
    pub err_estimate: f64,
    pub regularization_order: u32,
    pub kind: MellinKind,
}

impl MellinResult {
    pub fn estimate(&self) -> Estimate {
        Estimate::new(self.value, self.err_estimate)
    }
}

/// `N = floor(max(q, 0)) + 2`.
pub fn regularization_order(q: f64) -> u32 {
    q.max(0.0).floor() as u32 + 2
}

/// Leading heat coefficient `A_0` (the volume) when it is known from the
/// geometry.
pub fn leading_coefficient(spec: &Spectrum) -> Option<f64> {
    match spec.kind() {
        SpectrumKind::Circle { radius } => Some(2.0 * PI * radius),
        SpectrumKind::FlatTorus { lengths } => Some(lengths.iter().product()),
        SpectrumKind::Sphere2 { radius } => Some(4.0 * PI * radius * radius),
        SpectrumKind::Explicit => None,
    }
}

fn falling(a: f64, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (a - i as f64))
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |c, i| c * (n - i) as f64 / (i + 1) as f64)
}

/// `(−d/dt)^N Φ(t)` for one spectrum.
struct PhiDeriv<'a> {
    spec: &'a Spectrum,
    order: usize,
    lattice: Option<Lattice>,
}

impl<'a> PhiDeriv<'a> {
    fn new(spec: &'a Spectrum, order: usize) -> Self {
        PhiDeriv { spec, order, lattice: spec.lattice() }
    }

    fn eval(&self, t: f64) -> Result<Estimate> {
        if let Some(lat) = &self.lattice {
            return Ok(phi_neg_deriv(lat, t, self.order));
        }
        self.termwise(t)
    }

    /// `(4π)^{n/2} Σ mult (−d/dt)^N [t^{n/2} e^{−tλ}]`, where
    /// `(−d/dt)^N [t^a e^{−λt}] = e^{−λt} Σ_j C(N,j) (−1)^j a^{(j)} t^{a−j} λ^{N−j}`
    /// and `a^{(j)}` is the falling factorial.
    fn termwise(&self, t: f64) -> Result<Estimate> {
        let n = self.order;
        let a = 0.5 * self.spec.dim() as f64;
        let coef: Vec<f64> = (0..=n)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * binomial(n, j) * falling(a, j) * t.powf(a - j as f64)
            })
            .collect();
        let term = |lambda: f64| -> f64 {
            let ln_l = lambda.ln();
            let mut s = 0.0;
            for (j, c) in coef.iter().enumerate() {
                if *c != 0.0 {
                    s += c * ((n - j) as f64 * ln_l - t * lambda).exp();
                }
            }
            s
        };
        let pref = (4.0 * PI).powf(a);
        if self.spec.is_finite() {
            let levels = self.spec.levels(f64::INFINITY)?;
            let acc = par_sum(&levels, |l| l.mult as f64 * term(l.lambda));
            return Ok(Estimate::new(pref * acc.value(), pref * acc.rounding_bound()));
        }
        let g = self.spec.growth();
        let poly: f64 = coef.iter().map(|c| c.abs()).sum();
        let lambda1 = self.spec.lambda_min();
        let mut span = (40.0 + 2.0 * n as f64) / t;
        loop {
            let cut = lambda1 + span;
            let levels = self.spec.levels(cut)?;
            let acc = par_sum(&levels, |l| l.mult as f64 * term(l.lambda));
            let tail = poly * ln_tail_bound(g.c, a, n as f64, t, cut).exp();
            if tail <= 1e-17 * acc.abs_sum() || tail == 0.0 {
                return Ok(Estimate::new(pref * acc.value(), pref * (acc.rounding_bound() + tail)));
            }
            span *= 1.5;
        }
    }
}

/// `∫_0^∞ t^{p−1} g(t) dt` and `∫_0^∞ t^{p−1} ln t · g(t) dt` for a `g` that
/// decays like `e^{−scale·t}` and behaves like a power of `t` near 0.
///
/// The integral is taken in `u = ln t`. Below `t_lo` the integrand is
/// replaced by the power law fitted at `t_lo`. `t_lo` starts at `t_start`
/// and is lowered until that piece is negligible or `g` can no longer be
/// evaluated accurately.
pub(crate) fn log_mellin<G>(g: G, p: f64, scale: f64, t_start: f64, tol: f64) -> Result<[Estimate; 2]>
where
    G: Fn(f64) -> Result<Estimate>,
{
    // upper end: walk out until the integrand is negligible
    let mut t_hi = 1.0 / scale;
    let mut peak: f64 = 0.0;
    for _ in 0..400 {
        let v = (t_hi.powf(p) * g(t_hi)?.value).abs();
        peak = peak.max(v);
        if t_hi * scale > 30.0 && v <= 1e-20 * peak {
            break;
        }
        t_hi *= 1.5;
    }
    let mut t_lo = t_start;
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let max_rel = Cell::new(0.0f64);
    loop {
        let f = |u: f64| -> [f64; 2] {
            let t = u.exp();
            match g(t) {
                Ok(e) => {
                    if e.value != 0.0 {
                        max_rel.set(max_rel.get().max(e.err / e.value.abs()));
                    }
                    let w = t.powf(p) * e.value;
                    [w, w * u]
                }
                Err(err) => {
                    failure.borrow_mut().get_or_insert(err);
                    [0.0, 0.0]
                }
            }
        };
        let (a, b) = (t_lo.ln(), t_hi.ln());
        let coarse = quad::integrate::<2, _>(&f, a, b, 1e-4, 0.0, 200);
        let scale_abs = coarse.abs_value[0].max(coarse.abs_value[1]);
        let res = quad::integrate::<2, _>(&f, a, b, 0.1 * tol, 0.01 * tol * scale_abs, 4000);
        if let Some(err) = failure.borrow_mut().take() {
            return Err(err);
        }
        let tail = power_tail(&g, p, t_lo)?;
        let total0 = res.value[0] + tail[0].value;
        let small = tail[0].value.abs() <= 1e-3 * tol * total0.abs()
            && tail[1].value.abs() <= 1e-3 * tol * scale_abs;
        let g_lo = g(t_lo * 0.1);
        let can_shrink = match &g_lo {
            Ok(e) => e.err <= 1e-3 * tol * e.value.abs() && t_lo > 1e-280,
            Err(_) => false,
        };
        if small || !can_shrink {
            let round = max_rel.get();
            let out = [0, 1].map(|i| {
                Estimate::new(
                    res.value[i] + tail[i].value,
                    res.err[i] + tail[i].err + round * res.abs_value[i],
                )
            });
            return Ok(out);
        }
        t_lo *= 0.1;
    }
}

/// Contribution of `(0, t_lo)` from a power law `g ≈ C t^r` fitted at `t_lo`.
fn power_tail<G>(g: &G, p: f64, t_lo: f64) -> Result<[Estimate; 2]>
where
    G: Fn(f64) -> Result<Estimate>,
{
    let g0 = g(t_lo)?.value;
    if g0 == 0.0 {
        return Ok([Estimate::exact(0.0), Estimate::exact(0.0)]);
    }
    let g1 = g(2.0 * t_lo)?.value;
    let g2 = g(4.0 * t_lo)?.value;
    let fit = |x: f64, y: f64| {
        if x != 0.0 && y / x > 0.0 {
            (y / x).ln() / 2f64.ln()
        } else {
            0.0
        }
    };
    let pieces = |r: f64| -> Result<[f64; 2]> {
        let e = p + r;
        if e <= 1e-3 {
            return Err(Error::Pole(format!(
                "Mellin integral diverges at t -> 0 (integrand ~ t^{:.3} near 0)",
                e - 1.0
            )));
        }
        let base = g0 * t_lo.powf(p);
        Ok([base / e, base * (t_lo.ln() / e - 1.0 / (e * e))])
    };
    let r1 = fit(g0, g1);
    let r2 = fit(g1, g2);
    let a = pieces(r1)?;
    let b = pieces(r2)?;
    Ok([0, 1].map(|i| Estimate::new(a[i], (a[i] - b[i]).abs() + 0.05 * a[i].abs())))
}

/// `A_q` and `A′_q` at a fixed regularization order.
pub fn a_q_with_order(spec: &Spectrum, q: f64, order: u32, tol: f64) -> Result<(MellinResult, MellinResult)> {
    check_tol(tol)?;
    if !q.is_finite() {
        return Err(precondition(format!("q must be finite, got {q}")));
    }
    if !(spec.lambda_min() > 0.0) {
        return Err(precondition("A_q needs a positive spectrum (lambda_1 > 0)"));
    }
    let a = order as f64 - q;
    if a <= 0.0 {
        return Err(precondition(format!(
            "regularization order N = {order} must exceed q = {q}"
        )));
    }
    let phi = PhiDeriv::new(spec, order as usize);
    let [i0, i1] = log_mellin(|t| phi.eval(t), a, spec.lambda_min(), 1e-6 / spec.lambda_min(), tol)?;
    let rg = rgamma(a);
    let psi = digamma(a)?;
    let value = rg * i0.value;
    let value_err = (rg * i0.err).abs();
    let deriv = psi * value - rg * i1.value;
    let deriv_err = psi.abs() * value_err + (rg * i1.err).abs();
    let make = |value, err, kind| MellinResult {
        q,
        value,
        err_estimate: err,
        regularization_order: order,
        kind,
    };
    Ok((
        make(value, value_err, MellinKind::Value),
        make(deriv, deriv_err, MellinKind::QDerivative),
    ))
}

fn checked(spec: &Spectrum, q: f64, tol: f64, kind: MellinKind) -> Result<MellinResult> {
    let order = regularization_order(q);
    let pick = |pair: (MellinResult, MellinResult)| match kind {
        MellinKind::Value => pair.0,
        MellinKind::QDerivative => pair.1,
    };
    let r = pick(a_q_with_order(spec, q, order, tol)?);
    let r2 = pick(a_q_with_order(spec, q, order + 1, tol)?);
    let diff = (r.value - r2.value).abs();
    let allowed = 3.0 * (r.err_estimate + r2.err_estimate) + 8.0 * f64::EPSILON * r.value.abs();
    if diff > allowed {
        return Err(Error::Tolerance(format!(
            "A at q = {q}: orders {order} and {} differ by {diff:e} (allowed {allowed:e})",
            order + 1
        )));
    }
    Ok(r)
}

/// `A_q`, checked against the next regularization order.
pub fn a_q(spec: &Spectrum, q: f64, tol: f64) -> Result<MellinResult> {
    checked(spec, q, tol, MellinKind::Value)
}

/// `A′_q = ψ(N−q) A_q − Γ(N−q)^{−1} ∫ t^{N−q−1} ln t (−d/dt)^N Φ(t) dt`,
/// checked against the next regularization order.
pub fn a_q_prime(spec: &Spectrum, q: f64, tol: f64) -> Result<MellinResult> {
    checked(spec, q, tol, MellinKind::QDerivative)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::Level;
    use crate::specfun::gamma;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn circle() -> Spectrum {
        Spectrum::circle(1.0, 1.0).unwrap()
    }

    /// `A_q` of the unit circle with `m² = 1` from the Jacobi dual sum:
    /// `A_q = 2π [1 + (4/Γ(−q)) Σ_j (πj)^{−q} K_q(2πj)]`, with `K_q` by
    /// quadrature of its integral representation.
    fn circle_oracle(q: f64) -> f64 {
        let bessel_k = |nu: f64, x: f64| {
            let r = quad::integrate::<1, _>(
                |u: f64| [(-x * u.cosh()).exp() * (nu * u).cosh()],
                0.0,
                40.0,
                1e-14,
                0.0,
                2000,
            );
            r.value[0]
        };
        let mut s = 0.0;
        for j in 1..8 {
            let jf = j as f64;
            s += (PI * jf).powf(-q) * bessel_k(q, 2.0 * PI * jf);
        }
        2.0 * PI * (1.0 + 4.0 * rgamma(-q) * s)
    }

    #[test]
    fn circle_values() {
        let c = circle();
        let a0 = a_q(&c, 0.0, 1e-10).unwrap();
        assert!(rel(a0.value, 2.0 * PI) < 1e-8, "{}", a0.value);
        assert_eq!(a0.regularization_order, 2);
        let a1 = a_q(&c, 1.0, 1e-10).unwrap();
        assert!(rel(a1.value, 2.0 * PI) < 1e-7);
        assert_eq!(a1.regularization_order, 3);
        let am = a_q(&c, -0.5, 1e-10).unwrap();
        assert!(rel(am.value, 2.0 * PI / PI.tanh()) < 1e-6, "{}", am.value);
        for &q in &[-1.3, 0.5, 1.5, 2.7] {
            let v = a_q(&c, q, 1e-10).unwrap();
            assert!(rel(v.value, circle_oracle(q)) < 1e-8, "q={q}");
            assert!(v.err_estimate >= 0.0);
        }
    }

    #[test]
    fn derivative_matches_richardson() {
        let c = circle();
        for &q in &[-0.5, 0.0, 1.0, 1.5] {
            let d = a_q_prime(&c, q, 1e-11).unwrap();
            let f = |h: f64| {
                let p = a_q_with_order(&c, q + h, regularization_order(q), 1e-12).unwrap().0.value;
                let m = a_q_with_order(&c, q - h, regularization_order(q), 1e-12).unwrap().0.value;
                (p - m) / (2.0 * h)
            };
            let h = 1e-4;
            let fd = (4.0 * f(h / 2.0) - f(h)) / 3.0;
            assert!((d.value - fd).abs() < 1e-6f64.max(50.0 * d.err_estimate), "q={q}: {} vs {fd}", d.value);
        }
    }

    #[test]
    fn single_mode_closed_form() {
        // Θ(t) = e^{−t}, n = 1: A_q = (4π)^{1/2} Γ(1/2 − q)/Γ(−q)
        let s = Spectrum::explicit(1, 1.0, vec![Level { lambda: 1.0, mult: 1 }]).unwrap();
        let sq = (4.0 * PI).sqrt();
        for &q in &[-1.5, -0.3, 0.0, 0.2] {
            let exact = sq * gamma(0.5 - q).unwrap() * rgamma(-q);
            let v = a_q(&s, q, 1e-10).unwrap();
            assert!((v.value - exact).abs() < 1e-9 * exact.abs().max(1.0), "q={q}");
        }
        // at q = 0: A′_0 = −(4π)^{1/2} Γ(1/2), since 1/Γ(−q) ≈ −q
        let d = a_q_prime(&s, 0.0, 1e-10).unwrap();
        assert!(rel(d.value, -sq * PI.sqrt()) < 1e-8, "{}", d.value);
        // q ≥ n/2 diverges for a finite spectrum in odd dimension
        assert!(a_q(&s, 0.7, 1e-8).is_err());
    }

    #[test]
    fn order_independence() {
        let c = circle();
        for &q in &[-0.5, 0.0, 0.5, 1.0, 1.5, 2.0] {
            let n = regularization_order(q);
            let a = a_q_with_order(&c, q, n, 1e-10).unwrap().0;
            let b = a_q_with_order(&c, q, n + 1, 1e-10).unwrap().0;
            assert!((a.value - b.value).abs() <= 3.0 * (a.err_estimate + b.err_estimate) + 1e-14);
        }
    }

    #[test]
    fn smooth_across_window() {
        let c = circle();
        let vals: Vec<f64> = (0..=16)
            .map(|i| a_q(&c, -1.0 + 0.25 * i as f64, 1e-9).unwrap().value)
            .collect();
        assert!(vals.iter().all(|v| v.is_finite()));
        for w in vals.windows(3) {
            assert!((w[0] - 2.0 * w[1] + w[2]).abs() < 1.0);
        }
    }

    #[test]
    fn sphere_leading_coefficient() {
        // unit sphere: A_0 = 4π (area)
        let s = Spectrum::sphere2(1.0, 0.5).unwrap();
        let a0 = a_q(&s, 0.0, 1e-7).unwrap();
        assert!(rel(a0.value, 4.0 * PI) < 1e-6, "{}", a0.value);
    }
}
