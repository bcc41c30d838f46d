//! Direct evaluation of the classical, relativistic and quantum heat traces
//! by eigen-sums with certified tails, and the reduction of the quantum
//! traces to integrals of the classical one against the kernels `h_{b,f}`.

pub mod kernel;
pub mod lattice;

pub use kernel::{h_kernel, h_kernel_estimate, h_kernel_large_t, h_kernel_zero_mu_series};

use crate::error::{precondition, Error, Result};
use crate::quad;
use crate::spectra::{Level, Spectrum};
use crate::specfun::occupation;
use crate::sum::{par_sum, Neumaier};
use crate::{Estimate, Statistics};

/// How a quantum trace is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TracePath {
    DirectSum,
    ReductionIntegral,
}

/// Arguments of a trace evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceQuery {
    /// `β` for relativistic and quantum traces, `t` for the classical one.
    pub beta_or_t: f64,
    pub mu: f64,
    pub tol: f64,
    pub path: TracePath,
}

impl TraceQuery {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta_or_t > 0.0 && self.beta_or_t.is_finite()) {
            return Err(precondition(format!(
                "beta (or t) must be positive and finite, got {}",
                self.beta_or_t
            )));
        }
        check_tol(self.tol)?;
        if self.mu.is_nan() {
            return Err(precondition("mu is NaN"));
        }
        Ok(())
    }
}

pub(crate) fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol <= 1e-2) {
        return Err(precondition(format!("tol must lie in (0, 1e-2], got {tol}")));
    }
    Ok(())
}

/// Natural log of a bound on `Σ_{x_k > x0} (1 + x_k)^p e^{−rate·x_k}` over a
/// sequence whose counting function obeys `N(x) ≤ c (1 + x)^d`. Infinite
/// when the bound does not apply yet (`rate (1 + x0) ≤ p + d`).
pub fn ln_tail_bound(c: f64, d: f64, p: f64, rate: f64, x0: f64) -> f64 {
    let q = p + d;
    let big_x = rate * (1.0 + x0);
    if big_x <= q {
        return f64::INFINITY;
    }
    c.ln() + q * (1.0 + x0).ln() - rate * x0 + (big_x / (big_x - q)).ln()
}

/// Which spectral variable an exponential decay refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Var {
    Lambda,
    Omega,
}

/// Sums `term(level)` over the spectrum, raising the cutoff until
/// `tail(x0)` (a bound for everything above `x0` in the variable `var`) is
/// below `tol` times the partial sum.
fn certified_sum<F, T>(spec: &Spectrum, var: Var, start: f64, tol: f64, term: F, tail: T) -> Result<Estimate>
where
    F: Fn(&Level) -> f64 + Sync,
    T: Fn(f64) -> f64,
{
    let to_lambda = |x: f64| match var {
        Var::Lambda => x,
        Var::Omega => x * x,
    };
    let sum_upto = |x0: f64| -> Result<Neumaier> {
        let levels = spec.levels(to_lambda(x0))?;
        Ok(par_sum(&levels, &term))
    };
    if spec.is_finite() {
        let acc = sum_upto(f64::INFINITY)?;
        return Ok(Estimate::new(acc.value(), acc.rounding_bound()));
    }
    let base = match var {
        Var::Lambda => spec.lambda_min(),
        Var::Omega => spec.omega_min(),
    };
    // first pass at a modest cutoff, then jump straight to a certified one
    let mut x0 = start;
    let first = sum_upto(x0)?.value().abs();
    let mut span = (x0 - base).max(1e-3);
    while tail(x0) > 0.25 * tol * first {
        span *= 1.5;
        x0 = base + span;
        if !x0.is_finite() {
            return Err(Error::Tolerance("tail bound never certified".into()));
        }
    }
    loop {
        let acc = sum_upto(x0)?;
        let sum = acc.value();
        let t = tail(x0);
        if t <= tol * sum.abs() {
            return Ok(Estimate::new(sum, t + acc.rounding_bound()));
        }
        span *= 2.0;
        x0 = base + span;
    }
}

/// `Θ(t) = Σ mult e^{−tλ}` with a certified tail.
pub fn theta_classical(spec: &Spectrum, t: f64, tol: f64) -> Result<f64> {
    Ok(theta_classical_estimate(spec, t, tol)?.value)
}

pub fn theta_classical_estimate(spec: &Spectrum, t: f64, tol: f64) -> Result<Estimate> {
    TraceQuery { beta_or_t: t, mu: 0.0, tol, path: TracePath::DirectSum }.validate()?;
    let g = spec.growth();
    let d = 0.5 * g.dim as f64;
    certified_sum(
        spec,
        Var::Lambda,
        spec.lambda_min() + 40.0 / t,
        tol,
        |l| l.mult as f64 * (-t * l.lambda).exp(),
        |x0| ln_tail_bound(g.c, d, 0.0, t, x0).exp(),
    )
}

/// `Θ_r(β) = Σ mult e^{−βω}` with a certified tail.
pub fn theta_relativistic(spec: &Spectrum, beta: f64, tol: f64) -> Result<f64> {
    Ok(theta_relativistic_estimate(spec, beta, tol)?.value)
}

pub fn theta_relativistic_estimate(spec: &Spectrum, beta: f64, tol: f64) -> Result<Estimate> {
    TraceQuery { beta_or_t: beta, mu: 0.0, tol, path: TracePath::DirectSum }.validate()?;
    let g = spec.growth();
    let d = g.dim as f64;
    certified_sum(
        spec,
        Var::Omega,
        spec.omega_min() + 40.0 / beta,
        tol,
        |l| l.mult as f64 * (-beta * l.omega()).exp(),
        |w0| ln_tail_bound(g.c, d, 0.0, beta, w0).exp(),
    )
}

fn check_quantum(spec: &Spectrum, beta: f64, mu: f64, stat: Statistics, tol: f64) -> Result<()> {
    TraceQuery { beta_or_t: beta, mu, tol, path: TracePath::DirectSum }.validate()?;
    if stat == Statistics::Bose && mu >= spec.omega_min() {
        return Err(precondition(format!(
            "bose trace needs mu < omega_1 = {}, got mu = {mu}",
            spec.omega_min()
        )));
    }
    Ok(())
}

/// `Θ_{b,f}(β, μ) = Σ mult E_{b,f}(β(ω − μ))`.
pub fn theta_quantum(
    spec: &Spectrum,
    beta: f64,
    mu: f64,
    stat: Statistics,
    tol: f64,
    path: TracePath,
) -> Result<f64> {
    Ok(theta_quantum_estimate(spec, beta, mu, stat, tol, path)?.value)
}

pub fn theta_quantum_estimate(
    spec: &Spectrum,
    beta: f64,
    mu: f64,
    stat: Statistics,
    tol: f64,
    path: TracePath,
) -> Result<Estimate> {
    check_quantum(spec, beta, mu, stat, tol)?;
    match path {
        TracePath::DirectSum => quantum_direct(spec, beta, mu, stat, tol, |_| true),
        TracePath::ReductionIntegral => {
            if mu > 0.0 {
                return Err(precondition(format!(
                    "reduction integral needs mu <= 0, got mu = {mu}"
                )));
            }
            quantum_reduction(spec, beta, mu, stat, tol)
        }
    }
}

/// Direct quantum sum restricted to the levels accepted by `keep`.
fn quantum_direct<K>(spec: &Spectrum, beta: f64, mu: f64, stat: Statistics, tol: f64, keep: K) -> Result<Estimate>
where
    K: Fn(&Level) -> bool + Sync,
{
    let g = spec.growth();
    let d = g.dim as f64;
    let start = spec.omega_min().max(mu) + 40.0 / beta;
    certified_sum(
        spec,
        Var::Omega,
        start,
        tol,
        |l| {
            if !keep(l) {
                return 0.0;
            }
            let x = beta * (l.omega() - mu);
            l.mult as f64 * occupation(x, stat).expect("bose argument positive by precondition")
        },
        |w0| {
            if w0 <= mu {
                return f64::INFINITY;
            }
            // E(β(ω−μ)) ≤ e^{βμ} e^{−βω} · (1 − e^{−β(w0−μ)})^{−1} (bose) for ω > w0
            let factor = match stat {
                Statistics::Bose => -(-(beta * (w0 - mu))).exp_m1(),
                Statistics::Fermi => 1.0,
            };
            (ln_tail_bound(g.c, d, 0.0, beta, w0) + beta * mu - factor.ln()).exp()
        },
    )
}

/// `Θ_{b,f}(β, μ) = ∫_0^∞ h_{b,f}(t, βμ) Θ(tβ²) dt` with `t = u/(1−u)`.
fn quantum_reduction(spec: &Spectrum, beta: f64, mu: f64, stat: Statistics, tol: f64) -> Result<Estimate> {
    let x = beta * mu;
    let inner_tol = (1e-3 * tol).max(1e-15);
    let mut failure: Option<Error> = None;
    let mut aux_err = 0.0;
    let res = quad::integrate(
        |u: f64| {
            if failure.is_some() {
                return [0.0];
            }
            let one_minus = 1.0 - u;
            let t = u / one_minus;
            let jac = 1.0 / (one_minus * one_minus);
            let h = match h_kernel_estimate(t, x, stat, inner_tol) {
                Ok(h) => h,
                Err(e) => {
                    failure = Some(e);
                    return [0.0];
                }
            };
            if h.value == 0.0 {
                return [0.0];
            }
            let th = match theta_classical_estimate(spec, t * beta * beta, inner_tol.max(1e-14)) {
                Ok(v) => v,
                Err(e) => {
                    failure = Some(e);
                    return [0.0];
                }
            };
            aux_err = f64::max(aux_err, (h.rel_err() + th.rel_err()) * 1.0);
            [h.value * th.value * jac]
        },
        0.0,
        1.0,
        0.1 * tol,
        0.0,
        4000,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    if !res.converged {
        return Err(Error::Tolerance(format!(
            "reduction integral did not reach tol {tol:e} (estimate {:e})",
            res.err[0]
        )));
    }
    let err = res.err[0] + aux_err * res.abs_value[0];
    Ok(Estimate::new(res.value[0], err))
}

/// Fermionic trace split at the chemical potential: the occupied levels
/// `ω ≤ μ` and the remainder over the levels above.
pub fn theta_fermi_split(spec: &Spectrum, beta: f64, mu: f64, tol: f64) -> Result<(Estimate, Estimate)> {
    check_quantum(spec, beta, mu, Statistics::Fermi, tol)?;
    let bottom = if mu > 0.0 {
        let levels = spec.levels(mu * mu)?;
        let acc: Neumaier = levels
            .iter()
            .filter(|l| l.omega() <= mu)
            .map(|l| l.mult as f64 * occupation(beta * (l.omega() - mu), Statistics::Fermi).unwrap_or(0.0))
            .collect();
        Estimate::new(acc.value(), acc.rounding_bound())
    } else {
        Estimate::exact(0.0)
    };
    let rest = quantum_direct(spec, beta, mu, Statistics::Fermi, tol, |l| l.omega() > mu)?;
    Ok((bottom, rest))
}

/// Classical trace with the levels `ω ≤ μ` projected out:
/// `Θ(t) − Σ_{ω_k ≤ μ} mult e^{−tλ_k}`.
pub fn projected_heat_trace(spec: &Spectrum, t: f64, mu: f64, tol: f64) -> Result<f64> {
    let full = theta_classical_estimate(spec, t, tol)?;
    if mu <= 0.0 {
        return Ok(full.value);
    }
    let levels = spec.levels(mu * mu)?;
    let low: f64 = levels
        .iter()
        .filter(|l| l.omega() <= mu)
        .map(|l| l.mult as f64 * (-t * l.lambda).exp())
        .sum();
    Ok(full.value - low)
}

/// `μ(β, N) = −(1/β) log(Θ_r(β)/N)`, the chemical potential of a classical
/// gas of `N` particles.
pub fn chemical_potential_classical(spec: &Spectrum, beta: f64, n: f64) -> Result<f64> {
    if !(n > 0.0) {
        return Err(precondition(format!("particle number must be positive, got {n}")));
    }
    let th = theta_relativistic(spec, beta, 1e-13)?;
    Ok(-(th / n).ln() / beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::Level;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn single(lambda: f64) -> Spectrum {
        Spectrum::explicit(1, 1.0, vec![Level { lambda, mult: 1 }]).unwrap()
    }

    fn circle() -> Spectrum {
        Spectrum::circle(1.0, 1.0).unwrap()
    }

    /// Independent oracle: plain sum over k ∈ [−K, K] on the unit circle.
    fn circle_brute(f: impl Fn(f64) -> f64, kmax: i64) -> f64 {
        let mut v: Vec<f64> = (-kmax..=kmax).map(|k| f((k * k) as f64 + 1.0)).collect();
        v.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        v.iter().sum()
    }

    #[test]
    fn classical_examples() {
        assert!(rel(theta_classical(&single(1.0), 1.0, 1e-12).unwrap(), (-1f64).exp()) < 1e-15);
        let c = circle();
        let t = 0.01;
        let v = theta_classical(&c, t, 1e-12).unwrap();
        assert!(rel(v, (PI / t).sqrt() * (-t).exp()) < 1e-3);
        assert!(rel(v, circle_brute(|l| (-t * l).exp(), 1000)) < 1e-12);
        let v = theta_classical(&c, 200.0, 1e-12).unwrap();
        assert!(rel(v, 1.38e-87) < 0.01);
    }

    #[test]
    fn relativistic_examples() {
        assert!(rel(theta_relativistic(&single(4.0), 1.0, 1e-12).unwrap(), (-2f64).exp()) < 1e-15);
        let c = circle();
        assert!(rel(theta_relativistic(&c, 0.01, 1e-12).unwrap(), 200.0) < 0.02);
        let v = theta_relativistic(&c, 10.0, 1e-12).unwrap();
        let s2 = 2f64.sqrt();
        let three = (-10f64).exp() * (1.0 + 2.0 * (-10.0 * (s2 - 1.0)).exp() + 2.0 * (-10.0 * (5f64.sqrt() - 1.0)).exp());
        assert!(rel(v, three) < 1e-4);
        let oracle = circle_brute(|l| (-10.0 * l.sqrt()).exp(), 100);
        assert!(rel(v, oracle) < 1e-13);
    }

    #[test]
    fn quantum_direct_matches_brute_force() {
        let c = circle();
        for stat in [Statistics::Bose, Statistics::Fermi] {
            for &(beta, mu) in &[(0.5, -1.0), (1.0, 0.0), (2.0, 0.7)] {
                let v = theta_quantum(&c, beta, mu, stat, 1e-13, TracePath::DirectSum).unwrap();
                let oracle = circle_brute(
                    |l| {
                        let x = beta * (l.sqrt() - mu);
                        match stat {
                            Statistics::Bose => 1.0 / x.exp_m1(),
                            Statistics::Fermi => 1.0 / (x.exp() + 1.0),
                        }
                    },
                    3000,
                );
                assert!(rel(v, oracle) < 1e-12, "{stat:?} beta={beta} mu={mu}");
            }
        }
    }

    #[test]
    fn reduction_path_agrees() {
        let c = circle();
        for stat in [Statistics::Bose, Statistics::Fermi] {
            for &(beta, mu) in &[(1.0, -1.0), (0.5, 0.0)] {
                let d = theta_quantum(&c, beta, mu, stat, 1e-12, TracePath::DirectSum).unwrap();
                let r = theta_quantum(&c, beta, mu, stat, 1e-10, TracePath::ReductionIntegral).unwrap();
                assert!(rel(d, r) < 1e-8, "{stat:?} beta={beta} mu={mu}: {d} vs {r}");
            }
        }
    }

    #[test]
    fn preconditions() {
        let c = circle();
        assert!(theta_quantum(&c, 1.0, 1.0, Statistics::Bose, 1e-10, TracePath::DirectSum).is_err());
        assert!(theta_quantum(&c, 1.0, 0.5, Statistics::Fermi, 1e-10, TracePath::ReductionIntegral).is_err());
        assert!(theta_classical(&c, 0.0, 1e-10).is_err());
        assert!(theta_classical(&c, 1.0, 0.5).is_err());
    }

    #[test]
    fn fermi_split_and_projection() {
        let c = circle();
        let (beta, mu) = (3.0, 2.1);
        let (bottom, rest) = theta_fermi_split(&c, beta, mu, 1e-13).unwrap();
        let full = theta_quantum(&c, beta, mu, Statistics::Fermi, 1e-13, TracePath::DirectSum).unwrap();
        assert!(rel(bottom.value + rest.value, full) < 1e-13);
        // levels ω ≤ 2.1: λ ∈ {1, 2, 2} (λ = 5 has ω ≈ 2.236)
        let t = 0.4;
        let proj = projected_heat_trace(&c, t, mu, 1e-13).unwrap();
        let oracle = circle_brute(|l| if l.sqrt() > mu { (-t * l).exp() } else { 0.0 }, 200);
        assert!(rel(proj, oracle) < 1e-12);
    }

    #[test]
    fn chemical_potential() {
        let s = single(1.0);
        assert!((chemical_potential_classical(&s, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        // −log(e^{−1}/e) = 2
        assert!((chemical_potential_classical(&s, 1.0, std::f64::consts::E).unwrap() - 2.0).abs() < 1e-15);
        let c = circle();
        let mu = chemical_potential_classical(&c, 1.0, 1.0).unwrap();
        let oracle = -circle_brute(|l| (-l.sqrt()).exp(), 100).ln();
        assert!((mu - oracle).abs() < 1e-13);
    }

    #[test]
    fn lattice_and_eigen_sum_agree_on_torus() {
        let tau = 2.0 * PI;
        let s = Spectrum::flat_torus(&[tau, 3.0], 0.5).unwrap();
        let lat = s.lattice().unwrap();
        for &t in &[0.05, 0.5, 3.0] {
            let a = theta_classical(&s, t, 1e-13).unwrap();
            let b = lattice::theta_lattice(&lat, t).value;
            assert!(rel(a, b) < 1e-12, "t={t}");
        }
    }
}
