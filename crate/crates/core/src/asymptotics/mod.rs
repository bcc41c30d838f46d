//! Small-β expansions of the relativistic and quantum heat traces.
//!
//! All traces share the Mellin–Barnes form
//!
//! `Θ(β) = 2(4π)^{−(n+1)/2} (2πi)^{−1} ∫ Γ(−q) Γ(−q + (n+1)/2) (β/2)^{2q−n} G(q) A_q dq`
//!
//! with `G = 1` (relativistic), `G(q) = F_{b,f}(n − 2q, βμ)` (μ < 0), or the
//! zeta values `F_{b,f}(n − 2q, 0)` (μ = 0). The residue sums of [`lemma`]
//! with `t = (β/2)²` and `f(q) = G(q) A_q` give every term; the bosonic μ = 0
//! series gets the extra pole of `ζ(n − 2q)` at `q = (n−1)/2` by hand.

pub mod lemma;

pub use lemma::{lemma1_coefficients, lemma1_prefactor, lemma_terms, Family, LemmaTerm, Prefactor};

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::LN_2;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{precondition, Error, Result};
use crate::mellin::{a_q, a_q_prime};
use crate::spectra::Spectrum;
use crate::specfun::{
    digamma, dirichlet_eta, dirichlet_eta_prime, f_statistic_estimate, riemann_zeta, riemann_zeta_prime,
};
use crate::{Estimate, Statistics};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceKind {
    Relativistic,
    Bose,
    Fermi,
}

impl TraceKind {
    pub fn statistics(self) -> Option<Statistics> {
        match self {
            TraceKind::Relativistic => None,
            TraceKind::Bose => Some(Statistics::Bose),
            TraceKind::Fermi => Some(Statistics::Fermi),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TraceKind::Relativistic => "relativistic",
            TraceKind::Bose => "bose",
            TraceKind::Fermi => "fermi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MuRegime {
    Negative,
    Zero,
}

impl MuRegime {
    pub fn of(mu: f64) -> Result<MuRegime> {
        if mu < 0.0 {
            Ok(MuRegime::Negative)
        } else if mu == 0.0 {
            Ok(MuRegime::Zero)
        } else {
            Err(Error::Unsupported(format!(
                "expansions are implemented for mu <= 0 only, got mu = {mu}"
            )))
        }
    }
}

/// `n = 2m` or `n = 2m + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even(u32),
    Odd(u32),
}

impl Parity {
    pub fn of(dim: u32) -> Parity {
        if dim % 2 == 0 {
            Parity::Even(dim / 2)
        } else {
            Parity::Odd(dim / 2)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Part {
    Sing,
    Loc,
    Nonloc,
    Residue,
}

impl Part {
    pub fn name(self) -> &'static str {
        match self {
            Part::Sing => "sing",
            Part::Loc => "loc",
            Part::Nonloc => "nonloc",
            Part::Residue => "residue",
        }
    }
}

/// The β-dependent or constant factor multiplying a term.
#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    One,
    /// `F_{b,f}(s, βμ)` or `∂_s F_{b,f}(s, βμ)`.
    F { s: i32, deriv: bool },
    /// A precomputed ζ/η value, e.g. `ζ′(−3)`.
    Const { value: f64, label: String },
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::One => write!(f, "1"),
            Factor::F { s, deriv: false } => write!(f, "F({s})"),
            Factor::F { s, deriv: true } => write!(f, "dF({s})"),
            Factor::Const { label, .. } => write!(f, "{label}"),
        }
    }
}

/// `coeff · β^{beta_power} · (log β)^{log_flag} · factor · A_{a_index}` (or `A′`).
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionTerm {
    pub beta_power: f64,
    pub log_flag: bool,
    pub prefactor: Prefactor,
    /// Transcendental part of the coefficient (digamma sums, `log 2`).
    pub scalar: f64,
    pub factor: Factor,
    pub a_index: f64,
    pub a_deriv: bool,
    pub part: Part,
}

impl ExpansionTerm {
    pub fn coeff(&self) -> f64 {
        self.prefactor.value() * self.scalar
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionSeries {
    pub dim: u32,
    pub parity: Parity,
    pub trace_kind: TraceKind,
    pub mu_regime: MuRegime,
    /// Highest k kept in the infinite sums.
    pub truncation: u32,
    pub terms: Vec<ExpansionTerm>,
}

impl ExpansionSeries {
    pub fn part(&self, part: Part) -> impl Iterator<Item = &ExpansionTerm> {
        self.terms.iter().filter(move |t| t.part == part)
    }

    /// Every `(q, derivative)` the series needs, in increasing order.
    pub fn required_a(&self) -> Vec<(f64, bool)> {
        let set: BTreeSet<(i64, bool)> = self
            .terms
            .iter()
            .map(|t| ((2.0 * t.a_index).round() as i64, t.a_deriv))
            .collect();
        set.into_iter().map(|(k, d)| (0.5 * k as f64, d)).collect()
    }

    /// Distinct β-powers in increasing order.
    pub fn powers(&self) -> Vec<f64> {
        let mut p: Vec<f64> = self.terms.iter().map(|t| t.beta_power).collect();
        p.dedup();
        p
    }
}

impl fmt::Display for ExpansionSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.terms {
            writeln!(
                f,
                "{} beta^{}{} {} [{}]*{} {} A{}_{}",
                t.part.name(),
                t.beta_power,
                if t.log_flag { "*log(beta)" } else { "" },
                t.coeff(),
                t.prefactor,
                t.scalar,
                t.factor,
                if t.a_deriv { "'" } else { "" },
                t.a_index
            )?;
        }
        Ok(())
    }
}

fn family_part(f: Family) -> Part {
    match f {
        Family::I1 | Family::J1 => Part::Sing,
        Family::I3 => Part::Nonloc,
        _ => Part::Loc,
    }
}

/// `G(q)` (or `∂_s` of it) at `s = n − 2q`; `None` when it vanishes exactly.
fn factor_at(kind: TraceKind, regime: MuRegime, s: i32, deriv: bool) -> Result<Option<Factor>> {
    let stat = match kind.statistics() {
        None => return Ok(Some(Factor::One)),
        Some(st) => st,
    };
    if regime == MuRegime::Negative {
        return Ok(Some(Factor::F { s, deriv }));
    }
    let sf = s as f64;
    let (value, label) = match (stat, deriv) {
        (Statistics::Bose, false) => (riemann_zeta(sf)?, format!("zeta({s})")),
        (Statistics::Bose, true) => (riemann_zeta_prime(sf)?, format!("zeta'({s})")),
        (Statistics::Fermi, false) => (dirichlet_eta(sf), format!("eta({s})")),
        (Statistics::Fermi, true) => (dirichlet_eta_prime(sf), format!("eta'({s})")),
    };
    if value == 0.0 {
        return Ok(None);
    }
    Ok(Some(Factor::Const { value, label }))
}

fn int_rational(v: i64, den: BigInt) -> BigRational {
    BigRational::new(BigInt::from(v), den)
}

/// Builds the expansion of the trace of kind `kind` in dimension `dim`,
/// keeping `k ≤ trunc` in every infinite sum.
pub fn build_expansion(dim: u32, kind: TraceKind, regime: MuRegime, trunc: u32) -> Result<ExpansionSeries> {
    if dim == 0 {
        return Err(precondition("dimension must be at least 1"));
    }
    let n = dim as i32;
    let parity = Parity::of(dim);
    let (half, m) = match parity {
        Parity::Even(m) => (true, m),
        Parity::Odd(m) => (false, m),
    };
    let bose_zero = kind == TraceKind::Bose && regime == MuRegime::Zero;
    // 2(4π)^{−(n+1)/2} = 2^{−n} (√π)^{−(n+1)}
    let base = Prefactor { rational: int_rational(1, BigInt::from(1)), sqrt_pi_power: -(n + 1), two_power: -n };
    let mut terms = Vec::new();
    for lt in lemma_terms(half, m as u64, trunc as u64)? {
        // ζ(1) at the last polynomial pole in odd dimension: replaced below
        if bose_zero && !half && lt.family == Family::J1 && lt.k == m as u64 {
            continue;
        }
        let two_q = (2.0 * lt.t_power).round() as i32;
        let s = n - two_q;
        let q = lt.t_power;
        // t^p (β/2)^{−n} = 2^{n−2p} β^{2p−n}
        let pref = base.times(&lt.prefactor).scaled(1, 0, n - two_q);
        let beta_power = (two_q - n) as f64;
        let part = family_part(lt.family);
        let mk = |pref: Prefactor, scalar: f64, log_flag: bool, factor: Factor, a_deriv: bool, part: Part| ExpansionTerm {
            beta_power,
            log_flag,
            prefactor: pref,
            scalar,
            factor,
            a_index: q,
            a_deriv,
            part,
        };
        if lt.f_deriv {
            // f′ = G′ A + G A′ with G′(q) = −2 ∂_s F(n − 2q)
            if kind != TraceKind::Relativistic {
                if let Some(fd) = factor_at(kind, regime, s, true)? {
                    terms.push(mk(pref.scaled(-2, 0, 0), lt.scalar, false, fd, false, Part::Loc));
                }
            }
            if let Some(g) = factor_at(kind, regime, s, false)? {
                terms.push(mk(pref, lt.scalar, false, g, true, Part::Nonloc));
            }
            continue;
        }
        let g = match factor_at(kind, regime, s, false)? {
            Some(g) => g,
            None => continue,
        };
        if lt.log_t {
            // log t = 2 log β − 2 log 2
            terms.push(mk(pref.scaled(2, 0, 0), lt.scalar, true, g.clone(), false, part));
            terms.push(mk(pref.scaled(-2, 0, 0), lt.scalar * LN_2, false, g, false, part));
        } else {
            terms.push(mk(pref, lt.scalar, false, g, false, part));
        }
    }
    if bose_zero {
        let mu64 = m as u64;
        let sign = if m % 2 == 0 { 1 } else { -1 };
        let f = lemma::factorial;
        let residue = |pref: Prefactor, scalar: f64, log_flag: bool, a_index: f64, a_deriv: bool| ExpansionTerm {
            beta_power: -1.0,
            log_flag,
            prefactor: pref,
            scalar,
            factor: Factor::One,
            a_index,
            a_deriv,
            part: Part::Residue,
        };
        if half {
            // S(β) = (−1)^m π^{−m} m!/(2m)! β^{−1} A_{m−1/2}
            let pref = Prefactor {
                rational: BigRational::new(f(mu64) * sign, f(2 * mu64)),
                sqrt_pi_power: -2 * m as i32,
                two_power: 0,
            };
            terms.push(residue(pref, 1.0, false, m as f64 - 0.5, false));
        } else {
            // S̃(β) = −2 (−1)^m/m! (4π)^{−m−1} β^{−1} {A′_m − [ψ(m+1) − ψ(1)] A_m + 2 log(β/2) A_m}
            let c = Prefactor {
                rational: BigRational::new(BigInt::from(-sign), f(mu64)),
                sqrt_pi_power: -2 * m as i32 - 2,
                two_power: -2 * m as i32 - 1,
            };
            let dpsi = digamma(m as f64 + 1.0)? - digamma(1.0)?;
            let am = m as f64;
            terms.push(residue(c.clone(), 1.0, false, am, true));
            terms.push(residue(c.scaled(-1, 0, 0), dpsi, false, am, false));
            terms.push(residue(c.scaled(2, 0, 0), 1.0, true, am, false));
            terms.push(residue(c.scaled(-2, 0, 0), LN_2, false, am, false));
        }
    }
    // ascending power, log-free first; stable within equal keys
    terms.sort_by(|a, b| a.beta_power.total_cmp(&b.beta_power).then(a.log_flag.cmp(&b.log_flag)));
    Ok(ExpansionSeries { dim, parity, trace_kind: kind, mu_regime: regime, truncation: trunc, terms })
}

/// Values of `A_q` and `A′_q` keyed by `(2q, derivative)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AValues {
    map: BTreeMap<(i64, bool), Estimate>,
}

impl AValues {
    pub fn new() -> Self {
        AValues::default()
    }

    pub fn insert(&mut self, q: f64, deriv: bool, v: Estimate) {
        self.map.insert(((2.0 * q).round() as i64, deriv), v);
    }

    pub fn get(&self, q: f64, deriv: bool) -> Result<Estimate> {
        self.map
            .get(&((2.0 * q).round() as i64, deriv))
            .copied()
            .ok_or(Error::MissingA { q, deriv })
    }

    /// Computes every value `series` needs from the spectrum.
    pub fn for_series(spec: &Spectrum, series: &ExpansionSeries, tol: f64) -> Result<AValues> {
        let mut out = AValues::new();
        for (q, deriv) in series.required_a() {
            let r = if deriv { a_q_prime(spec, q, tol)? } else { a_q(spec, q, tol)? };
            out.insert(q, deriv, r.estimate());
        }
        Ok(out)
    }
}

/// How many terms of a series to sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    Full,
    /// Stop before the first positive-power order whose magnitude exceeds
    /// the previous order's.
    Optimal,
    /// Terms with `β`-power at most this value.
    UpToPower(f64),
}

/// Per-order contributions of `series` at `(β, μ)`: `(power, value, err)`.
fn order_values(series: &ExpansionSeries, a: &AValues, beta: f64, mu: f64) -> Result<Vec<(f64, f64, f64)>> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(precondition(format!("beta must be positive and finite, got {beta}")));
    }
    let stat = series.trace_kind.statistics();
    if stat.is_some() {
        let regime = MuRegime::of(mu)?;
        if regime != series.mu_regime {
            return Err(precondition(format!(
                "series built for {:?} chemical potential, evaluated at mu = {mu}",
                series.mu_regime
            )));
        }
    }
    let x = beta * mu;
    let lb = beta.ln();
    let mut out: Vec<(f64, f64, f64)> = Vec::new();
    for t in &series.terms {
        let av = a.get(t.a_index, t.a_deriv)?;
        let (fv, fe) = match &t.factor {
            Factor::One => (1.0, 0.0),
            Factor::Const { value, .. } => (*value, 0.0),
            Factor::F { s, deriv } => {
                let e = f_statistic_estimate(*s as f64, x, stat.expect("F factor needs statistics"), *deriv as u8, 1e-13)?;
                (e.value, e.err)
            }
        };
        let w = t.coeff() * beta.powf(t.beta_power) * if t.log_flag { lb } else { 1.0 };
        let v = w * fv * av.value;
        let e = (w * fv).abs() * av.err + (w * av.value).abs() * fe;
        match out.last_mut() {
            Some(last) if last.0 == t.beta_power => {
                last.1 += v;
                last.2 += e;
            }
            _ => out.push((t.beta_power, v, e)),
        }
    }
    Ok(out)
}

/// Sums the series at `(β, μ)` with linear propagation of the A errors.
pub fn evaluate_expansion(
    series: &ExpansionSeries,
    a: &AValues,
    beta: f64,
    mu: f64,
    trunc: Truncation,
) -> Result<Estimate> {
    let orders = order_values(series, a, beta, mu)?;
    let mut value = 0.0;
    let mut err = 0.0;
    let mut last_positive: Option<f64> = None;
    for (p, v, e) in orders {
        match trunc {
            Truncation::Full => {}
            Truncation::UpToPower(max) => {
                if p > max + 1e-9 {
                    break;
                }
            }
            Truncation::Optimal => {
                if p > 0.0 {
                    if let Some(prev) = last_positive {
                        if v.abs() > prev {
                            break;
                        }
                    }
                    last_positive = Some(v.abs());
                }
            }
        }
        value += v;
        err += e;
    }
    Ok(Estimate::new(value, err))
}
