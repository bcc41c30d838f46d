//! Residue bookkeeping for the Mellin–Barnes integrals
//!
//! `I(t) = (2πi)^{−1} ∫ Γ(−q) Γ(−q + m + 1/2) t^q f(q) dq`,
//! `J(t) = (2πi)^{−1} ∫ Γ(−q) Γ(−q + m + 1) t^q f(q) dq`
//!
//! as `t → 0`. `I` has simple poles at `q = k` and `q = k + m + 1/2`; `J` has
//! simple poles at `q = 0..m` and double poles at `q = k + m + 1`. Expanding
//! `Γ(−k + z) = (−1)^k/k! (1/z + ψ(k+1) + O(z))` at the double poles gives
//!
//! `J_2 = −(−1)^m Σ [ψ(k+m+2) + ψ(k+1)] t^{k+m+1} f(k+m+1) / (k!(k+m+1)!)`,
//! `J_3 = (−1)^m log t Σ t^{k+m+1} f(k+m+1) / (k!(k+m+1)!)`,
//! `J_4 = (−1)^m Σ t^{k+m+1} f′(k+m+1) / (k!(k+m+1)!)`.
//!
//! For m = 0 and f = 1 these reproduce `2√t K_1(2√t) = 1 + t log t + (2γ − 1)t + …`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{precondition, Result};
use crate::specfun::bernoulli::rational_to_f64;
use crate::specfun::digamma;

/// Exact prefactor `rational · (√π)^sqrt_pi_power · 2^two_power`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prefactor {
    pub rational: BigRational,
    pub sqrt_pi_power: i32,
    pub two_power: i32,
}

impl Prefactor {
    pub fn one() -> Self {
        Prefactor { rational: BigRational::one(), sqrt_pi_power: 0, two_power: 0 }
    }

    pub fn rational(r: BigRational) -> Self {
        Prefactor { rational: r, sqrt_pi_power: 0, two_power: 0 }
    }

    pub fn times(&self, other: &Prefactor) -> Prefactor {
        Prefactor {
            rational: &self.rational * &other.rational,
            sqrt_pi_power: self.sqrt_pi_power + other.sqrt_pi_power,
            two_power: self.two_power + other.two_power,
        }
    }

    pub fn scaled(&self, r: i64, sqrt_pi: i32, two: i32) -> Prefactor {
        Prefactor {
            rational: &self.rational * BigRational::from_integer(BigInt::from(r)),
            sqrt_pi_power: self.sqrt_pi_power + sqrt_pi,
            two_power: self.two_power + two,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero()
    }

    pub fn value(&self) -> f64 {
        let pi_part = std::f64::consts::PI.sqrt().powi(self.sqrt_pi_power);
        rational_to_f64(&self.rational) * pi_part * 2f64.powi(self.two_power)
    }
}

impl fmt::Display for Prefactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rational)?;
        if self.sqrt_pi_power != 0 {
            write!(f, "*pi^({}/2)", self.sqrt_pi_power)?;
        }
        if self.two_power != 0 {
            write!(f, "*2^({})", self.two_power)?;
        }
        Ok(())
    }
}

pub(crate) fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn ratio(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

fn sign(k: u64) -> i64 {
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

/// The coefficient families of the two residue expansions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    I1,
    I2,
    I3,
    J1,
    J2,
    J3,
    J4,
}

impl Family {
    pub fn all() -> [Family; 7] {
        [Family::I1, Family::I2, Family::I3, Family::J1, Family::J2, Family::J3, Family::J4]
    }

    /// Power of t: `k`, `k+m+1` or `k+m+1/2`.
    pub fn t_power(self, m: u64, k: u64) -> f64 {
        match self {
            Family::I1 | Family::J1 => k as f64,
            Family::I3 => (k + m) as f64 + 0.5,
            _ => (k + m + 1) as f64,
        }
    }

    pub fn is_polynomial(self) -> bool {
        matches!(self, Family::I1 | Family::J1)
    }
}

/// Exact part of a family coefficient; the J2 digamma factor is returned
/// separately by [`lemma1_scalar`].
pub fn lemma1_prefactor(family: Family, m: u64, k: u64) -> Result<Prefactor> {
    if family.is_polynomial() && k > m {
        return Err(precondition(format!("{family:?} needs k <= m, got k = {k}, m = {m}")));
    }
    let f = factorial;
    let p = match family {
        // √π (−1)^k (2m−2k)!/(k!(m−k)!) 2^{2k−2m}
        Family::I1 => Prefactor {
            rational: ratio(f(2 * m - 2 * k) * sign(k), f(k) * f(m - k)),
            sqrt_pi_power: 1,
            two_power: 2 * k as i32 - 2 * m as i32,
        },
        // (−1)^m ½√π k!/((k+m+1)!(2k+1)!) 2^{2k+2}
        Family::I2 => Prefactor {
            rational: ratio(f(k) * sign(m), f(k + m + 1) * f(2 * k + 1)),
            sqrt_pi_power: 1,
            two_power: 2 * k as i32 + 1,
        },
        // −(−1)^m ½√π (k+m)!/(k!(2k+2m+1)!) 2^{2k+2m+2}
        Family::I3 => Prefactor {
            rational: ratio(f(k + m) * -sign(m), f(k) * f(2 * k + 2 * m + 1)),
            sqrt_pi_power: 1,
            two_power: 2 * (k + m) as i32 + 1,
        },
        // (−1)^k (m−k)!/k!
        Family::J1 => Prefactor::rational(ratio(f(m - k) * sign(k), f(k))),
        // −(−1)^m/(k!(k+m+1)!) · [ψ(k+m+2) + ψ(k+1)]
        Family::J2 => Prefactor::rational(ratio(BigInt::from(-sign(m)), f(k) * f(k + m + 1))),
        // (−1)^m/(k!(k+m+1)!) · log t
        Family::J3 | Family::J4 => Prefactor::rational(ratio(BigInt::from(sign(m)), f(k) * f(k + m + 1))),
    };
    Ok(p)
}

/// Non-rational factor of a family coefficient (1 except for J2).
pub fn lemma1_scalar(family: Family, m: u64, k: u64) -> Result<f64> {
    Ok(match family {
        Family::J2 => digamma((k + m + 2) as f64)? + digamma((k + 1) as f64)?,
        _ => 1.0,
    })
}

/// Numerical value of the coefficient of `t^{power} f(·)` (or of
/// `t^{power} log t f`, `t^{power} f′` for J3, J4).
pub fn lemma1_coefficients(family: Family, m: u64, k: u64) -> Result<f64> {
    Ok(lemma1_prefactor(family, m, k)?.value() * lemma1_scalar(family, m, k)?)
}

/// One term of a residue expansion in `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaTerm {
    pub family: Family,
    pub k: u64,
    pub t_power: f64,
    pub prefactor: Prefactor,
    pub scalar: f64,
    /// Multiplies `log t`.
    pub log_t: bool,
    /// Uses `f′` instead of `f`.
    pub f_deriv: bool,
}

/// All terms of `I` (`half = true`) or `J`, with the infinite sums cut at
/// `k ≤ trunc`.
pub fn lemma_terms(half: bool, m: u64, trunc: u64) -> Result<Vec<LemmaTerm>> {
    let families: &[Family] = if half {
        &[Family::I1, Family::I2, Family::I3]
    } else {
        &[Family::J1, Family::J2, Family::J3, Family::J4]
    };
    let mut out = Vec::new();
    for &fam in families {
        let kmax = if fam.is_polynomial() { m } else { trunc };
        for k in 0..=kmax {
            let prefactor = lemma1_prefactor(fam, m, k)?;
            if prefactor.is_zero() {
                continue;
            }
            out.push(LemmaTerm {
                family: fam,
                k,
                t_power: fam.t_power(m, k),
                prefactor,
                scalar: lemma1_scalar(fam, m, k)?,
                log_t: fam == Family::J3,
                f_deriv: fam == Family::J4,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use std::f64::consts::PI;

    #[test]
    fn examples() {
        assert!((lemma1_coefficients(Family::I1, 0, 0).unwrap() - PI.sqrt()).abs() < 1e-15);
        assert!((lemma1_coefficients(Family::I3, 0, 0).unwrap() + 2.0 * PI.sqrt()).abs() < 1e-14);
        assert_eq!(lemma1_coefficients(Family::J1, 2, 1).unwrap(), -1.0);
        assert!(lemma1_coefficients(Family::J1, 1, 2).is_err());
        assert!(lemma1_coefficients(Family::I1, 1, 2).is_err());
    }

    /// `J(t)` for `f = 1` at `m = 0` is `2√t K_1(2√t)`.
    fn j_exact(t: f64) -> f64 {
        let x = 2.0 * t.sqrt();
        // K_1(x) = ∫_0^∞ e^{−x cosh u} cosh u du
        let r = quad::integrate::<1, _>(|u: f64| [(-x * u.cosh()).exp() * u.cosh()], 0.0, 30.0, 1e-14, 0.0, 2000);
        x * r.value[0]
    }

    /// `I(t)` for `f = 1` at `m = 0` is `√π e^{−2√t}`.
    fn i_exact(t: f64) -> f64 {
        PI.sqrt() * (-2.0 * t.sqrt()).exp()
    }

    fn sum_terms(terms: &[LemmaTerm], t: f64) -> f64 {
        terms
            .iter()
            .filter(|x| !x.f_deriv)
            .map(|x| {
                let lg = if x.log_t { t.ln() } else { 1.0 };
                x.prefactor.value() * x.scalar * t.powf(x.t_power) * lg
            })
            .sum()
    }

    #[test]
    fn residue_sums_match_closed_forms() {
        let j = lemma_terms(false, 0, 6).unwrap();
        let i = lemma_terms(true, 0, 6).unwrap();
        for &t in &[1e-3, 1e-2, 0.05] {
            let ej = j_exact(t);
            assert!((sum_terms(&j, t) - ej).abs() < 1e-12 * ej.abs().max(1.0), "J t={t}");
            let ei = i_exact(t);
            assert!((sum_terms(&i, t) - ei).abs() < 1e-12, "I t={t}");
        }
    }

    #[test]
    fn m_one_closed_forms() {
        // (2πi)^{−1} ∫ Γ(−q) Γ(−q+a) t^q dq = 2 t^{a/2} K_a(2√t)
        let k_nu = |nu: f64, x: f64| {
            let r = quad::integrate::<1, _>(
                |u: f64| [(-x * u.cosh()).exp() * (nu * u).cosh()],
                0.0,
                30.0,
                1e-14,
                0.0,
                2000,
            );
            r.value[0]
        };
        for (half, a) in [(true, 1.5), (false, 2.0)] {
            let terms = lemma_terms(half, 1, 8).unwrap();
            for &t in &[1e-3f64, 1e-2] {
                let exact = 2.0 * t.powf(0.5 * a) * k_nu(a, 2.0 * t.sqrt());
                let got = sum_terms(&terms, t);
                assert!((got - exact).abs() < 1e-11 * exact, "a={a} t={t}: {got} vs {exact}");
            }
        }
    }
}
