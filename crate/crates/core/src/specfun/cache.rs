//! Read-only table of the special values consumed by the expansions.

use std::collections::BTreeMap;

use num_rational::BigRational;

use super::bernoulli::{bernoulli_with_max, rational_to_f64, DEFAULT_BERNOULLI_MAX};
use super::gamma::digamma;
use super::zeta::{riemann_zeta, riemann_zeta_prime};
use crate::error::Result;

/// Bernoulli numbers, ζ and ζ' at integer points and digamma at positive
/// integers and half-integers, computed once.
#[derive(Debug, Clone)]
pub struct SpecialValueCache {
    /// `2k → B_{2k}`.
    pub bernoulli: BTreeMap<usize, BigRational>,
    /// `s → ζ(s)` for integers `s ≥ 2`.
    pub zeta_pos: BTreeMap<i64, f64>,
    /// `s → ζ(s)` for negative odd integers.
    pub zeta_neg: BTreeMap<i64, f64>,
    /// `s → ζ'(s)` for integers `s ≤ −1` and `s ≥ 2`.
    pub zeta_prime: BTreeMap<i64, f64>,
    /// `2x → ψ(x)` for `x` a positive integer or half-integer.
    pub digamma: BTreeMap<i64, f64>,
}

impl SpecialValueCache {
    /// Builds the table with Bernoulli numbers up to `B_{max_index}` and the
    /// matching integer zeta values.
    pub fn build(max_index: usize) -> Result<Self> {
        let max_index = max_index - max_index % 2;
        let mut bernoulli = BTreeMap::new();
        for k in (0..=max_index).step_by(2) {
            bernoulli.insert(k, bernoulli_with_max(k, max_index)?);
        }
        let top = max_index as i64;
        let mut zeta_pos = BTreeMap::new();
        let mut zeta_neg = BTreeMap::new();
        let mut zeta_prime = BTreeMap::new();
        let mut digamma_map = BTreeMap::new();
        for s in 2..=top + 1 {
            zeta_pos.insert(s, riemann_zeta(s as f64)?);
            zeta_prime.insert(s, riemann_zeta_prime(s as f64)?);
        }
        for k in 1..=top / 2 {
            let s = 1 - 2 * k;
            zeta_neg.insert(s, -rational_to_f64(&bernoulli[&(2 * k as usize)]) / (2 * k) as f64);
        }
        for s in -top + 1..=-1 {
            zeta_prime.insert(s, riemann_zeta_prime(s as f64)?);
        }
        for twice in 1..=2 * top {
            digamma_map.insert(twice, digamma(twice as f64 / 2.0)?);
        }
        Ok(SpecialValueCache {
            bernoulli,
            zeta_pos,
            zeta_neg,
            zeta_prime,
            digamma: digamma_map,
        })
    }

    pub fn with_default_limit() -> Result<Self> {
        Self::build(DEFAULT_BERNOULLI_MAX)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cache_invariants() {
        let c = SpecialValueCache::with_default_limit().unwrap();
        assert_eq!(c.bernoulli[&0].to_string(), "1");
        assert_eq!(c.bernoulli[&2].to_string(), "1/6");
        assert_eq!(c.bernoulli[&4].to_string(), "-1/30");
        for k in 1..=32usize {
            let b = rational_to_f64(&c.bernoulli[&(2 * k)]);
            assert_eq!(c.zeta_neg[&(1 - 2 * k as i64)], -b / (2 * k) as f64);
        }
        // ζ(2k) = (−1)^{k+1} B_{2k} (2π)^{2k} / (2 (2k)!)
        let mut fact = 1.0;
        for k in 1..=16usize {
            fact *= ((2 * k - 1) * 2 * k) as f64;
            let b = rational_to_f64(&c.bernoulli[&(2 * k)]);
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            let expect = sign * b * (2.0 * PI).powi(2 * k as i32) / (2.0 * fact);
            let got = c.zeta_pos[&(2 * k as i64)];
            assert!(((got - expect) / expect).abs() < 1e-13, "k = {k}");
        }
    }
}
