//! Exact Bernoulli numbers from the recurrence `Σ_{j=0}^{k} C(k+1, j) B_j = 0`.

use std::sync::Mutex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{precondition, Result};

/// Largest index served by [`bernoulli`] unless a larger limit is requested.
pub const DEFAULT_BERNOULLI_MAX: usize = 64;

// B_0, B_1, ..., B_{len-1}; grown on demand.
static TABLE: Mutex<Vec<BigRational>> = Mutex::new(Vec::new());

fn binomial_row(n: usize) -> Vec<BigInt> {
    let mut row = Vec::with_capacity(n + 1);
    let mut c = BigInt::one();
    row.push(c.clone());
    for j in 0..n {
        c = c * BigInt::from(n - j) / BigInt::from(j + 1);
        row.push(c.clone());
    }
    row
}

fn extend_table(table: &mut Vec<BigRational>, upto: usize) {
    while table.len() <= upto {
        let k = table.len();
        let b = if k == 0 {
            BigRational::one()
        } else if k > 1 && k % 2 == 1 {
            BigRational::zero()
        } else {
            let row = binomial_row(k + 1);
            let mut acc = BigRational::zero();
            for (j, bj) in table.iter().enumerate() {
                if !bj.is_zero() {
                    acc += BigRational::from_integer(row[j].clone()) * bj;
                }
            }
            -acc / BigRational::from_integer(BigInt::from(k + 1))
        };
        table.push(b);
    }
}

/// Exact `B_k` for even `k ≤ max`. `B_1` is excluded on purpose: only the
/// even-index numbers enter the zeta values used here.
pub fn bernoulli_with_max(k: usize, max: usize) -> Result<BigRational> {
    if k % 2 == 1 {
        return Err(precondition(format!("Bernoulli index {k} is odd")));
    }
    if k > max {
        return Err(precondition(format!(
            "Bernoulli index {k} exceeds configured maximum {max}"
        )));
    }
    let mut table = TABLE.lock().unwrap_or_else(|e| e.into_inner());
    extend_table(&mut table, k);
    Ok(table[k].clone())
}

/// Exact `B_k` for even `k ≤ 64`.
pub fn bernoulli(k: usize) -> Result<BigRational> {
    bernoulli_with_max(k, DEFAULT_BERNOULLI_MAX)
}

/// `B_k` rounded to the nearest double.
pub fn bernoulli_f64(k: usize, max: usize) -> Result<f64> {
    let b = bernoulli_with_max(k, max)?;
    Ok(rational_to_f64(&b))
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
