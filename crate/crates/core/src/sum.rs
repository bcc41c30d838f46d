//! Compensated summation used by every eigen-sum, so that results depend only
//! on the order of the terms and not on how rounding errors accumulate.

/// Neumaier's variant of Kahan summation, also tracking `Σ|term|` so callers
/// can bound the rounding error of the total.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
    abs: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs += x.abs();
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    /// Sum of absolute values of everything added so far.
    #[inline]
    pub fn abs_sum(&self) -> f64 {
        self.abs
    }

    /// A conservative bound on the accumulated rounding error, assuming every
    /// term carries a few ulps of its own error.
    pub fn rounding_bound(&self) -> f64 {
        4.0 * f64::EPSILON * self.abs
    }

    pub fn merge(&mut self, other: &Neumaier) {
        self.add(other.sum);
        self.add(other.comp);
        // `add` counted the partial sums in `abs`; replace with the true value
        self.abs = self.abs - other.sum.abs() - other.comp.abs() + other.abs;
    }
}

impl FromIterator<f64> for Neumaier {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Neumaier::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Chunk length for parallel sums; fixed so the reduction order (and the
/// rounded result) does not depend on the number of threads.
pub const PAR_CHUNK: usize = 4096;

/// Sums `f(item)` over `items` in fixed-size chunks evaluated in parallel and
/// merged left to right.
pub fn par_sum<T: Sync, F: Fn(&T) -> f64 + Sync>(items: &[T], f: F) -> Neumaier {
    use rayon::prelude::*;
    if items.len() <= PAR_CHUNK {
        return items.iter().map(&f).collect();
    }
    let parts: Vec<Neumaier> = items
        .par_chunks(PAR_CHUNK)
        .map(|chunk| chunk.iter().map(&f).collect())
        .collect();
    let mut total = Neumaier::new();
    for p in &parts {
        total.merge(p);
    }
    total
}
