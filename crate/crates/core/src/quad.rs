//! Adaptive Gauss–Kronrod (10/21 point) quadrature on finite intervals for
//! small vector-valued integrands.
//!
//! Intervals are bisected in order of decreasing error estimate. Ties and
//! the final summation order are fixed, so a given integrand always yields
//! bit-identical results.

use crate::sum::Neumaier;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult<const K: usize> {
    pub value: [f64; K],
    pub err: [f64; K],
    /// Integral of `|f|`, used for rounding-error floors.
    pub abs_value: [f64; K],
    pub intervals: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
struct Piece<const K: usize> {
    a: f64,
    b: f64,
    value: [f64; K],
    err: [f64; K],
    abs_value: [f64; K],
}

fn gk21<const K: usize, F: FnMut(f64) -> [f64; K]>(f: &mut F, a: f64, b: f64) -> Piece<K> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = [0.0; K];
    let mut gauss = [0.0; K];
    let mut absk = [0.0; K];
    let mut fv1 = [[0.0; K]; 10];
    let mut fv2 = [[0.0; K]; 10];
    for i in 0..K {
        kron[i] = WGK[10] * fc[i];
        absk[i] = WGK[10] * fc[i].abs();
    }
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        for i in 0..K {
            kron[i] += WGK[j] * (f1[i] + f2[i]);
            absk[i] += WGK[j] * (f1[i].abs() + f2[i].abs());
            if j % 2 == 1 {
                gauss[i] += WG[j / 2] * (f1[i] + f2[i]);
            }
        }
    }
    let mut value = [0.0; K];
    let mut err = [0.0; K];
    let mut abs_value = [0.0; K];
    for i in 0..K {
        let mean = 0.5 * kron[i];
        let mut asc = WGK[10] * (fc[i] - mean).abs();
        for j in 0..10 {
            asc += WGK[j] * ((fv1[j][i] - mean).abs() + (fv2[j][i] - mean).abs());
        }
        let resasc = asc * h.abs();
        let resabs = absk[i] * h.abs();
        let mut e = ((kron[i] - gauss[i]) * h).abs();
        if resasc != 0.0 && e != 0.0 {
            e = resasc * (200.0 * e / resasc).powf(1.5).min(1.0);
        }
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            e = e.max(50.0 * f64::EPSILON * resabs);
        }
        value[i] = kron[i] * h;
        err[i] = e;
        abs_value[i] = resabs;
    }
    Piece { a, b, value, err, abs_value }
}

/// Integrates `f` over `[a, b]` until every component satisfies
/// `err ≤ max(abs_tol, rel_tol·|value|)`, or `max_intervals` is reached.
pub fn integrate<const K: usize, F>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> QuadResult<K>
where
    F: FnMut(f64) -> [f64; K],
{
    let mut pieces = vec![gk21(&mut f, a, b)];
    loop {
        let (value, err, abs_value) = totals(&pieces);
        let done = (0..K).all(|i| err[i] <= abs_tol.max(rel_tol * value[i].abs()));
        if done || pieces.len() >= max_intervals {
            return QuadResult {
                value,
                err,
                abs_value,
                intervals: pieces.len(),
                converged: done,
            };
        }
        // split the interval whose worst component is furthest from its share
        let mut worst = 0;
        let mut worst_score = -1.0;
        for (idx, p) in pieces.iter().enumerate() {
            let score = (0..K)
                .map(|i| p.err[i] / abs_tol.max(rel_tol * value[i].abs()).max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max);
            if score > worst_score {
                worst_score = score;
                worst = idx;
            }
        }
        let p = pieces.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            // interval cannot be split further in floating point
            return QuadResult {
                value,
                err,
                abs_value,
                intervals: pieces.len() + 1,
                converged: false,
            };
        }
        pieces.push(gk21(&mut f, p.a, mid));
        pieces.push(gk21(&mut f, mid, p.b));
    }
}

fn totals<const K: usize>(pieces: &[Piece<K>]) -> ([f64; K], [f64; K], [f64; K]) {
    // sum in left-to-right order so the result does not depend on split history
    let mut order: Vec<&Piece<K>> = pieces.iter().collect();
    order.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut value = [0.0; K];
    let mut err = [0.0; K];
    let mut abs_value = [0.0; K];
    for i in 0..K {
        let mut v = Neumaier::new();
        let mut e = Neumaier::new();
        let mut av = Neumaier::new();
        for p in &order {
            v.add(p.value[i]);
            e.add(p.err[i]);
            av.add(p.abs_value[i]);
        }
        value[i] = v.value();
        err[i] = e.value();
        abs_value[i] = av.value();
    }
    (value, err, abs_value)
}
