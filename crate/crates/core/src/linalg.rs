//! Small dense/sparse complex linear algebra used by the model and the
//! propagator.
//!
//! Two independent matrix-exponential routes live here: [`expm`] (dense
//! Padé-13 scaling and squaring) and [`expm_action`] (truncated Taylor series
//! applied to a vector through a matrix-free product). The propagator uses the
//! second; tests use the first as an oracle.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Sparse operator in coordinate form. Entries are kept row-sorted.
#[derive(Clone, Debug, Default)]
pub struct SparseOp {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseOp {
    pub fn new(dim: usize) -> Self {
        SparseOp {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn from_entries(dim: usize, mut entries: Vec<(usize, usize, C64)>) -> Self {
        entries.retain(|e| e.2 != ZERO);
        entries.sort_by_key(|e| (e.0, e.1));
        SparseOp { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    /// `y += coef * A x`
    pub fn apply_add(&self, coef: C64, x: &[C64], y: &mut [C64]) {
        for &(r, c, v) in &self.entries {
            y[r] += coef * v * x[c];
        }
    }

    /// Upper bound on the spectral norm: max(row-sum, column-sum) norms.
    pub fn norm_bound(&self) -> f64 {
        let mut rows = vec![0.0; self.dim];
        let mut cols = vec![0.0; self.dim];
        for &(r, c, v) in &self.entries {
            rows[r] += v.norm();
            cols[c] += v.norm();
        }
        let r = rows.iter().cloned().fold(0.0, f64::max);
        let c = cols.iter().cloned().fold(0.0, f64::max);
        (r * c).sqrt()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `<a|b>`
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entry of `|H - H^dagger|`.
pub fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn one_norm(m: &DMatrix<C64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371_920_351_148_152;

/// Dense matrix exponential by scaling and squaring with a [13/13] Padé
/// approximant (Higham 2005).
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let norm = one_norm(a);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = a * C64::from(2f64.powi(-s));

    let b = |k: usize| C64::from(PADE13[k]);
    let id = DMatrix::<C64>::identity(n, n);
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9)) + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1);
    let u = &scaled * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8)) + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .expect("Padé denominator is singular; input norm is not finite");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Computes `exp(M) v` in place, where `M` is available only through
/// `apply(x, y)` (which must overwrite `y` with `M x`) and `norm_bound`
/// bounds `||M||`.
///
/// The exponent is split into `s` chunks of norm at most 2 and each chunk is
/// summed as a Taylor series until two consecutive terms fall below machine
/// precision relative to the running vector.
pub fn expm_action<F>(mut apply: F, norm_bound: f64, v: &mut [C64])
where
    F: FnMut(&[C64], &mut [C64]),
{
    const CHUNK: f64 = 2.0;
    const TOL: f64 = 1e-17;
    const MAX_TERMS: usize = 60;

    let chunks = (norm_bound / CHUNK).ceil().max(1.0) as usize;
    let inv = 1.0 / chunks as f64;
    let n = v.len();
    let mut term = vec![ZERO; n];
    let mut next = vec![ZERO; n];

    for _ in 0..chunks {
        term.copy_from_slice(v);
        let mut prev_small = false;
        for k in 1..=MAX_TERMS {
            apply(&term, &mut next);
            let scale = inv / k as f64;
            for (t, x) in term.iter_mut().zip(&next) {
                *t = x * scale;
            }
            for (acc, t) in v.iter_mut().zip(&term) {
                *acc += t;
            }
            let small = norm(&term) <= TOL * norm(v).max(f64::MIN_POSITIVE);
            if small && prev_small {
                break;
            }
            prev_small = small;
        }
    }
}
