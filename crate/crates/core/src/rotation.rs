//! Orthonormal rotation matrices built from Givens plane rotations.
//!
//! Initial rotations come from Gram–Schmidt applied to a matrix of standard
//! normal draws. Each environment change multiplies the previous rotation by
//! one Givens rotation per coordinate plane, taken in a freshly drawn random
//! order.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// Columns whose norm falls below this are treated as linearly dependent.
pub const SINGULAR_PIVOT: f64 = 1e-12;
/// Re-orthonormalize once `max |RᵀR - I|` exceeds this.
pub const DRIFT_THRESHOLD: f64 = 1e-10;
/// Attempts at drawing a full-rank Gaussian matrix before giving up.
pub const MAX_REDRAWS: usize = 8;

/// Coordinate plane `(p, q)` with `p < q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PlanePair {
    pub p: usize,
    pub q: usize,
}

/// All `d(d-1)/2` coordinate planes, lexicographic.
pub fn plane_pairs(d: usize) -> Vec<PlanePair> {
    let mut pairs = Vec::with_capacity(d * d.saturating_sub(1) / 2);
    for p in 0..d {
        for q in (p + 1)..d {
            pairs.push(PlanePair { p, q });
        }
    }
    pairs
}

/// Identity with `(p,p) = (q,q) = cos θ`, `(p,q) = -sin θ`, `(q,p) = sin θ`.
pub fn givens_matrix(d: usize, pair: PlanePair, theta: f64) -> DMatrix<f64> {
    assert!(pair.p < pair.q && pair.q < d, "invalid plane {pair:?} for d={d}");
    let (s, c) = theta.sin_cos();
    let mut g = DMatrix::identity(d, d);
    g[(pair.p, pair.p)] = c;
    g[(pair.q, pair.q)] = c;
    g[(pair.p, pair.q)] = -s;
    g[(pair.q, pair.p)] = s;
    g
}

/// Left-multiplies `m` by `G(p, q, θ)` in place, touching only rows `p` and `q`.
pub fn apply_givens_left(m: &mut DMatrix<f64>, pair: PlanePair, sin: f64, cos: f64) {
    for col in 0..m.ncols() {
        let a = m[(pair.p, col)];
        let b = m[(pair.q, col)];
        m[(pair.p, col)] = cos * a - sin * b;
        m[(pair.q, col)] = sin * a + cos * b;
    }
}

/// Largest absolute entry of `MᵀM - I`.
pub fn orthonormality_error(m: &DMatrix<f64>) -> f64 {
    let gram = m.transpose() * m;
    let mut worst = 0.0_f64;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).abs());
        }
    }
    worst
}

/// Orthonormalizes the columns of `m` (modified Gram–Schmidt with one
/// re-orthogonalization pass per column).
///
/// Fails with [`Error::SingularMatrix`] when a column has (numerically) no
/// component outside the span of the previous ones; callers redraw.
pub fn gram_schmidt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    assert_eq!(m.nrows(), m.ncols(), "gram_schmidt expects a square matrix");
    let n = m.ncols();
    let mut q = m.clone();
    for j in 0..n {
        for _pass in 0..2 {
            for k in 0..j {
                let proj = q.column(k).dot(&q.column(j));
                for i in 0..n {
                    let qk = q[(i, k)];
                    q[(i, j)] -= proj * qk;
                }
            }
        }
        let norm = q.column(j).norm();
        if !(norm >= SINGULAR_PIVOT) {
            return Err(Error::SingularMatrix { column: j, norm });
        }
        q.column_mut(j).scale_mut(1.0 / norm);
    }
    Ok(q)
}

/// Gram–Schmidt of a `d×d` matrix of Gaussian draws taken in row-major order.
pub fn random_orthogonal(rng: &mut RandomSource, d: usize) -> Result<DMatrix<f64>> {
    for _ in 0..MAX_REDRAWS {
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = rng.next_gaussian();
            }
        }
        match gram_schmidt(&m) {
            Ok(q) => return Ok(q),
            Err(Error::SingularMatrix { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::RedrawExhausted {
        attempts: MAX_REDRAWS,
    })
}

/// Applies one Givens rotation by `theta` per plane, in an order given by a
/// single permutation draw, to `previous`: the plane at `order[0]` is applied
/// first (rightmost factor), `order[last]` last.
///
/// Consumes exactly one permutation of length `d(d-1)/2` from `rng`.
pub fn rotate_update(previous: &DMatrix<f64>, theta: f64, rng: &mut RandomSource) -> DMatrix<f64> {
    let d = previous.nrows();
    let pairs = plane_pairs(d);
    let order = rng.next_permutation(pairs.len());
    let mut r = previous.clone();
    let (sin, cos) = theta.sin_cos();
    for idx in order {
        apply_givens_left(&mut r, pairs[idx], sin, cos);
    }
    if d > 1 && orthonormality_error(&r) > DRIFT_THRESHOLD {
        if let Ok(fixed) = gram_schmidt(&r) {
            r = fixed;
        }
    }
    r
}
