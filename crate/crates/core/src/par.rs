//! Data-parallel batch work over frozen landscapes and independent runs.
//!
//! With the `parallel` feature (default) these fan out on the rayon pool;
//! without it they run on the calling thread. The `*_sequential` variants
//! are always available so both paths can be compared in one build.

use crate::error::Result;
use crate::landscape::{evaluate_problem, ProblemInstance};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, in parallel when the feature is enabled. Output
/// order matches input order.
pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Evaluates every point against one frozen environment.
pub fn evaluate_batch(points: &[Vec<f64>], prob: &ProblemInstance) -> Result<Vec<f64>> {
    map_collect(points, |x| evaluate_problem(x, prob)).into_iter().collect()
}

pub fn evaluate_batch_sequential(points: &[Vec<f64>], prob: &ProblemInstance) -> Result<Vec<f64>> {
    points.iter().map(|x| evaluate_problem(x, prob)).collect()
}

/// `resolution × resolution` lattice over `[lo, hi]²` on coordinates `(p, q)`
/// of `base`, row-major in `p` then `q`.
pub fn lattice(base: &[f64], p: usize, q: usize, lo: f64, hi: f64, resolution: usize) -> Vec<Vec<f64>> {
    let step = if resolution > 1 {
        (hi - lo) / (resolution - 1) as f64
    } else {
        0.0
    };
    let mut points = Vec::with_capacity(resolution * resolution);
    for a in 0..resolution {
        for b in 0..resolution {
            let mut x = base.to_vec();
            x[p] = lo + step * a as f64;
            x[q] = lo + step * b as f64;
            points.push(x);
        }
    }
    points
}
