//! Pure evaluation of components, sub-functions and the composed problem.
//!
//! A component is an irregular, rotated, ill-conditioned cone:
//!
//! ```text
//! f_k(x) = h - sqrt( Σ_j w_j · T(R (x - c))_j² )
//! ```
//!
//! where `T` is the elementwise log-sine irregularity warp. A sub-function is
//! the max over its components, and the problem value is the dimension and
//! weight scaled sum of the sub-function values divided by the total
//! dimension. The landscape is maximized.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inclusive `[min, max]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub min: f64,
    pub max: f64,
}

impl Interval {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

/// Ranges every component parameter is kept within.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterBounds {
    pub search: Interval,
    pub height: Interval,
    pub width: Interval,
    pub angle: Interval,
    pub tau: Interval,
    pub eta: Interval,
}

/// Per-sub-function change severities.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SeverityBundle {
    pub shift: f64,
    pub height: f64,
    pub width: f64,
    pub angle: f64,
    pub tau: f64,
    pub eta: f64,
}

/// A single peak.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub center: Vec<f64>,
    pub height: f64,
    pub widths: Vec<f64>,
    pub angle: f64,
    pub rotation: DMatrix<f64>,
    pub tau: f64,
    pub eta: [f64; 4],
}

impl Component {
    /// Plain cone: identity rotation, no irregularity.
    pub fn cone(center: Vec<f64>, height: f64, widths: Vec<f64>) -> Self {
        let d = center.len();
        Self {
            center,
            height,
            widths,
            angle: 0.0,
            rotation: DMatrix::identity(d, d),
            tau: 0.0,
            eta: [0.0; 4],
        }
    }

    pub fn dimension(&self) -> usize {
        self.center.len()
    }

    /// Ratio of the largest width to the smallest.
    pub fn condition_number(&self) -> f64 {
        let max = self.widths.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = self.widths.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubFunction {
    pub variable_indices: Vec<usize>,
    pub components: Vec<Component>,
    pub weight: f64,
    pub severities: SeverityBundle,
}

impl SubFunction {
    pub fn dimension(&self) -> usize {
        self.variable_indices.len()
    }

    /// Index of the tallest component (first one on ties).
    pub fn tallest(&self) -> usize {
        let mut best = 0;
        for (k, c) in self.components.iter().enumerate() {
            if c.height > self.components[best].height {
                best = k;
            }
        }
        best
    }

    fn gather(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.variable_indices.iter().map(|&i| x[i]));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub dimension: usize,
    pub sub_functions: Vec<SubFunction>,
    pub bounds: ParameterBounds,
    pub environment_index: usize,
}

impl ProblemInstance {
    /// Checks the structural invariants: indices partition `0..d`, each
    /// sub-function has at least one component of matching dimension, and
    /// weights are positive.
    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.dimension];
        let mut total = 0;
        for (i, sf) in self.sub_functions.iter().enumerate() {
            if sf.components.is_empty() {
                return Err(invalid(format!("sub_functions[{i}]"), "no components"));
            }
            if !(sf.weight > 0.0) {
                return Err(invalid(format!("sub_functions[{i}].weight"), "must be positive"));
            }
            for &v in &sf.variable_indices {
                if v >= self.dimension || seen[v] {
                    return Err(invalid(
                        format!("sub_functions[{i}].variable_indices"),
                        format!("index {v} out of range or repeated"),
                    ));
                }
                seen[v] = true;
            }
            total += sf.dimension();
            for (k, c) in sf.components.iter().enumerate() {
                let d = sf.dimension();
                if c.center.len() != d
                    || c.widths.len() != d
                    || c.rotation.nrows() != d
                    || c.rotation.ncols() != d
                {
                    return Err(invalid(
                        format!("sub_functions[{i}].components[{k}]"),
                        "dimension mismatch",
                    ));
                }
            }
        }
        if total != self.dimension {
            return Err(invalid("dimension", format!("sub-function dimensions sum to {total}")));
        }
        Ok(())
    }

    /// Composed point made of each sub-function's tallest component center.
    pub fn optimum_position(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.dimension];
        for sf in &self.sub_functions {
            let c = &sf.components[sf.tallest()].center;
            for (j, &v) in sf.variable_indices.iter().enumerate() {
                x[v] = c[j];
            }
        }
        x
    }

    pub fn in_search_bounds(&self, x: &[f64]) -> bool {
        x.iter().all(|&v| self.bounds.search.contains(v))
    }
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::InvalidConfig {
        field: field.into(),
        reason: reason.into(),
    }
}

#[inline]
fn warp(magnitude: f64, tau: f64, eta_a: f64, eta_b: f64) -> f64 {
    let l = magnitude.ln();
    (l + tau * ((eta_a * l).sin() + (eta_b * l).sin())).exp()
}

/// Elementwise irregularity warp of a single coordinate.
#[inline]
pub fn irregularity_scalar(y: f64, tau: f64, eta: &[f64; 4]) -> f64 {
    if y > 0.0 {
        warp(y, tau, eta[0], eta[1])
    } else if y < 0.0 {
        -warp(y.abs(), tau, eta[2], eta[3])
    } else {
        0.0
    }
}

pub fn irregularity_transform(y: &[f64], tau: f64, eta: &[f64; 4]) -> Vec<f64> {
    y.iter().map(|&v| irregularity_scalar(v, tau, eta)).collect()
}

fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

/// Component value at `x_sub` (coordinates local to the sub-function).
pub fn evaluate_component(x_sub: &[f64], comp: &Component) -> Result<f64> {
    check_dim(comp.dimension(), x_sub.len())?;
    let mut scratch = vec![0.0; x_sub.len()];
    Ok(component_value(x_sub, comp, &mut scratch))
}

fn component_value(x_sub: &[f64], comp: &Component, scratch: &mut [f64]) -> f64 {
    let d = x_sub.len();
    let mut radicand = 0.0;
    if d == 1 {
        let y = comp.rotation[(0, 0)] * (x_sub[0] - comp.center[0]);
        let t = irregularity_scalar(y, comp.tau, &comp.eta);
        radicand = comp.widths[0] * t * t;
    } else {
        // scratch = R (x - c), R stored column-major
        let r = comp.rotation.as_slice();
        scratch.fill(0.0);
        for j in 0..d {
            let diff = x_sub[j] - comp.center[j];
            if diff != 0.0 {
                let col = &r[j * d..(j + 1) * d];
                for (s, &rij) in scratch.iter_mut().zip(col) {
                    *s += rij * diff;
                }
            }
        }
        for (i, &y) in scratch.iter().enumerate() {
            let t = irregularity_scalar(y, comp.tau, &comp.eta);
            radicand += comp.widths[i] * t * t;
        }
    }
    comp.height - radicand.sqrt()
}

/// Max over the sub-function's components.
pub fn evaluate_subfunction(x_sub: &[f64], sf: &SubFunction) -> Result<f64> {
    check_dim(sf.dimension(), x_sub.len())?;
    let mut scratch = vec![0.0; x_sub.len()];
    Ok(subfunction_value(x_sub, sf, &mut scratch))
}

fn subfunction_value(x_sub: &[f64], sf: &SubFunction, scratch: &mut [f64]) -> f64 {
    sf.components
        .iter()
        .map(|c| component_value(x_sub, c, scratch))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Composed problem value `d⁻¹ Σ ω_i d_i f_i(x_i)`.
pub fn evaluate_problem(x: &[f64], prob: &ProblemInstance) -> Result<f64> {
    check_dim(prob.dimension, x.len())?;
    let mut local = Vec::new();
    let mut scratch = Vec::new();
    let mut sum = 0.0;
    for sf in &prob.sub_functions {
        sf.gather(x, &mut local);
        scratch.resize(local.len(), 0.0);
        let f = subfunction_value(&local, sf, &mut scratch);
        sum += sf.weight * sf.dimension() as f64 * f;
    }
    Ok(sum / prob.dimension as f64)
}

/// Tallest component height of a sub-function.
pub fn subfunction_optimum_value(sf: &SubFunction) -> f64 {
    sf.components
        .iter()
        .map(|c| c.height)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Global optimum value `d⁻¹ Σ ω_i d_i max_k h_k`.
pub fn problem_optimum_value(prob: &ProblemInstance) -> f64 {
    let sum: f64 = prob
        .sub_functions
        .iter()
        .map(|sf| sf.weight * sf.dimension() as f64 * subfunction_optimum_value(sf))
        .sum();
    sum / prob.dimension as f64
}

/// Number of promising regions, `Π m_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PromisingRegions {
    /// Exact product, or `u64::MAX` when saturated.
    pub count: u64,
    pub saturated: bool,
    pub log10: f64,
}

impl std::fmt::Display for PromisingRegions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.saturated {
            write!(f, "~1e{:.2} (exceeds u64)", self.log10)
        } else {
            write!(f, "{}", self.count)
        }
    }
}

pub fn promising_region_count(prob: &ProblemInstance) -> PromisingRegions {
    let mut count: u64 = 1;
    let mut saturated = false;
    let mut log10 = 0.0;
    for sf in &prob.sub_functions {
        let m = sf.components.len() as u64;
        log10 += (m as f64).log10();
        match count.checked_mul(m) {
            Some(c) if !saturated => count = c,
            _ => {
                saturated = true;
                count = u64::MAX;
            }
        }
    }
    PromisingRegions {
        count,
        saturated,
        log10,
    }
}
