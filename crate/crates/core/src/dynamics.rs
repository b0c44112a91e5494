//! Environment transitions.
//!
//! Each component moves by a random-direction shift of fixed length, and its
//! height, widths, angle, irregularity parameters get additive Gaussian
//! perturbations scaled by the owning sub-function's severities. Every
//! updated scalar is mirrored back into its range by [`reflect`]. The rotation
//! is then advanced with the new angle.
//!
//! Draw order per component: center direction (`d_i` Gaussians), height,
//! widths in coordinate order, angle, `η_1..η_4`, `τ`, then the plane-order
//! permutation of the rotation update. A parameter whose severity is exactly
//! zero draws nothing.

use crate::landscape::{Component, Interval, ParameterBounds, ProblemInstance, SeverityBundle};
use crate::rng::RandomSource;
use crate::rotation::rotate_update;

/// Mirrors `value + delta` into `[lo, hi]`, repeating until it lands inside.
pub fn reflect(value: f64, delta: f64, lo: f64, hi: f64) -> f64 {
    debug_assert!(lo <= hi);
    let mut a = value + delta;
    if !a.is_finite() {
        return value.clamp(lo, hi);
    }
    if lo == hi {
        return lo;
    }
    loop {
        if a < lo {
            a = 2.0 * lo - a;
        } else if a > hi {
            a = 2.0 * hi - a;
        } else {
            return a;
        }
    }
}

fn reflect_in(value: f64, delta: f64, range: Interval) -> f64 {
    reflect(value, delta, range.min, range.max)
}

/// Moves `center` by `severity` along a uniformly random direction, reflecting
/// each coordinate into `bounds`.
pub fn shift_center(
    center: &[f64],
    severity: f64,
    bounds: Interval,
    rng: &mut RandomSource,
) -> Vec<f64> {
    if severity == 0.0 {
        return center.to_vec();
    }
    let direction = random_direction(center.len(), rng);
    center
        .iter()
        .zip(&direction)
        .map(|(&c, &u)| reflect_in(c, severity * u, bounds))
        .collect()
}

/// Unit vector `r / ‖r‖` from `d` Gaussian draws, redrawn if `‖r‖ = 0`.
pub fn random_direction(d: usize, rng: &mut RandomSource) -> Vec<f64> {
    loop {
        let r: Vec<f64> = (0..d).map(|_| rng.next_gaussian()).collect();
        let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            return r.into_iter().map(|v| v / norm).collect();
        }
    }
}

fn perturb(value: f64, severity: f64, range: Interval, rng: &mut RandomSource) -> f64 {
    if severity == 0.0 {
        return value;
    }
    reflect_in(value, severity * rng.next_gaussian(), range)
}

/// One environment step for a single component.
pub fn advance_component(
    comp: &Component,
    sev: &SeverityBundle,
    bounds: &ParameterBounds,
    rotation_enabled: bool,
    rng: &mut RandomSource,
) -> Component {
    let center = shift_center(&comp.center, sev.shift, bounds.search, rng);
    let height = perturb(comp.height, sev.height, bounds.height, rng);
    let widths = comp
        .widths
        .iter()
        .map(|&w| perturb(w, sev.width, bounds.width, rng))
        .collect();
    let angle = perturb(comp.angle, sev.angle, bounds.angle, rng);
    let mut eta = comp.eta;
    for e in eta.iter_mut() {
        *e = perturb(*e, sev.eta, bounds.eta, rng);
    }
    let tau = perturb(comp.tau, sev.tau, bounds.tau, rng);
    let rotation = if rotation_enabled && comp.dimension() > 1 {
        rotate_update(&comp.rotation, angle, rng)
    } else {
        comp.rotation.clone()
    };
    Component {
        center,
        height,
        widths,
        angle,
        rotation,
        tau,
        eta,
    }
}

/// Advances every component (sub-functions, then components, in index order)
/// and bumps the environment index.
pub fn advance_environment(prob: &mut ProblemInstance, rotation_enabled: bool, rng: &mut RandomSource) {
    let bounds = prob.bounds;
    for sf in &mut prob.sub_functions {
        let sev = sf.severities;
        for comp in &mut sf.components {
            *comp = advance_component(comp, &sev, &bounds, rotation_enabled, rng);
        }
    }
    prob.environment_index += 1;
}
