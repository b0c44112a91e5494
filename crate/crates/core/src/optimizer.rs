//! Reference optimizers that drive a [`Session`] to exhaustion.
//!
//! * [`run_random_search`]: uniform sampling of the search box.
//! * [`run_mpso`]: multi-swarm PSO over the full decision vector.
//! * [`run_cc_mpso`]: cooperative coevolution; one multi-swarm PSO per
//!   variable group, candidates evaluated by splicing them into a shared
//!   context vector, groups served round-robin.
//!
//! `run_mpso` is `run_cc_mpso` with a single group holding every variable.
//!
//! Without change signalling the optimizers detect changes themselves by
//! re-evaluating the context vector once per round (one evaluation, charged
//! to the budget). On a detected change every swarm re-evaluates its personal
//! bests and re-seeds a random fraction of its particles.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{RunResult, Session};
use crate::landscape::{Interval, ProblemInstance};
use crate::rng::RandomSource;

/// Stream id used to derive optimizer randomness from a run seed.
pub const OPTIMIZER_STREAM: u64 = 0x6f70_7469_6d69_7a65;

/// Randomness for an optimizer run, independent of the landscape stream.
pub fn optimizer_rng(seed: u64) -> RandomSource {
    RandomSource::new(seed).derive(OPTIMIZER_STREAM)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SwarmParams {
    pub swarm_count: usize,
    pub population: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Defaults to `0.5 · range / swarm_count^(1/d)` per group.
    pub exclusion_radius: Option<f64>,
    pub reinit_fraction: f64,
    /// Caps the number of rounds; `None` runs until the budget is spent.
    pub max_iterations: Option<u64>,
}

impl Default for SwarmParams {
    fn default() -> Self {
        Self {
            swarm_count: 5,
            population: 5,
            inertia: 0.729,
            cognitive: 1.49445,
            social: 1.49445,
            exclusion_radius: None,
            reinit_fraction: 0.3,
            max_iterations: None,
        }
    }
}

impl SwarmParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &'static str, reason: &str| {
            Err(Error::InvalidParams {
                field,
                reason: reason.to_string(),
            })
        };
        if self.swarm_count == 0 {
            return bad("swarm_count", "need at least one swarm");
        }
        if self.population < 2 {
            return bad("population", "need at least two particles per swarm");
        }
        for (field, v) in [
            ("inertia", self.inertia),
            ("cognitive", self.cognitive),
            ("social", self.social),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(field, "must be finite and non-negative");
            }
        }
        if !(0.0..=1.0).contains(&self.reinit_fraction) {
            return bad("reinit_fraction", "must lie in [0, 1]");
        }
        if let Some(r) = self.exclusion_radius {
            if !(r >= 0.0) {
                return bad("exclusion_radius", "must be non-negative");
            }
        }
        if self.max_iterations == Some(0) {
            return bad("max_iterations", "zero iterations requested");
        }
        Ok(())
    }
}

/// How decision variables are split into groups for cooperative coevolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GroupingKind {
    /// The scenario's true sub-function structure.
    Oracle,
    /// One group holding every variable.
    Single,
    /// Every variable on its own.
    Separable,
}

pub fn grouping_for(problem: &ProblemInstance, kind: GroupingKind) -> Vec<Vec<usize>> {
    match kind {
        GroupingKind::Oracle => problem
            .sub_functions
            .iter()
            .map(|sf| sf.variable_indices.clone())
            .collect(),
        GroupingKind::Single => vec![(0..problem.dimension).collect()],
        GroupingKind::Separable => (0..problem.dimension).map(|i| vec![i]).collect(),
    }
}

pub fn validate_grouping(groups: &[Vec<usize>], dimension: usize) -> Result<()> {
    let fail = |reason: String| Err(Error::InvalidGrouping { dimension, reason });
    let mut seen = vec![false; dimension];
    for (g, group) in groups.iter().enumerate() {
        if group.is_empty() {
            return fail(format!("group {g} is empty"));
        }
        for &i in group {
            if i >= dimension {
                return fail(format!("index {i} out of range"));
            }
            if seen[i] {
                return fail(format!("index {i} appears twice"));
            }
            seen[i] = true;
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return fail(format!("index {missing} not covered"));
    }
    Ok(())
}

/// Copy of `context` with the `indices` coordinates replaced by `values`.
pub fn splice(context: &[f64], indices: &[usize], values: &[f64]) -> Vec<f64> {
    let mut x = context.to_vec();
    for (&i, &v) in indices.iter().zip(values) {
        x[i] = v;
    }
    x
}

fn uniform_point(rng: &mut RandomSource, d: usize, search: Interval) -> Vec<f64> {
    (0..d)
        .map(|_| rng.next_uniform(search.min, search.max).expect("valid search range"))
        .collect()
}

/// Uniform samples of the search box until the budget is spent.
pub fn run_random_search(session: &mut Session, rng: &mut RandomSource) -> Result<RunResult> {
    let start = Instant::now();
    session.set_optimizer("random");
    let d = session.dimension();
    let search = session.problem().bounds.search;
    while !session.is_finished() {
        let x = uniform_point(rng, d, search);
        session.evaluate(&x)?;
    }
    session.finish(start.elapsed())
}

/// Multi-swarm PSO over the whole decision vector.
pub fn run_mpso(session: &mut Session, params: &SwarmParams, rng: &mut RandomSource) -> Result<RunResult> {
    let all: Vec<usize> = (0..session.dimension()).collect();
    run_groups(session, &[all], params, rng, "mpso")
}

/// Cooperative-coevolutionary multi-swarm PSO over `grouping`.
pub fn run_cc_mpso(
    session: &mut Session,
    grouping: &[Vec<usize>],
    params: &SwarmParams,
    rng: &mut RandomSource,
) -> Result<RunResult> {
    run_groups(session, grouping, params, rng, "ccmpso")
}

/// Marker for "the budget ran out"; unwinds the optimizer loop.
struct Exhausted;

type Step<T = ()> = std::result::Result<T, Exhausted>;

/// Shared context vector and the evaluation gateway to the session.
struct Context<'s> {
    session: &'s mut Session,
    vector: Vec<f64>,
    fitness: f64,
}

impl Context<'_> {
    fn evaluate(&mut self, x: &[f64]) -> Step<f64> {
        if self.session.is_finished() {
            return Err(Exhausted);
        }
        // dimensions are fixed by construction
        let f = self.session.evaluate(x).map_err(|_| Exhausted)?;
        Ok(f)
    }

    /// Evaluates `values` spliced into the context on `indices`, adopting the
    /// result as the new context when it improves on it.
    fn evaluate_in_context(&mut self, indices: &[usize], values: &[f64]) -> Step<f64> {
        let candidate = splice(&self.vector, indices, values);
        let f = self.evaluate(&candidate)?;
        if f > self.fitness {
            self.vector = candidate;
            self.fitness = f;
        }
        Ok(f)
    }

    /// Re-evaluates the context itself; true when its fitness moved.
    fn probe(&mut self) -> Step<bool> {
        let x = self.vector.clone();
        let f = self.evaluate(&x)?;
        let changed = f != self.fitness;
        self.fitness = f;
        Ok(changed)
    }
}

#[derive(Debug, Clone)]
struct Particle {
    position: Vec<f64>,
    velocity: Vec<f64>,
    best: Vec<f64>,
    best_fitness: f64,
}

#[derive(Debug, Clone)]
struct Swarm {
    particles: Vec<Particle>,
    best: Vec<f64>,
    best_fitness: f64,
}

impl Swarm {
    fn refresh_best(&mut self) {
        self.best_fitness = f64::NEG_INFINITY;
        for p in &self.particles {
            if p.best_fitness > self.best_fitness {
                self.best_fitness = p.best_fitness;
                self.best.clone_from(&p.best);
            }
        }
    }
}

struct Group {
    indices: Vec<usize>,
    swarms: Vec<Swarm>,
    exclusion_radius: f64,
    /// Context fitness when this group last finished a turn.
    context_seen: f64,
}

struct Engine<'p> {
    params: &'p SwarmParams,
    search: Interval,
    max_speed: f64,
}

impl Engine<'_> {
    fn new_particle(&self, ctx: &mut Context<'_>, indices: &[usize], rng: &mut RandomSource) -> Step<Particle> {
        let position = uniform_point(rng, indices.len(), self.search);
        let f = ctx.evaluate_in_context(indices, &position)?;
        Ok(Particle {
            velocity: vec![0.0; indices.len()],
            best: position.clone(),
            position,
            best_fitness: f,
        })
    }

    fn new_swarm(&self, ctx: &mut Context<'_>, indices: &[usize], rng: &mut RandomSource) -> Step<Swarm> {
        let mut particles = Vec::with_capacity(self.params.population);
        for _ in 0..self.params.population {
            particles.push(self.new_particle(ctx, indices, rng)?);
        }
        let mut swarm = Swarm {
            particles,
            best: Vec::new(),
            best_fitness: f64::NEG_INFINITY,
        };
        swarm.refresh_best();
        Ok(swarm)
    }

    fn step_swarm(&self, ctx: &mut Context<'_>, indices: &[usize], swarm: &mut Swarm, rng: &mut RandomSource) -> Step {
        let p = self.params;
        for i in 0..swarm.particles.len() {
            {
                let particle = &mut swarm.particles[i];
                for j in 0..indices.len() {
                    let r1 = rng.next_unit();
                    let r2 = rng.next_unit();
                    let x = particle.position[j];
                    let mut v = p.inertia * particle.velocity[j]
                        + p.cognitive * r1 * (particle.best[j] - x)
                        + p.social * r2 * (swarm.best[j] - x);
                    v = v.clamp(-self.max_speed, self.max_speed);
                    let mut nx = x + v;
                    if nx < self.search.min {
                        nx = self.search.min;
                        v = 0.0;
                    } else if nx > self.search.max {
                        nx = self.search.max;
                        v = 0.0;
                    }
                    particle.position[j] = nx;
                    particle.velocity[j] = v;
                }
            }
            let f = ctx.evaluate_in_context(indices, &swarm.particles[i].position)?;
            let particle = &mut swarm.particles[i];
            if f > particle.best_fitness {
                particle.best_fitness = f;
                particle.best.clone_from(&particle.position);
            }
            if f > swarm.best_fitness {
                swarm.best_fitness = f;
                swarm.best.clone_from(&particle.position);
            }
        }
        Ok(())
    }

    /// Re-seeds the worse of any two swarms whose attractors are closer than
    /// the exclusion radius.
    fn exclusion(&self, ctx: &mut Context<'_>, group: &mut Group, rng: &mut RandomSource) -> Step {
        let n = group.swarms.len();
        let r2 = group.exclusion_radius * group.exclusion_radius;
        for a in 0..n {
            for b in (a + 1)..n {
                let dist2: f64 = group.swarms[a]
                    .best
                    .iter()
                    .zip(&group.swarms[b].best)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                if dist2 < r2 {
                    let worse = if group.swarms[a].best_fitness < group.swarms[b].best_fitness {
                        a
                    } else {
                        b
                    };
                    group.swarms[worse] = self.new_swarm(ctx, &group.indices, rng)?;
                }
            }
        }
        Ok(())
    }

    fn respond_to_change(&self, ctx: &mut Context<'_>, group: &mut Group, rng: &mut RandomSource) -> Step {
        let indices = group.indices.clone();
        for swarm in &mut group.swarms {
            for particle in &mut swarm.particles {
                if rng.next_unit() < self.params.reinit_fraction {
                    *particle = self.new_particle(ctx, &indices, rng)?;
                } else {
                    particle.best_fitness = ctx.evaluate_in_context(&indices, &particle.best)?;
                }
            }
            swarm.refresh_best();
        }
        Ok(())
    }

    /// Adds the context-fitness gain made by other groups to this group's
    /// stored fitness values, so comparisons stay on the current context.
    fn rebase(group: &mut Group, context_fitness: f64) {
        let shift = context_fitness - group.context_seen;
        if shift != 0.0 && shift.is_finite() {
            for swarm in &mut group.swarms {
                swarm.best_fitness += shift;
                for p in &mut swarm.particles {
                    p.best_fitness += shift;
                }
            }
        }
        group.context_seen = context_fitness;
    }
}

fn run_groups(
    session: &mut Session,
    grouping: &[Vec<usize>],
    params: &SwarmParams,
    rng: &mut RandomSource,
    name: &str,
) -> Result<RunResult> {
    params.validate()?;
    validate_grouping(grouping, session.dimension())?;
    let start = Instant::now();
    session.set_optimizer(name);
    let search = session.problem().bounds.search;
    let engine = Engine {
        params,
        search,
        max_speed: 0.5 * search.width(),
    };
    let d = session.dimension();
    let initial = uniform_point(rng, d, search);
    let mut ctx = Context {
        session,
        vector: initial,
        fitness: f64::NEG_INFINITY,
    };
    // Budget exhaustion unwinds to here; the session itself holds the result.
    let _ = drive(&engine, &mut ctx, grouping, rng);
    ctx.session.finish(start.elapsed())
}

fn drive(engine: &Engine<'_>, ctx: &mut Context<'_>, grouping: &[Vec<usize>], rng: &mut RandomSource) -> Step {
    let params = engine.params;
    ctx.probe()?;
    let mut groups = Vec::with_capacity(grouping.len());
    for indices in grouping {
        let radius = params.exclusion_radius.unwrap_or_else(|| {
            0.5 * engine.search.width() / (params.swarm_count as f64).powf(1.0 / indices.len() as f64)
        });
        let mut swarms = Vec::with_capacity(params.swarm_count);
        for _ in 0..params.swarm_count {
            swarms.push(engine.new_swarm(ctx, indices, rng)?);
        }
        groups.push(Group {
            indices: indices.clone(),
            swarms,
            exclusion_radius: radius,
            context_seen: ctx.fitness,
        });
    }

    let mut rounds = 0u64;
    loop {
        let changed = match ctx.session.take_change_signal() {
            Some(signalled) => {
                if signalled {
                    ctx.probe()?;
                }
                signalled
            }
            None => ctx.probe()?,
        };
        if changed {
            for group in &mut groups {
                engine.respond_to_change(ctx, group, rng)?;
            }
            for group in &mut groups {
                group.context_seen = ctx.fitness;
            }
        }
        for group in &mut groups {
            Engine::rebase(group, ctx.fitness);
            let indices = group.indices.clone();
            for swarm in &mut group.swarms {
                engine.step_swarm(ctx, &indices, swarm, rng)?;
            }
            engine.exclusion(ctx, group, rng)?;
            group.context_seen = ctx.fitness;
        }
        rounds += 1;
        if params.max_iterations.is_some_and(|m| rounds >= m) {
            return Ok(());
        }
    }
}
