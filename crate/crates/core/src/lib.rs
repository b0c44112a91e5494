//! Generalized moving peaks benchmark (GMPB) for large-scale dynamic
//! optimization.
//!
//! The crate builds problem instances from composed irregular peak
//! landscapes ([`landscape`]), evolves them between environments
//! ([`dynamics`], [`rotation`]), generates the fifteen published scenarios
//! ([`scenario`]), runs budgeted evaluation sessions that score optimizers by
//! their best-before-change error ([`harness`]), and ships reference
//! optimizers to drive them ([`optimizer`]).
//!
//! Everything random flows from one seeded [`rng::RandomSource`], so a seed
//! and a scenario reproduce a run exactly.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod landscape;
pub mod optimizer;
pub mod par;
pub mod rng;
pub mod rotation;
pub mod scenario;

pub use error::{Error, Result};
pub use harness::{RunResult, Session, SessionOptions};
pub use landscape::{evaluate_problem, problem_optimum_value, Component, ProblemInstance, SubFunction};
pub use rng::{create_rng, RandomSource};
pub use scenario::{build_scenario, instantiate, Mode, ScenarioConfig};
