//! Budgeted evaluation sessions and the best-before-change error.
//!
//! A [`Session`] owns the problem and the stream that drives its dynamics.
//! Every `change_period` evaluations the current environment is sealed with
//! the best fitness seen in it, and the landscape advances. The evaluation
//! that lands on a multiple of the change period still belongs to the old
//! environment.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::time::Duration;

use crate::dynamics::advance_environment;
use crate::error::{Error, Result};
use crate::landscape::{evaluate_problem, problem_optimum_value, ProblemInstance};
use crate::rng::RandomSource;
use crate::scenario::{BuiltScenario, ScenarioConfig};

pub const RESULTS_HEADER: &str = "environment,best_fitness,optimum_fitness,error,evaluations";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentRecord {
    pub environment: usize,
    pub best_fitness: f64,
    pub optimum_fitness: f64,
    pub error: f64,
    pub evaluations: u64,
    /// Queries outside the search box (evaluated as-is).
    pub out_of_bounds: u64,
}

impl EnvironmentRecord {
    fn open(environment: usize, optimum_fitness: f64) -> Self {
        Self {
            environment,
            best_fitness: f64::NEG_INFINITY,
            optimum_fitness,
            error: f64::INFINITY,
            evaluations: 0,
            out_of_bounds: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SessionOptions {
    /// Expose environment changes to the optimizer through
    /// [`Session::take_change_signal`].
    pub signal_changes: bool,
}

#[derive(Debug, Clone)]
pub struct Session {
    problem: ProblemInstance,
    config: ScenarioConfig,
    rng: RandomSource,
    options: SessionOptions,
    evaluations_used: u64,
    sealed: Vec<EnvironmentRecord>,
    current: EnvironmentRecord,
    finished: bool,
    change_pending: bool,
    optimizer: Option<String>,
}

impl Session {
    pub fn new(problem: ProblemInstance, config: ScenarioConfig, rng: RandomSource, options: SessionOptions) -> Self {
        let optimum = problem_optimum_value(&problem);
        let current = EnvironmentRecord::open(problem.environment_index, optimum);
        Self {
            problem,
            config,
            rng,
            options,
            evaluations_used: 0,
            sealed: Vec::new(),
            current,
            finished: false,
            change_pending: false,
            optimizer: None,
        }
    }

    pub fn from_built(built: BuiltScenario, options: SessionOptions) -> Self {
        Self::new(built.problem, built.config, built.rng, options)
    }

    pub fn problem(&self) -> &ProblemInstance {
        &self.problem
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn options(&self) -> SessionOptions {
        self.options
    }

    pub fn dimension(&self) -> usize {
        self.problem.dimension
    }

    pub fn change_period(&self) -> u64 {
        self.config.change_period
    }

    pub fn environments(&self) -> usize {
        self.config.environments
    }

    pub fn evaluations_used(&self) -> u64 {
        self.evaluations_used
    }

    pub fn remaining_budget(&self) -> u64 {
        self.config.total_budget() - self.evaluations_used
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    /// Optimum value of the environment currently being evaluated.
    pub fn current_optimum(&self) -> f64 {
        self.current.optimum_fitness
    }

    pub fn records(&self) -> &[EnvironmentRecord] {
        &self.sealed
    }

    pub fn set_optimizer(&mut self, name: impl Into<String>) {
        self.optimizer = Some(name.into());
    }

    pub fn optimizer(&self) -> Option<&str> {
        self.optimizer.as_deref()
    }

    /// `Some(true)` once after each environment change when change signalling
    /// is enabled; `None` when it is disabled.
    pub fn take_change_signal(&mut self) -> Option<bool> {
        if !self.options.signal_changes {
            return None;
        }
        Some(std::mem::take(&mut self.change_pending))
    }

    /// Evaluates `x` in the current environment and advances the budget.
    pub fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        if self.finished {
            return Err(Error::BudgetExhausted {
                used: self.evaluations_used,
            });
        }
        let fitness = evaluate_problem(x, &self.problem)?;
        if !self.problem.in_search_bounds(x) {
            self.current.out_of_bounds += 1;
        }
        if fitness > self.current.best_fitness {
            self.current.best_fitness = fitness;
        }
        self.current.evaluations += 1;
        self.evaluations_used += 1;
        if self.evaluations_used.is_multiple_of(self.config.change_period) {
            self.seal();
        }
        Ok(fitness)
    }

    fn seal(&mut self) {
        let mut record = self.current;
        record.error = record.optimum_fitness - record.best_fitness;
        self.sealed.push(record);
        if self.sealed.len() >= self.config.environments {
            self.finished = true;
            return;
        }
        advance_environment(&mut self.problem, self.config.rotation_enabled, &mut self.rng);
        self.current = EnvironmentRecord::open(self.problem.environment_index, problem_optimum_value(&self.problem));
        self.change_pending = true;
    }

    /// Mean error over the sealed environments.
    pub fn e_bbc(&self) -> Result<f64> {
        e_bbc_of(&self.sealed)
    }

    pub fn finish(&self, wall_time: Duration) -> Result<RunResult> {
        Ok(RunResult {
            e_bbc: self.e_bbc()?,
            records: self.sealed.clone(),
            seed: self.config.seed,
            scenario: self.config.scenario_id.to_string(),
            mode: self.config.mode.to_string(),
            optimizer: self.optimizer.clone().unwrap_or_default(),
            wall_time,
        })
    }
}

pub fn create_session(problem: ProblemInstance, config: ScenarioConfig, rng: RandomSource) -> Session {
    Session::new(problem, config, rng, SessionOptions::default())
}

pub fn e_bbc_of(records: &[EnvironmentRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::NoSealedEnvironments);
    }
    Ok(records.iter().map(|r| r.error).sum::<f64>() / records.len() as f64)
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub e_bbc: f64,
    pub records: Vec<EnvironmentRecord>,
    pub seed: u64,
    pub scenario: String,
    pub mode: String,
    pub optimizer: String,
    pub wall_time: Duration,
}

/// 17 significant digits; parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes the results CSV: `#` metadata lines, the header row, one row per
/// sealed environment, then `#` footer lines.
pub fn write_results<W: Write>(session: &Session, out: &mut W) -> Result<()> {
    let cfg = session.config();
    let mut text = String::new();
    let _ = writeln!(text, "# gmpb {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(text, "# seed={}", cfg.seed);
    let _ = writeln!(text, "# scenario={}", cfg.scenario_id);
    let _ = writeln!(text, "# mode={}", cfg.mode);
    let _ = writeln!(text, "# optimizer={}", session.optimizer().unwrap_or("none"));
    let _ = writeln!(text, "# dimension={}", cfg.dimension);
    let _ = writeln!(text, "# change_period={}", cfg.change_period);
    let _ = writeln!(text, "# environments={}", cfg.environments);
    let _ = writeln!(text, "# signal_changes={}", session.options().signal_changes);
    for note in &cfg.notes {
        let _ = writeln!(text, "# note={note}");
    }
    text.push_str(RESULTS_HEADER);
    text.push('\n');
    for r in session.records() {
        let _ = writeln!(
            text,
            "{},{},{},{},{}",
            r.environment,
            fmt_f64(r.best_fitness),
            fmt_f64(r.optimum_fitness),
            fmt_f64(r.error),
            r.evaluations
        );
    }
    let oob: u64 = session.records().iter().map(|r| r.out_of_bounds).sum();
    let _ = writeln!(text, "# seed={}", cfg.seed);
    let _ = writeln!(text, "# scenario={}", cfg.scenario_id);
    let _ = writeln!(text, "# mode={}", cfg.mode);
    let _ = writeln!(text, "# out_of_bounds_queries={oob}");
    match session.e_bbc() {
        Ok(e) => {
            let _ = writeln!(text, "# e_bbc={}", fmt_f64(e));
        }
        Err(e) => {
            let _ = writeln!(text, "# error={e}");
        }
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

pub fn export_results(session: &Session, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_results(session, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

/// A parsed results file.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsFile {
    /// Metadata keys; footer values override header values of the same key.
    pub metadata: BTreeMap<String, String>,
    pub records: Vec<EnvironmentRecord>,
}

impl ResultsFile {
    pub fn e_bbc(&self) -> Result<f64> {
        e_bbc_of(&self.records)
    }
}

pub fn parse_results(text: &str, origin: &Path) -> Result<ResultsFile> {
    let err = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        message: format!("line {line}: {msg}"),
    };
    let mut metadata = BTreeMap::new();
    let mut records = Vec::new();
    let mut saw_header = false;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            if let Some((k, v)) = meta.trim().split_once('=') {
                metadata.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        if !saw_header {
            if line != RESULTS_HEADER {
                return Err(err(lineno, format!("expected header `{RESULTS_HEADER}`")));
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(err(lineno, format!("expected 5 fields, found {}", fields.len())));
        }
        let f = |idx: usize| -> Result<f64> {
            fields[idx]
                .parse::<f64>()
                .map_err(|e| err(lineno, format!("field {idx}: {e}")))
        };
        records.push(EnvironmentRecord {
            environment: fields[0]
                .parse()
                .map_err(|e| err(lineno, format!("environment: {e}")))?,
            best_fitness: f(1)?,
            optimum_fitness: f(2)?,
            error: f(3)?,
            evaluations: fields[4]
                .parse()
                .map_err(|e| err(lineno, format!("evaluations: {e}")))?,
            out_of_bounds: 0,
        });
    }
    if !saw_header {
        return Err(err(0, "missing header row".into()));
    }
    Ok(ResultsFile { metadata, records })
}

pub fn load_results(path: &Path) -> Result<ResultsFile> {
    let text = std::fs::read_to_string(path)?;
    parse_results(&text, path)
}
