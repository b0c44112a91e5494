//! `gmpb` command line: `gen`, `run`, `grid`, `report`.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dynamics::advance_environment;
use crate::error::{Error, Result};
use crate::harness::{export_results, fmt_f64, load_results, Session, SessionOptions};
use crate::landscape::{problem_optimum_value, promising_region_count};
use crate::optimizer::{
    grouping_for, optimizer_rng, run_cc_mpso, run_mpso, run_random_search, GroupingKind, SwarmParams,
};
use crate::par::{evaluate_batch, lattice, map_collect};
use crate::scenario::{instantiate, load_config, save_config, Mode, ScenarioConfig, ScenarioId};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "gmpb", version, about = "Generalized moving peaks benchmark generator and runner")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a scenario and write its configuration
    Gen(GenArgs),
    /// Run an optimizer through every environment and write a results CSV
    Run(RunArgs),
    /// Sample a 2-D slice of the landscape
    Grid(GridArgs),
    /// Summarize result files
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Published scenario, f1..f15
    #[arg(long, value_parser = parse_published, conflicts_with = "config")]
    pub scenario: Option<ScenarioId>,
    /// Scenario configuration file (JSON)
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Default)]
    pub mode: Mode,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

fn parse_published(s: &str) -> std::result::Result<ScenarioId, String> {
    match s.parse::<ScenarioId>() {
        Ok(id @ ScenarioId::Published(_)) => Ok(id),
        Ok(ScenarioId::Custom) => Err("use --config for custom scenarios".into()),
        Err(e) => Err(e.to_string()),
    }
}

impl ScenarioArgs {
    /// Config from `--config` (its own seed and mode) or `--scenario`.
    fn resolve(&self) -> Result<ScenarioConfig> {
        match (&self.config, self.scenario) {
            (Some(path), _) => load_config(path),
            (None, Some(ScenarioId::Published(id))) => ScenarioConfig::published(id, self.mode, self.seed),
            _ => Err(Error::InvalidConfig {
                field: "--scenario".into(),
                reason: "one of --scenario or --config is required".into(),
            }),
        }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Destination file; JSON goes to stdout when omitted
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum OptimizerKind {
    Random,
    Mpso,
    Ccmpso,
}

impl OptimizerKind {
    fn label(self) -> &'static str {
        match self {
            OptimizerKind::Random => "random",
            OptimizerKind::Mpso => "mpso",
            OptimizerKind::Ccmpso => "ccmpso",
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, value_enum, default_value_t = OptimizerKind::Mpso)]
    pub optimizer: OptimizerKind,
    /// Variable grouping for ccmpso
    #[arg(long, value_enum, default_value_t = GroupingKind::Oracle)]
    pub grouping: GroupingKind,
    /// Tell the optimizer when the environment changes
    #[arg(long)]
    pub signal_changes: bool,
    /// Results CSV path
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Run seeds seed..seed+repeat as independent sessions
    #[arg(long, default_value_t = 1)]
    pub repeat: u64,
    /// Swarm parameters (JSON); flags below override it
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub swarms: Option<usize>,
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long)]
    pub inertia: Option<f64>,
    #[arg(long)]
    pub cognitive: Option<f64>,
    #[arg(long)]
    pub social: Option<f64>,
    #[arg(long)]
    pub iterations: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Plotted coordinates `p,q`
    #[arg(long, value_parser = parse_dims, default_value = "0,1")]
    pub dims: (usize, usize),
    #[arg(long, default_value_t = 101)]
    pub resolution: usize,
    /// Environment index to sample
    #[arg(long, default_value_t = 0)]
    pub env: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn parse_dims(s: &str) -> std::result::Result<(usize, usize), String> {
    let (p, q) = s.split_once(',').ok_or("expected p,q")?;
    let p = p.trim().parse().map_err(|e| format!("{e}"))?;
    let q = q.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((p, q))
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    /// Also write the summary as CSV
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Gen(a) => cmd_gen(&a),
        Command::Run(a) => cmd_run(&a),
        Command::Grid(a) => cmd_grid(&a),
        Command::Report(a) => cmd_report(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::UnknownScenario(_) | Error::InvalidParams { .. } | Error::InvalidGrouping { .. } => EXIT_USAGE,
                Error::InvalidConfig { ref field, .. } if field.starts_with("--") => EXIT_USAGE,
                _ => EXIT_RUNTIME,
            }
        }
    }
}

fn usage(field: &str, reason: impl Into<String>) -> Error {
    Error::InvalidConfig {
        field: field.into(),
        reason: reason.into(),
    }
}

pub fn cmd_gen(args: &GenArgs) -> Result<i32> {
    let cfg = args.scenario.resolve()?;
    let built = instantiate(&cfg)?;
    let regions = promising_region_count(&built.problem);
    let mut summary = String::new();
    let _ = writeln!(summary, "scenario={} mode={} seed={}", cfg.scenario_id, cfg.mode, cfg.seed);
    let _ = writeln!(summary, "d={}", cfg.dimension);
    let _ = writeln!(summary, "groups={:?} separable={}", cfg.groups, cfg.separable_count);
    let _ = writeln!(summary, "M={regions}");
    let _ = writeln!(summary, "change_period={} environments={}", cfg.change_period, cfg.environments);
    for note in &cfg.notes {
        let _ = writeln!(summary, "note: {note}");
    }
    match &args.output {
        Some(path) => {
            save_config(&cfg, path)?;
            print!("{summary}");
        }
        None => {
            eprint!("{summary}");
            println!("{}", serde_json::to_string_pretty(&cfg).expect("config serializes"));
        }
    }
    Ok(EXIT_OK)
}

fn swarm_params(args: &RunArgs) -> Result<SwarmParams> {
    let mut params = match &args.params {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text).map_err(|e| Error::Parse {
                path: path.clone(),
                message: e.to_string(),
            })?
        }
        None => SwarmParams::default(),
    };
    if let Some(v) = args.swarms {
        params.swarm_count = v;
    }
    if let Some(v) = args.population {
        params.population = v;
    }
    if let Some(v) = args.inertia {
        params.inertia = v;
    }
    if let Some(v) = args.cognitive {
        params.cognitive = v;
    }
    if let Some(v) = args.social {
        params.social = v;
    }
    if let Some(v) = args.iterations {
        params.max_iterations = Some(v);
    }
    params.validate()?;
    Ok(params)
}

/// Runs one optimizer on a fresh session built from `cfg`.
pub fn execute_run(
    cfg: &ScenarioConfig,
    optimizer: OptimizerKind,
    grouping: GroupingKind,
    params: &SwarmParams,
    options: SessionOptions,
) -> Result<Session> {
    let built = instantiate(cfg)?;
    let mut session = Session::from_built(built, options);
    let mut rng = optimizer_rng(cfg.seed);
    match optimizer {
        OptimizerKind::Random => run_random_search(&mut session, &mut rng)?,
        OptimizerKind::Mpso => run_mpso(&mut session, params, &mut rng)?,
        OptimizerKind::Ccmpso => {
            let groups = grouping_for(session.problem(), grouping);
            run_cc_mpso(&mut session, &groups, params, &mut rng)?
        }
    };
    if optimizer == OptimizerKind::Ccmpso {
        let label = format!("ccmpso({})", grouping_label(grouping));
        session.set_optimizer(label);
    }
    Ok(session)
}

fn grouping_label(g: GroupingKind) -> &'static str {
    match g {
        GroupingKind::Oracle => "oracle",
        GroupingKind::Single => "single",
        GroupingKind::Separable => "separable",
    }
}

fn with_seed_suffix(path: &Path, seed: u64) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    path.with_file_name(format!("{stem}_seed{seed}{ext}"))
}

pub fn cmd_run(args: &RunArgs) -> Result<i32> {
    let base = args.scenario.resolve()?;
    let params = swarm_params(args)?;
    if args.repeat == 0 {
        return Err(usage("--repeat", "must be at least 1"));
    }
    let options = SessionOptions {
        signal_changes: args.signal_changes,
    };
    let default_name = PathBuf::from(format!(
        "{}_{}_{}_seed{}.csv",
        base.scenario_id,
        base.mode,
        args.optimizer.label(),
        base.seed
    ));
    let output = args.output.clone().unwrap_or(default_name);

    let seeds: Vec<u64> = (0..args.repeat).map(|k| base.seed.wrapping_add(k)).collect();
    let outcomes = map_collect(&seeds, |&seed| -> Result<(u64, PathBuf, f64)> {
        let mut cfg = base.clone();
        cfg.seed = seed;
        let session = execute_run(&cfg, args.optimizer, args.grouping, &params, options)?;
        let path = if args.repeat == 1 {
            output.clone()
        } else {
            with_seed_suffix(&output, seed)
        };
        export_results(&session, &path)?;
        Ok((seed, path, session.e_bbc()?))
    });
    for outcome in outcomes {
        let (seed, path, e) = outcome?;
        if args.repeat == 1 {
            println!("E_BBC={}", fmt_f64(e));
        } else {
            println!("E_BBC={} seed={seed} file={}", fmt_f64(e), path.display());
        }
    }
    Ok(EXIT_OK)
}

pub fn cmd_grid(args: &GridArgs) -> Result<i32> {
    let cfg = args.scenario.resolve()?;
    let (p, q) = args.dims;
    if cfg.dimension < 2 {
        return Err(usage("--dims", "grid needs a problem with d >= 2"));
    }
    if p == q || p >= cfg.dimension || q >= cfg.dimension {
        return Err(usage("--dims", format!("need distinct indices below d={}", cfg.dimension)));
    }
    if args.resolution < 2 {
        return Err(usage("--resolution", "must be at least 2"));
    }
    let mut built = instantiate(&cfg)?;
    for _ in 0..args.env {
        advance_environment(&mut built.problem, cfg.rotation_enabled, &mut built.rng);
    }
    let problem = &built.problem;
    let base = problem.optimum_position();
    let search = problem.bounds.search;
    let points = lattice(&base, p, q, search.min, search.max, args.resolution);
    let values = evaluate_batch(&points, problem)?;

    let mut text = String::new();
    let _ = writeln!(text, "# gmpb {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(text, "# seed={}", cfg.seed);
    let _ = writeln!(text, "# scenario={}", cfg.scenario_id);
    let _ = writeln!(text, "# mode={}", cfg.mode);
    let _ = writeln!(text, "# environment={}", args.env);
    let _ = writeln!(text, "# dims={p},{q} resolution={}", args.resolution);
    let _ = writeln!(text, "# fixed_coordinates=tallest component centers");
    let _ = writeln!(text, "# optimum_fitness={}", fmt_f64(problem_optimum_value(problem)));
    let _ = writeln!(text, "x_{p},x_{q},F");
    for (x, f) in points.iter().zip(&values) {
        let _ = writeln!(text, "{},{},{}", fmt_f64(x[p]), fmt_f64(x[q]), fmt_f64(*f));
    }
    match &args.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(EXIT_OK)
}

/// Sample mean and standard deviation (n - 1 denominator; 0 for one value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn cmd_report(args: &ReportArgs) -> Result<i32> {
    let mut rows = Vec::new();
    let mut failures = 0;
    for path in &args.files {
        match load_results(path).and_then(|r| r.e_bbc().map(|e| (r, e))) {
            Ok((file, e)) => rows.push((path.clone(), file, e)),
            Err(err) => {
                failures += 1;
                eprintln!("skipped {}: {err}", path.display());
            }
        }
    }
    if rows.is_empty() {
        eprintln!("no parseable result files");
        return Ok(EXIT_RUNTIME);
    }
    let meta = |f: &crate::harness::ResultsFile, k: &str| f.metadata.get(k).cloned().unwrap_or_else(|| "-".into());
    let width = rows
        .iter()
        .map(|(p, _, _)| p.display().to_string().len())
        .max()
        .unwrap_or(4)
        .max(4);
    println!(
        "{:<width$}  {:<8}  {:<11}  {:<18}  {:>6}  {:>24}",
        "file", "scenario", "mode", "optimizer", "seed", "E_BBC"
    );
    let mut csv = String::from("file,scenario,mode,optimizer,seed,e_bbc\n");
    for (path, file, e) in &rows {
        println!(
            "{:<width$}  {:<8}  {:<11}  {:<18}  {:>6}  {:>24}",
            path.display(),
            meta(file, "scenario"),
            meta(file, "mode"),
            meta(file, "optimizer"),
            meta(file, "seed"),
            fmt_f64(*e)
        );
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            path.display(),
            meta(file, "scenario"),
            meta(file, "mode"),
            meta(file, "optimizer"),
            meta(file, "seed"),
            fmt_f64(*e)
        );
    }
    let values: Vec<f64> = rows.iter().map(|(_, _, e)| *e).collect();
    let (mean, std) = mean_std(&values);
    println!("mean E_BBC = {} ± {} (n={})", fmt_f64(mean), fmt_f64(std), values.len());
    if failures > 0 {
        println!("skipped {failures} file(s)");
    }
    if let Some(path) = &args.csv {
        let _ = writeln!(csv, "# mean={}", fmt_f64(mean));
        let _ = writeln!(csv, "# std={}", fmt_f64(std));
        std::fs::write(path, csv)?;
    }
    Ok(EXIT_OK)
}
