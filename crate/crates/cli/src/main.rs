use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use milq_core::bench::{example_instance, run_scenarios, Scenario};
use milq_core::cutter::{resize_batch, CircuitSpec, DEFAULT_JOB_CAP, DEFAULT_VARIANTS_PER_CUT};
use milq_core::gantt::render_gantt;
use milq_core::milp::{build_extended, build_simple, serialize_lp, BuildError};
use milq_core::model::{validate_instance, validate_schedule, CircuitJob, Instance, Machine, TimeMode};
use milq_core::par::Execution;
use milq_core::solvers::{self, SolveError, SolverOptions, Strategy, DEFAULT_GAP, DEFAULT_ORACLE_LIMIT, DEFAULT_TIME_LIMIT, SOLVER_ENV};
use milq_core::timing::{build_instance, TimingConfig};

const EXIT_INPUT: u8 = 2;
const EXIT_NO_SOLVER: u8 = 3;
const EXIT_SOLVER: u8 = 4;

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl fmt::Display) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.to_string(),
        }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        let code = match e {
            SolveError::NoSolverConfigured => EXIT_NO_SOLVER,
            ref e if e.is_validation() => EXIT_INPUT,
            _ => EXIT_SOLVER,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<BuildError> for Failure {
    fn from(e: BuildError) -> Self {
        Failure::input(e)
    }
}

type CliResult = Result<(), Failure>;

#[derive(Parser)]
#[command(name = "milq", version, about = "Batch scheduler for quantum-circuit jobs on QPU clusters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cut circuits wider than every machine into fitting sub-jobs.
    Cut(CutArgs),
    /// Generate timing tables and build an instance file.
    Instance(InstanceArgs),
    /// Schedule an instance with one strategy.
    Schedule(ScheduleArgs),
    /// Run a benchmark scenario and write CSV and JSON reports.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Int,
    Real,
}

impl From<ModeArg> for TimeMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Int => TimeMode::Integer,
            ModeArg::Real => TimeMode::Real,
        }
    }
}

#[derive(Args)]
struct CutArgs {
    /// JSON array of `{id, width, depth}`.
    #[arg(long)]
    circuits: PathBuf,
    /// JSON array of `{id, capacity}`.
    #[arg(long)]
    machines: PathBuf,
    #[arg(long, default_value_t = DEFAULT_VARIANTS_PER_CUT)]
    variants: u32,
    #[arg(long, default_value_t = DEFAULT_JOB_CAP)]
    job_cap: usize,
    /// Jobs file to write.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct InstanceArgs {
    /// JSON array of jobs; required unless --example.
    #[arg(long, required_unless_present = "example")]
    jobs: Option<PathBuf>,
    #[arg(long, required_unless_present = "example")]
    machines: Option<PathBuf>,
    /// The nine-job reference example (circuits A and B on two 5-qubit machines).
    #[arg(long, conflicts_with_all = ["jobs", "machines"])]
    example: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "int")]
    mode: ModeArg,
    /// Timing parameters as JSON; seed and mode flags override its fields.
    #[arg(long)]
    timing: Option<PathBuf>,
    /// Sized from the baseline makespan when absent.
    #[arg(long)]
    t_max: Option<u32>,
    #[arg(long)]
    big_m: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    granularity: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = DEFAULT_GAP)]
    gap: f64,
    /// Seconds per solver run.
    #[arg(long, default_value_t = DEFAULT_TIME_LIMIT)]
    time_limit: f64,
    /// Command template with {lp} {solution} {gap} {time_limit} {start_args}.
    #[arg(long, env = SOLVER_ENV)]
    solver_cmd: Option<String>,
    #[arg(long, default_value_t = DEFAULT_ORACLE_LIMIT)]
    oracle_limit: usize,
    /// Do not pass the baseline schedule to the solver as a start.
    #[arg(long)]
    no_warm_start: bool,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            command: self.solver_cmd.clone(),
            gap: self.gap,
            time_limit: self.time_limit,
            warm_start: !self.no_warm_start,
            oracle_limit: self.oracle_limit,
        }
    }
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value = "baseline")]
    strategy: Strategy,
    #[command(flatten)]
    solver: SolverArgs,
    /// Write the MILP in LP format and exit without solving. Uses the simple
    /// model for --strategy simple and the extended model otherwise.
    #[arg(long)]
    emit_lp: Option<PathBuf>,
    /// Also write an SVG Gantt chart.
    #[arg(long)]
    gantt: Option<PathBuf>,
    #[arg(long, required_unless_present = "emit_lp")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Built-in scenario name (paper-two-qpu, paper-three-qpu) or a scenario JSON file.
    #[arg(long, required = true)]
    scenario: Vec<String>,
    /// Comma-separated strategies.
    #[arg(long, value_delimiter = ',', default_value = "baseline,greedy")]
    strategies: Vec<Strategy>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "int")]
    mode: ModeArg,
    /// Override the number of batches.
    #[arg(long)]
    batches: Option<usize>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Run batches one after another.
    #[arg(long)]
    sequential: bool,
    #[arg(long)]
    csv: PathBuf,
    #[arg(long)]
    json: Option<PathBuf>,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
fn write_atomic(path: &Path, contents: &[u8]) -> CliResult {
    let fail = |e: std::io::Error| Failure {
        code: EXIT_INPUT,
        message: format!("{}: {e}", path.display()),
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(contents).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult {
    let mut text = serde_json::to_string_pretty(value).map_err(Failure::input)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn cmd_cut(args: &CutArgs) -> CliResult {
    let circuits: Vec<CircuitSpec> = read_json(&args.circuits)?;
    let machines: Vec<Machine> = read_json(&args.machines)?;
    let (jobs, manifest) =
        resize_batch(&circuits, &machines, args.variants, args.job_cap).map_err(Failure::input)?;
    write_json(&args.out, &jobs)?;
    if let Some(path) = &args.manifest {
        write_json(path, &manifest)?;
    }
    eprintln!("{} circuits -> {} jobs", circuits.len(), jobs.len());
    Ok(())
}

fn cmd_instance(args: &InstanceArgs) -> CliResult {
    let mode = TimeMode::from(args.mode);
    let mut instance = if args.example {
        example_instance(args.seed, mode).map_err(Failure::input)?
    } else {
        let (Some(jobs), Some(machines)) = (&args.jobs, &args.machines) else {
            return Err(Failure::input("--jobs and --machines are required"));
        };
        let jobs: Vec<CircuitJob> = read_json(jobs)?;
        let machines: Vec<Machine> = read_json(machines)?;
        let base = match &args.timing {
            Some(path) => read_json(path)?,
            None => TimingConfig::default(),
        };
        let timing = TimingConfig {
            seed: args.seed,
            mode,
            ..base
        };
        let mut instance = build_instance(jobs, machines, &timing, 1.0, 1, args.granularity);
        milq_core::bench::apply_default_sizing(&mut instance)?;
        instance
    };
    if let Some(t) = args.t_max {
        instance.t_max = t;
    }
    if let Some(m) = args.big_m {
        instance.big_m = m;
    }
    let violations = validate_instance(&instance);
    if !violations.is_empty() {
        let text: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Failure::input(text.join("; ")));
    }
    write_json(&args.out, &instance)
}

fn cmd_schedule(args: &ScheduleArgs) -> CliResult {
    let instance: Instance = read_json(&args.instance)?;
    if let Some(path) = &args.emit_lp {
        let model = match args.strategy {
            Strategy::Simple => build_simple(&instance)?,
            _ => build_extended(&instance)?,
        };
        write_atomic(path, serialize_lp(&model).as_bytes())?;
        eprintln!(
            "{} model: {} variables, {} constraints",
            model.mode, model.stats.num_variables, model.stats.num_constraints
        );
        return Ok(());
    }
    let result = solvers::solve(&instance, args.strategy, &args.solver.options())?;
    let violations = validate_schedule(&result.schedule, &instance);
    if !violations.is_empty() {
        let text: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Failure {
            code: EXIT_SOLVER,
            message: format!("schedule failed validation: {}", text.join("; ")),
        });
    }
    if let Some(path) = &args.gantt {
        write_atomic(path, render_gantt(&result.schedule, &instance).as_bytes())?;
    }
    if let Some(path) = &args.out {
        write_json(path, &result.schedule)?;
    }
    match (result.solver_status, result.objective) {
        (Some(status), Some(obj)) => eprintln!(
            "{}: makespan {} ({status}, objective {obj}, gap {})",
            args.strategy, result.schedule.makespan, result.reported_gap.unwrap_or(0.0)
        ),
        _ => eprintln!("{}: makespan {}", args.strategy, result.schedule.makespan),
    }
    Ok(())
}

fn load_scenario(name: &str, seed: u64, mode: TimeMode) -> Result<Scenario, Failure> {
    if let Some(s) = Scenario::builtin(name, seed, mode) {
        return Ok(s);
    }
    let path = Path::new(name);
    if !path.exists() {
        return Err(Failure::input(format!(
            "unknown scenario `{name}`; use paper-two-qpu, paper-three-qpu or a JSON file"
        )));
    }
    read_json(path)
}

fn cmd_bench(args: &BenchArgs) -> CliResult {
    let mode = TimeMode::from(args.mode);
    let mut scenarios = Vec::new();
    for name in &args.scenario {
        let mut s = load_scenario(name, args.seed, mode)?;
        if let Some(b) = args.batches {
            s.batches = b;
        }
        if s.batch_size == 0 || s.machines.is_empty() {
            return Err(Failure::input(format!("scenario {}: empty batch or machine list", s.name)));
        }
        scenarios.push(s);
    }
    let options = args.solver.options();
    if args.strategies.iter().any(|s| s.needs_solver()) && solvers::resolve_command(&options).is_none() {
        return Err(SolveError::NoSolverConfigured.into());
    }
    let exec = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let report = run_scenarios(&scenarios, &args.strategies, &options, exec);
    write_atomic(&args.csv, report.to_csv().as_bytes())?;
    if let Some(path) = &args.json {
        let mut text = report.to_json();
        text.push('\n');
        write_atomic(path, text.as_bytes())?;
    }
    for s in &report.summaries {
        let parts: Vec<String> = s
            .mean_improvement
            .iter()
            .map(|(k, v)| format!("{k} {:+.1}%", 100.0 * v))
            .collect();
        eprintln!(
            "{}: {} batches; improvement vs baseline: {}; simple worse than baseline in {} batches",
            s.scenario,
            s.batches,
            if parts.is_empty() { "n/a".to_string() } else { parts.join(", ") },
            s.simple_worse_than_baseline
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Cut(a) => cmd_cut(a),
        Command::Instance(a) => cmd_instance(a),
        Command::Schedule(a) => cmd_schedule(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
