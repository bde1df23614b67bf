//! `bmetric`: validate, evaluate, simulate, sweep and rank XML behaviour
//! scripts from the command line.
//!
//! Exit codes are a stable contract: 0 success, 1 the script failed to parse
//! or validate, 2 usage error, 3 evaluation error (unknown task, unbound
//! variable, incomplete scenario, unreadable file).

mod render;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use behaviour_metric::metric::{DerivedScores, Evaluator, TaskEvaluation};
use behaviour_metric::model::{validate_spec, ProblemSpec};
use behaviour_metric::sensitivity::{rank_critical_variables, sweep, SweepPlan, SweepTarget};
use behaviour_metric::simulation::Scenario;
use behaviour_metric::xml::parse_script;
use behaviour_metric::EvaluationContext;

use render::OutputOptions;

#[derive(Parser)]
#[command(
    name = "bmetric",
    version,
    about = "Score behaviour scripts: how likely is the modelled agent team to succeed?"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a script for parse errors and broken invariants
    Validate {
        script: PathBuf,
        #[command(flatten)]
        output: OutputOptions,
    },
    /// Compute compulsory/lower/upper bounds and the success likelihood
    Evaluate {
        script: PathBuf,
        /// Evaluate a single task instead of all of them
        #[arg(long)]
        task: Option<String>,
        /// Override the script's problem complexity
        #[arg(long)]
        pc: Option<f64>,
        /// Bind an expression variable, e.g. --var k=5 (repeatable)
        #[arg(long = "var", value_name = "NAME=VALUE")]
        vars: Vec<String>,
        /// Evaluate every requirement with a single agent
        #[arg(long)]
        solo: bool,
        #[command(flatten)]
        output: OutputOptions,
    },
    /// Play a scenario through a task's decision points
    Simulate {
        script: PathBuf,
        /// Scenario file selecting the fired alternative per decision point
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        task: Option<String>,
        #[arg(long = "var", value_name = "NAME=VALUE")]
        vars: Vec<String>,
        #[command(flatten)]
        output: OutputOptions,
    },
    /// Re-evaluate a task while stepping chosen attributes
    Sweep {
        script: PathBuf,
        #[arg(long)]
        task: Option<String>,
        /// Attribute to step, as `behaviour type/attribute` (repeatable)
        #[arg(long = "target", value_name = "BEHAVIOUR/ATTRIBUTE")]
        targets: Vec<String>,
        /// Signed increment applied per iteration
        #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
        step: f64,
        /// Number of increments after the base row
        #[arg(long, default_value_t = 10)]
        iterations: u32,
        /// Read targets/step/iterations from a plan file instead of flags
        #[arg(long, conflicts_with_all = ["targets", "step", "iterations"])]
        plan: Option<PathBuf>,
        #[arg(long)]
        pc: Option<f64>,
        #[arg(long = "var", value_name = "NAME=VALUE")]
        vars: Vec<String>,
        #[command(flatten)]
        output: OutputOptions,
    },
    /// Rank variables by how much a probe step moves the task scores
    Rank {
        script: PathBuf,
        #[arg(long)]
        task: Option<String>,
        /// Positive step applied to each variable in turn
        #[arg(long, default_value_t = 0.05)]
        probe_step: f64,
        #[arg(long)]
        pc: Option<f64>,
        #[arg(long = "var", value_name = "NAME=VALUE")]
        vars: Vec<String>,
        #[command(flatten)]
        output: OutputOptions,
    },
}

/// Failures sorted into the exit-code contract.
enum CliError {
    /// Exit 1: the script itself is bad.
    Script(String),
    /// Exit 2: the invocation is bad.
    Usage(String),
    /// Exit 3: evaluation could not complete.
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Script(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Script(m) | CliError::Usage(m) | CliError::Runtime(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {}", error.message());
            ExitCode::from(error.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { script, output } => cmd_validate(&script, &output),
        Command::Evaluate {
            script,
            task,
            pc,
            vars,
            solo,
            output,
        } => cmd_evaluate(&script, task.as_deref(), pc, &vars, solo, &output),
        Command::Simulate {
            script,
            scenario,
            task,
            vars,
            output,
        } => cmd_simulate(&script, &scenario, task.as_deref(), &vars, &output),
        Command::Sweep {
            script,
            task,
            targets,
            step,
            iterations,
            plan,
            pc,
            vars,
            output,
        } => cmd_sweep(
            &script,
            task.as_deref(),
            &targets,
            step,
            iterations,
            plan.as_deref(),
            pc,
            &vars,
            &output,
        ),
        Command::Rank {
            script,
            task,
            probe_step,
            pc,
            vars,
            output,
        } => cmd_rank(&script, task.as_deref(), probe_step, pc, &vars, &output),
    }
}

// ---------------------------------------------------------------------------
// shared plumbing
// ---------------------------------------------------------------------------

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))
}

/// Parse the script, print parse warnings to stderr, and return the spec.
fn load_script(path: &Path) -> Result<ProblemSpec, CliError> {
    let text = read_file(path)?;
    let parsed = parse_script(&text).map_err(|e| CliError::Script(e.to_string()))?;
    for warning in &parsed.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(parsed.spec)
}

/// Load, apply overrides, and reject scripts with validation errors.
fn load_for_evaluation(path: &Path, pc: Option<f64>, solo: bool) -> Result<ProblemSpec, CliError> {
    let mut spec = load_script(path)?;
    if let Some(pc) = pc {
        if !(pc > 0.0 && pc <= 1.0) {
            return Err(CliError::Usage(format!(
                "--pc must be in (0, 1], found {pc}"
            )));
        }
        spec.problem_complexity = pc;
    }
    if solo {
        for task in &mut spec.tasks {
            for requirement in &mut task.requirements {
                requirement.entity_number = 1;
            }
        }
    }
    let report = validate_spec(&spec);
    for warning in report.warnings() {
        eprintln!("warning: {warning}");
    }
    if report.has_errors() {
        for error in report.errors() {
            eprintln!("{error}");
        }
        return Err(CliError::Script(format!(
            "{} validation error(s) in {}",
            report.errors().count(),
            path.display()
        )));
    }
    Ok(spec)
}

fn parse_vars(vars: &[String]) -> Result<EvaluationContext, CliError> {
    let mut ctx = EvaluationContext::new();
    for var in vars {
        let (name, value) = var
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--var expects NAME=VALUE, found `{var}`")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("--var {name}: `{value}` is not a number")))?;
        ctx.bind(name.trim(), value);
    }
    Ok(ctx)
}

/// Resolve --task: the explicit name, or the script's only task.
fn pick_task<'a>(spec: &'a ProblemSpec, requested: Option<&'a str>) -> Result<&'a str, CliError> {
    match requested {
        Some(name) => Ok(name),
        None => match spec.tasks.as_slice() {
            [only] => Ok(&only.name),
            [] => Err(CliError::Script("script defines no tasks".to_string())),
            tasks => Err(CliError::Usage(format!(
                "script defines {} tasks; pass --task ({})",
                tasks.len(),
                tasks
                    .iter()
                    .map(|t| t.name.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            ))),
        },
    }
}

fn runtime(error: behaviour_metric::EvaluationError) -> CliError {
    CliError::Runtime(error.to_string())
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

fn cmd_validate(path: &Path, output: &OutputOptions) -> Result<(), CliError> {
    let text = read_file(path)?;
    let parsed = parse_script(&text).map_err(|e| CliError::Script(e.to_string()))?;
    let report = validate_spec(&parsed.spec);
    render::validation(path, &parsed.warnings, &report, output);
    if report.has_errors() {
        Err(CliError::Script(format!(
            "{} validation error(s) in {}",
            report.errors().count(),
            path.display()
        )))
    } else {
        Ok(())
    }
}

fn cmd_evaluate(
    path: &Path,
    task: Option<&str>,
    pc: Option<f64>,
    vars: &[String],
    solo: bool,
    output: &OutputOptions,
) -> Result<(), CliError> {
    let ctx = parse_vars(vars)?;
    let spec = load_for_evaluation(path, pc, solo)?;
    let evaluator = Evaluator::new(&spec).map_err(runtime)?;

    let tasks: Vec<TaskEvaluation> = match task {
        Some(name) => vec![evaluator.evaluate_task(name, &ctx).map_err(runtime)?],
        None => spec
            .tasks
            .iter()
            .map(|t| evaluator.evaluate_task(&t.name, &ctx))
            .collect::<Result<_, _>>()
            .map_err(runtime)?,
    };
    let mut behaviours: Vec<(String, DerivedScores)> = Vec::with_capacity(spec.behaviours.len());
    for behaviour in &spec.behaviours {
        let scores = evaluator
            .derived_scores(&behaviour.type_name, &ctx, true)
            .map_err(runtime)?;
        behaviours.push((behaviour.type_name.clone(), scores));
    }
    render::evaluation(path, spec.problem_complexity, &tasks, &behaviours, output);
    Ok(())
}

fn cmd_simulate(
    path: &Path,
    scenario_path: &Path,
    task: Option<&str>,
    vars: &[String],
    output: &OutputOptions,
) -> Result<(), CliError> {
    let ctx = parse_vars(vars)?;
    let spec = load_for_evaluation(path, None, false)?;
    let scenario_text = read_file(scenario_path)?;
    let mut scenario =
        Scenario::parse(&scenario_text).map_err(|e| CliError::Runtime(e.to_string()))?;
    if scenario.name.is_empty() {
        scenario.name = scenario_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
    }
    let evaluator = Evaluator::new(&spec).map_err(runtime)?;
    let task = pick_task(&spec, task)?;
    let report = evaluator
        .run_scenario(task, &scenario, &ctx)
        .map_err(runtime)?;
    render::scenario(&report, output);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    path: &Path,
    task: Option<&str>,
    targets: &[String],
    step: f64,
    iterations: u32,
    plan_path: Option<&Path>,
    pc: Option<f64>,
    vars: &[String],
    output: &OutputOptions,
) -> Result<(), CliError> {
    let ctx = parse_vars(vars)?;
    let spec = load_for_evaluation(path, pc, false)?;
    let plan = match plan_path {
        Some(plan_path) => {
            let text = read_file(plan_path)?;
            SweepPlan::parse(&text).map_err(|e| CliError::Runtime(e.to_string()))?
        }
        None => {
            if targets.is_empty() {
                return Err(CliError::Usage(
                    "pass at least one --target or a --plan file".to_string(),
                ));
            }
            SweepPlan {
                targets: targets
                    .iter()
                    .map(|t| SweepTarget::parse(t))
                    .collect::<Result<_, _>>()
                    .map_err(|e| CliError::Usage(e.to_string()))?,
                step,
                iterations,
            }
        }
    };
    let task = pick_task(&spec, task)?;
    let table = sweep(&spec, task, &plan, &ctx).map_err(runtime)?;
    render::sweep_table(&table, output);
    Ok(())
}

fn cmd_rank(
    path: &Path,
    task: Option<&str>,
    probe_step: f64,
    pc: Option<f64>,
    vars: &[String],
    output: &OutputOptions,
) -> Result<(), CliError> {
    let ctx = parse_vars(vars)?;
    let spec = load_for_evaluation(path, pc, false)?;
    let task = pick_task(&spec, task)?;
    let impacts = rank_critical_variables(&spec, task, probe_step, &ctx).map_err(runtime)?;
    render::ranking(task, probe_step, &impacts, output);
    Ok(())
}
