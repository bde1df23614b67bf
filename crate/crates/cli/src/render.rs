//! Output documents in table, JSON and CSV form.
//!
//! Displayed numbers are rounded half-up to a configurable number of decimal
//! places (three by default). JSON and CSV documents always carry the
//! full-precision value next to the rounded display form, and contain no
//! timestamps, so runs are machine-diffable.

use std::fmt::Write as _;
use std::path::Path;

use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::json;

use behaviour_metric::metric::{DerivedScores, TaskEvaluation};
use behaviour_metric::model::ValidationReport;
use behaviour_metric::sensitivity::{SweepTable, VariableImpact};
use behaviour_metric::simulation::ScenarioReport;
use behaviour_metric::xml::ParseWarning;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputOptions {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Decimal places for displayed values
    #[arg(long, default_value_t = 3)]
    pub round: u32,
}

impl OutputOptions {
    fn display(&self, value: f64) -> String {
        let factor = 10f64.powi(self.round as i32);
        let rounded = (value * factor + 0.5).floor() / factor;
        format!("{:.*}", self.round as usize, rounded)
    }

    fn rounded(&self, value: f64) -> serde_json::Value {
        json!({ "value": value, "display": self.display(value) })
    }
}

/// Write a finished document to stdout. Write errors (a reader that went
/// away mid-pipe) are not worth a panic; stop quietly.
fn emit(text: &str) {
    use std::io::Write;
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(text.as_bytes());
    let _ = stdout.flush();
}

fn emit_json(value: &serde_json::Value) {
    let mut text = serde_json::to_string_pretty(value).expect("serializable document");
    text.push('\n');
    emit(&text);
}

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

#[derive(Serialize)]
struct ReportItem<'a> {
    severity: &'a str,
    path: &'a str,
    rule: &'a str,
    message: &'a str,
}

pub fn validation(
    script: &Path,
    parse_warnings: &[ParseWarning],
    report: &ValidationReport,
    output: &OutputOptions,
) {
    let mut items: Vec<ReportItem> = parse_warnings
        .iter()
        .map(|w| ReportItem {
            severity: "warning",
            path: &w.path,
            rule: "legacy spelling",
            message: &w.message,
        })
        .collect();
    for violation in &report.items {
        items.push(ReportItem {
            severity: match violation.severity {
                behaviour_metric::model::Severity::Error => "error",
                behaviour_metric::model::Severity::Warning => "warning",
            },
            path: &violation.path,
            rule: &violation.rule,
            message: &violation.message,
        });
    }

    let mut out = String::new();
    match output.format {
        Format::Table => {
            let errors = items.iter().filter(|i| i.severity == "error").count();
            let warnings = items.len() - errors;
            if items.is_empty() {
                let _ = writeln!(out, "{}: ok", script.display());
            } else {
                let _ = writeln!(
                    out,
                    "{}: {errors} error(s), {warnings} warning(s)",
                    script.display()
                );
                for item in &items {
                    let _ = writeln!(
                        out,
                        "  {}: {} at {}: {}",
                        item.severity, item.rule, item.path, item.message
                    );
                }
            }
        }
        Format::Json => {
            return emit_json(&json!({
                "script": script.display().to_string(),
                "items": items,
            }));
        }
        Format::Csv => {
            let _ = writeln!(out, "severity,path,rule,message");
            for item in &items {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    item.severity,
                    csv_field(item.path),
                    csv_field(item.rule),
                    csv_field(item.message)
                );
            }
        }
    }
    emit(&out);
}

pub fn evaluation(
    script: &Path,
    pc: f64,
    tasks: &[TaskEvaluation],
    behaviours: &[(String, DerivedScores)],
    output: &OutputOptions,
) {
    let mut out = String::new();
    match output.format {
        Format::Table => {
            let _ = writeln!(
                out,
                "Script: {}  (PC {})",
                script.display(),
                output.display(pc)
            );
            for task in tasks {
                let _ = writeln!(out);
                let _ = writeln!(out, "Task: {}  (n = {})", task.task, task.instance_count);
                let _ = writeln!(
                    out,
                    "  Compulsory {}, Upper {}, Lower {}, PSL {}",
                    output.display(task.bounds.compulsory),
                    output.display(task.bounds.upper),
                    output.display(task.bounds.lower),
                    output.display(task.psl),
                );
            }
            let _ = writeln!(out);
            let _ = writeln!(out, "Behaviour scores (collective included):");
            let width = behaviours
                .iter()
                .map(|(name, _)| name.len())
                .max()
                .unwrap_or(0)
                .max("behaviour".len());
            let _ = writeln!(
                out,
                "  {:<width$}  intelligence  communication  collective  complexity",
                "behaviour"
            );
            for (name, scores) in behaviours {
                let _ = writeln!(
                    out,
                    "  {:<width$}  {:>12}  {:>13}  {:>10}  {:>10}",
                    name,
                    output.display(scores.intelligence),
                    output.display(scores.communication),
                    output.display(scores.collective),
                    output.display(scores.entity_complexity),
                );
            }
        }
        Format::Json => {
            let tasks: Vec<_> = tasks
                .iter()
                .map(|task| {
                    json!({
                        "task": task.task,
                        "n": task.instance_count,
                        "compulsory": output.rounded(task.bounds.compulsory),
                        "lower": output.rounded(task.bounds.lower),
                        "upper": output.rounded(task.bounds.upper),
                        "psl": output.rounded(task.psl),
                    })
                })
                .collect();
            let behaviours: Vec<_> = behaviours
                .iter()
                .map(|(name, scores)| {
                    json!({
                        "behaviour": name,
                        "intelligence": output.rounded(scores.intelligence),
                        "communication": output.rounded(scores.communication),
                        "collective": output.rounded(scores.collective),
                        "entity_complexity": output.rounded(scores.entity_complexity),
                    })
                })
                .collect();
            return emit_json(&json!({
                "script": script.display().to_string(),
                "pc": output.rounded(pc),
                "tasks": tasks,
                "behaviours": behaviours,
            }));
        }
        Format::Csv => {
            let _ = writeln!(
                out,
                "task,n,compulsory,lower,upper,psl,\
                 compulsory_display,lower_display,upper_display,psl_display"
            );
            for task in tasks {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    csv_field(&task.task),
                    task.instance_count,
                    task.bounds.compulsory,
                    task.bounds.lower,
                    task.bounds.upper,
                    task.psl,
                    output.display(task.bounds.compulsory),
                    output.display(task.bounds.lower),
                    output.display(task.bounds.upper),
                    output.display(task.psl),
                );
            }
        }
    }
    emit(&out);
}

pub fn scenario(report: &ScenarioReport, output: &OutputOptions) {
    let mut out = String::new();
    match output.format {
        Format::Table => {
            let _ = writeln!(
                out,
                "Scenario: {}  (task: {})",
                report.scenario, report.task
            );
            let width = report
                .outcomes
                .iter()
                .map(|o| o.behaviour_type.len())
                .max()
                .unwrap_or(0);
            for outcome in &report.outcomes {
                let fired = outcome
                    .fired_rules
                    .iter()
                    .map(|rule| rule.to_string())
                    .collect::<Vec<_>>()
                    .join(", ");
                let _ = write!(
                    out,
                    "  {:<width$}  {}",
                    outcome.behaviour_type,
                    output.display(outcome.evaluation),
                );
                if outcome.blocked {
                    let _ = write!(out, "  blocked");
                }
                if !fired.is_empty() {
                    let _ = write!(out, "  (fired: {fired})");
                }
                let _ = writeln!(out);
            }
            if report.outcomes.iter().any(|o| o.blocked) {
                let _ = writeln!(
                    out,
                    "Task evaluation: {}  (a blocked requirement zeroes the task)",
                    output.display(report.task_evaluation)
                );
            } else {
                let _ = writeln!(
                    out,
                    "Task evaluation: {}",
                    output.display(report.task_evaluation)
                );
            }
            if let Some(mean) = report.unblocked_mean {
                let _ = writeln!(out, "Unblocked mean: {}", output.display(mean));
            }
        }
        Format::Json => {
            let outcomes: Vec<_> = report
                .outcomes
                .iter()
                .map(|outcome| {
                    let fired: Vec<_> = outcome
                        .fired_rules
                        .iter()
                        .map(|rule| {
                            json!({
                                "group": rule.group_index,
                                "alternative": rule.alternative,
                                "polarity": rule.polarity.to_string(),
                                "score": output.rounded(rule.score),
                            })
                        })
                        .collect();
                    json!({
                        "behaviour": outcome.behaviour_type,
                        "evaluation": output.rounded(outcome.evaluation),
                        "blocked": outcome.blocked,
                        "fired": fired,
                    })
                })
                .collect();
            return emit_json(&json!({
                "task": report.task,
                "scenario": report.scenario,
                "outcomes": outcomes,
                "task_evaluation": output.rounded(report.task_evaluation),
                "unblocked_mean": report.unblocked_mean.map(|m| output.rounded(m)),
            }));
        }
        Format::Csv => {
            let _ = writeln!(
                out,
                "row,behaviour,evaluation,evaluation_display,blocked,fired"
            );
            for outcome in &report.outcomes {
                let fired = outcome
                    .fired_rules
                    .iter()
                    .map(|rule| rule.to_string())
                    .collect::<Vec<_>>()
                    .join("; ");
                let _ = writeln!(
                    out,
                    "requirement,{},{},{},{},{}",
                    csv_field(&outcome.behaviour_type),
                    outcome.evaluation,
                    output.display(outcome.evaluation),
                    outcome.blocked,
                    csv_field(&fired),
                );
            }
            let _ = writeln!(
                out,
                "task,{},{},{},{},",
                csv_field(&report.task),
                report.task_evaluation,
                output.display(report.task_evaluation),
                report.outcomes.iter().any(|o| o.blocked),
            );
            if let Some(mean) = report.unblocked_mean {
                let _ = writeln!(out, "unblocked_mean,,{},{},,", mean, output.display(mean));
            }
        }
    }
    emit(&out);
}

pub fn sweep_table(table: &SweepTable, output: &OutputOptions) {
    let mut out = String::new();
    match output.format {
        Format::Table => {
            let _ = writeln!(out, "Sweep: {}", table.task);
            let _ = writeln!(out, "iteration  compulsory  upper  lower");
            for row in &table.rows {
                let _ = writeln!(
                    out,
                    "{:>9}  {:>10}  {:>5}  {:>5}",
                    row.iteration,
                    output.display(row.compulsory),
                    output.display(row.upper),
                    output.display(row.lower),
                );
            }
        }
        Format::Json => {
            let rows: Vec<_> = table
                .rows
                .iter()
                .map(|row| {
                    json!({
                        "iteration": row.iteration,
                        "compulsory": output.rounded(row.compulsory),
                        "lower": output.rounded(row.lower),
                        "upper": output.rounded(row.upper),
                        "psl": output.rounded(row.psl),
                    })
                })
                .collect();
            return emit_json(&json!({ "task": table.task, "rows": rows }));
        }
        Format::Csv => {
            let _ = writeln!(
                out,
                "iteration,compulsory,lower,upper,psl,\
                 compulsory_display,lower_display,upper_display,psl_display"
            );
            for row in &table.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    row.iteration,
                    row.compulsory,
                    row.lower,
                    row.upper,
                    row.psl,
                    output.display(row.compulsory),
                    output.display(row.lower),
                    output.display(row.upper),
                    output.display(row.psl),
                );
            }
        }
    }
    emit(&out);
}

pub fn ranking(task: &str, probe_step: f64, impacts: &[VariableImpact], output: &OutputOptions) {
    let mut out = String::new();
    match output.format {
        Format::Table => {
            let _ = writeln!(
                out,
                "Critical variables for {task}  (probe step {probe_step})"
            );
            let width = impacts
                .iter()
                .map(|i| i.behaviour_type.len())
                .max()
                .unwrap_or(0)
                .max("behaviour".len());
            let _ = writeln!(
                out,
                "  {:<width$}  {:<12}  d_compulsory  d_lower  d_upper",
                "behaviour", "attribute"
            );
            for impact in impacts {
                let _ = writeln!(
                    out,
                    "  {:<width$}  {:<12}  {:>12}  {:>7}  {:>7}",
                    impact.behaviour_type,
                    impact.attribute.as_str(),
                    output.display(impact.delta_compulsory),
                    output.display(impact.delta_lower),
                    output.display(impact.delta_upper),
                );
            }
        }
        Format::Json => {
            let variables: Vec<_> = impacts
                .iter()
                .map(|impact| {
                    json!({
                        "behaviour": impact.behaviour_type,
                        "attribute": impact.attribute.as_str(),
                        "delta_compulsory": output.rounded(impact.delta_compulsory),
                        "delta_lower": output.rounded(impact.delta_lower),
                        "delta_upper": output.rounded(impact.delta_upper),
                    })
                })
                .collect();
            return emit_json(&json!({
                "task": task,
                "probe_step": probe_step,
                "variables": variables,
            }));
        }
        Format::Csv => {
            let _ = writeln!(
                out,
                "behaviour,attribute,delta_compulsory,delta_lower,delta_upper,\
                 delta_compulsory_display,delta_lower_display,delta_upper_display"
            );
            for impact in impacts {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    csv_field(&impact.behaviour_type),
                    impact.attribute.as_str(),
                    impact.delta_compulsory,
                    impact.delta_lower,
                    impact.delta_upper,
                    output.display(impact.delta_compulsory),
                    output.display(impact.delta_lower),
                    output.display(impact.delta_upper),
                );
            }
        }
    }
    emit(&out);
}
