//! Increment sweeps and critical-variable ranking.
//!
//! A sweep repeatedly re-evaluates a task while stepping chosen attributes:
//! iteration `i` sets each target to `original + i * step`, clamped into the
//! unit interval, with iteration 0 being the unmodified script. Because every
//! aggregation in the metric is a mean, min or max of monotone parts, a
//! positive step can only move the bounds up, which makes sweeps a cheap way
//! to see which variables would pay off.
//!
//! Ranking probes every (behaviour, attribute) pair one at a time with the
//! same positive step and sorts the pairs by how much the compulsory score
//! moved, ties broken by name. That surfaces the critical variables: the
//! ones whose improvement matters most.
//!
//! Sweep plans can also be loaded from a small key-value file:
//!
//! ```text
//! target = Move North/coordination
//! target = Move North/cooperation
//! step = 0.05
//! iterations = 10
//! ```

use thiserror::Error;

use crate::expr::EvaluationContext;
use crate::metric::{EvaluationError, Evaluator};
use crate::model::{AttributeName, ProblemSpec, ATTRIBUTE_NAMES};

/// One attribute of one behaviour type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepTarget {
    pub behaviour_type: String,
    pub attribute: AttributeName,
}

impl SweepTarget {
    /// Parses `behaviour type/attribute`, splitting at the last slash.
    pub fn parse(text: &str) -> Result<SweepTarget, PlanParseError> {
        let (behaviour, attribute) = text.rsplit_once('/').ok_or_else(|| {
            PlanParseError::new(0, format!("`{text}` is not `behaviour/attribute`"))
        })?;
        let attribute = AttributeName::parse(attribute.trim()).ok_or_else(|| {
            PlanParseError::new(
                0,
                format!(
                    "`{}` is not an attribute name (expected one of {})",
                    attribute.trim(),
                    ATTRIBUTE_NAMES
                        .iter()
                        .map(|a| a.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            )
        })?;
        Ok(SweepTarget {
            behaviour_type: behaviour.trim().to_string(),
            attribute,
        })
    }
}

/// What to sweep: the targets stepped together, the signed step size, and how
/// many increments to apply after the base row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub targets: Vec<SweepTarget>,
    pub step: f64,
    pub iterations: u32,
}

impl SweepPlan {
    /// Parse the plan file format described in the module docs.
    pub fn parse(text: &str) -> Result<SweepPlan, PlanParseError> {
        let mut targets = Vec::new();
        let mut step = None;
        let mut iterations = None;
        for (index, raw_line) in text.lines().enumerate() {
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let number = index + 1;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| PlanParseError::new(number, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "target" => {
                    let target = SweepTarget::parse(value)
                        .map_err(|e| PlanParseError::new(number, e.message))?;
                    targets.push(target);
                }
                "step" => {
                    step = Some(value.parse().map_err(|_| {
                        PlanParseError::new(number, format!("`{value}` is not a number"))
                    })?);
                }
                "iterations" => {
                    iterations = Some(value.parse().map_err(|_| {
                        PlanParseError::new(number, format!("`{value}` is not a count"))
                    })?);
                }
                other => {
                    return Err(PlanParseError::new(
                        number,
                        format!("unknown key `{other}` (expected target, step or iterations)"),
                    ));
                }
            }
        }
        if targets.is_empty() {
            return Err(PlanParseError::new(0, "plan names no targets"));
        }
        Ok(SweepPlan {
            targets,
            step: step.ok_or_else(|| PlanParseError::new(0, "plan is missing `step`"))?,
            iterations: iterations
                .ok_or_else(|| PlanParseError::new(0, "plan is missing `iterations`"))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("sweep plan line {line}: {message}")]
pub struct PlanParseError {
    pub line: usize,
    pub message: String,
}

impl PlanParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

/// One sweep row: the task evaluation with targets offset by
/// `iteration * step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub iteration: u32,
    pub compulsory: f64,
    pub lower: f64,
    pub upper: f64,
    pub psl: f64,
}

/// Sweep output: `iterations + 1` rows, with row 0 the unmodified script.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub task: String,
    pub rows: Vec<SweepRow>,
}

/// The impact of probing one attribute of one behaviour.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableImpact {
    pub behaviour_type: String,
    pub attribute: AttributeName,
    pub delta_compulsory: f64,
    pub delta_lower: f64,
    pub delta_upper: f64,
}

/// Apply `delta` to every target attribute of a copy of the spec.
fn offset_spec(
    spec: &ProblemSpec,
    targets: &[SweepTarget],
    delta: f64,
) -> Result<ProblemSpec, EvaluationError> {
    let mut modified = spec.clone();
    for target in targets {
        let behaviour = modified
            .behaviour_mut(&target.behaviour_type)
            .ok_or_else(|| EvaluationError::UnknownBehaviour(target.behaviour_type.clone()))?;
        let attribute = behaviour.attributes.get_mut(target.attribute);
        *attribute = attribute.offset(delta);
    }
    Ok(modified)
}

/// Re-evaluate a task while stepping the plan's targets together. Each row is
/// a full re-evaluation of the modified script.
pub fn sweep(
    spec: &ProblemSpec,
    task_name: &str,
    plan: &SweepPlan,
    ctx: &EvaluationContext,
) -> Result<SweepTable, EvaluationError> {
    // fail on unresolved targets before doing any work
    offset_spec(spec, &plan.targets, 0.0)?;

    let mut rows = Vec::with_capacity(plan.iterations as usize + 1);
    for iteration in 0..=plan.iterations {
        let modified = offset_spec(spec, &plan.targets, iteration as f64 * plan.step)?;
        let evaluator = Evaluator::new(&modified)?;
        let result = evaluator.evaluate_task(task_name, ctx)?;
        rows.push(SweepRow {
            iteration,
            compulsory: result.bounds.compulsory,
            lower: result.bounds.lower,
            upper: result.bounds.upper,
            psl: result.psl,
        });
    }
    Ok(SweepTable {
        task: task_name.to_string(),
        rows,
    })
}

/// Probe every (behaviour, attribute) pair by `probe_step` and rank the pairs
/// by compulsory-score movement, descending; ties fall back to behaviour then
/// attribute name. The result is a permutation of the full variable set.
pub fn rank_critical_variables(
    spec: &ProblemSpec,
    task_name: &str,
    probe_step: f64,
    ctx: &EvaluationContext,
) -> Result<Vec<VariableImpact>, EvaluationError> {
    if probe_step <= 0.0 {
        return Err(EvaluationError::NonPositiveStep(probe_step));
    }
    let base = Evaluator::new(spec)?.evaluate_task(task_name, ctx)?;

    let mut impacts = Vec::with_capacity(spec.behaviours.len() * ATTRIBUTE_NAMES.len());
    for behaviour in &spec.behaviours {
        for &attribute in &ATTRIBUTE_NAMES {
            let target = SweepTarget {
                behaviour_type: behaviour.type_name.clone(),
                attribute,
            };
            let modified = offset_spec(spec, std::slice::from_ref(&target), probe_step)?;
            let result = Evaluator::new(&modified)?.evaluate_task(task_name, ctx)?;
            impacts.push(VariableImpact {
                behaviour_type: behaviour.type_name.clone(),
                attribute,
                delta_compulsory: result.bounds.compulsory - base.bounds.compulsory,
                delta_lower: result.bounds.lower - base.bounds.lower,
                delta_upper: result.bounds.upper - base.bounds.upper,
            });
        }
    }
    impacts.sort_by(|a, b| {
        b.delta_compulsory
            .total_cmp(&a.delta_compulsory)
            .then_with(|| a.behaviour_type.cmp(&b.behaviour_type))
            .then_with(|| a.attribute.as_str().cmp(b.attribute.as_str()))
    });
    Ok(impacts)
}
