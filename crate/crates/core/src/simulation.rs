//! Rule / decision simulation over a behaviour script.
//!
//! The metric treats alternative sub-behaviours as interchangeable and adds
//! every score positively. A simulation instead plays out one concrete
//! situation: a [`Scenario`] states which alternative fires at each decision
//! point, and the polarity of the fired rule decides what happens. A fired
//! `Positive` rule scales the parent's compulsory score by the rule's own
//! composite; a fired `Negative` rule prevents the action, so the decision
//! evaluates to 0 and is flagged blocked.
//!
//! Scenario files are flat key-value text, one statement per line:
//!
//! ```text
//! # barbarians are lurking near the settlement
//! name = Barbarians present
//! var visibility = 0.5
//! Leave Settlement/0 = Barbarians Close
//! ```
//!
//! The last line means: in alternative group 0 of behaviour `Leave
//! Settlement`, the member `Barbarians Close` fires. Group indices are
//! 0-based and count the behaviour's alternative groups in requires order.
//! `var NAME = VALUE` lines bind expression variables; `name = ...` labels
//! the scenario. Blank lines and lines starting with `#` are ignored.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::expr::EvaluationContext;
use crate::metric::{EvaluationError, Evaluator, Selection};
use crate::model::{Polarity, RequiresSlot};

/// One concrete situation: which alternative fires at every decision point,
/// plus variable bindings for dynamic attributes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub selections: Selection,
    pub bindings: Vec<(String, f64)>,
}

impl Scenario {
    /// Parse the flat key-value scenario format described in the module docs.
    pub fn parse(text: &str) -> Result<Scenario, ScenarioParseError> {
        let mut scenario = Scenario::default();
        for (index, raw_line) in text.lines().enumerate() {
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let number = index + 1;
            let (lhs, rhs) = line
                .split_once('=')
                .ok_or_else(|| ScenarioParseError::new(number, "expected `key = value`"))?;
            let (lhs, rhs) = (lhs.trim(), rhs.trim());
            if rhs.is_empty() {
                return Err(ScenarioParseError::new(number, "missing value after `=`"));
            }
            if lhs == "name" {
                scenario.name = rhs.to_string();
            } else if let Some(var) = lhs.strip_prefix("var ") {
                let var = var.trim();
                if var.is_empty() {
                    return Err(ScenarioParseError::new(number, "missing variable name"));
                }
                let value: f64 = rhs.parse().map_err(|_| {
                    ScenarioParseError::new(number, format!("`{rhs}` is not a number"))
                })?;
                scenario.bindings.push((var.to_string(), value));
            } else if let Some((behaviour, group)) = lhs.rsplit_once('/') {
                let group: usize = group.trim().parse().map_err(|_| {
                    ScenarioParseError::new(
                        number,
                        format!("`{}` is not a group index", group.trim()),
                    )
                })?;
                scenario.selections.choose(behaviour.trim(), group, rhs);
            } else {
                return Err(ScenarioParseError::new(
                    number,
                    "expected `name = ...`, `var NAME = VALUE` or `behaviour/group = chosen type`",
                ));
            }
        }
        Ok(scenario)
    }

    /// The base context extended by this scenario's bindings.
    pub fn context(&self, base: &EvaluationContext) -> EvaluationContext {
        let mut ctx = base.clone();
        for (name, value) in &self.bindings {
            ctx.bind(name.clone(), *value);
        }
        ctx
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("scenario line {line}: {message}")]
pub struct ScenarioParseError {
    pub line: usize,
    pub message: String,
}

impl ScenarioParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

/// The alternative that fired at one decision point.
#[derive(Debug, Clone, PartialEq)]
pub struct FiredRule {
    pub group_index: usize,
    pub alternative: String,
    pub polarity: Polarity,
    /// The fired alternative's composite score under the scenario.
    pub score: f64,
}

impl fmt::Display for FiredRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.alternative, self.polarity)
    }
}

/// Outcome of evaluating one behaviour under a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionOutcome {
    pub behaviour_type: String,
    pub evaluation: f64,
    /// True iff a negative rule fired and drove the evaluation to 0.
    pub blocked: bool,
    pub fired_rules: Vec<FiredRule>,
}

/// Per-requirement outcomes plus the task aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub task: String,
    pub scenario: String,
    pub outcomes: Vec<DecisionOutcome>,
    /// Mean of the requirement evaluations, or 0.0 if anything blocked.
    pub task_evaluation: f64,
    /// Mean over the unblocked requirements only; what the task would score
    /// if the blocked actions were simply skipped. None when everything
    /// blocked.
    pub unblocked_mean: Option<f64>,
}

impl Evaluator<'_> {
    /// Evaluate one behaviour's decision under a scenario. The signed rule:
    /// a positive firing multiplies the parent's compulsory composite by the
    /// fired alternative's composite; a negative firing contributes its
    /// negated score, which clamps to 0 and marks the decision blocked.
    pub fn evaluate_decision(
        &self,
        behaviour: &str,
        scenario: &Scenario,
        base: &EvaluationContext,
        collective_required: bool,
    ) -> Result<DecisionOutcome, EvaluationError> {
        let definition = self.definition(behaviour)?;
        let ctx = scenario.context(base);
        let compulsory = self.compulsory_score(behaviour, &ctx, collective_required)?;

        let mut fired_rules = Vec::new();
        for (group_index, group) in definition.alternative_groups().into_iter().enumerate() {
            let chosen = scenario
                .selections
                .get(behaviour, group_index)
                .ok_or_else(|| EvaluationError::MissingSelection {
                    behaviour: behaviour.to_string(),
                    group: group_index,
                })?;
            let member = group
                .iter()
                .find(|member| member.target == chosen)
                .ok_or_else(|| EvaluationError::InvalidSelection {
                    behaviour: behaviour.to_string(),
                    group: group_index,
                    chosen: chosen.to_string(),
                })?;
            let score = self.behaviour_composite(
                &member.target,
                &scenario.selections,
                &ctx,
                collective_required,
            )?;
            fired_rules.push(FiredRule {
                group_index,
                alternative: member.target.clone(),
                polarity: member.polarity,
                score,
            });
        }

        let blocked = fired_rules
            .iter()
            .any(|rule| rule.polarity == Polarity::Negative);
        let evaluation = if blocked {
            0.0
        } else {
            let product: f64 = fired_rules.iter().map(|rule| rule.score).product();
            (compulsory * product).clamp(0.0, 1.0)
        };

        Ok(DecisionOutcome {
            behaviour_type: behaviour.to_string(),
            evaluation,
            blocked,
            fired_rules,
        })
    }

    /// Run a scenario over every requirement of a task. The scenario must
    /// select an alternative for every decision point reachable from the
    /// task; missing ones are reported together.
    pub fn run_scenario(
        &self,
        task_name: &str,
        scenario: &Scenario,
        base: &EvaluationContext,
    ) -> Result<ScenarioReport, EvaluationError> {
        let task = self
            .spec()
            .task(task_name)
            .ok_or_else(|| EvaluationError::UnknownTask(task_name.to_string()))?;
        if task.requirements.is_empty() {
            return Err(EvaluationError::EmptyTask(task.name.clone()));
        }

        let missing = self.missing_selections(task_name, scenario)?;
        if !missing.is_empty() {
            return Err(EvaluationError::IncompleteScenario { missing });
        }

        let mut outcomes = Vec::with_capacity(task.requirements.len());
        for requirement in &task.requirements {
            if requirement.entity_number == 0 {
                return Err(EvaluationError::ZeroAgents);
            }
            outcomes.push(self.evaluate_decision(
                &requirement.behaviour_type,
                scenario,
                base,
                requirement.entity_number > 1,
            )?);
        }

        let any_blocked = outcomes.iter().any(|outcome| outcome.blocked);
        let task_evaluation = if any_blocked {
            0.0
        } else {
            outcomes.iter().map(|o| o.evaluation).sum::<f64>() / outcomes.len() as f64
        };
        let unblocked: Vec<f64> = outcomes
            .iter()
            .filter(|o| !o.blocked)
            .map(|o| o.evaluation)
            .collect();
        let unblocked_mean = if unblocked.is_empty() {
            None
        } else {
            Some(unblocked.iter().sum::<f64>() / unblocked.len() as f64)
        };

        Ok(ScenarioReport {
            task: task.name.clone(),
            scenario: scenario.name.clone(),
            outcomes,
            task_evaluation,
            unblocked_mean,
        })
    }

    /// Decision points reachable from the task that the scenario does not
    /// cover. Reachability follows required sub-behaviours always and, at
    /// each selected group, the chosen member.
    fn missing_selections(
        &self,
        task_name: &str,
        scenario: &Scenario,
    ) -> Result<Vec<(String, usize)>, EvaluationError> {
        let task = self
            .spec()
            .task(task_name)
            .ok_or_else(|| EvaluationError::UnknownTask(task_name.to_string()))?;
        let mut missing = Vec::new();
        let mut visited = HashSet::new();
        let mut stack: Vec<&str> = task
            .requirements
            .iter()
            .map(|r| r.behaviour_type.as_str())
            .collect();
        while let Some(name) = stack.pop() {
            if !visited.insert(name.to_string()) {
                continue;
            }
            let definition = self.definition(name)?;
            let mut group_index = 0;
            for slot in definition.requires_slots() {
                match slot {
                    RequiresSlot::Required(entry) => stack.push(&entry.target),
                    RequiresSlot::Alternatives(group) => {
                        match scenario.selections.get(name, group_index) {
                            None => missing.push((name.to_string(), group_index)),
                            Some(chosen) => {
                                if let Some(member) =
                                    group.iter().find(|member| member.target == chosen)
                                {
                                    stack.push(&member.target);
                                }
                            }
                        }
                        group_index += 1;
                    }
                }
            }
        }
        missing.sort();
        missing.dedup();
        Ok(missing)
    }
}
