//! The success-likelihood metric: derived scores per behaviour, composite
//! scores over nested sub-behaviours, compulsory/lower/upper bounds across
//! alternative groups, agent-count averaging and the final problem success
//! likelihood (PSL).
//!
//! The scalar layer is a handful of plain means: intelligence is the mean of
//! ability and flexibility, communication the mean of the two signals,
//! collective the mean of coordination, cooperation and communication, and
//! entity complexity the mean of intelligence and collective. When a task
//! requirement needs a single agent the collective side is excluded (forced
//! to 1.0) because there is nobody to collaborate with.
//!
//! Nesting: a behaviour's composite score is the uniform mean over its own
//! entity complexity, the composite of every required sub-behaviour, and one
//! slot per alternative group holding the chosen member's composite. The
//! compulsory score ignores alternative groups entirely; the lower and upper
//! bounds take each group's worst and best member, which is exact because the
//! mean is monotone in every slot. Negative rule entries contribute their
//! score positively here — the metric measures how well behaviours can be
//! performed, including the preventing ones; polarity only matters to the
//! simulation evaluator.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::expr::{EvaluationContext, ExpressionEvalError};
use crate::model::{
    validate_spec, BehaviourAttributes, BehaviourDef, ProblemSpec, RequiresSlot, ValidationReport,
};

/// Context variable bound to the 0-based agent position when a team score is
/// averaged, so expression attributes can differ per agent.
pub const AGENT_INDEX_VARIABLE: &str = "agent_index";

/// The six attribute values resolved to plain numbers for one evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedAttributes {
    pub ability: f64,
    pub flexibility: f64,
    pub coordination: f64,
    pub cooperation: f64,
    pub signal_in: f64,
    pub signal_out: f64,
}

/// Resolve all six attributes against a context. Constants pass through,
/// expressions are evaluated and clamped.
pub fn resolve_attributes(
    attributes: &BehaviourAttributes,
    ctx: &EvaluationContext,
) -> Result<ResolvedAttributes, ExpressionEvalError> {
    Ok(ResolvedAttributes {
        ability: attributes.ability.resolve(ctx)?,
        flexibility: attributes.flexibility.resolve(ctx)?,
        coordination: attributes.coordination.resolve(ctx)?,
        cooperation: attributes.cooperation.resolve(ctx)?,
        signal_in: attributes.signal_in.resolve(ctx)?,
        signal_out: attributes.signal_out.resolve(ctx)?,
    })
}

/// Per-behaviour derived scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScores {
    pub intelligence: f64,
    pub communication: f64,
    pub collective: f64,
    pub entity_complexity: f64,
}

/// Composite score bounds for a behaviour or task. `compulsory` ignores all
/// alternative groups; `lower`/`upper` pick each group's worst/best member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundedScore {
    pub compulsory: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Picks one member for alternative groups, keyed by behaviour type name and
/// 0-based group index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Selection {
    choices: BTreeMap<String, BTreeMap<usize, String>>,
}

impl Selection {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn choose(
        &mut self,
        behaviour: impl Into<String>,
        group: usize,
        target: impl Into<String>,
    ) -> &mut Self {
        self.choices
            .entry(behaviour.into())
            .or_default()
            .insert(group, target.into());
        self
    }

    pub fn with(
        mut self,
        behaviour: impl Into<String>,
        group: usize,
        target: impl Into<String>,
    ) -> Self {
        self.choose(behaviour, group, target);
        self
    }

    pub fn get(&self, behaviour: &str, group: usize) -> Option<&str> {
        self.choices
            .get(behaviour)
            .and_then(|groups| groups.get(&group))
            .map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }
}

/// Evaluation outcome for one task.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskEvaluation {
    pub task: String,
    pub bounds: BoundedScore,
    /// Problem success likelihood: compulsory mean divided by PC, clamped.
    pub psl: f64,
    /// How many behaviour requirement instances were averaged.
    pub instance_count: usize,
}

/// Evaluation outcome for the whole problem: one entry per task plus the
/// per-behaviour derived-score table.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationResult {
    pub pc: f64,
    pub tasks: Vec<TaskEvaluation>,
    /// Derived scores per behaviour definition, collective included.
    pub behaviour_scores: Vec<(String, DerivedScores)>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvaluationError {
    #[error("{name} = {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("unknown behaviour type `{0}`")]
    UnknownBehaviour(String),
    #[error("unknown task `{0}`")]
    UnknownTask(String),
    #[error("task `{0}` has no requirements")]
    EmptyTask(String),
    #[error("a task requirement needs at least one agent")]
    ZeroAgents,
    #[error("problem complexity must be positive, found {0}")]
    NonPositiveComplexity(f64),
    #[error("no alternative selected for `{behaviour}` group {group}")]
    MissingSelection { behaviour: String, group: usize },
    #[error("`{chosen}` is not a member of `{behaviour}` alternative group {group}")]
    InvalidSelection {
        behaviour: String,
        group: usize,
        chosen: String,
    },
    #[error(
        "scenario is missing selections for: {}",
        format_decision_points(missing)
    )]
    IncompleteScenario { missing: Vec<(String, usize)> },
    #[error("probe step must be positive, found {0}")]
    NonPositiveStep(f64),
    #[error("spec failed validation:\n{0}")]
    InvalidSpec(ValidationReport),
    #[error(transparent)]
    Expression(#[from] ExpressionEvalError),
}

fn format_decision_points(points: &[(String, usize)]) -> String {
    points
        .iter()
        .map(|(behaviour, group)| format!("`{behaviour}` group {group}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn check_unit(name: &'static str, value: f64) -> Result<f64, EvaluationError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(EvaluationError::OutOfRange { name, value })
    }
}

/// Mean of the two communication signals.
pub fn communication_score(signal_in: f64, signal_out: f64) -> Result<f64, EvaluationError> {
    let si = check_unit("signal_in", signal_in)?;
    let so = check_unit("signal_out", signal_out)?;
    Ok((si + so) / 2.0)
}

/// Mean of coordination, cooperation and communication.
pub fn collective_score(
    coordination: f64,
    cooperation: f64,
    communication: f64,
) -> Result<f64, EvaluationError> {
    let cor = check_unit("coordination", coordination)?;
    let cop = check_unit("cooperation", cooperation)?;
    let com = check_unit("communication", communication)?;
    Ok((cor + cop + com) / 3.0)
}

/// Mean of ability and flexibility.
pub fn intelligence_score(ability: f64, flexibility: f64) -> Result<f64, EvaluationError> {
    let ba = check_unit("ability", ability)?;
    let bf = check_unit("flexibility", flexibility)?;
    Ok((ba + bf) / 2.0)
}

/// All derived scores for one behaviour. With `collective_required` false
/// (a solo agent) the collective score is forced to 1.0 so it cannot affect
/// the entity complexity.
pub fn entity_complexity(
    attributes: &ResolvedAttributes,
    collective_required: bool,
) -> Result<DerivedScores, EvaluationError> {
    let intelligence = intelligence_score(attributes.ability, attributes.flexibility)?;
    let communication = communication_score(attributes.signal_in, attributes.signal_out)?;
    let collective = if collective_required {
        collective_score(
            attributes.coordination,
            attributes.cooperation,
            communication,
        )?
    } else {
        1.0
    };
    Ok(DerivedScores {
        intelligence,
        communication,
        collective,
        entity_complexity: (intelligence + collective) / 2.0,
    })
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Evaluates a validated spec. Construction fails if validation reports any
/// error; all evaluation methods are pure, so one evaluator can serve many
/// concurrent callers.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    spec: &'a ProblemSpec,
    index: HashMap<&'a str, usize>,
}

impl<'a> Evaluator<'a> {
    pub fn new(spec: &'a ProblemSpec) -> Result<Self, EvaluationError> {
        let report = validate_spec(spec);
        if report.has_errors() {
            return Err(EvaluationError::InvalidSpec(report));
        }
        let index = spec
            .behaviours
            .iter()
            .enumerate()
            .map(|(i, b)| (b.type_name.as_str(), i))
            .collect();
        Ok(Self { spec, index })
    }

    pub fn spec(&self) -> &'a ProblemSpec {
        self.spec
    }

    pub(crate) fn definition(&self, behaviour: &str) -> Result<&'a BehaviourDef, EvaluationError> {
        self.index
            .get(behaviour)
            .map(|&i| &self.spec.behaviours[i])
            .ok_or_else(|| EvaluationError::UnknownBehaviour(behaviour.to_string()))
    }

    /// The derived scores of one behaviour under a context.
    pub fn derived_scores(
        &self,
        behaviour: &str,
        ctx: &EvaluationContext,
        collective_required: bool,
    ) -> Result<DerivedScores, EvaluationError> {
        let definition = self.definition(behaviour)?;
        let resolved = resolve_attributes(&definition.attributes, ctx)?;
        entity_complexity(&resolved, collective_required)
    }

    /// Composite score of a behaviour with every alternative group resolved
    /// by `selection` (recursively).
    pub fn behaviour_composite(
        &self,
        behaviour: &str,
        selection: &Selection,
        ctx: &EvaluationContext,
        collective_required: bool,
    ) -> Result<f64, EvaluationError> {
        let definition = self.definition(behaviour)?;
        let mut memo = HashMap::new();
        self.composite_rec(definition, selection, ctx, collective_required, &mut memo)
    }

    fn composite_rec(
        &self,
        definition: &BehaviourDef,
        selection: &Selection,
        ctx: &EvaluationContext,
        collective_required: bool,
        memo: &mut HashMap<usize, f64>,
    ) -> Result<f64, EvaluationError> {
        let key = self.index[definition.type_name.as_str()];
        if let Some(&value) = memo.get(&key) {
            return Ok(value);
        }
        let own = self
            .derived_scores(&definition.type_name, ctx, collective_required)?
            .entity_complexity;
        let mut parts = vec![own];
        let mut group_index = 0;
        for slot in definition.requires_slots() {
            match slot {
                RequiresSlot::Required(entry) => {
                    let sub = self.definition(&entry.target)?;
                    parts.push(self.composite_rec(
                        sub,
                        selection,
                        ctx,
                        collective_required,
                        memo,
                    )?);
                }
                RequiresSlot::Alternatives(group) => {
                    let chosen = selection
                        .get(&definition.type_name, group_index)
                        .ok_or_else(|| EvaluationError::MissingSelection {
                            behaviour: definition.type_name.clone(),
                            group: group_index,
                        })?;
                    if !group.iter().any(|member| member.target == chosen) {
                        return Err(EvaluationError::InvalidSelection {
                            behaviour: definition.type_name.clone(),
                            group: group_index,
                            chosen: chosen.to_string(),
                        });
                    }
                    let sub = self.definition(chosen)?;
                    parts.push(self.composite_rec(
                        sub,
                        selection,
                        ctx,
                        collective_required,
                        memo,
                    )?);
                    group_index += 1;
                }
            }
        }
        let value = mean(&parts);
        memo.insert(key, value);
        Ok(value)
    }

    /// The compulsory composite: required sub-behaviours included, all
    /// alternative groups ignored.
    pub fn compulsory_score(
        &self,
        behaviour: &str,
        ctx: &EvaluationContext,
        collective_required: bool,
    ) -> Result<f64, EvaluationError> {
        Ok(self
            .bounded_scores(behaviour, ctx, collective_required)?
            .compulsory)
    }

    /// Compulsory score plus the lower/upper bounds over every combination of
    /// alternative selections.
    pub fn bounded_scores(
        &self,
        behaviour: &str,
        ctx: &EvaluationContext,
        collective_required: bool,
    ) -> Result<BoundedScore, EvaluationError> {
        let definition = self.definition(behaviour)?;
        let mut memo = HashMap::new();
        self.bounded_rec(definition, ctx, collective_required, &mut memo)
    }

    fn bounded_rec(
        &self,
        definition: &BehaviourDef,
        ctx: &EvaluationContext,
        collective_required: bool,
        memo: &mut HashMap<usize, BoundedScore>,
    ) -> Result<BoundedScore, EvaluationError> {
        let key = self.index[definition.type_name.as_str()];
        if let Some(&bounds) = memo.get(&key) {
            return Ok(bounds);
        }
        let own = self
            .derived_scores(&definition.type_name, ctx, collective_required)?
            .entity_complexity;
        let mut compulsory = vec![own];
        let mut lower = vec![own];
        let mut upper = vec![own];
        for slot in definition.requires_slots() {
            match slot {
                RequiresSlot::Required(entry) => {
                    let sub = self.definition(&entry.target)?;
                    let bounds = self.bounded_rec(sub, ctx, collective_required, memo)?;
                    compulsory.push(bounds.compulsory);
                    lower.push(bounds.lower);
                    upper.push(bounds.upper);
                }
                RequiresSlot::Alternatives(group) => {
                    let mut worst = f64::INFINITY;
                    let mut best = f64::NEG_INFINITY;
                    for member in group {
                        let sub = self.definition(&member.target)?;
                        let bounds = self.bounded_rec(sub, ctx, collective_required, memo)?;
                        worst = worst.min(bounds.lower);
                        best = best.max(bounds.upper);
                    }
                    lower.push(worst);
                    upper.push(best);
                }
            }
        }
        let bounds = BoundedScore {
            compulsory: mean(&compulsory),
            lower: mean(&lower),
            upper: mean(&upper),
        };
        memo.insert(key, bounds);
        Ok(bounds)
    }

    /// Bounds for one task requirement: the behaviour evaluated once per
    /// participating agent and averaged. Collective capabilities only count
    /// when more than one agent takes part. Each agent sees the base context
    /// plus its own [`AGENT_INDEX_VARIABLE`] binding.
    pub fn team_score(
        &self,
        behaviour: &str,
        entity_number: u32,
        ctx: &EvaluationContext,
    ) -> Result<BoundedScore, EvaluationError> {
        if entity_number == 0 {
            return Err(EvaluationError::ZeroAgents);
        }
        let collective_required = entity_number > 1;
        let mut sums = BoundedScore {
            compulsory: 0.0,
            lower: 0.0,
            upper: 0.0,
        };
        for agent in 0..entity_number {
            let agent_ctx = ctx.clone().with(AGENT_INDEX_VARIABLE, agent as f64);
            let bounds = self.bounded_scores(behaviour, &agent_ctx, collective_required)?;
            sums.compulsory += bounds.compulsory;
            sums.lower += bounds.lower;
            sums.upper += bounds.upper;
        }
        let n = entity_number as f64;
        Ok(BoundedScore {
            compulsory: sums.compulsory / n,
            lower: sums.lower / n,
            upper: sums.upper / n,
        })
    }

    /// Evaluate one task: the component-wise mean of its requirements' team
    /// scores, plus the PSL.
    pub fn evaluate_task(
        &self,
        task_name: &str,
        ctx: &EvaluationContext,
    ) -> Result<TaskEvaluation, EvaluationError> {
        let task = self
            .spec
            .task(task_name)
            .ok_or_else(|| EvaluationError::UnknownTask(task_name.to_string()))?;
        if task.requirements.is_empty() {
            return Err(EvaluationError::EmptyTask(task.name.clone()));
        }
        let pc = self.spec.problem_complexity;
        if pc <= 0.0 {
            return Err(EvaluationError::NonPositiveComplexity(pc));
        }
        let mut compulsory = Vec::new();
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        for requirement in &task.requirements {
            let bounds =
                self.team_score(&requirement.behaviour_type, requirement.entity_number, ctx)?;
            compulsory.push(bounds.compulsory);
            lower.push(bounds.lower);
            upper.push(bounds.upper);
        }
        let bounds = BoundedScore {
            compulsory: mean(&compulsory),
            lower: mean(&lower),
            upper: mean(&upper),
        };
        Ok(TaskEvaluation {
            task: task.name.clone(),
            psl: (bounds.compulsory / pc).clamp(0.0, 1.0),
            instance_count: task.requirements.len(),
            bounds,
        })
    }

    /// Evaluate every task plus the per-behaviour derived-score table.
    pub fn evaluate_problem(
        &self,
        ctx: &EvaluationContext,
    ) -> Result<EvaluationResult, EvaluationError> {
        let mut tasks = Vec::with_capacity(self.spec.tasks.len());
        for task in &self.spec.tasks {
            tasks.push(self.evaluate_task(&task.name, ctx)?);
        }
        let mut behaviour_scores = Vec::with_capacity(self.spec.behaviours.len());
        for behaviour in &self.spec.behaviours {
            let scores = self.derived_scores(&behaviour.type_name, ctx, true)?;
            behaviour_scores.push((behaviour.type_name.clone(), scores));
        }
        Ok(EvaluationResult {
            pc: self.spec.problem_complexity,
            tasks,
            behaviour_scores,
        })
    }
}
