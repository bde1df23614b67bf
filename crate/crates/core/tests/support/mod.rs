//! Shared helpers for the integration and acceptance suites: random script
//! generators plus independent oracles that recompute scores without going
//! through the library's evaluation path.

// each test binary uses its own subset of these helpers
#![allow(dead_code)]

use std::collections::BTreeMap;

use proptest::prelude::*;

use behaviour_metric::expr::{BinaryOp, EvaluationContext, Expression, Function};
use behaviour_metric::metric::Selection;
use behaviour_metric::model::{
    AttributeName, AttributeValue, BehaviourAttributes, BehaviourDef, Combinator, EntityInstance,
    EntityPoolEntry, EntityType, Polarity, ProblemSpec, ProblemTask, SubBehaviourRef,
    TaskRequirement, ATTRIBUTE_NAMES,
};

pub const TASK: &str = "Task";

// ---------------------------------------------------------------------------
// random scripts
// ---------------------------------------------------------------------------

fn unit_value() -> impl Strategy<Value = f64> {
    (0u32..=100).prop_map(|v| f64::from(v) / 100.0)
}

fn attribute_row() -> impl Strategy<Value = [f64; 6]> {
    [
        unit_value(),
        unit_value(),
        unit_value(),
        unit_value(),
        unit_value(),
        unit_value(),
    ]
}

pub fn attributes_from(values: [f64; 6]) -> BehaviourAttributes {
    BehaviourAttributes {
        ability: AttributeValue::Constant(values[0]),
        flexibility: AttributeValue::Constant(values[1]),
        coordination: AttributeValue::Constant(values[2]),
        cooperation: AttributeValue::Constant(values[3]),
        signal_in: AttributeValue::Constant(values[4]),
        signal_out: AttributeValue::Constant(values[5]),
    }
}

type RequiresSeed = Vec<Vec<(prop::sample::Index, bool, bool)>>;
type TaskSeed = Vec<(prop::sample::Index, u32)>;

/// A random acyclic script: behaviours `B0..Bn-1` where `Bi` may only require
/// earlier behaviours, one task with 1-3 requirements, and a minimal entity
/// section so round-trips cover every part of the format.
pub fn arb_spec() -> impl Strategy<Value = ProblemSpec> {
    arb_spec_sized(2..=7)
}

/// Same as [`arb_spec`] with a caller-chosen behaviour count.
pub fn arb_spec_sized(
    behaviours: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = ProblemSpec> {
    behaviours.prop_flat_map(|n| {
        (
            prop::collection::vec(attribute_row(), n),
            prop::collection::vec(
                prop::collection::vec(
                    (any::<prop::sample::Index>(), any::<bool>(), any::<bool>()),
                    0..=3,
                ),
                n,
            ),
            prop::collection::vec((any::<prop::sample::Index>(), 1u32..=3), 1..=3),
        )
            .prop_map(move |(attrs, requires, task)| build_spec(n, attrs, requires, task))
    })
}

fn build_spec(
    n: usize,
    attribute_rows: Vec<[f64; 6]>,
    requires_seed: RequiresSeed,
    task_seed: TaskSeed,
) -> ProblemSpec {
    let names: Vec<String> = (0..n).map(|i| format!("B{i}")).collect();
    let mut behaviours = Vec::with_capacity(n);
    for (i, (values, entries)) in attribute_rows.into_iter().zip(requires_seed).enumerate() {
        let mut behaviour = BehaviourDef::new(&names[i]);
        behaviour.attributes = attributes_from(values);
        if i > 0 {
            // one entry per target; a repeated target inside an alternative
            // group would be rejected by validation
            let mut used = std::collections::HashSet::new();
            for (target, is_alternative, is_negative) in entries {
                let target = target.index(i);
                if !used.insert(target) {
                    continue;
                }
                behaviour.requires.push(SubBehaviourRef {
                    target: names[target].clone(),
                    combinator: if is_alternative {
                        Combinator::Alternative
                    } else {
                        Combinator::Required
                    },
                    polarity: if is_negative {
                        Polarity::Negative
                    } else {
                        Polarity::Positive
                    },
                });
            }
        }
        behaviours.push(behaviour);
    }

    let requirements = task_seed
        .into_iter()
        .map(|(which, entity_number)| TaskRequirement {
            behaviour_type: names[which.index(n)].clone(),
            entity_number,
        })
        .collect();

    ProblemSpec {
        tasks: vec![ProblemTask {
            name: TASK.to_string(),
            requirements,
        }],
        problem_behaviour_set: names.clone(),
        problem_entities: vec![EntityPoolEntry {
            entity_type: "Agent".to_string(),
            entity_number: 3,
        }],
        entity_types: vec![EntityType {
            name: "Agent".to_string(),
            behaviour_types: names,
        }],
        entities: (1..=3)
            .map(|i| EntityInstance {
                name: format!("Agent {i}"),
                entity_type: "Agent".to_string(),
            })
            .collect(),
        behaviours,
        problem_complexity: 1.0,
    }
}

/// Force every attribute of every behaviour to the constant 1.0.
pub fn saturate(spec: &ProblemSpec) -> ProblemSpec {
    let mut out = spec.clone();
    for behaviour in &mut out.behaviours {
        behaviour.attributes = BehaviourAttributes::default();
    }
    out
}

// ---------------------------------------------------------------------------
// independent composite oracle
// ---------------------------------------------------------------------------

fn constant(value: &AttributeValue) -> f64 {
    match value {
        AttributeValue::Constant(v) => *v,
        AttributeValue::Expression(_) => panic!("oracle only handles constant attributes"),
    }
}

/// Entity complexity recomputed from first principles.
pub fn oracle_entity_complexity(behaviour: &BehaviourDef, collective_required: bool) -> f64 {
    let a = &behaviour.attributes;
    let intelligence = (constant(&a.ability) + constant(&a.flexibility)) / 2.0;
    let communication = (constant(&a.signal_in) + constant(&a.signal_out)) / 2.0;
    let collective = if collective_required {
        (constant(&a.coordination) + constant(&a.cooperation) + communication) / 3.0
    } else {
        1.0
    };
    (intelligence + collective) / 2.0
}

/// Recursive brute-force composite, walking the raw requires list and
/// re-deriving the alternative-group runs on the fly.
pub fn oracle_composite(
    spec: &ProblemSpec,
    behaviour: &str,
    selection: &Selection,
    collective_required: bool,
) -> f64 {
    let definition = spec.behaviour(behaviour).unwrap();
    let mut parts = vec![oracle_entity_complexity(definition, collective_required)];
    let mut group_index = 0;
    let mut in_run = false;
    for entry in &definition.requires {
        match entry.combinator {
            Combinator::Required => {
                if in_run {
                    group_index += 1;
                    in_run = false;
                }
                parts.push(oracle_composite(
                    spec,
                    &entry.target,
                    selection,
                    collective_required,
                ));
            }
            Combinator::Alternative => {
                if !in_run {
                    // one slot per run, filled by the selected member
                    let chosen = selection.get(behaviour, group_index).unwrap_or_else(|| {
                        panic!("missing selection for {behaviour}/{group_index}")
                    });
                    parts.push(oracle_composite(
                        spec,
                        chosen,
                        selection,
                        collective_required,
                    ));
                    in_run = true;
                }
            }
        }
    }
    parts.iter().sum::<f64>() / parts.len() as f64
}

/// Every decision point reachable from `root`, with its member names.
pub fn decision_points(spec: &ProblemSpec, root: &str) -> Vec<(String, usize, Vec<String>)> {
    let mut points = BTreeMap::new();
    let mut stack = vec![root.to_string()];
    let mut visited = std::collections::HashSet::new();
    while let Some(name) = stack.pop() {
        if !visited.insert(name.clone()) {
            continue;
        }
        let definition = spec.behaviour(&name).unwrap();
        let mut group_index = 0;
        let mut run: Vec<String> = Vec::new();
        for entry in &definition.requires {
            match entry.combinator {
                Combinator::Required => {
                    if !run.is_empty() {
                        points.insert((name.clone(), group_index), std::mem::take(&mut run));
                        group_index += 1;
                    }
                    stack.push(entry.target.clone());
                }
                Combinator::Alternative => {
                    run.push(entry.target.clone());
                    stack.push(entry.target.clone());
                }
            }
        }
        if !run.is_empty() {
            points.insert((name.clone(), group_index), run);
        }
    }
    points
        .into_iter()
        .map(|((behaviour, group), members)| (behaviour, group, members))
        .collect()
}

/// Every combination of alternative selections reachable from `root`, or
/// None when there are more than `cap`.
pub fn enumerate_selections(spec: &ProblemSpec, root: &str, cap: usize) -> Option<Vec<Selection>> {
    let points = decision_points(spec, root);
    let mut total = 1usize;
    for (_, _, members) in &points {
        total = total.checked_mul(members.len())?;
        if total > cap {
            return None;
        }
    }
    let mut selections = vec![Selection::new()];
    for (behaviour, group, members) in &points {
        let mut next = Vec::with_capacity(selections.len() * members.len());
        for base in &selections {
            for member in members {
                next.push(base.clone().with(behaviour.clone(), *group, member.clone()));
            }
        }
        selections = next;
    }
    Some(selections)
}

/// Pick one member per decision point, driven by an index pool.
pub fn selection_from_indices(
    spec: &ProblemSpec,
    root: &str,
    picks: &[prop::sample::Index],
) -> Selection {
    let mut selection = Selection::new();
    for (k, (behaviour, group, members)) in decision_points(spec, root).into_iter().enumerate() {
        let pick = picks[k % picks.len()].index(members.len());
        selection.choose(behaviour, group, members[pick].clone());
    }
    selection
}

pub fn any_attribute() -> impl Strategy<Value = AttributeName> {
    prop::sample::select(ATTRIBUTE_NAMES.to_vec())
}

// ---------------------------------------------------------------------------
// independent expression oracle
// ---------------------------------------------------------------------------

/// Plain recursive evaluation of the public expression tree, written apart
/// from the library's evaluator. Errors collapse to None: unbound variables,
/// division by zero and non-finite intermediates.
pub fn oracle_eval(expr: &Expression, ctx: &EvaluationContext) -> Option<f64> {
    let value = match expr {
        Expression::Literal(v) => *v,
        Expression::Variable(name) => ctx.get(name)?,
        Expression::Negate(inner) => -oracle_eval(inner, ctx)?,
        Expression::Binary(op, lhs, rhs) => {
            let l = oracle_eval(lhs, ctx)?;
            let r = oracle_eval(rhs, ctx)?;
            match op {
                BinaryOp::Add => l + r,
                BinaryOp::Sub => l - r,
                BinaryOp::Mul => l * r,
                BinaryOp::Div => {
                    if r == 0.0 {
                        return None;
                    }
                    l / r
                }
            }
        }
        Expression::Call(function, args) => match function {
            Function::Min => oracle_eval(&args[0], ctx)?.min(oracle_eval(&args[1], ctx)?),
            Function::Max => oracle_eval(&args[0], ctx)?.max(oracle_eval(&args[1], ctx)?),
            Function::Clamp => oracle_eval(&args[0], ctx)?.clamp(0.0, 1.0),
        },
    };
    value.is_finite().then_some(value)
}

/// Random expression trees over a small variable pool. Literals are kept
/// non-negative so the printed form re-tokenizes identically.
pub fn arb_expr() -> impl Strategy<Value = Expression> {
    let leaf = prop_oneof![
        (0u32..=2000).prop_map(|v| Expression::Literal(f64::from(v) / 1000.0)),
        prop::sample::select(vec!["a", "b", "k", "x"])
            .prop_map(|name| Expression::Variable(name.to_string())),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expression::Negate(Box::new(e))),
            (
                prop::sample::select(vec![
                    BinaryOp::Add,
                    BinaryOp::Sub,
                    BinaryOp::Mul,
                    BinaryOp::Div
                ]),
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, l, r)| Expression::Binary(
                    op,
                    Box::new(l),
                    Box::new(r)
                )),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expression::Call(Function::Min, vec![a, b])),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expression::Call(Function::Max, vec![a, b])),
            inner.prop_map(|e| Expression::Call(Function::Clamp, vec![e])),
        ]
    })
}

pub fn expr_context() -> impl Strategy<Value = EvaluationContext> {
    (unit_value(), unit_value(), 0u32..=10, unit_value()).prop_map(|(a, b, k, x)| {
        EvaluationContext::new()
            .with("a", a)
            .with("b", b)
            .with("k", f64::from(k))
            .with("x", x)
    })
}
