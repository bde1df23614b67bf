//! Acceptance suite: one test per exit criterion, each printing a pass/fail
//! line. Run with `cargo test --test acceptance -- --nocapture` to see the
//! lines as they go.

mod support;

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use behaviour_metric::metric::Evaluator;
use behaviour_metric::model::AttributeValue;
use behaviour_metric::sensitivity::{sweep, SweepPlan};
use behaviour_metric::simulation::Scenario;
use behaviour_metric::xml::{parse_script, serialize_script};
use behaviour_metric::EvaluationContext;

use support::*;

fn asset(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../assets")
        .join(name);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

fn ctx() -> EvaluationContext {
    EvaluationContext::new()
}

/// Run one criterion, printing exactly one `PASS`/`FAIL` line for it.
fn criterion(number: u32, label: &str, check: impl FnOnce()) {
    let outcome = catch_unwind(AssertUnwindSafe(check));
    match &outcome {
        Ok(()) => println!("acceptance criterion {number}: PASS - {label}"),
        Err(_) => println!("acceptance criterion {number}: FAIL - {label}"),
    }
    if let Err(cause) = outcome {
        std::panic::resume_unwind(cause);
    }
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

#[test]
fn criterion_1_garrison_metric_bounds() {
    criterion(
        1,
        "garrison metric: compulsory 1, upper 1, lower 0.9375 in under a second",
        || {
            let started = Instant::now();
            let parsed = parse_script(&asset("legion2.xml")).unwrap();
            let evaluator = Evaluator::new(&parsed.spec).unwrap();
            let result = evaluator.evaluate_task("Roam Countryside", &ctx()).unwrap();
            assert!((result.bounds.compulsory - 1.0).abs() < 1e-9);
            assert!((result.bounds.upper - 1.0).abs() < 1e-9);
            assert!((result.bounds.lower - 0.9375).abs() < 1e-9);
            assert_eq!(format!("{:.3}", result.bounds.lower), "0.938");
            assert!(started.elapsed().as_secs_f64() < 1.0);
        },
    );
}

#[test]
fn criterion_2_garrison_camera_variant() {
    criterion(
        2,
        "garrison with x-ray camera: every bound exactly 1",
        || {
            let parsed = parse_script(&asset("legion2_camera.xml")).unwrap();
            let evaluator = Evaluator::new(&parsed.spec).unwrap();
            let result = evaluator.evaluate_task("Roam Countryside", &ctx()).unwrap();
            assert_eq!(result.bounds.compulsory, 1.0);
            assert_eq!(result.bounds.upper, 1.0);
            assert_eq!(result.bounds.lower, 1.0);
        },
    );
}

#[test]
fn criterion_3_garrison_simulation() {
    criterion(
        3,
        "garrison simulation: 0 blocked / 0.75 / 1 / 0 blocked",
        || {
            let present = Scenario::parse(&asset("scenarios/barbarians_present.scenario")).unwrap();
            let not_present =
                Scenario::parse(&asset("scenarios/barbarians_not_present.scenario")).unwrap();

            let parsed = parse_script(&asset("legion2.xml")).unwrap();
            let evaluator = Evaluator::new(&parsed.spec).unwrap();
            let blocked = evaluator
                .run_scenario("Roam Countryside", &present, &ctx())
                .unwrap();
            assert_eq!(blocked.outcomes[0].evaluation, 0.0);
            assert!(blocked.outcomes[0].blocked);
            let free = evaluator
                .run_scenario("Roam Countryside", &not_present, &ctx())
                .unwrap();
            assert_eq!(free.outcomes[0].evaluation, 0.75);
            assert!(!free.outcomes[0].blocked);

            let parsed = parse_script(&asset("legion2_camera.xml")).unwrap();
            let evaluator = Evaluator::new(&parsed.spec).unwrap();
            let free = evaluator
                .run_scenario("Roam Countryside", &not_present, &ctx())
                .unwrap();
            assert_eq!(free.outcomes[0].evaluation, 1.0);
            let blocked = evaluator
                .run_scenario("Roam Countryside", &present, &ctx())
                .unwrap();
            assert_eq!(blocked.outcomes[0].evaluation, 0.0);
            assert!(blocked.outcomes[0].blocked);
        },
    );
}

#[test]
fn criterion_4_tile_world_agent_counts() {
    criterion(
        4,
        "tile world: one agent scores 1, two agents score 0.75",
        || {
            let parsed = parse_script(&asset("tileworld.xml")).unwrap();

            let mut solo = parsed.spec.clone();
            for requirement in &mut solo.tasks[0].requirements {
                requirement.entity_number = 1;
            }
            let result = Evaluator::new(&solo)
                .unwrap()
                .evaluate_task("Move Tile into Hole", &ctx())
                .unwrap();
            assert_eq!(result.bounds.compulsory, 1.0);
            assert_eq!(result.bounds.lower, 1.0);
            assert_eq!(result.bounds.upper, 1.0);

            let result = Evaluator::new(&parsed.spec)
                .unwrap()
                .evaluate_task("Move Tile into Hole", &ctx())
                .unwrap();
            assert_eq!(result.bounds.compulsory, 0.75);
            assert_eq!(result.bounds.lower, 0.75);
            assert_eq!(result.bounds.upper, 0.75);
        },
    );
}

#[test]
fn criterion_5_tile_world_worse_behaviours() {
    criterion(
        5,
        "worse behaviours: 0.75 / 0.75 / lower strictly below, near 0.74",
        || {
            let parsed = parse_script(&asset("tileworld_worse.xml")).unwrap();
            let result = Evaluator::new(&parsed.spec)
                .unwrap()
                .evaluate_task("Move Tile into Hole", &ctx())
                .unwrap();
            assert_eq!(result.bounds.compulsory, 0.75);
            assert_eq!(result.bounds.upper, 0.75);
            assert!(result.bounds.lower < 0.75);
            assert!((result.bounds.lower - 0.74).abs() < 0.05);
        },
    );
}

#[test]
fn criterion_6_sweep_shapes() {
    criterion(
        6,
        "sweeps: one behaviour frees the upper bound, both lift the lower to 0.75",
        || {
            let parsed = parse_script(&asset("tileworld_worse.xml")).unwrap();
            let task = "Move Tile into Hole";

            // (a) stepping one worse behaviour: lower pinned by the other,
            // upper non-decreasing and eventually above 0.75
            let plan = SweepPlan::parse(&asset("plans/one_behaviour.plan")).unwrap();
            let table = sweep(&parsed.spec, task, &plan, &ctx()).unwrap();
            assert_eq!(table.rows.len(), 11);
            let base_lower = table.rows[0].lower;
            for row in &table.rows {
                assert_eq!(row.lower, base_lower);
            }
            for pair in table.rows.windows(2) {
                assert!(pair[1].upper >= pair[0].upper);
            }
            assert!(table.rows.last().unwrap().upper > 0.75);

            // (b) stepping both: the lower bound climbs and then stops at
            // exactly 0.75, where the unchanged behaviours hold it
            let plan = SweepPlan::parse(&asset("plans/both_behaviours.plan")).unwrap();
            let table = sweep(&parsed.spec, task, &plan, &ctx()).unwrap();
            assert!(table.rows[0].lower < 0.75);
            for pair in table.rows.windows(2) {
                assert!(pair[1].lower >= pair[0].lower);
                assert!(pair[1].lower <= 0.75);
            }
            assert_eq!(table.rows.last().unwrap().lower, 0.75);
        },
    );
}

#[test]
fn criterion_7_property_suites() {
    criterion(
        7,
        "property suites over random scripts and expressions",
        || {
            let started = Instant::now();
            let ctx = ctx();

            // monotonicity of all three scores, 500 random scripts
            runner(500)
                .run(
                    &(
                        arb_spec(),
                        any::<prop::sample::Index>(),
                        any_attribute(),
                        1u32..=50,
                    ),
                    |(spec, which, attribute, bump)| {
                        let base = Evaluator::new(&spec)
                            .unwrap()
                            .evaluate_task(TASK, &ctx)
                            .unwrap();
                        let mut raised = spec.clone();
                        let i = which.index(raised.behaviours.len());
                        let slot = raised.behaviours[i].attributes.get_mut(attribute);
                        *slot = slot.offset(f64::from(bump) / 100.0);
                        let after = Evaluator::new(&raised)
                            .unwrap()
                            .evaluate_task(TASK, &ctx)
                            .unwrap();
                        prop_assert!(after.bounds.compulsory >= base.bounds.compulsory - 1e-12);
                        prop_assert!(after.bounds.lower >= base.bounds.lower - 1e-12);
                        prop_assert!(after.bounds.upper >= base.bounds.upper - 1e-12);
                        // and the ordering invariant on both evaluations
                        prop_assert!(base.bounds.lower <= base.bounds.upper + 1e-12);
                        prop_assert!(after.bounds.lower <= after.bounds.upper + 1e-12);
                        Ok(())
                    },
                )
                .unwrap();

            // bounds equal brute-force enumeration over alternative selections
            runner(200)
                .run(&arb_spec(), |spec| {
                    let evaluator = Evaluator::new(&spec).unwrap();
                    for requirement in &spec.tasks[0].requirements {
                        let root = &requirement.behaviour_type;
                        let Some(selections) = enumerate_selections(&spec, root, 256) else {
                            continue;
                        };
                        let bounds = evaluator.bounded_scores(root, &ctx, true).unwrap();
                        let mut worst = f64::INFINITY;
                        let mut best = f64::NEG_INFINITY;
                        for selection in &selections {
                            let value = evaluator
                                .behaviour_composite(root, selection, &ctx, true)
                                .unwrap();
                            worst = worst.min(value);
                            best = best.max(value);
                        }
                        prop_assert!((bounds.lower - worst).abs() <= 1e-12);
                        prop_assert!((bounds.upper - best).abs() <= 1e-12);
                    }
                    Ok(())
                })
                .unwrap();

            // solo agents are blind to collective attributes
            runner(200)
                .run(
                    &(
                        arb_spec(),
                        prop::collection::vec(prop::array::uniform4(0u32..=100), 7),
                    ),
                    |(spec, scrambles)| {
                        let mut solo = spec.clone();
                        for requirement in &mut solo.tasks[0].requirements {
                            requirement.entity_number = 1;
                        }
                        let mut scrambled = solo.clone();
                        for (behaviour, values) in scrambled.behaviours.iter_mut().zip(&scrambles) {
                            behaviour.attributes.coordination =
                                AttributeValue::Constant(f64::from(values[0]) / 100.0);
                            behaviour.attributes.cooperation =
                                AttributeValue::Constant(f64::from(values[1]) / 100.0);
                            behaviour.attributes.signal_in =
                                AttributeValue::Constant(f64::from(values[2]) / 100.0);
                            behaviour.attributes.signal_out =
                                AttributeValue::Constant(f64::from(values[3]) / 100.0);
                        }
                        let a = Evaluator::new(&solo)
                            .unwrap()
                            .evaluate_task(TASK, &ctx)
                            .unwrap();
                        let b = Evaluator::new(&scrambled)
                            .unwrap()
                            .evaluate_task(TASK, &ctx)
                            .unwrap();
                        prop_assert_eq!(a, b);
                        Ok(())
                    },
                )
                .unwrap();

            // all attributes 1.0 scores exactly 1.0 everywhere
            runner(200)
                .run(&arb_spec(), |spec| {
                    let result = Evaluator::new(&saturate(&spec))
                        .unwrap()
                        .evaluate_task(TASK, &ctx)
                        .unwrap();
                    prop_assert_eq!(result.bounds.compulsory, 1.0);
                    prop_assert_eq!(result.bounds.lower, 1.0);
                    prop_assert_eq!(result.bounds.upper, 1.0);
                    prop_assert_eq!(result.psl, 1.0);
                    Ok(())
                })
                .unwrap();

            // parse/serialize round-trip on 50 generated scripts
            runner(50)
                .run(&arb_spec(), |spec| {
                    let reparsed = parse_script(&serialize_script(&spec)).unwrap();
                    prop_assert_eq!(reparsed.spec, spec);
                    Ok(())
                })
                .unwrap();

            // expression engine against the independent recursive oracle
            runner(100)
                .run(&(arb_expr(), expr_context()), |(expr, bindings)| {
                    match (expr.evaluate_raw(&bindings), oracle_eval(&expr, &bindings)) {
                        (Ok(value), Some(expected)) => {
                            prop_assert!((value - expected).abs() <= 1e-12);
                        }
                        (Err(_), None) => {}
                        (ours, oracle) => {
                            prop_assert!(false, "disagreement: {ours:?} vs {oracle:?}")
                        }
                    }
                    Ok(())
                })
                .unwrap();

            assert!(started.elapsed().as_secs_f64() < 60.0);
        },
    );
}
