//! Parse, validate and evaluate XML behaviour scripts for multi-agent
//! problems.
//!
//! A behaviour script describes a problem as tasks over named behaviour
//! types, where each behaviour carries six unit-interval attributes (ability,
//! flexibility, coordination, cooperation and the two communication signals)
//! and may require other behaviours, either compulsorily or as alternatives
//! of which one fires per action. From that description the library computes:
//!
//! * the success-likelihood metric — per-behaviour derived scores, composite
//!   scores over nested sub-behaviours, compulsory/lower/upper bounds across
//!   alternative groups, agent-count averaging and the final PSL
//!   ([`metric`]);
//! * rule/decision simulation, where positive or negative alternatives fire
//!   and can block their parent action ([`simulation`]);
//! * increment sweeps and critical-variable ranking ([`sensitivity`]).
//!
//! Attribute values are constants by default but may be small arithmetic
//! expressions over named variables ([`expr`]), so the same script serves
//! both static modelling and dynamic simulation runs.
//!
//! ```
//! use behaviour_metric::{parse_script, Evaluator, EvaluationContext};
//!
//! let script = r#"
//!     <Problem_Spec>
//!       <Problem>
//!         <Problem_Complexity>
//!           <Problem_Task Name="Move Tile into Hole">
//!             <Problem_Behaviour Type="Move Tile">
//!               <Entity_Number>2</Entity_Number>
//!             </Problem_Behaviour>
//!           </Problem_Task>
//!         </Problem_Complexity>
//!       </Problem>
//!       <Behaviours>
//!         <Behaviour Type="Move Tile">
//!           <Collective>
//!             <Coordination>0.5</Coordination>
//!             <Cooperation>0.5</Cooperation>
//!             <Communication>
//!               <Signal_In>0.5</Signal_In>
//!               <Signal_Out>0.5</Signal_Out>
//!             </Communication>
//!           </Collective>
//!         </Behaviour>
//!       </Behaviours>
//!     </Problem_Spec>
//! "#;
//!
//! let parsed = parse_script(script).unwrap();
//! let evaluator = Evaluator::new(&parsed.spec).unwrap();
//! let result = evaluator
//!     .evaluate_task("Move Tile into Hole", &EvaluationContext::new())
//!     .unwrap();
//! assert_eq!(result.bounds.compulsory, 0.75);
//! ```

pub mod expr;
pub mod metric;
pub mod model;
pub mod sensitivity;
pub mod simulation;
pub mod xml;

pub use crate::expr::{EvaluationContext, Expression};
pub use crate::metric::{
    BoundedScore, DerivedScores, EvaluationError, EvaluationResult, Evaluator, Selection,
    TaskEvaluation,
};
pub use crate::model::{
    resolve_behaviour_graph, validate_spec, AttributeName, AttributeValue, BehaviourDef,
    ProblemSpec, ValidationReport,
};
pub use crate::sensitivity::{
    rank_critical_variables, sweep, SweepPlan, SweepTable, SweepTarget, VariableImpact,
};
pub use crate::simulation::{DecisionOutcome, Scenario, ScenarioReport};
pub use crate::xml::{parse_script, serialize_script, ParseError, ParseWarning, ParsedScript};
