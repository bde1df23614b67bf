//! In-memory model of a behaviour script: tasks, the problem behaviour set,
//! entity types and instances, and behaviour definitions with their six
//! attributes and nested sub-behaviour requirements.
//!
//! Everything here is immutable after construction, so a spec can be shared
//! freely across concurrent evaluations. [`validate_spec`] checks the
//! cross-reference invariants (names resolve, no duplicate behaviour types,
//! the requires graph is acyclic) and [`resolve_behaviour_graph`] produces a
//! topological order with sub-behaviours before the behaviours that require
//! them.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::expr::{EvaluationContext, Expression, ExpressionEvalError};

/// The six canonical attribute names, in display order.
pub const ATTRIBUTE_NAMES: [AttributeName; 6] = [
    AttributeName::Ability,
    AttributeName::Flexibility,
    AttributeName::Coordination,
    AttributeName::Cooperation,
    AttributeName::SignalIn,
    AttributeName::SignalOut,
];

/// Identifies one of the six behaviour attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AttributeName {
    Ability,
    Flexibility,
    Coordination,
    Cooperation,
    SignalIn,
    SignalOut,
}

impl AttributeName {
    pub fn as_str(self) -> &'static str {
        match self {
            AttributeName::Ability => "ability",
            AttributeName::Flexibility => "flexibility",
            AttributeName::Coordination => "coordination",
            AttributeName::Cooperation => "cooperation",
            AttributeName::SignalIn => "signal_in",
            AttributeName::SignalOut => "signal_out",
        }
    }

    /// Parses the canonical lowercase names; case-insensitive.
    pub fn parse(text: &str) -> Option<AttributeName> {
        match text.to_ascii_lowercase().as_str() {
            "ability" => Some(AttributeName::Ability),
            "flexibility" => Some(AttributeName::Flexibility),
            "coordination" => Some(AttributeName::Coordination),
            "cooperation" => Some(AttributeName::Cooperation),
            "signal_in" => Some(AttributeName::SignalIn),
            "signal_out" => Some(AttributeName::SignalOut),
            _ => None,
        }
    }
}

impl fmt::Display for AttributeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An attribute value: either a unit-interval constant or an expression
/// evaluated against a context (and clamped to the unit interval).
#[derive(Debug, Clone, PartialEq)]
pub enum AttributeValue {
    Constant(f64),
    Expression(Expression),
}

impl AttributeValue {
    pub const ONE: AttributeValue = AttributeValue::Constant(1.0);

    /// Resolve to a number in `[0, 1]`.
    pub fn resolve(&self, ctx: &EvaluationContext) -> Result<f64, ExpressionEvalError> {
        match self {
            AttributeValue::Constant(value) => Ok(*value),
            AttributeValue::Expression(expr) => expr.evaluate(ctx),
        }
    }

    /// Shift the value by `delta`, clamped to `[0, 1]`. Constants are shifted
    /// arithmetically; expressions are wrapped in `clamp(expr + delta)` so the
    /// offset applies whatever the context binds.
    pub fn offset(&self, delta: f64) -> AttributeValue {
        match self {
            AttributeValue::Constant(value) => {
                AttributeValue::Constant((value + delta).clamp(0.0, 1.0))
            }
            AttributeValue::Expression(expr) => {
                let shifted = Expression::Binary(
                    crate::expr::BinaryOp::Add,
                    Box::new(expr.clone()),
                    Box::new(Expression::Literal(delta)),
                );
                AttributeValue::Expression(Expression::Call(
                    crate::expr::Function::Clamp,
                    vec![shifted],
                ))
            }
        }
    }
}

/// The six attributes of one behaviour type. Omitted attributes default to
/// constant 1.0, which leaves the overall score unaffected.
#[derive(Debug, Clone, PartialEq)]
pub struct BehaviourAttributes {
    pub ability: AttributeValue,
    pub flexibility: AttributeValue,
    pub coordination: AttributeValue,
    pub cooperation: AttributeValue,
    pub signal_in: AttributeValue,
    pub signal_out: AttributeValue,
}

impl Default for BehaviourAttributes {
    fn default() -> Self {
        Self {
            ability: AttributeValue::ONE,
            flexibility: AttributeValue::ONE,
            coordination: AttributeValue::ONE,
            cooperation: AttributeValue::ONE,
            signal_in: AttributeValue::ONE,
            signal_out: AttributeValue::ONE,
        }
    }
}

impl BehaviourAttributes {
    pub fn get(&self, name: AttributeName) -> &AttributeValue {
        match name {
            AttributeName::Ability => &self.ability,
            AttributeName::Flexibility => &self.flexibility,
            AttributeName::Coordination => &self.coordination,
            AttributeName::Cooperation => &self.cooperation,
            AttributeName::SignalIn => &self.signal_in,
            AttributeName::SignalOut => &self.signal_out,
        }
    }

    pub fn get_mut(&mut self, name: AttributeName) -> &mut AttributeValue {
        match name {
            AttributeName::Ability => &mut self.ability,
            AttributeName::Flexibility => &mut self.flexibility,
            AttributeName::Coordination => &mut self.coordination,
            AttributeName::Cooperation => &mut self.cooperation,
            AttributeName::SignalIn => &mut self.signal_in,
            AttributeName::SignalOut => &mut self.signal_out,
        }
    }
}

/// `And` entries are individually compulsory; each maximal consecutive run of
/// `Or` entries forms one alternative group of which exactly one member fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combinator {
    Required,
    Alternative,
}

/// Whether a rule sub-behaviour supports or prevents its parent. In metric
/// mode a `Negative` entry still contributes its score positively; in
/// simulation mode a fired `Negative` blocks the parent action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Positive,
    Negative,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarity::Positive => f.write_str("positive"),
            Polarity::Negative => f.write_str("negative"),
        }
    }
}

/// One entry in a behaviour's `Requires` list.
#[derive(Debug, Clone, PartialEq)]
pub struct SubBehaviourRef {
    pub target: String,
    pub combinator: Combinator,
    pub polarity: Polarity,
}

impl SubBehaviourRef {
    pub fn required(target: impl Into<String>) -> Self {
        Self {
            target: target.into(),
            combinator: Combinator::Required,
            polarity: Polarity::Positive,
        }
    }

    pub fn alternative(target: impl Into<String>, polarity: Polarity) -> Self {
        Self {
            target: target.into(),
            combinator: Combinator::Alternative,
            polarity,
        }
    }
}

/// A behaviour's requires list, split into compulsory entries and alternative
/// groups. Group indices are stable and 0-based; scenario selections refer to
/// them.
#[derive(Debug, Clone, PartialEq)]
pub enum RequiresSlot<'a> {
    Required(&'a SubBehaviourRef),
    Alternatives(Vec<&'a SubBehaviourRef>),
}

/// One behaviour type: a name, six attributes and an ordered requires list.
#[derive(Debug, Clone, PartialEq)]
pub struct BehaviourDef {
    pub type_name: String,
    pub attributes: BehaviourAttributes,
    pub requires: Vec<SubBehaviourRef>,
}

impl BehaviourDef {
    pub fn new(type_name: impl Into<String>) -> Self {
        Self {
            type_name: type_name.into(),
            attributes: BehaviourAttributes::default(),
            requires: Vec::new(),
        }
    }

    /// The requires list with consecutive `Or` runs collapsed into groups,
    /// preserving order.
    pub fn requires_slots(&self) -> Vec<RequiresSlot<'_>> {
        let mut slots = Vec::new();
        let mut run: Vec<&SubBehaviourRef> = Vec::new();
        for entry in &self.requires {
            match entry.combinator {
                Combinator::Alternative => run.push(entry),
                Combinator::Required => {
                    if !run.is_empty() {
                        slots.push(RequiresSlot::Alternatives(std::mem::take(&mut run)));
                    }
                    slots.push(RequiresSlot::Required(entry));
                }
            }
        }
        if !run.is_empty() {
            slots.push(RequiresSlot::Alternatives(run));
        }
        slots
    }

    /// The alternative groups only, indexed as scenario selections expect.
    pub fn alternative_groups(&self) -> Vec<Vec<&SubBehaviourRef>> {
        self.requires_slots()
            .into_iter()
            .filter_map(|slot| match slot {
                RequiresSlot::Alternatives(group) => Some(group),
                RequiresSlot::Required(_) => None,
            })
            .collect()
    }
}

/// One requirement of a task: a behaviour type and how many agents perform it.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskRequirement {
    pub behaviour_type: String,
    pub entity_number: u32,
}

/// A problem task, listing the behaviours it requires.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemTask {
    pub name: String,
    pub requirements: Vec<TaskRequirement>,
}

/// An agent class, defined by the behaviour types it can perform.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityType {
    pub name: String,
    pub behaviour_types: Vec<String>,
}

/// A named agent instance of some entity type.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityInstance {
    pub name: String,
    pub entity_type: String,
}

/// A `Problem_Entities` entry: an entity type with a headcount. Parsed and
/// kept for round-tripping, but evaluation only uses the per-requirement
/// entity numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityPoolEntry {
    pub entity_type: String,
    pub entity_number: u32,
}

/// A fully parsed behaviour script.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub tasks: Vec<ProblemTask>,
    pub problem_behaviour_set: Vec<String>,
    pub problem_entities: Vec<EntityPoolEntry>,
    pub entity_types: Vec<EntityType>,
    pub entities: Vec<EntityInstance>,
    pub behaviours: Vec<BehaviourDef>,
    /// Problem complexity (PC). At most 1.0; kept as the PSL divisor.
    pub problem_complexity: f64,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        Self {
            tasks: Vec::new(),
            problem_behaviour_set: Vec::new(),
            problem_entities: Vec::new(),
            entity_types: Vec::new(),
            entities: Vec::new(),
            behaviours: Vec::new(),
            problem_complexity: 1.0,
        }
    }
}

impl ProblemSpec {
    pub fn behaviour(&self, type_name: &str) -> Option<&BehaviourDef> {
        self.behaviours.iter().find(|b| b.type_name == type_name)
    }

    pub fn behaviour_mut(&mut self, type_name: &str) -> Option<&mut BehaviourDef> {
        self.behaviours
            .iter_mut()
            .find(|b| b.type_name == type_name)
    }

    pub fn task(&self, name: &str) -> Option<&ProblemTask> {
        self.tasks.iter().find(|t| t.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => f.write_str("error"),
            Severity::Warning => f.write_str("warning"),
        }
    }
}

/// One validation finding, locating the offending element by path.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub severity: Severity,
    /// Where in the spec the violation sits, e.g. `tasks/Roam Countryside`.
    pub path: String,
    /// The rule that was broken, e.g. `unresolved behaviour type`.
    pub rule: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} at {}: {}",
            self.severity, self.rule, self.path, self.message
        )
    }
}

/// Outcome of [`validate_spec`]: empty iff every invariant holds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub items: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{item}")?;
        }
        Ok(())
    }
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.items
            .iter()
            .any(|item| item.severity == Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Violation> {
        self.items
            .iter()
            .filter(|item| item.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Violation> {
        self.items
            .iter()
            .filter(|item| item.severity == Severity::Warning)
    }

    fn error(&mut self, path: impl Into<String>, rule: &str, message: impl Into<String>) {
        self.items.push(Violation {
            severity: Severity::Error,
            path: path.into(),
            rule: rule.to_string(),
            message: message.into(),
        });
    }

    fn warning(&mut self, path: impl Into<String>, rule: &str, message: impl Into<String>) {
        self.items.push(Violation {
            severity: Severity::Warning,
            path: path.into(),
            rule: rule.to_string(),
            message: message.into(),
        });
    }
}

/// Check every cross-reference invariant of the spec. Deterministic: the same
/// spec always yields the identical report, in spec order.
pub fn validate_spec(spec: &ProblemSpec) -> ValidationReport {
    let mut report = ValidationReport::default();

    let behaviour_names: HashSet<&str> = spec
        .behaviours
        .iter()
        .map(|b| b.type_name.as_str())
        .collect();
    let entity_type_names: HashSet<&str> =
        spec.entity_types.iter().map(|t| t.name.as_str()).collect();

    // Duplicate behaviour type names: different types of the same behaviour
    // must get distinct definitions.
    let mut seen = HashSet::new();
    for behaviour in &spec.behaviours {
        if !seen.insert(behaviour.type_name.as_str()) {
            report.error(
                format!("behaviours/{}", behaviour.type_name),
                "duplicate behaviour type",
                format!("behaviour type `{}` is defined twice", behaviour.type_name),
            );
        }
    }

    let mut seen_entity_types = HashSet::new();
    for entity_type in &spec.entity_types {
        if !seen_entity_types.insert(entity_type.name.as_str()) {
            report.error(
                format!("entity_types/{}", entity_type.name),
                "duplicate entity type",
                format!("entity type `{}` is defined twice", entity_type.name),
            );
        }
    }

    let unresolved = |report: &mut ValidationReport, path: String, name: &str| {
        report.error(
            path,
            "unresolved behaviour type",
            format!("behaviour type `{name}` has no definition"),
        );
    };

    for task in &spec.tasks {
        for requirement in &task.requirements {
            let path = format!("tasks/{}/{}", task.name, requirement.behaviour_type);
            if !behaviour_names.contains(requirement.behaviour_type.as_str()) {
                unresolved(&mut report, path.clone(), &requirement.behaviour_type);
            }
            if requirement.entity_number == 0 {
                report.error(
                    path,
                    "entity number out of range",
                    "Entity_Number must be at least 1",
                );
            }
        }
    }

    for name in &spec.problem_behaviour_set {
        if !behaviour_names.contains(name.as_str()) {
            unresolved(&mut report, format!("problem_behaviour_set/{name}"), name);
        }
    }

    for entity_type in &spec.entity_types {
        for name in &entity_type.behaviour_types {
            if !behaviour_names.contains(name.as_str()) {
                unresolved(
                    &mut report,
                    format!("entity_types/{}/{}", entity_type.name, name),
                    name,
                );
            }
        }
    }

    for behaviour in &spec.behaviours {
        for entry in &behaviour.requires {
            if !behaviour_names.contains(entry.target.as_str()) {
                unresolved(
                    &mut report,
                    format!(
                        "behaviours/{}/requires/{}",
                        behaviour.type_name, entry.target
                    ),
                    &entry.target,
                );
            }
        }
        // a group member is selected by name, so the name must pick one entry
        for (group_index, group) in behaviour.alternative_groups().into_iter().enumerate() {
            let mut members = HashSet::new();
            for member in group {
                if !members.insert(member.target.as_str()) {
                    report.error(
                        format!(
                            "behaviours/{}/requires/{}",
                            behaviour.type_name, member.target
                        ),
                        "ambiguous alternative group",
                        format!(
                            "`{}` appears twice in alternative group {} of `{}`",
                            member.target, group_index, behaviour.type_name
                        ),
                    );
                }
            }
        }
    }

    for entity in &spec.entities {
        if !entity_type_names.contains(entity.entity_type.as_str()) {
            report.error(
                format!("entities/{}", entity.name),
                "unresolved entity type",
                format!("entity type `{}` has no definition", entity.entity_type),
            );
        }
    }

    for cycle in find_cycles(spec) {
        report.error(
            format!("behaviours/{}", cycle[0]),
            "cycle",
            format!("cycle: {}", cycle.join("\u{2192}")),
        );
    }

    // The task may ask for more agents than the script instantiates.
    let instance_count = spec.entities.len() as u32;
    if !spec.entities.is_empty() || !spec.entity_types.is_empty() {
        for task in &spec.tasks {
            for requirement in &task.requirements {
                if requirement.entity_number > instance_count {
                    report.warning(
                        format!("tasks/{}/{}", task.name, requirement.behaviour_type),
                        "fewer entity instances than required",
                        format!(
                            "requirement needs {} agents but only {} entity instances are declared",
                            requirement.entity_number, instance_count
                        ),
                    );
                    break;
                }
            }
        }
    }

    report
}

/// Behaviour definitions in dependency order: every sub-behaviour appears
/// before any behaviour that requires it.
#[derive(Debug, Clone)]
pub struct BehaviourGraph<'a> {
    order: Vec<&'a BehaviourDef>,
}

impl<'a> BehaviourGraph<'a> {
    pub fn order(&self) -> &[&'a BehaviourDef] {
        &self.order
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cycle: {}", path.join("\u{2192}"))]
pub struct CycleError {
    /// The offending cycle, first node repeated at the end.
    pub path: Vec<String>,
}

/// Topologically sort the behaviour definitions by their requires edges.
/// Rejects cyclic specs with the cycle path.
pub fn resolve_behaviour_graph(spec: &ProblemSpec) -> Result<BehaviourGraph<'_>, CycleError> {
    if let Some(cycle) = find_cycles(spec).into_iter().next() {
        return Err(CycleError { path: cycle });
    }

    let index: HashMap<&str, usize> = spec
        .behaviours
        .iter()
        .enumerate()
        .map(|(i, b)| (b.type_name.as_str(), i))
        .collect();

    // Kahn's algorithm over requirer -> required edges, emitting required
    // nodes first. Ready nodes are taken in definition order so the result is
    // deterministic.
    let n = spec.behaviours.len();
    let mut pending: Vec<usize> = vec![0; n];
    let mut dependants: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, behaviour) in spec.behaviours.iter().enumerate() {
        let mut targets = BTreeSet::new();
        for entry in &behaviour.requires {
            if let Some(&j) = index.get(entry.target.as_str()) {
                targets.insert(j);
            }
        }
        pending[i] = targets.len();
        for j in targets {
            dependants[j].push(i);
        }
    }

    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| pending[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(&i) = ready.iter().next() {
        ready.remove(&i);
        order.push(&spec.behaviours[i]);
        for &dependant in &dependants[i] {
            pending[dependant] -= 1;
            if pending[dependant] == 0 {
                ready.insert(dependant);
            }
        }
    }
    debug_assert_eq!(order.len(), n);

    Ok(BehaviourGraph { order })
}

/// Find every distinct requires cycle, one path per strongly connected
/// component, in definition order of the component's first member.
fn find_cycles(spec: &ProblemSpec) -> Vec<Vec<String>> {
    let index: HashMap<&str, usize> = spec
        .behaviours
        .iter()
        .enumerate()
        .map(|(i, b)| (b.type_name.as_str(), i))
        .collect();
    let n = spec.behaviours.len();
    let mut edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, behaviour) in spec.behaviours.iter().enumerate() {
        for entry in &behaviour.requires {
            if let Some(&j) = index.get(entry.target.as_str()) {
                if !edges[i].contains(&j) {
                    edges[i].push(j);
                }
            }
        }
    }

    let components = strongly_connected_components(n, &edges);
    let mut cycles = Vec::new();
    for component in components {
        let members: HashSet<usize> = component.iter().copied().collect();
        let is_cyclic = component.len() > 1 || component.iter().any(|&i| edges[i].contains(&i));
        if !is_cyclic {
            continue;
        }
        let start = *component.iter().min().unwrap();
        if let Some(path) = cycle_path_from(start, &edges, &members) {
            cycles.push(
                path.into_iter()
                    .map(|i| spec.behaviours[i].type_name.clone())
                    .collect(),
            );
        }
    }
    cycles.sort();
    cycles
}

/// Shortest path start -> ... -> start inside one strongly connected
/// component, found by BFS.
fn cycle_path_from(
    start: usize,
    edges: &[Vec<usize>],
    members: &HashSet<usize>,
) -> Option<Vec<usize>> {
    let mut previous: HashMap<usize, usize> = HashMap::new();
    let mut queue = std::collections::VecDeque::new();
    for &next in &edges[start] {
        if members.contains(&next) {
            if next == start {
                return Some(vec![start, start]);
            }
            if let std::collections::hash_map::Entry::Vacant(slot) = previous.entry(next) {
                slot.insert(start);
                queue.push_back(next);
            }
        }
    }
    while let Some(node) = queue.pop_front() {
        for &next in &edges[node] {
            if !members.contains(&next) {
                continue;
            }
            if next == start {
                let mut path = vec![start, node];
                let mut current = node;
                while let Some(&prev) = previous.get(&current) {
                    if prev == start {
                        break;
                    }
                    path.push(prev);
                    current = prev;
                }
                path.reverse();
                // reversed path runs start-ward; rebuild as start..=start
                let mut cycle = vec![start];
                cycle.extend(path.iter().filter(|&&p| p != start));
                cycle.push(start);
                return Some(cycle);
            }
            if let std::collections::hash_map::Entry::Vacant(slot) = previous.entry(next) {
                slot.insert(node);
                queue.push_back(next);
            }
        }
    }
    None
}

fn strongly_connected_components(n: usize, edges: &[Vec<usize>]) -> Vec<Vec<usize>> {
    // Iterative Tarjan.
    #[derive(Clone, Copy)]
    struct NodeState {
        index: Option<usize>,
        lowlink: usize,
        on_stack: bool,
    }

    let mut state = vec![
        NodeState {
            index: None,
            lowlink: 0,
            on_stack: false,
        };
        n
    ];
    let mut stack = Vec::new();
    let mut components = Vec::new();
    let mut counter = 0;

    for root in 0..n {
        if state[root].index.is_some() {
            continue;
        }
        // call stack entries: (node, next-edge cursor)
        let mut call_stack = vec![(root, 0usize)];
        state[root].index = Some(counter);
        state[root].lowlink = counter;
        state[root].on_stack = true;
        stack.push(root);
        counter += 1;

        while let Some(&(node, cursor)) = call_stack.last() {
            if cursor < edges[node].len() {
                call_stack.last_mut().unwrap().1 += 1;
                let next = edges[node][cursor];
                if state[next].index.is_none() {
                    state[next].index = Some(counter);
                    state[next].lowlink = counter;
                    state[next].on_stack = true;
                    stack.push(next);
                    counter += 1;
                    call_stack.push((next, 0));
                } else if state[next].on_stack {
                    state[node].lowlink = state[node].lowlink.min(state[next].index.unwrap());
                }
            } else {
                call_stack.pop();
                if let Some(&(parent, _)) = call_stack.last() {
                    state[parent].lowlink = state[parent].lowlink.min(state[node].lowlink);
                }
                if state[node].lowlink == state[node].index.unwrap() {
                    let mut component = Vec::new();
                    loop {
                        let member = stack.pop().unwrap();
                        state[member].on_stack = false;
                        component.push(member);
                        if member == node {
                            break;
                        }
                    }
                    component.sort_unstable();
                    components.push(component);
                }
            }
        }
    }
    components
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_behaviour_spec() -> ProblemSpec {
        let mut parent = BehaviourDef::new("Parent");
        parent.requires.push(SubBehaviourRef::required("Child"));
        ProblemSpec {
            tasks: vec![ProblemTask {
                name: "Task".into(),
                requirements: vec![TaskRequirement {
                    behaviour_type: "Parent".into(),
                    entity_number: 1,
                }],
            }],
            problem_behaviour_set: vec!["Parent".into()],
            behaviours: vec![parent, BehaviourDef::new("Child")],
            ..ProblemSpec::default()
        }
    }

    #[test]
    fn well_formed_spec_validates_cleanly() {
        let report = validate_spec(&two_behaviour_spec());
        assert!(report.is_empty(), "unexpected findings: {:?}", report.items);
    }

    #[test]
    fn dangling_task_reference_is_reported() {
        let mut spec = two_behaviour_spec();
        spec.tasks[0].requirements[0].behaviour_type = "Fly".into();
        let report = validate_spec(&spec);
        let errors: Vec<_> = report.errors().collect();
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].rule, "unresolved behaviour type");
        assert!(errors[0].message.contains("Fly"));
    }

    #[test]
    fn two_node_cycle_is_reported_once() {
        let mut spec = two_behaviour_spec();
        spec.behaviours[0].type_name = "A".into();
        spec.behaviours[0].requires = vec![SubBehaviourRef::required("B")];
        spec.behaviours[1].type_name = "B".into();
        spec.behaviours[1].requires = vec![SubBehaviourRef::required("A")];
        spec.tasks[0].requirements[0].behaviour_type = "A".into();
        spec.problem_behaviour_set = vec!["A".into()];

        let report = validate_spec(&spec);
        let errors: Vec<_> = report.errors().collect();
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].message, "cycle: A\u{2192}B\u{2192}A");
    }

    #[test]
    fn self_cycle_is_reported() {
        let mut spec = two_behaviour_spec();
        spec.behaviours[1].requires = vec![SubBehaviourRef::required("Child")];
        let report = validate_spec(&spec);
        assert_eq!(report.errors().count(), 1);
        assert!(report.items[0].message.contains("Child\u{2192}Child"));
    }

    #[test]
    fn duplicate_behaviour_types_are_rejected() {
        let mut spec = two_behaviour_spec();
        spec.behaviours.push(BehaviourDef::new("Child"));
        let report = validate_spec(&spec);
        assert_eq!(report.errors().count(), 1);
        assert_eq!(report.items[0].rule, "duplicate behaviour type");
    }

    #[test]
    fn repeated_target_in_one_group_is_rejected() {
        let mut spec = two_behaviour_spec();
        spec.behaviours[0].requires = vec![
            SubBehaviourRef::alternative("Child", Polarity::Positive),
            SubBehaviourRef::alternative("Child", Polarity::Negative),
        ];
        let report = validate_spec(&spec);
        assert_eq!(report.errors().count(), 1);
        assert_eq!(report.items[0].rule, "ambiguous alternative group");
    }

    #[test]
    fn zero_entity_number_is_rejected() {
        let mut spec = two_behaviour_spec();
        spec.tasks[0].requirements[0].entity_number = 0;
        let report = validate_spec(&spec);
        assert!(report
            .errors()
            .any(|v| v.rule == "entity number out of range"));
    }

    #[test]
    fn missing_instances_warn() {
        let mut spec = two_behaviour_spec();
        spec.entity_types.push(EntityType {
            name: "Agent".into(),
            behaviour_types: vec!["Parent".into()],
        });
        spec.entities.push(EntityInstance {
            name: "Agent 1".into(),
            entity_type: "Agent".into(),
        });
        spec.tasks[0].requirements[0].entity_number = 3;
        let report = validate_spec(&spec);
        assert!(!report.has_errors());
        assert_eq!(report.warnings().count(), 1);
    }

    #[test]
    fn validation_is_deterministic() {
        let mut spec = two_behaviour_spec();
        spec.tasks[0].requirements[0].behaviour_type = "Fly".into();
        spec.behaviours[1].requires = vec![SubBehaviourRef::required("Gone")];
        assert_eq!(validate_spec(&spec), validate_spec(&spec));
    }

    #[test]
    fn topological_order_puts_children_first() {
        let mut leave = BehaviourDef::new("Leave Settlement");
        leave.requires.push(SubBehaviourRef::alternative(
            "Barbarians Not Close",
            Polarity::Positive,
        ));
        leave.requires.push(SubBehaviourRef::alternative(
            "Barbarians Close",
            Polarity::Negative,
        ));
        let spec = ProblemSpec {
            behaviours: vec![
                leave,
                BehaviourDef::new("Barbarians Not Close"),
                BehaviourDef::new("Barbarians Close"),
            ],
            ..ProblemSpec::default()
        };
        let graph = resolve_behaviour_graph(&spec).unwrap();
        let names: Vec<&str> = graph.order().iter().map(|b| b.type_name.as_str()).collect();
        let leave_pos = names.iter().position(|n| *n == "Leave Settlement").unwrap();
        for barbarian in ["Barbarians Not Close", "Barbarians Close"] {
            let pos = names.iter().position(|n| *n == barbarian).unwrap();
            assert!(
                pos < leave_pos,
                "{barbarian} should precede Leave Settlement"
            );
        }
    }

    #[test]
    fn singleton_behaviour_orders_trivially() {
        let spec = ProblemSpec {
            behaviours: vec![BehaviourDef::new("Solo")],
            ..ProblemSpec::default()
        };
        let graph = resolve_behaviour_graph(&spec).unwrap();
        assert_eq!(graph.order().len(), 1);
    }

    #[test]
    fn cyclic_spec_is_rejected_with_path() {
        let mut spec = two_behaviour_spec();
        spec.behaviours[1].requires = vec![SubBehaviourRef::required("Parent")];
        let err = resolve_behaviour_graph(&spec).unwrap_err();
        assert_eq!(err.path.first(), err.path.last());
        assert_eq!(err.path.len(), 3);
    }

    #[test]
    fn consecutive_or_entries_form_one_group() {
        let mut b = BehaviourDef::new("B");
        b.requires = vec![
            SubBehaviourRef::alternative("A1", Polarity::Positive),
            SubBehaviourRef::alternative("A2", Polarity::Positive),
            SubBehaviourRef::required("R"),
            SubBehaviourRef::alternative("A3", Polarity::Positive),
        ];
        let slots = b.requires_slots();
        assert_eq!(slots.len(), 3);
        assert!(matches!(&slots[0], RequiresSlot::Alternatives(g) if g.len() == 2));
        assert!(matches!(&slots[1], RequiresSlot::Required(r) if r.target == "R"));
        assert!(matches!(&slots[2], RequiresSlot::Alternatives(g) if g.len() == 1));
        assert_eq!(b.alternative_groups().len(), 2);
    }
}
