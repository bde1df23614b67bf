//! Parse and serialize the XML behaviour-script format.
//!
//! The element vocabulary follows the published script layout: a
//! `Problem_Spec` root holding the `Problem` (tasks, behaviour set, entity
//! pool), the `Entities` instance list, the `Entity_Types` catalogue and the
//! `Behaviours` definitions. Parsing is strict — unknown elements or
//! attributes, malformed numbers and out-of-range constants are fatal, each
//! reported with the element path and source position. The one tolerated
//! legacy quirk is the misspelt `Entitiy_Types` element, which is accepted
//! with a warning because existing scripts contain it.
//!
//! Two extensions over the published layout:
//!
//! * any attribute element may carry `Kind="Expression"` and hold expression
//!   text instead of a number;
//! * `Problem_Complexity` may carry a `Value` attribute for the complexity
//!   divisor (default 1.0).

use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::expr::Expression;
use crate::model::{
    AttributeValue, BehaviourAttributes, BehaviourDef, Combinator, EntityInstance, EntityPoolEntry,
    EntityType, Polarity, ProblemSpec, ProblemTask, SubBehaviourRef, TaskRequirement,
};

/// Fatal parse failure. The script cannot be loaded.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path} (line {line}, column {column}): {message}")]
pub struct ParseError {
    /// Slash-separated element path, names in brackets where available.
    pub path: String,
    pub line: u32,
    pub column: u32,
    pub message: String,
}

/// Non-fatal finding; the script loads anyway.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// A parsed script plus any warnings raised while reading it.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedScript {
    pub spec: ProblemSpec,
    pub warnings: Vec<ParseWarning>,
}

/// Parse an XML behaviour script.
pub fn parse_script(text: &str) -> Result<ParsedScript, ParseError> {
    let doc = roxmltree::Document::parse(text).map_err(|e| ParseError {
        path: "/".to_string(),
        line: e.pos().row,
        column: e.pos().col,
        message: format!("malformed XML: {e}"),
    })?;

    let mut warnings = Vec::new();
    let root = doc.root_element();
    let root_path = "/Problem_Spec".to_string();
    if root.tag_name().name() != "Problem_Spec" {
        return Err(error_at(
            &doc,
            root,
            "/",
            "expected root element Problem_Spec",
        ));
    }
    expect_no_attributes(&doc, root, &root_path)?;

    let mut spec = ProblemSpec::default();
    let mut seen_problem = false;
    let mut seen_entities = false;
    let mut seen_entity_types = false;
    let mut seen_behaviours = false;

    for child in element_children(&doc, root, &root_path)? {
        let name = child.tag_name().name();
        let path = child_path(&root_path, child);
        match name {
            "Problem" => {
                reject_duplicate(&doc, child, &path, &mut seen_problem)?;
                parse_problem(&doc, child, &path, &mut spec)?;
            }
            "Entities" => {
                reject_duplicate(&doc, child, &path, &mut seen_entities)?;
                expect_no_attributes(&doc, child, &path)?;
                for entity in element_children(&doc, child, &path)? {
                    let entity_path = child_path(&path, entity);
                    expect_element(&doc, entity, &entity_path, "Entity")?;
                    expect_attributes(&doc, entity, &entity_path, &["Name", "Type"])?;
                    spec.entities.push(EntityInstance {
                        name: require_attribute(&doc, entity, &entity_path, "Name")?,
                        entity_type: require_attribute(&doc, entity, &entity_path, "Type")?,
                    });
                }
            }
            "Entity_Types" | "Entitiy_Types" => {
                if name == "Entitiy_Types" {
                    warnings.push(ParseWarning {
                        path: path.clone(),
                        message: "legacy misspelling `Entitiy_Types` accepted; \
                                  the canonical element name is `Entity_Types`"
                            .to_string(),
                    });
                }
                reject_duplicate(&doc, child, &path, &mut seen_entity_types)?;
                expect_no_attributes(&doc, child, &path)?;
                parse_entity_types(&doc, child, &path, &mut spec)?;
            }
            "Behaviours" => {
                reject_duplicate(&doc, child, &path, &mut seen_behaviours)?;
                expect_no_attributes(&doc, child, &path)?;
                for node in element_children(&doc, child, &path)? {
                    let behaviour_path = child_path(&path, node);
                    expect_element(&doc, node, &behaviour_path, "Behaviour")?;
                    spec.behaviours
                        .push(parse_behaviour(&doc, node, &behaviour_path)?);
                }
            }
            other => {
                return Err(error_at(
                    &doc,
                    child,
                    &path,
                    format!("unknown element `{other}`"),
                ));
            }
        }
    }

    Ok(ParsedScript { spec, warnings })
}

fn parse_problem(
    doc: &roxmltree::Document,
    node: roxmltree::Node,
    path: &str,
    spec: &mut ProblemSpec,
) -> Result<(), ParseError> {
    expect_no_attributes(doc, node, path)?;
    let mut seen_complexity = false;
    let mut seen_set = false;
    let mut seen_pool = false;

    for child in element_children(doc, node, path)? {
        let child_path = child_path(path, child);
        match child.tag_name().name() {
            "Problem_Complexity" => {
                reject_duplicate(doc, child, &child_path, &mut seen_complexity)?;
                expect_attributes(doc, child, &child_path, &["Value"])?;
                if let Some(raw) = child.attribute("Value") {
                    spec.problem_complexity =
                        parse_unit_number(doc, child, &child_path, raw, "Value attribute")?;
                }
                for task in element_children(doc, child, &child_path)? {
                    let task_path = self::child_path(&child_path, task);
                    expect_element(doc, task, &task_path, "Problem_Task")?;
                    spec.tasks.push(parse_task(doc, task, &task_path)?);
                }
            }
            "Problem_Behaviour_Set" => {
                reject_duplicate(doc, child, &child_path, &mut seen_set)?;
                expect_no_attributes(doc, child, &child_path)?;
                for entry in element_children(doc, child, &child_path)? {
                    let entry_path = self::child_path(&child_path, entry);
                    expect_element(doc, entry, &entry_path, "Behaviour")?;
                    expect_attributes(doc, entry, &entry_path, &["Type"])?;
                    spec.problem_behaviour_set.push(require_attribute(
                        doc,
                        entry,
                        &entry_path,
                        "Type",
                    )?);
                }
            }
            "Problem_Entities" => {
                reject_duplicate(doc, child, &child_path, &mut seen_pool)?;
                expect_no_attributes(doc, child, &child_path)?;
                for entry in element_children(doc, child, &child_path)? {
                    let entry_path = self::child_path(&child_path, entry);
                    expect_element(doc, entry, &entry_path, "Entity")?;
                    expect_attributes(doc, entry, &entry_path, &["Type"])?;
                    let entity_type = require_attribute(doc, entry, &entry_path, "Type")?;
                    let entity_number = parse_entity_number(doc, entry, &entry_path)?;
                    spec.problem_entities.push(EntityPoolEntry {
                        entity_type,
                        entity_number,
                    });
                }
            }
            other => {
                return Err(error_at(
                    doc,
                    child,
                    &child_path,
                    format!("unknown element `{other}`"),
                ));
            }
        }
    }
    Ok(())
}

fn parse_task(
    doc: &roxmltree::Document,
    node: roxmltree::Node,
    path: &str,
) -> Result<ProblemTask, ParseError> {
    expect_attributes(doc, node, path, &["Name"])?;
    let name = require_attribute(doc, node, path, "Name")?;
    let mut requirements = Vec::new();
    for child in element_children(doc, node, path)? {
        let child_path = child_path(path, child);
        expect_element(doc, child, &child_path, "Problem_Behaviour")?;
        expect_attributes(doc, child, &child_path, &["Type"])?;
        let behaviour_type = require_attribute(doc, child, &child_path, "Type")?;
        let entity_number = parse_entity_number(doc, child, &child_path)?;
        requirements.push(TaskRequirement {
            behaviour_type,
            entity_number,
        });
    }
    Ok(ProblemTask { name, requirements })
}

/// Reads an optional `Entity_Number` child; absent means 1.
fn parse_entity_number(
    doc: &roxmltree::Document,
    node: roxmltree::Node,
    path: &str,
) -> Result<u32, ParseError> {
    let mut entity_number = 1;
    let mut seen = false;
    for child in element_children(doc, node, path)? {
        let child_path = child_path(path, child);
        expect_element(doc, child, &child_path, "Entity_Number")?;
        reject_duplicate(doc, child, &child_path, &mut seen)?;
        expect_no_attributes(doc, child, &child_path)?;
        let text = text_content(doc, child, &child_path)?;
        entity_number = text.trim().parse().map_err(|_| {
            error_at(
                doc,
                child,
                &child_path,
                format!("`{}` is not a non-negative integer", text.trim()),
            )
        })?;
    }
    Ok(entity_number)
}

fn parse_entity_types(
    doc: &roxmltree::Document,
    node: roxmltree::Node,
    path: &str,
    spec: &mut ProblemSpec,
) -> Result<(), ParseError> {
    for entity_type in element_children(doc, node, path)? {
        let type_path = child_path(path, entity_type);
        expect_element(doc, entity_type, &type_path, "Entity_Type")?;
        expect_attributes(doc, entity_type, &type_path, &["Name"])?;
        let name = require_attribute(doc, entity_type, &type_path, "Name")?;
        let mut behaviour_types = Vec::new();
        for behaviours in element_children(doc, entity_type, &type_path)? {
            let behaviours_path = child_path(&type_path, behaviours);
            expect_element(doc, behaviours, &behaviours_path, "Entity_Behaviours")?;
            expect_no_attributes(doc, behaviours, &behaviours_path)?;
            for entry in element_children(doc, behaviours, &behaviours_path)? {
                let entry_path = child_path(&behaviours_path, entry);
                expect_element(doc, entry, &entry_path, "Behaviour_Type")?;
                expect_no_attributes(doc, entry, &entry_path)?;
                behaviour_types.push(text_content(doc, entry, &entry_path)?.trim().to_string());
            }
        }
        spec.entity_types.push(EntityType {
            name,
            behaviour_types,
        });
    }
    Ok(())
}

fn parse_behaviour(
    doc: &roxmltree::Document,
    node: roxmltree::Node,
    path: &str,
) -> Result<BehaviourDef, ParseError> {
    expect_attributes(doc, node, path, &["Type"])?;
    let type_name = require_attribute(doc, node, path, "Type")?;
    let mut attributes = BehaviourAttributes::default();
    let mut requires = Vec::new();

    let mut seen_ability = false;
    let mut seen_flexibility = false;
    let mut seen_collective = false;
    let mut seen_requires = false;

    for child in element_children(doc, node, path)? {
        let child_path = child_path(path, child);
        match child.tag_name().name() {
            "Ability" => {
                reject_duplicate(doc, child, &child_path, &mut seen_ability)?;
                attributes.ability = parse_attribute_value(doc, child, &child_path)?;
            }
            "Flexibility" => {
                reject_duplicate(doc, child, &child_path, &mut seen_flexibility)?;
                attributes.flexibility = parse_attribute_value(doc, child, &child_path)?;
            }
            "Collective" => {
                reject_duplicate(doc, child, &child_path, &mut seen_collective)?;
                parse_collective(doc, child, &child_path, &mut attributes)?;
            }
            "Requires" => {
                reject_duplicate(doc, child, &child_path, &mut seen_requires)?;
                expect_no_attributes(doc, child, &child_path)?;
                for entry in element_children(doc, child, &child_path)? {
                    let entry_path = self::child_path(&child_path, entry);
                    expect_element(doc, entry, &entry_path, "Behaviour_Type")?;
                    requires.push(parse_sub_behaviour(doc, entry, &entry_path)?);
                }
            }
            other => {
                return Err(error_at(
                    doc,
                    child,
                    &child_path,
                    format!("unknown element `{other}`"),
                ));
            }
        }
    }

    Ok(BehaviourDef {
        type_name,
        attributes,
        requires,
    })
}

fn parse_collective(
    doc: &roxmltree::Document,
    node: roxmltree::Node,
    path: &str,
    attributes: &mut BehaviourAttributes,
) -> Result<(), ParseError> {
    expect_no_attributes(doc, node, path)?;
    let mut seen_coordination = false;
    let mut seen_cooperation = false;
    let mut seen_communication = false;
    for child in element_children(doc, node, path)? {
        let child_path = child_path(path, child);
        match child.tag_name().name() {
            "Coordination" => {
                reject_duplicate(doc, child, &child_path, &mut seen_coordination)?;
                attributes.coordination = parse_attribute_value(doc, child, &child_path)?;
            }
            "Cooperation" => {
                reject_duplicate(doc, child, &child_path, &mut seen_cooperation)?;
                attributes.cooperation = parse_attribute_value(doc, child, &child_path)?;
            }
            "Communication" => {
                reject_duplicate(doc, child, &child_path, &mut seen_communication)?;
                expect_no_attributes(doc, child, &child_path)?;
                let mut seen_in = false;
                let mut seen_out = false;
                for signal in element_children(doc, child, &child_path)? {
                    let signal_path = self::child_path(&child_path, signal);
                    match signal.tag_name().name() {
                        "Signal_In" => {
                            reject_duplicate(doc, signal, &signal_path, &mut seen_in)?;
                            attributes.signal_in =
                                parse_attribute_value(doc, signal, &signal_path)?;
                        }
                        "Signal_Out" => {
                            reject_duplicate(doc, signal, &signal_path, &mut seen_out)?;
                            attributes.signal_out =
                                parse_attribute_value(doc, signal, &signal_path)?;
                        }
                        other => {
                            return Err(error_at(
                                doc,
                                signal,
                                &signal_path,
                                format!("unknown element `{other}`"),
                            ));
                        }
                    }
                }
            }
            other => {
                return Err(error_at(
                    doc,
                    child,
                    &child_path,
                    format!("unknown element `{other}`"),
                ));
            }
        }
    }
    Ok(())
}

fn parse_sub_behaviour(
    doc: &roxmltree::Document,
    node: roxmltree::Node,
    path: &str,
) -> Result<SubBehaviourRef, ParseError> {
    expect_attributes(doc, node, path, &["AndOr", "PosNeg"])?;
    let combinator = match node.attribute("AndOr") {
        None | Some("And") => Combinator::Required,
        Some("Or") => Combinator::Alternative,
        Some(other) => {
            return Err(error_at(
                doc,
                node,
                path,
                format!("AndOr must be `And` or `Or`, found `{other}`"),
            ));
        }
    };
    let polarity = match node.attribute("PosNeg") {
        None | Some("Positive") => Polarity::Positive,
        Some("Negative") => Polarity::Negative,
        Some(other) => {
            return Err(error_at(
                doc,
                node,
                path,
                format!("PosNeg must be `Positive` or `Negative`, found `{other}`"),
            ));
        }
    };
    let target = text_content(doc, node, path)?.trim().to_string();
    if target.is_empty() {
        return Err(error_at(doc, node, path, "missing behaviour type name"));
    }
    Ok(SubBehaviourRef {
        target,
        combinator,
        polarity,
    })
}

/// An attribute element: constant text by default, expression text under
/// `Kind="Expression"`.
fn parse_attribute_value(
    doc: &roxmltree::Document,
    node: roxmltree::Node,
    path: &str,
) -> Result<AttributeValue, ParseError> {
    expect_attributes(doc, node, path, &["Kind"])?;
    let text = text_content(doc, node, path)?;
    match node.attribute("Kind") {
        None | Some("Constant") => {
            let value = parse_unit_number(doc, node, path, text.trim(), "attribute value")?;
            Ok(AttributeValue::Constant(value))
        }
        Some("Expression") => {
            let expr = Expression::parse(text.trim())
                .map_err(|e| error_at(doc, node, path, e.to_string()))?;
            Ok(AttributeValue::Expression(expr))
        }
        Some(other) => Err(error_at(
            doc,
            node,
            path,
            format!("Kind must be `Constant` or `Expression`, found `{other}`"),
        )),
    }
}

fn parse_unit_number(
    doc: &roxmltree::Document,
    node: roxmltree::Node,
    path: &str,
    raw: &str,
    what: &str,
) -> Result<f64, ParseError> {
    let value: f64 = raw
        .parse()
        .map_err(|_| error_at(doc, node, path, format!("{what} `{raw}` is not a number")))?;
    if !(0.0..=1.0).contains(&value) {
        return Err(error_at(
            doc,
            node,
            path,
            format!("{what} {value} is outside [0, 1]"),
        ));
    }
    Ok(value)
}

fn element_children<'a, 'input>(
    doc: &roxmltree::Document<'input>,
    node: roxmltree::Node<'a, 'input>,
    path: &str,
) -> Result<Vec<roxmltree::Node<'a, 'input>>, ParseError> {
    let mut elements = Vec::new();
    for child in node.children() {
        if child.is_element() {
            elements.push(child);
        } else if child.is_text() {
            let text = child.text().unwrap_or_default();
            if !text.trim().is_empty() {
                return Err(error_at(
                    doc,
                    child,
                    path,
                    format!("unexpected text `{}`", text.trim()),
                ));
            }
        }
    }
    Ok(elements)
}

fn expect_element(
    doc: &roxmltree::Document,
    node: roxmltree::Node,
    path: &str,
    expected: &str,
) -> Result<(), ParseError> {
    if node.tag_name().name() == expected {
        Ok(())
    } else {
        Err(error_at(
            doc,
            node,
            path,
            format!(
                "unknown element `{}` (expected `{expected}`)",
                node.tag_name().name()
            ),
        ))
    }
}

fn expect_no_attributes(
    doc: &roxmltree::Document,
    node: roxmltree::Node,
    path: &str,
) -> Result<(), ParseError> {
    expect_attributes(doc, node, path, &[])
}

fn expect_attributes(
    doc: &roxmltree::Document,
    node: roxmltree::Node,
    path: &str,
    allowed: &[&str],
) -> Result<(), ParseError> {
    for attribute in node.attributes() {
        if !allowed.contains(&attribute.name()) {
            return Err(error_at(
                doc,
                node,
                path,
                format!("unknown attribute `{}`", attribute.name()),
            ));
        }
    }
    Ok(())
}

fn require_attribute(
    doc: &roxmltree::Document,
    node: roxmltree::Node,
    path: &str,
    name: &str,
) -> Result<String, ParseError> {
    node.attribute(name)
        .map(str::to_string)
        .ok_or_else(|| error_at(doc, node, path, format!("missing attribute `{name}`")))
}

fn text_content<'a>(
    doc: &roxmltree::Document,
    node: roxmltree::Node<'a, '_>,
    path: &str,
) -> Result<&'a str, ParseError> {
    if node.children().any(|c| c.is_element()) {
        return Err(error_at(
            doc,
            node,
            path,
            "expected text content, found elements",
        ));
    }
    match node.text() {
        Some(text) if !text.trim().is_empty() => Ok(text),
        _ => Err(error_at(doc, node, path, "missing text content")),
    }
}

fn reject_duplicate(
    doc: &roxmltree::Document,
    node: roxmltree::Node,
    path: &str,
    seen: &mut bool,
) -> Result<(), ParseError> {
    if *seen {
        return Err(error_at(
            doc,
            node,
            path,
            format!("duplicate element `{}`", node.tag_name().name()),
        ));
    }
    *seen = true;
    Ok(())
}

fn child_path(parent: &str, node: roxmltree::Node) -> String {
    let name = node.tag_name().name();
    let label = node
        .attribute("Name")
        .or_else(|| node.attribute("Type"))
        .map(|v| format!("[{v}]"))
        .unwrap_or_default();
    format!("{parent}/{name}{label}")
}

fn error_at(
    doc: &roxmltree::Document,
    node: roxmltree::Node,
    path: &str,
    message: impl Into<String>,
) -> ParseError {
    let pos = doc.text_pos_at(node.range().start);
    ParseError {
        path: path.to_string(),
        line: pos.row,
        column: pos.col,
        message: message.into(),
    }
}

/// Serialize a spec to canonical XML. Defaulted attributes are written out
/// explicitly, canonical element spellings are always used, and parsing the
/// output reproduces the spec structurally.
pub fn serialize_script(spec: &ProblemSpec) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<Problem_Spec>\n");

    out.push_str("  <Problem>\n");
    let _ = writeln!(
        out,
        "    <Problem_Complexity Value=\"{}\">",
        spec.problem_complexity
    );
    for task in &spec.tasks {
        let _ = writeln!(
            out,
            "      <Problem_Task Name=\"{}\">",
            escape_attr(&task.name)
        );
        for requirement in &task.requirements {
            let _ = writeln!(
                out,
                "        <Problem_Behaviour Type=\"{}\">",
                escape_attr(&requirement.behaviour_type)
            );
            let _ = writeln!(
                out,
                "          <Entity_Number>{}</Entity_Number>",
                requirement.entity_number
            );
            out.push_str("        </Problem_Behaviour>\n");
        }
        out.push_str("      </Problem_Task>\n");
    }
    out.push_str("    </Problem_Complexity>\n");

    if !spec.problem_behaviour_set.is_empty() {
        out.push_str("    <Problem_Behaviour_Set>\n");
        for name in &spec.problem_behaviour_set {
            let _ = writeln!(out, "      <Behaviour Type=\"{}\"/>", escape_attr(name));
        }
        out.push_str("    </Problem_Behaviour_Set>\n");
    }

    if !spec.problem_entities.is_empty() {
        out.push_str("    <Problem_Entities>\n");
        for entry in &spec.problem_entities {
            let _ = writeln!(
                out,
                "      <Entity Type=\"{}\">",
                escape_attr(&entry.entity_type)
            );
            let _ = writeln!(
                out,
                "        <Entity_Number>{}</Entity_Number>",
                entry.entity_number
            );
            out.push_str("      </Entity>\n");
        }
        out.push_str("    </Problem_Entities>\n");
    }
    out.push_str("  </Problem>\n");

    if !spec.entities.is_empty() {
        out.push_str("  <Entities>\n");
        for entity in &spec.entities {
            let _ = writeln!(
                out,
                "    <Entity Name=\"{}\" Type=\"{}\"/>",
                escape_attr(&entity.name),
                escape_attr(&entity.entity_type)
            );
        }
        out.push_str("  </Entities>\n");
    }

    if !spec.entity_types.is_empty() {
        out.push_str("  <Entity_Types>\n");
        for entity_type in &spec.entity_types {
            let _ = writeln!(
                out,
                "    <Entity_Type Name=\"{}\">",
                escape_attr(&entity_type.name)
            );
            out.push_str("      <Entity_Behaviours>\n");
            for name in &entity_type.behaviour_types {
                let _ = writeln!(
                    out,
                    "        <Behaviour_Type>{}</Behaviour_Type>",
                    escape_text(name)
                );
            }
            out.push_str("      </Entity_Behaviours>\n");
            out.push_str("    </Entity_Type>\n");
        }
        out.push_str("  </Entity_Types>\n");
    }

    if !spec.behaviours.is_empty() {
        out.push_str("  <Behaviours>\n");
        for behaviour in &spec.behaviours {
            write_behaviour(&mut out, behaviour);
        }
        out.push_str("  </Behaviours>\n");
    }

    out.push_str("</Problem_Spec>\n");
    out
}

fn write_behaviour(out: &mut String, behaviour: &BehaviourDef) {
    let _ = writeln!(
        out,
        "    <Behaviour Type=\"{}\">",
        escape_attr(&behaviour.type_name)
    );
    write_attribute(out, "      ", "Ability", &behaviour.attributes.ability);
    write_attribute(
        out,
        "      ",
        "Flexibility",
        &behaviour.attributes.flexibility,
    );
    out.push_str("      <Collective>\n");
    write_attribute(
        out,
        "        ",
        "Coordination",
        &behaviour.attributes.coordination,
    );
    write_attribute(
        out,
        "        ",
        "Cooperation",
        &behaviour.attributes.cooperation,
    );
    out.push_str("        <Communication>\n");
    write_attribute(
        out,
        "          ",
        "Signal_In",
        &behaviour.attributes.signal_in,
    );
    write_attribute(
        out,
        "          ",
        "Signal_Out",
        &behaviour.attributes.signal_out,
    );
    out.push_str("        </Communication>\n");
    out.push_str("      </Collective>\n");
    if !behaviour.requires.is_empty() {
        out.push_str("      <Requires>\n");
        for entry in &behaviour.requires {
            let and_or = match entry.combinator {
                Combinator::Required => "And",
                Combinator::Alternative => "Or",
            };
            let pos_neg = match entry.polarity {
                Polarity::Positive => "Positive",
                Polarity::Negative => "Negative",
            };
            let _ = writeln!(
                out,
                "        <Behaviour_Type AndOr=\"{and_or}\" PosNeg=\"{pos_neg}\">{}</Behaviour_Type>",
                escape_text(&entry.target)
            );
        }
        out.push_str("      </Requires>\n");
    }
    out.push_str("    </Behaviour>\n");
}

fn write_attribute(out: &mut String, indent: &str, element: &str, value: &AttributeValue) {
    match value {
        AttributeValue::Constant(v) => {
            let _ = writeln!(out, "{indent}<{element}>{v}</{element}>");
        }
        AttributeValue::Expression(expr) => {
            let _ = writeln!(
                out,
                "{indent}<{element} Kind=\"Expression\">{}</{element}>",
                escape_text(&expr.to_string())
            );
        }
    }
}

fn escape_text(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn escape_attr(text: &str) -> String {
    escape_text(text).replace('"', "&quot;")
}
