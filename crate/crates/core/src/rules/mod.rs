//! Externalized business rules: the three rule kinds, their XML dialect and
//! the queryable repository.

pub mod expr;
mod repository;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::xml::{parse_document, Element, XmlWriter};

pub use expr::{CmpOp, Env, Expr, Scalar};
pub use repository::{RuleRepository, SharedRuleRepository};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Behavior,
    Constraint,
    Discovery,
}

impl RuleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleKind::Behavior => "behavior",
            RuleKind::Constraint => "constraint",
            RuleKind::Discovery => "discovery",
        }
    }

    pub fn parse(s: &str) -> Result<RuleKind> {
        match s {
            "behavior" => Ok(RuleKind::Behavior),
            "constraint" => Ok(RuleKind::Constraint),
            "discovery" => Ok(RuleKind::Discovery),
            other => Err(Error::UnknownRuleKind(other.to_string())),
        }
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Temporal relation between two task events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// The consequent may only start after the antecedent has ended.
    Precedence,
    /// Every end of the antecedent is eventually followed by an end of the consequent.
    Response,
    /// The two tasks never both run.
    Exclusive,
}

impl Relation {
    pub const ALL: [Relation; 3] = [Relation::Precedence, Relation::Response, Relation::Exclusive];

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Precedence => "precedence",
            Relation::Response => "response",
            Relation::Exclusive => "exclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorRule {
    pub id: String,
    pub relation: Relation,
    pub antecedent: String,
    pub consequent: String,
}

impl BehaviorRule {
    pub fn new(
        id: impl Into<String>,
        relation: Relation,
        antecedent: impl Into<String>,
        consequent: impl Into<String>,
    ) -> Self {
        BehaviorRule {
            id: id.into(),
            relation,
            antecedent: antecedent.into(),
            consequent: consequent.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Pre,
    Post,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Pre => "pre",
            Mode::Post => "post",
        }
    }
}

/// Reaction taken when a constraint's condition evaluates to false.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnFalse {
    Fault,
    Skip,
    Reroute(String),
}

impl OnFalse {
    pub fn as_str(&self) -> &'static str {
        match self {
            OnFalse::Fault => "fault",
            OnFalse::Skip => "skip",
            OnFalse::Reroute(_) => "reroute",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintRule {
    pub id: String,
    pub task: String,
    pub mode: Mode,
    pub condition: Expr,
    pub on_false: OnFalse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryRule {
    pub id: String,
    pub task: String,
    pub family: Option<String>,
    pub predicate: Expr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rule {
    Behavior(BehaviorRule),
    Constraint(ConstraintRule),
    Discovery(DiscoveryRule),
}

impl Rule {
    pub fn id(&self) -> &str {
        match self {
            Rule::Behavior(r) => &r.id,
            Rule::Constraint(r) => &r.id,
            Rule::Discovery(r) => &r.id,
        }
    }

    pub fn kind(&self) -> RuleKind {
        match self {
            Rule::Behavior(_) => RuleKind::Behavior,
            Rule::Constraint(_) => RuleKind::Constraint,
            Rule::Discovery(_) => RuleKind::Discovery,
        }
    }

    /// Task ids the rule refers to. A reroute target is not a reference:
    /// the rule is attached to its task, not to the target.
    pub fn task_refs(&self) -> Vec<&str> {
        match self {
            Rule::Behavior(r) => vec![&r.antecedent, &r.consequent],
            Rule::Constraint(r) => vec![&r.task],
            Rule::Discovery(r) => vec![&r.task],
        }
    }

    pub fn as_behavior(&self) -> Option<&BehaviorRule> {
        match self {
            Rule::Behavior(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_constraint(&self) -> Option<&ConstraintRule> {
        match self {
            Rule::Constraint(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_discovery(&self) -> Option<&DiscoveryRule> {
        match self {
            Rule::Discovery(r) => Some(r),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidRule {
            id: self.id().to_string(),
            reason: reason.to_string(),
        };
        if self.id().is_empty() {
            return Err(invalid("empty id"));
        }
        if self.task_refs().iter().any(|t| t.is_empty()) {
            return Err(invalid("empty task reference"));
        }
        match self {
            Rule::Behavior(r) if r.antecedent == r.consequent => {
                Err(invalid("antecedent and consequent must differ"))
            }
            Rule::Behavior(_) => Ok(()),
            Rule::Constraint(r) => {
                if let OnFalse::Reroute(target) = &r.on_false {
                    if target.is_empty() || *target == r.task {
                        return Err(invalid("reroute target must be another task"));
                    }
                }
                r.condition.validate()
            }
            Rule::Discovery(r) => {
                if r.family.as_deref() == Some("") {
                    return Err(invalid("empty family"));
                }
                r.predicate.validate()
            }
        }
    }

    pub fn write_xml(&self, w: &mut XmlWriter) {
        match self {
            Rule::Behavior(r) => {
                w.open("rule", &[("id", &r.id), ("kind", "behavior")]);
                w.empty(
                    r.relation.as_str(),
                    &[("antecedent", &r.antecedent), ("consequent", &r.consequent)],
                );
            }
            Rule::Constraint(r) => {
                let mut attrs = vec![
                    ("id", r.id.as_str()),
                    ("kind", "constraint"),
                    ("task", r.task.as_str()),
                    ("mode", r.mode.as_str()),
                    ("onFalse", r.on_false.as_str()),
                ];
                if let OnFalse::Reroute(target) = &r.on_false {
                    attrs.push(("rerouteTarget", target));
                }
                w.open("rule", &attrs);
                expr::write_wrapped(w, "condition", &r.condition);
            }
            Rule::Discovery(r) => {
                let mut attrs = vec![
                    ("id", r.id.as_str()),
                    ("kind", "discovery"),
                    ("task", r.task.as_str()),
                ];
                if let Some(family) = &r.family {
                    attrs.push(("family", family));
                }
                w.open("rule", &attrs);
                expr::write_wrapped(w, "predicate", &r.predicate);
            }
        }
        w.close("rule");
    }

    pub fn from_element(element: &Element) -> Result<Rule> {
        if element.name != "rule" {
            return Err(Error::UnknownElement(element.name.clone()));
        }
        element.expect_no_text()?;
        let id = element.required("id")?.to_string();
        let kind = RuleKind::parse(element.required("kind")?)?;
        let invalid = |reason: String| Error::InvalidRule {
            id: id.clone(),
            reason,
        };
        let rule = match kind {
            RuleKind::Behavior => {
                let child = single_child(element).map_err(invalid)?;
                let relation = Relation::ALL
                    .into_iter()
                    .find(|r| r.as_str() == child.name)
                    .ok_or_else(|| Error::UnknownElement(child.name.clone()))?;
                child.expect_no_text()?;
                if let Some(grandchild) = child.children.first() {
                    return Err(Error::UnknownElement(grandchild.name.clone()));
                }
                Rule::Behavior(BehaviorRule {
                    relation,
                    antecedent: child.required("antecedent")?.to_string(),
                    consequent: child.required("consequent")?.to_string(),
                    id: id.clone(),
                })
            }
            RuleKind::Constraint => {
                let task = element.required("task")?.to_string();
                let mode = match element.required("mode")? {
                    "pre" => Mode::Pre,
                    "post" => Mode::Post,
                    other => return Err(invalid(format!("unknown mode `{other}`"))),
                };
                let target = element.attr("rerouteTarget");
                let on_false = match (element.required("onFalse")?, target) {
                    ("fault", None) => OnFalse::Fault,
                    ("skip", None) => OnFalse::Skip,
                    ("reroute", Some(t)) => OnFalse::Reroute(t.to_string()),
                    ("reroute", None) => {
                        return Err(Error::MissingAttribute("rule@rerouteTarget".into()))
                    }
                    ("fault" | "skip", Some(_)) => {
                        return Err(invalid("rerouteTarget only applies to reroute".into()))
                    }
                    (other, _) => return Err(invalid(format!("unknown onFalse `{other}`"))),
                };
                let child = single_child(element).map_err(invalid)?;
                if child.name != "condition" {
                    return Err(Error::UnknownElement(child.name.clone()));
                }
                Rule::Constraint(ConstraintRule {
                    id: id.clone(),
                    task,
                    mode,
                    condition: expr::read_wrapped(child)?,
                    on_false,
                })
            }
            RuleKind::Discovery => {
                let task = element.required("task")?.to_string();
                let child = single_child(element).map_err(invalid)?;
                if child.name != "predicate" {
                    return Err(Error::UnknownElement(child.name.clone()));
                }
                Rule::Discovery(DiscoveryRule {
                    id: id.clone(),
                    task,
                    family: element.attr("family").map(str::to_string),
                    predicate: expr::read_wrapped(child)?,
                })
            }
        };
        rule.validate()?;
        Ok(rule)
    }
}

fn single_child(element: &Element) -> std::result::Result<&Element, String> {
    match element.children.as_slice() {
        [child] => Ok(child),
        [] => Err("rule body is empty".to_string()),
        _ => Err("rule body must be a single element".to_string()),
    }
}

/// Parses a document holding exactly one `<rule>`.
pub fn parse_rule(text: &str) -> Result<Rule> {
    Rule::from_element(&parse_document(text)?)
}

/// Parses either a single `<rule>` or a `<rules>` wrapper of many.
pub fn parse_rules(text: &str) -> Result<Vec<Rule>> {
    let root = parse_document(text)?;
    match root.name.as_str() {
        "rule" => Ok(vec![Rule::from_element(&root)?]),
        "rules" => {
            root.expect_no_text()?;
            root.children.iter().map(Rule::from_element).collect()
        }
        other => Err(Error::UnknownElement(other.to_string())),
    }
}

/// Canonical single-rule document.
pub fn serialize_rule(rule: &Rule) -> String {
    let mut w = XmlWriter::new();
    rule.write_xml(&mut w);
    w.finish()
}

/// Canonical `<rules>` document.
pub fn serialize_rules<'a>(rules: impl IntoIterator<Item = &'a Rule>) -> String {
    let mut w = XmlWriter::new();
    w.open("rules", &[]);
    for rule in rules {
        rule.write_xml(&mut w);
    }
    w.close("rules");
    w.finish()
}
