//! Workflow pattern templates and the structured fragments they produce.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rules::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PatternKind {
    Sequence,
    AndSplitJoin,
    XorSplitJoin,
    Loop,
}

/// A reusable control-flow template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PatternTemplate {
    Sequence,
    AndSplitJoin,
    /// One guard per guarded branch; a default branch, when present, follows them.
    XorSplitJoin { guards: Vec<Expr>, default_branch: bool },
    Loop { guard: Expr },
}

impl PatternTemplate {
    pub fn kind(&self) -> PatternKind {
        match self {
            PatternTemplate::Sequence => PatternKind::Sequence,
            PatternTemplate::AndSplitJoin => PatternKind::AndSplitJoin,
            PatternTemplate::XorSplitJoin { .. } => PatternKind::XorSplitJoin,
            PatternTemplate::Loop { .. } => PatternKind::Loop,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PatternTemplate::XorSplitJoin { guards, .. } => {
                if guards.is_empty() {
                    return Err(Error::MalformedExpr(
                        "an XOR split needs at least one guarded branch".into(),
                    ));
                }
                guards.iter().try_for_each(Expr::validate)
            }
            PatternTemplate::Loop { guard } => guard.validate(),
            _ => Ok(()),
        }
    }

    /// Instantiates the template over the given branch bodies. `id` names the
    /// gateways of split/join and loop patterns.
    pub fn instantiate(&self, id: &str, parts: Vec<Fragment>) -> Result<Fragment> {
        self.validate()?;
        match self {
            PatternTemplate::Sequence => Ok(Fragment::Sequence(parts)),
            PatternTemplate::AndSplitJoin => {
                if parts.len() < 2 {
                    return Err(Error::InvalidGraph(
                        "an AND split needs at least two branches".into(),
                    ));
                }
                Ok(Fragment::Parallel {
                    id: id.to_string(),
                    branches: parts,
                })
            }
            PatternTemplate::XorSplitJoin {
                guards,
                default_branch,
            } => {
                let expected = guards.len() + usize::from(*default_branch);
                if parts.len() != expected {
                    return Err(Error::InvalidGraph(format!(
                        "XOR template expects {expected} branches, got {}",
                        parts.len()
                    )));
                }
                let mut parts = parts.into_iter();
                let mut branches: Vec<Branch> = guards
                    .iter()
                    .zip(parts.by_ref())
                    .map(|(guard, body)| Branch::guarded(guard.clone(), None, body))
                    .collect();
                branches.extend(parts.map(Branch::default_branch));
                Ok(Fragment::Choice {
                    id: id.to_string(),
                    branches,
                })
            }
            PatternTemplate::Loop { guard } => {
                let body = match parts.len() {
                    1 => parts.into_iter().next().expect("one part"),
                    _ => Fragment::Sequence(parts),
                };
                Ok(Fragment::Loop {
                    id: id.to_string(),
                    guard: guard.clone(),
                    body: Box::new(body),
                })
            }
        }
    }
}

/// One outgoing branch of an exclusive choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    /// `None` marks the default branch, which must come last.
    pub guard: Option<Expr>,
    /// Constraint rule the guard came from.
    pub rule: Option<String>,
    pub body: Fragment,
}

impl Branch {
    pub fn guarded(guard: Expr, rule: Option<String>, body: Fragment) -> Self {
        Branch {
            guard: Some(guard),
            rule,
            body,
        }
    }

    pub fn default_branch(body: Fragment) -> Self {
        Branch {
            guard: None,
            rule: None,
            body,
        }
    }
}

/// Block-structured process fragment built from pattern instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Fragment {
    Task(String),
    Sequence(Vec<Fragment>),
    Parallel { id: String, branches: Vec<Fragment> },
    Choice { id: String, branches: Vec<Branch> },
    Fault(String),
    /// Only reachable through explicit instantiation; no rule produces it and
    /// it has no acyclic graph form.
    Loop {
        id: String,
        guard: Expr,
        body: Box<Fragment>,
    },
}

impl Fragment {
    pub fn empty() -> Fragment {
        Fragment::Sequence(Vec::new())
    }

    /// Task ids in document order.
    pub fn tasks(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_tasks(&mut out);
        out
    }

    fn collect_tasks<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Fragment::Task(id) => out.push(id),
            Fragment::Sequence(items) | Fragment::Parallel { branches: items, .. } => {
                items.iter().for_each(|f| f.collect_tasks(out))
            }
            Fragment::Choice { branches, .. } => {
                branches.iter().for_each(|b| b.body.collect_tasks(out))
            }
            Fragment::Fault(_) => {}
            Fragment::Loop { body, .. } => body.collect_tasks(out),
        }
    }

    /// Flattens nested sequences and wraps every branch body (and the
    /// fragment itself) in a sequence.
    pub fn normalized(self) -> Fragment {
        let mut items = Vec::new();
        self.flatten_into(&mut items);
        Fragment::Sequence(items)
    }

    fn flatten_into(self, items: &mut Vec<Fragment>) {
        match self {
            Fragment::Sequence(children) => {
                for child in children {
                    child.flatten_into(items);
                }
            }
            Fragment::Parallel { id, branches } => items.push(Fragment::Parallel {
                id,
                branches: branches.into_iter().map(Fragment::normalized).collect(),
            }),
            Fragment::Choice { id, branches } => items.push(Fragment::Choice {
                id,
                branches: branches
                    .into_iter()
                    .map(|b| Branch {
                        body: b.body.normalized(),
                        ..b
                    })
                    .collect(),
            }),
            Fragment::Loop { id, guard, body } => items.push(Fragment::Loop {
                id,
                guard,
                body: Box::new(body.normalized()),
            }),
            leaf => items.push(leaf),
        }
    }
}

/// The pattern repository: one template per pattern kind.
pub fn pattern_catalog() -> Vec<PatternKind> {
    vec![
        PatternKind::Sequence,
        PatternKind::AndSplitJoin,
        PatternKind::XorSplitJoin,
        PatternKind::Loop,
    ]
}
