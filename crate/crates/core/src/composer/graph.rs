//! The abstract process as an explicit graph of tasks and gateways.
//!
//! Graphs are produced by lowering a block-structured [`Fragment`], which
//! keeps them series-parallel by construction; [`WorkflowGraph::fragment`]
//! recovers the block structure, and [`WorkflowGraph::validate`] checks that
//! the two views agree.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::patterns::{Branch, Fragment};
use crate::rules::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GatewayKind {
    AndSplit,
    AndJoin,
    XorSplit,
    XorJoin,
}

impl GatewayKind {
    fn is_split(self) -> bool {
        matches!(self, GatewayKind::AndSplit | GatewayKind::XorSplit)
    }
}

/// Guard on one outgoing branch of an XOR split, aligned with edge order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Guard {
    pub expr: Option<Expr>,
    pub rule: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Task {
        id: String,
    },
    Gateway {
        id: String,
        kind: GatewayKind,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        guards: Vec<Guard>,
    },
    Fault {
        id: String,
    },
}

impl Node {
    pub fn id(&self) -> &str {
        match self {
            Node::Task { id } | Node::Gateway { id, .. } | Node::Fault { id } => id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkflowGraph {
    pub nodes: Vec<Node>,
    /// Directed edges; for splits, edge order is branch order.
    pub edges: Vec<(String, String)>,
    pub entry: String,
    pub exit: String,
}

const SPLIT: &str = ".split";
const JOIN: &str = ".join";

struct Lowering {
    nodes: Vec<Node>,
    edges: Vec<(String, String)>,
}

impl Lowering {
    fn lower(&mut self, fragment: &Fragment) -> Result<Option<(String, String)>> {
        match fragment {
            Fragment::Task(id) => {
                self.nodes.push(Node::Task { id: id.clone() });
                Ok(Some((id.clone(), id.clone())))
            }
            Fragment::Fault(id) => {
                self.nodes.push(Node::Fault { id: id.clone() });
                Ok(Some((id.clone(), id.clone())))
            }
            Fragment::Sequence(items) => {
                let mut span: Option<(String, String)> = None;
                for item in items {
                    if let Some((first, last)) = self.lower(item)? {
                        span = Some(match span {
                            None => (first, last),
                            Some((start, prev)) => {
                                self.edges.push((prev, first));
                                (start, last)
                            }
                        });
                    }
                }
                Ok(span)
            }
            Fragment::Parallel { id, branches } => {
                let bodies: Vec<&Fragment> = branches.iter().collect();
                self.block(id, GatewayKind::AndSplit, GatewayKind::AndJoin, &bodies, Vec::new())
            }
            Fragment::Choice { id, branches } => {
                let bodies: Vec<&Fragment> = branches.iter().map(|b| &b.body).collect();
                let guards = branches
                    .iter()
                    .map(|b| Guard {
                        expr: b.guard.clone(),
                        rule: b.rule.clone(),
                    })
                    .collect();
                self.block(id, GatewayKind::XorSplit, GatewayKind::XorJoin, &bodies, guards)
            }
            Fragment::Loop { id, .. } => Err(Error::InvalidGraph(format!(
                "loop `{id}` cannot be expressed as an acyclic workflow graph"
            ))),
        }
    }

    fn block(
        &mut self,
        id: &str,
        split_kind: GatewayKind,
        join_kind: GatewayKind,
        bodies: &[&Fragment],
        guards: Vec<Guard>,
    ) -> Result<Option<(String, String)>> {
        let split = format!("{id}{SPLIT}");
        let join = format!("{id}{JOIN}");
        self.nodes.push(Node::Gateway {
            id: split.clone(),
            kind: split_kind,
            guards,
        });
        for body in bodies {
            match self.lower(body)? {
                Some((first, last)) => {
                    self.edges.push((split.clone(), first));
                    self.edges.push((last, join.clone()));
                }
                None => self.edges.push((split.clone(), join.clone())),
            }
        }
        self.nodes.push(Node::Gateway {
            id: join.clone(),
            kind: join_kind,
            guards: Vec::new(),
        });
        Ok(Some((split, join)))
    }
}

impl WorkflowGraph {
    /// Lowers a fragment into a graph with deterministic node naming.
    pub fn from_fragment(fragment: &Fragment) -> Result<WorkflowGraph> {
        let mut lowering = Lowering {
            nodes: Vec::new(),
            edges: Vec::new(),
        };
        let (entry, exit) = lowering
            .lower(fragment)?
            .ok_or_else(|| Error::InvalidGraph("workflow has no nodes".into()))?;
        Ok(WorkflowGraph {
            nodes: lowering.nodes,
            edges: lowering.edges,
            entry,
            exit,
        })
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id() == id)
    }

    pub fn task_ids(&self) -> Vec<&str> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Task { id } => Some(id.as_str()),
                _ => None,
            })
            .collect()
    }

    fn successors(&self, id: &str) -> Vec<&str> {
        self.edges
            .iter()
            .filter(|(from, _)| from == id)
            .map(|(_, to)| to.as_str())
            .collect()
    }

    /// Recovers the block structure. Every sequence in the result is flat
    /// and every branch body is a sequence.
    pub fn fragment(&self) -> Result<Fragment> {
        let mut steps = 0usize;
        let (items, end) = self.parse_sequence(&self.entry, &mut steps)?;
        if let Some(join) = end {
            return Err(Error::InvalidGraph(format!("unmatched join `{join}`")));
        }
        Ok(Fragment::Sequence(items))
    }

    /// Parses nodes from `start` until a join (returned) or the exit.
    fn parse_sequence(
        &self,
        start: &str,
        steps: &mut usize,
    ) -> Result<(Vec<Fragment>, Option<String>)> {
        let invalid = |msg: String| Err(Error::InvalidGraph(msg));
        let mut items = Vec::new();
        let mut current = Some(start.to_string());
        while let Some(id) = current {
            *steps += 1;
            if *steps > self.nodes.len() + self.edges.len() + 1 {
                return invalid("graph contains a cycle".into());
            }
            let node = match self.node(&id) {
                Some(node) => node,
                None => return invalid(format!("edge to unknown node `{id}`")),
            };
            let next_single = |id: &str| -> Result<Option<String>> {
                match self.successors(id).as_slice() {
                    [] => Ok(None),
                    [next] => Ok(Some(next.to_string())),
                    _ => Err(Error::InvalidGraph(format!("`{id}` has several successors"))),
                }
            };
            match node {
                Node::Task { id } => {
                    items.push(Fragment::Task(id.clone()));
                    current = next_single(id)?;
                }
                Node::Fault { id } => {
                    items.push(Fragment::Fault(id.clone()));
                    current = next_single(id)?;
                }
                Node::Gateway { id, kind, .. } if !kind.is_split() => {
                    return Ok((items, Some(id.clone())));
                }
                Node::Gateway { id, kind, guards } => {
                    let base = match id.strip_suffix(SPLIT) {
                        Some(base) => base,
                        None => return invalid(format!("split `{id}` is not named `<id>{SPLIT}`")),
                    };
                    let expected_join = format!("{base}{JOIN}");
                    let join_kind = match kind {
                        GatewayKind::AndSplit => GatewayKind::AndJoin,
                        _ => GatewayKind::XorJoin,
                    };
                    let mut bodies = Vec::new();
                    for target in self.successors(id) {
                        let (body, end) = if target == expected_join {
                            (Vec::new(), Some(target.to_string()))
                        } else {
                            self.parse_sequence(target, steps)?
                        };
                        if end.as_deref() != Some(expected_join.as_str()) {
                            return invalid(format!(
                                "branch of `{id}` does not close at `{expected_join}`"
                            ));
                        }
                        bodies.push(Fragment::Sequence(body));
                    }
                    match self.node(&expected_join) {
                        Some(Node::Gateway { kind, .. }) if *kind == join_kind => {}
                        _ => return invalid(format!("`{expected_join}` is not a matching join")),
                    }
                    items.push(match kind {
                        GatewayKind::AndSplit => Fragment::Parallel {
                            id: base.to_string(),
                            branches: bodies,
                        },
                        _ => {
                            if guards.len() != bodies.len() {
                                return invalid(format!(
                                    "`{id}` has {} guards for {} branches",
                                    guards.len(),
                                    bodies.len()
                                ));
                            }
                            Fragment::Choice {
                                id: base.to_string(),
                                branches: guards
                                    .iter()
                                    .zip(bodies)
                                    .map(|(g, body)| Branch {
                                        guard: g.expr.clone(),
                                        rule: g.rule.clone(),
                                        body,
                                    })
                                    .collect(),
                            }
                        }
                    });
                    current = next_single(&expected_join)?;
                }
            }
        }
        Ok((items, None))
    }

    /// Checks every structural invariant: unique ids, a single entry and
    /// exit, acyclicity, every node on an entry-exit path, well-formed
    /// gateways and properly nested splits and joins.
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidGraph(msg));
        let mut ids = BTreeSet::new();
        for node in &self.nodes {
            if !ids.insert(node.id()) {
                return invalid(format!("duplicate node `{}`", node.id()));
            }
        }
        let mut in_deg: BTreeMap<&str, usize> = ids.iter().map(|id| (*id, 0)).collect();
        let mut out_deg = in_deg.clone();
        for (from, to) in &self.edges {
            if !ids.contains(from.as_str()) || !ids.contains(to.as_str()) {
                return invalid(format!("edge {from} -> {to} references an unknown node"));
            }
            *out_deg.get_mut(from.as_str()).expect("known") += 1;
            *in_deg.get_mut(to.as_str()).expect("known") += 1;
        }
        let sources: Vec<&str> = in_deg.iter().filter(|(_, d)| **d == 0).map(|(id, _)| *id).collect();
        let sinks: Vec<&str> = out_deg.iter().filter(|(_, d)| **d == 0).map(|(id, _)| *id).collect();
        if sources != [self.entry.as_str()] {
            return invalid(format!("expected the single entry `{}`, found sources {sources:?}", self.entry));
        }
        if sinks != [self.exit.as_str()] {
            return invalid(format!("expected the single exit `{}`, found sinks {sinks:?}", self.exit));
        }

        for node in &self.nodes {
            let (i, o) = (in_deg[node.id()], out_deg[node.id()]);
            match node {
                Node::Task { id } | Node::Fault { id } => {
                    if i > 1 || o > 1 {
                        return invalid(format!("`{id}` must have at most one predecessor and successor"));
                    }
                }
                Node::Gateway { id, kind, guards } => {
                    if kind.is_split() && (o < 2 || i > 1) {
                        return invalid(format!("split `{id}` needs one input and several outputs"));
                    }
                    if !kind.is_split() && (i < 2 || o > 1) {
                        return invalid(format!("join `{id}` needs several inputs and one output"));
                    }
                    match kind {
                        GatewayKind::XorSplit => {
                            if guards.len() != o {
                                return invalid(format!("`{id}` needs one guard per branch"));
                            }
                            let defaults = guards.iter().filter(|g| g.expr.is_none()).count();
                            if defaults > 1 || (defaults == 1 && guards.last().is_some_and(|g| g.expr.is_some())) {
                                return invalid(format!("`{id}` may only have a trailing default branch"));
                            }
                            for guard in guards.iter().filter_map(|g| g.expr.as_ref()) {
                                guard.validate()?;
                            }
                        }
                        _ if !guards.is_empty() => {
                            return invalid(format!("`{id}` cannot carry guards"));
                        }
                        _ => {}
                    }
                }
            }
        }

        // acyclic (Kahn) and fully reachable from the entry
        let mut remaining = in_deg.clone();
        let mut ready = vec![self.entry.as_str()];
        let mut visited = 0usize;
        while let Some(id) = ready.pop() {
            visited += 1;
            for to in self.successors(id) {
                let d = remaining.get_mut(to).expect("known");
                *d -= 1;
                if *d == 0 {
                    ready.push(to);
                }
            }
        }
        if visited != self.nodes.len() {
            return invalid("graph has a cycle or unreachable nodes".into());
        }

        // properly nested: the block structure lowers back to the same graph
        let relowered = WorkflowGraph::from_fragment(&self.fragment()?)?;
        let same_nodes = relowered.nodes.len() == self.nodes.len()
            && relowered.nodes.iter().all(|n| self.node(n.id()) == Some(n));
        let mut a = relowered.edges.clone();
        let mut b = self.edges.clone();
        a.sort();
        b.sort();
        if !same_nodes || a != b || relowered.entry != self.entry || relowered.exit != self.exit {
            return invalid("splits and joins are not properly nested".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn task(id: &str) -> Fragment {
        Fragment::Task(id.into())
    }

    fn diamond() -> Fragment {
        Fragment::Sequence(vec![
            task("A"),
            Fragment::Parallel {
                id: "L2.and".into(),
                branches: vec![task("B"), task("C")],
            },
            task("D"),
        ])
    }

    #[test]
    fn lowering_names_gateways_after_the_block() {
        let g = WorkflowGraph::from_fragment(&diamond()).unwrap();
        assert_eq!(g.entry, "A");
        assert_eq!(g.exit, "D");
        assert_eq!(g.nodes.len(), 6);
        assert!(g.edges.contains(&("A".into(), "L2.and.split".into())));
        assert!(g.edges.contains(&("L2.and.join".into(), "D".into())));
        g.validate().unwrap();
    }

    #[test]
    fn fragment_round_trips_through_the_graph() {
        let frag = diamond().normalized();
        let g = WorkflowGraph::from_fragment(&frag).unwrap();
        assert_eq!(g.fragment().unwrap(), frag);
    }

    #[test]
    fn empty_branches_become_direct_edges() {
        let frag = Fragment::Sequence(vec![
            task("T"),
            Fragment::Choice {
                id: "R".into(),
                branches: vec![
                    Branch::guarded(Expr::var("ok"), Some("R".into()), Fragment::empty()),
                    Branch::default_branch(Fragment::empty()),
                ],
            },
        ]);
        let g = WorkflowGraph::from_fragment(&frag).unwrap();
        let parallel = g
            .edges
            .iter()
            .filter(|e| *e == &("R.split".to_string(), "R.join".to_string()))
            .count();
        assert_eq!(parallel, 2);
        g.validate().unwrap();
        assert_eq!(g.fragment().unwrap(), frag.normalized());
    }

    #[test]
    fn validator_rejects_broken_graphs() {
        let mut g = WorkflowGraph::from_fragment(&diamond()).unwrap();
        g.edges.push(("D".into(), "A".into()));
        assert!(g.validate().is_err());

        let mut g = WorkflowGraph::from_fragment(&diamond()).unwrap();
        g.edges.retain(|e| e.0 != "C");
        assert!(g.validate().is_err());

        let mut g = WorkflowGraph::from_fragment(&diamond()).unwrap();
        g.nodes.push(Node::Task { id: "Lonely".into() });
        assert!(g.validate().is_err());
    }

    #[test]
    fn loops_do_not_lower() {
        let frag = Fragment::Loop {
            id: "l".into(),
            guard: Expr::var("again"),
            body: Box::new(task("A")),
        };
        assert!(matches!(
            WorkflowGraph::from_fragment(&frag),
            Err(Error::InvalidGraph(_))
        ));
    }
}
