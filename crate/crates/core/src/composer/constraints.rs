use crate::error::{Error, Result};
use crate::patterns::{Branch, Fragment};
use crate::rules::{ConstraintRule, Mode, OnFalse};

use super::graph::{Node, WorkflowGraph};

/// Inserts one decision point per constraint rule.
///
/// `pre` rules put an XOR split right before the task, with the task on the
/// true branch; `post` rules put it right after. The false branch raises a
/// fault, is empty (skip), or jumps to the reroute target, which must be a
/// later step of the same sequence. Rules already used as branch guards by
/// synthesis are left alone.
pub fn attach_constraints(wf: &WorkflowGraph, rules: &[ConstraintRule]) -> Result<WorkflowGraph> {
    if rules.is_empty() {
        return Ok(wf.clone());
    }
    let mut fragment = wf.fragment()?;
    for rule in rules {
        if consumed_as_guard(wf, &rule.id) {
            continue;
        }
        if !fragment.tasks().contains(&rule.task.as_str()) {
            return Err(Error::UnknownAttachedTask(rule.task.clone()));
        }
        if let OnFalse::Reroute(target) = &rule.on_false {
            if !fragment.tasks().contains(&target.as_str()) {
                return Err(Error::InvalidRerouteTarget(target.clone()));
            }
        }
        let order: Vec<String> = fragment.tasks().into_iter().map(str::to_string).collect();
        if !attach(&mut fragment, rule, &order)? {
            return Err(Error::UnknownAttachedTask(rule.task.clone()));
        }
    }
    let graph = WorkflowGraph::from_fragment(&fragment.normalized())?;
    graph.validate()?;
    Ok(graph)
}

fn consumed_as_guard(wf: &WorkflowGraph, rule_id: &str) -> bool {
    wf.nodes.iter().any(|n| match n {
        Node::Gateway { guards, .. } => guards.iter().any(|g| g.rule.as_deref() == Some(rule_id)),
        _ => false,
    })
}

/// Rewrites the sequence that directly contains the rule's task.
fn attach(fragment: &mut Fragment, rule: &ConstraintRule, order: &[String]) -> Result<bool> {
    match fragment {
        Fragment::Sequence(items) => {
            if let Some(pos) = items
                .iter()
                .position(|f| matches!(f, Fragment::Task(t) if *t == rule.task))
            {
                rewrite(items, pos, rule, order)?;
                return Ok(true);
            }
            for item in items.iter_mut() {
                if attach(item, rule, order)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Fragment::Parallel { branches, .. } => {
            for branch in branches.iter_mut() {
                if attach(branch, rule, order)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Fragment::Choice { branches, .. } => {
            for branch in branches.iter_mut() {
                if attach(&mut branch.body, rule, order)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Fragment::Loop { body, .. } => attach(body, rule, order),
        Fragment::Task(_) | Fragment::Fault(_) => Ok(false),
    }
}

fn rewrite(items: &mut Vec<Fragment>, pos: usize, rule: &ConstraintRule, order: &[String]) -> Result<()> {
    // pre: the guarded region starts at the task; post: right after it
    let start = match rule.mode {
        Mode::Pre => pos,
        Mode::Post => pos + 1,
    };
    let (end, false_body) = match &rule.on_false {
        OnFalse::Fault => (start + usize::from(rule.mode == Mode::Pre), vec![Fragment::Fault(format!("{}.fault", rule.id))]),
        OnFalse::Skip => (start + usize::from(rule.mode == Mode::Pre), Vec::new()),
        OnFalse::Reroute(target) => {
            let found = items
                .iter()
                .enumerate()
                .skip(pos + 1)
                .find(|(_, f)| matches!(f, Fragment::Task(t) if t == target))
                .map(|(i, _)| i);
            match found {
                Some(i) => (i, Vec::new()),
                None => {
                    let index = |t: &str| order.iter().position(|o| o == t);
                    return Err(if index(target) < index(&rule.task) {
                        Error::BackwardReroute(target.clone())
                    } else {
                        Error::InvalidRerouteTarget(target.clone())
                    });
                }
            }
        }
    };
    let guarded: Vec<Fragment> = items.drain(start..end).collect();
    let choice = Fragment::Choice {
        id: rule.id.clone(),
        branches: vec![
            Branch::guarded(rule.condition.clone(), Some(rule.id.clone()), Fragment::Sequence(guarded)),
            Branch::default_branch(Fragment::Sequence(false_body)),
        ],
    };
    items.insert(start, choice);
    Ok(())
}
