use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::patterns::{Branch, Fragment};
use crate::rules::{ConstraintRule, Mode};

use super::dependency::DependencyGraph;
use super::graph::WorkflowGraph;

/// Level-layered synthesis as a block-structured fragment.
///
/// Tasks are grouped by longest-path depth. Within a level, each exclusive
/// group becomes an XOR split/join whose branch guards come from `pre`
/// constraint rules on the branch tasks (lowest rule id wins), followed by
/// an empty default branch. A level with several items becomes an AND
/// split/join; levels are chained in sequence.
pub fn synthesize_fragment(dep: &DependencyGraph, guards: &[ConstraintRule]) -> Result<Fragment> {
    let depths = dep.depths();
    let component = dep.exclusive_components();
    let height = depths.iter().copied().max().map_or(0, |d| d + 1);

    let mut guard_of: BTreeMap<&str, &ConstraintRule> = BTreeMap::new();
    for rule in guards.iter().filter(|r| r.mode == Mode::Pre) {
        guard_of
            .entry(rule.task.as_str())
            .and_modify(|existing| {
                if rule.id < existing.id {
                    *existing = rule;
                }
            })
            .or_insert(rule);
    }

    let mut levels = Vec::with_capacity(height);
    for level in 0..height {
        let number = level + 1;
        let members: Vec<usize> = (0..dep.vertices.len()).filter(|v| depths[*v] == level).collect();
        let mut items = Vec::new();
        let mut done = vec![false; dep.vertices.len()];
        let mut xor_count = 0;
        for &v in &members {
            if done[v] {
                continue;
            }
            let group: Vec<usize> = members
                .iter()
                .copied()
                .filter(|w| component[*w] == component[v])
                .collect();
            for &w in &group {
                done[w] = true;
            }
            if group.len() == 1 {
                items.push(Fragment::Task(dep.vertices[v].clone()));
                continue;
            }
            xor_count += 1;
            let mut branches = Vec::with_capacity(group.len() + 1);
            for &w in &group {
                let task = dep.vertices[w].as_str();
                let rule = guard_of.get(task).ok_or_else(|| {
                    let (a, b) = dep
                        .exclusive
                        .iter()
                        .find(|(a, b)| a == task || b == task)
                        .expect("grouped tasks have an exclusive pair");
                    Error::MissingGuard(a.clone(), b.clone())
                })?;
                branches.push(Branch::guarded(
                    rule.condition.clone(),
                    Some(rule.id.clone()),
                    Fragment::Task(task.to_string()),
                ));
            }
            branches.push(Branch::default_branch(Fragment::empty()));
            items.push(Fragment::Choice {
                id: format!("L{number}.xor{xor_count}"),
                branches,
            });
        }
        levels.push(match items.len() {
            1 => items.pop().expect("one item"),
            _ => Fragment::Parallel {
                id: format!("L{number}.and"),
                branches: items,
            },
        });
    }
    Ok(Fragment::Sequence(levels).normalized())
}

/// Synthesizes the workflow graph for a dependency graph.
///
/// `guards` supplies the `pre` constraint rules that guard exclusive branches;
/// pass the constraint rules of the selected tasks (others are ignored).
pub fn synthesize_workflow(dep: &DependencyGraph, guards: &[ConstraintRule]) -> Result<WorkflowGraph> {
    if dep.vertices.is_empty() {
        return Err(Error::EmptySelection);
    }
    WorkflowGraph::from_fragment(&synthesize_fragment(dep, guards)?)
}
