use std::collections::{BTreeMap, BTreeSet};

use crate::composer::WorkflowGraph;
use crate::error::{Error, Result};
use crate::goals::Task;
use crate::patterns::{Branch, Fragment};

use super::{Activity, BpelProcess, IfActivity, PartnerLink, TaskCall};

/// Partner link name for a participant.
pub fn link_name(participant: &str) -> String {
    format!("{participant}PL")
}

/// Generates the abstract (unbound) process for a workflow graph.
///
/// Tasks resolve against `catalog`. Sequences become `<sequence>`, AND blocks
/// `<flow>`, XOR blocks nested `<if>`s named after the block (`id`, `id.2`,
/// ...) and faults `<fault>`. If the first step of the process is a task of
/// the `requester` it becomes a `<receive>`; if the last step is one, a
/// `<reply>`. Every other task is an `<invoke>`. There is one partner link
/// per participant and the variables are the union of task inputs and
/// outputs, both sorted by name.
pub fn graph_to_bpel(
    wf: &WorkflowGraph,
    catalog: &[Task],
    requester: Option<&str>,
    name: &str,
) -> Result<BpelProcess> {
    wf.validate()?;
    let by_id: BTreeMap<&str, &Task> = catalog.iter().map(|t| (t.id.as_str(), t)).collect();
    let tasks = wf
        .task_ids()
        .into_iter()
        .map(|id| by_id.get(id).copied().ok_or_else(|| Error::UnresolvedTask(id.to_string())))
        .collect::<Result<Vec<&Task>>>()?;

    let mut families: BTreeMap<&str, Option<&str>> = BTreeMap::new();
    let mut variables = BTreeSet::new();
    for task in &tasks {
        let slot = families.entry(task.participant.as_str()).or_default();
        match (*slot, task.family.as_deref()) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::SchemaViolation(format!(
                    "participant `{}` is given both family `{a}` and `{b}`",
                    task.participant
                )))
            }
            (None, declared) => *slot = declared,
            _ => {}
        }
        variables.extend(task.inputs.iter().chain(&task.outputs).cloned());
    }
    let partner_links = families
        .into_iter()
        .map(|(participant, family)| PartnerLink {
            name: link_name(participant),
            family: family.unwrap_or(participant).to_string(),
            provider: None,
        })
        .collect();

    let Fragment::Sequence(items) = wf.fragment()? else {
        unreachable!("fragment() returns a sequence")
    };
    let is_requester = |id: &str| requester.is_some_and(|r| by_id[id].participant == r);
    let receive = match items.first() {
        Some(Fragment::Task(id)) if is_requester(id) => Some(id.as_str()),
        _ => None,
    };
    let reply = match items.last() {
        Some(Fragment::Task(id)) if is_requester(id) && Some(id.as_str()) != receive => Some(id.as_str()),
        _ => None,
    };
    let lower = Lowering {
        tasks: &by_id,
        receive,
        reply,
    };
    let body = lower.sequence(&items)?;
    let process = BpelProcess {
        name: name.to_string(),
        partner_links,
        variables: variables.into_iter().collect(),
        body,
    };
    process.validate()?;
    Ok(process)
}

struct Lowering<'a> {
    tasks: &'a BTreeMap<&'a str, &'a Task>,
    receive: Option<&'a str>,
    reply: Option<&'a str>,
}

impl Lowering<'_> {
    fn sequence(&self, items: &[Fragment]) -> Result<Activity> {
        let mut out = items.iter().map(|f| self.activity(f)).collect::<Result<Vec<_>>>()?;
        Ok(match out.len() {
            0 => Activity::Empty,
            1 => out.pop().expect("one activity"),
            _ => Activity::Sequence(out),
        })
    }

    fn body(&self, fragment: &Fragment) -> Result<Activity> {
        match fragment {
            Fragment::Sequence(items) => self.sequence(items),
            other => self.activity(other),
        }
    }

    fn activity(&self, fragment: &Fragment) -> Result<Activity> {
        match fragment {
            Fragment::Task(id) => {
                let task = self.tasks[id.as_str()];
                let mut call = TaskCall {
                    name: task.id.clone(),
                    partner_link: link_name(&task.participant),
                    operation: task.operation.clone(),
                    inputs: task.inputs.clone(),
                    outputs: task.outputs.clone(),
                };
                Ok(if self.receive == Some(id.as_str()) {
                    call.inputs.clear();
                    Activity::Receive(call)
                } else if self.reply == Some(id.as_str()) {
                    call.outputs.clear();
                    Activity::Reply(call)
                } else {
                    Activity::Invoke(call)
                })
            }
            Fragment::Sequence(items) => self.sequence(items),
            Fragment::Parallel { branches, .. } => Ok(Activity::Flow(
                branches.iter().map(|b| self.body(b)).collect::<Result<_>>()?,
            )),
            Fragment::Choice { id, branches } => self.choice(id, branches, 1),
            Fragment::Fault(name) => Ok(Activity::Fault { name: name.clone() }),
            Fragment::Loop { id, .. } => Err(Error::InvalidGraph(format!("loop `{id}` has no BPEL form"))),
        }
    }

    /// Guarded branches chain into nested ifs; a trailing default branch
    /// becomes the innermost else.
    fn choice(&self, id: &str, branches: &[Branch], number: usize) -> Result<Activity> {
        let (first, rest) = branches.split_first().expect("choice has branches");
        let Some(condition) = &first.guard else {
            return self.body(&first.body);
        };
        let otherwise = match rest.first() {
            None => None,
            Some(_) => Some(Box::new(self.choice(id, rest, number + 1)?)),
        };
        Ok(Activity::If(IfActivity {
            name: if number == 1 { id.to_string() } else { format!("{id}.{number}") },
            rule: first.rule.clone(),
            condition: condition.clone(),
            then: Box::new(self.body(&first.body)?),
            otherwise,
        }))
    }
}
