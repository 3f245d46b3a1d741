use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bpel::{Activity, BpelProcess};
use crate::error::{Error, Result};
use crate::rules::Env;

use super::mocks::Mocks;
use super::trace::{EventKind, ExecutionTrace, TraceEvent};

/// Most task activities `enumerate_schedules` accepts.
pub const MAX_ENUMERATED_TASKS: usize = 8;
/// Most complete runs `enumerate_schedules` explores.
pub const MAX_ENUMERATED_RUNS: usize = 10_000;

/// Position of an activity inside the residual program, as child indexes.
type Path = Vec<usize>;

/// A running instance: the part of the body still to execute, the
/// environment, the logical clock and the events so far.
#[derive(Debug, Clone)]
struct Machine {
    rest: Activity,
    env: Env,
    clock: u64,
    events: Vec<TraceEvent>,
    faulted: bool,
}

impl Machine {
    fn new(body: &Activity, env: Env) -> Self {
        Machine {
            rest: prune(body.clone()),
            env,
            clock: 0,
            events: Vec::new(),
            faulted: false,
        }
    }

    /// Atomic activities that may run next, in document order.
    fn frontier(&self) -> Vec<Path> {
        let mut out = Vec::new();
        if !self.faulted {
            collect_frontier(&self.rest, &mut Vec::new(), &mut out);
        }
        out
    }

    fn call(&mut self, name: &str, latency: u64, outputs: &Env) {
        self.events.push(TraceEvent::new(self.clock, EventKind::TaskStart, name));
        self.clock += latency;
        self.events.push(TraceEvent::new(self.clock, EventKind::TaskEnd, name));
        self.env.extend(outputs.iter().map(|(k, v)| (k.clone(), v.clone())));
    }

    /// Runs the activity at `path`. Ifs take the branch given by `verdict`,
    /// or evaluate their condition when it is `None`.
    fn step(&mut self, path: &[usize], verdict: Option<bool>, resolve: &dyn Fn(&str, &str) -> (u64, Env)) {
        let activity = at(&self.rest, path).clone();
        let replacement = match activity {
            Activity::Invoke(call) | Activity::Receive(call) | Activity::Reply(call) => {
                let (latency, outputs) = resolve(&call.partner_link, &call.operation);
                self.call(&call.name, latency, &outputs);
                Activity::Empty
            }
            Activity::If(branch) => {
                let verdict = verdict.unwrap_or_else(|| branch.condition.eval(&self.env));
                self.events.push(TraceEvent::new(
                    self.clock,
                    EventKind::RuleEval {
                        rule: branch.rule.clone(),
                        verdict,
                    },
                    branch.name.as_str(),
                ));
                let label = if verdict { "then" } else { "else" };
                self.events.push(TraceEvent::new(
                    self.clock,
                    EventKind::BranchTaken { branch: label.into() },
                    branch.name.as_str(),
                ));
                match (verdict, branch.otherwise) {
                    (true, _) => *branch.then,
                    (false, Some(otherwise)) => *otherwise,
                    (false, None) => Activity::Empty,
                }
            }
            Activity::Fault { name } => {
                self.events.push(TraceEvent::new(self.clock, EventKind::FaultRaised, name));
                self.faulted = true;
                return;
            }
            other => unreachable!("{} is never on the frontier", other.element_name()),
        };
        *at_mut(&mut self.rest, path) = replacement;
        self.rest = prune(std::mem::replace(&mut self.rest, Activity::Empty));
    }

    fn finish(self) -> ExecutionTrace {
        ExecutionTrace::from_events(self.events)
    }
}

fn collect_frontier(activity: &Activity, path: &mut Path, out: &mut Vec<Path>) {
    match activity {
        Activity::Empty => {}
        Activity::Sequence(children) => {
            if let Some(first) = children.first() {
                path.push(0);
                collect_frontier(first, path, out);
                path.pop();
            }
        }
        Activity::Flow(children) => {
            for (i, child) in children.iter().enumerate() {
                path.push(i);
                collect_frontier(child, path, out);
                path.pop();
            }
        }
        _ => out.push(path.clone()),
    }
}

fn at<'a>(activity: &'a Activity, path: &[usize]) -> &'a Activity {
    match (activity, path.split_first()) {
        (_, None) => activity,
        (Activity::Sequence(c) | Activity::Flow(c), Some((i, rest))) => at(&c[*i], rest),
        _ => unreachable!("paths only descend through sequences and flows"),
    }
}

fn at_mut<'a>(activity: &'a mut Activity, path: &[usize]) -> &'a mut Activity {
    match (activity, path.split_first()) {
        (activity, None) => activity,
        (Activity::Sequence(c) | Activity::Flow(c), Some((i, rest))) => at_mut(&mut c[*i], rest),
        _ => unreachable!("paths only descend through sequences and flows"),
    }
}

/// Drops finished (empty) activities from sequences and flows.
fn prune(activity: Activity) -> Activity {
    match activity {
        Activity::Sequence(children) | Activity::Flow(children) if children.is_empty() => Activity::Empty,
        Activity::Sequence(children) => wrap(children, Activity::Sequence),
        Activity::Flow(children) => wrap(children, Activity::Flow),
        other => other,
    }
}

fn wrap(children: Vec<Activity>, make: fn(Vec<Activity>) -> Activity) -> Activity {
    let kept: Vec<Activity> = children
        .into_iter()
        .map(prune)
        .filter(|c| *c != Activity::Empty)
        .collect();
    if kept.is_empty() {
        Activity::Empty
    } else {
        make(kept)
    }
}

/// Runs an executable process against mock endpoints.
///
/// Tasks are atomic: `taskStart` at the current tick, `taskEnd` after the
/// mock's latency. When several activities of a flow are ready, a ChaCha8
/// generator seeded with `seed` picks one, so the same seed always yields
/// the same trace.
pub fn execute(process: &BpelProcess, mocks: &Mocks, env: &Env, seed: u64) -> Result<ExecutionTrace> {
    for call in process.body.task_calls() {
        let link = process
            .partner_link(&call.partner_link)
            .ok_or_else(|| Error::UnknownPartnerLink(call.partner_link.clone()))?;
        let provider = link
            .provider
            .as_deref()
            .ok_or_else(|| Error::UnboundLink(link.name.clone()))?;
        if mocks.get(provider, &call.operation).is_none() {
            return Err(Error::MissingMock {
                provider: provider.to_string(),
                operation: call.operation.clone(),
            });
        }
    }
    let resolve = |link: &str, operation: &str| {
        let provider = process
            .partner_link(link)
            .and_then(|l| l.provider.as_deref())
            .expect("checked above");
        let response = mocks.get(provider, operation).expect("checked above");
        (response.latency, response.outputs.clone())
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut machine = Machine::new(&process.body, env.clone());
    loop {
        let frontier = machine.frontier();
        let pick = match frontier.len() {
            0 => break,
            1 => 0,
            n => rng.random_range(0..n),
        };
        machine.step(&frontier[pick], None, &resolve);
    }
    Ok(machine.finish())
}

/// Every distinct trace of the process under all scheduler choices and both
/// outcomes of every condition, with unit latency and no mock outputs.
/// Conditions are evaluated as soon as they are reached, so traces differing
/// only in where a `ruleEval` sits among other branches' events are
/// represented once.
/// Partner bindings are not needed. Traces come back sorted by their text
/// form.
pub fn enumerate_schedules(process: &BpelProcess, tick_bound: u64) -> Result<Vec<ExecutionTrace>> {
    let tasks = process.body.task_calls().len();
    if tasks > MAX_ENUMERATED_TASKS {
        return Err(Error::TooLarge(format!(
            "{tasks} task activities; at most {MAX_ENUMERATED_TASKS} can be enumerated"
        )));
    }
    let resolve = |_: &str, _: &str| (1, Env::new());
    let mut runs = 0usize;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut stack = vec![Machine::new(&process.body, Env::new())];
    while let Some(machine) = stack.pop() {
        if machine.clock > tick_bound {
            return Err(Error::TooLarge(format!("a schedule runs past tick {tick_bound}")));
        }
        let frontier = machine.frontier();
        if frontier.is_empty() {
            runs += 1;
            if runs > MAX_ENUMERATED_RUNS {
                return Err(Error::TooLarge(format!(
                    "more than {MAX_ENUMERATED_RUNS} interleavings"
                )));
            }
            let trace = machine.finish();
            if seen.insert(trace.to_text()) {
                out.push(trace);
            }
            continue;
        }
        // Both verdicts are explored and a condition takes no time, so an
        // enabled condition commutes with every other step: take it first
        // instead of interleaving it.
        if let Some(path) = frontier.iter().find(|p| matches!(at(&machine.rest, p), Activity::If(_))) {
            for verdict in [false, true] {
                let mut next = machine.clone();
                next.step(path, Some(verdict), &resolve);
                stack.push(next);
            }
            continue;
        }
        for path in frontier.iter().rev() {
            let mut next = machine.clone();
            next.step(path, None, &resolve);
            stack.push(next);
        }
    }
    out.sort_by_cached_key(ExecutionTrace::to_text);
    Ok(out)
}
