//! Seeded generators and brute-force oracles shared by the integration tests.
//! The oracles deliberately avoid the library code they are checked against.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use brain_core::bpel::{graph_to_bpel, Activity, BpelProcess, IfActivity, PartnerLink, TaskCall};
use brain_core::composer::{attach_constraints, build_dependency_graph, synthesize_workflow};
use brain_core::goals::{Goal, GoalModel, Task};
use brain_core::registry::Provider;
use brain_core::rules::{
    BehaviorRule, CmpOp, ConstraintRule, DiscoveryRule, Env, Expr, Mode, OnFalse, Relation, Rule, Scalar,
};
use brain_core::runtime::{EventKind, TraceEvent};
use brain_core::Result;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn fixture(rel: &str) -> String {
    std::fs::read_to_string(fixtures().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

// ---------------------------------------------------------------- expressions

pub const BOOL_VARS: [&str; 3] = ["x", "y", "z"];

/// Boolean expression over x, y, z of depth at most `depth`.
pub fn gen_bool_expr(rng: &mut ChaCha8Rng, depth: usize) -> Expr {
    if depth <= 1 || rng.random_bool(0.25) {
        return if rng.random_bool(0.8) {
            Expr::var(*BOOL_VARS.choose(rng).unwrap())
        } else {
            Expr::constant(rng.random_bool(0.5))
        };
    }
    match rng.random_range(0..4) {
        0 | 1 => {
            let children = (0..rng.random_range(2..=3)).map(|_| gen_bool_expr(rng, depth - 1)).collect();
            if rng.random_bool(0.5) {
                Expr::And(children)
            } else {
                Expr::Or(children)
            }
        }
        2 => Expr::not(gen_bool_expr(rng, depth - 1)),
        _ => {
            let op = if rng.random_bool(0.5) { CmpOp::Eq } else { CmpOp::Ne };
            Expr::cmp(op, gen_bool_expr(rng, depth - 1), gen_bool_expr(rng, depth - 1))
        }
    }
}

/// Environment number `k` of the truth table: bit i of k is variable i.
pub fn truth_env(k: u8) -> Env {
    BOOL_VARS
        .iter()
        .enumerate()
        .map(|(i, v)| (v.to_string(), Scalar::Bool(k >> i & 1 == 1)))
        .collect()
}

/// Truth table of a boolean expression as an 8-bit mask, computed bitwise.
pub fn truth_mask(expr: &Expr) -> u8 {
    match expr {
        Expr::Const(Scalar::Bool(true)) => 0xFF,
        Expr::Const(_) => 0,
        Expr::Var(name) => {
            let i = BOOL_VARS.iter().position(|v| v == name).expect("known variable");
            (0..8u8).filter(|k| k >> i & 1 == 1).fold(0, |m, k| m | 1 << k)
        }
        Expr::And(c) => c.iter().fold(0xFF, |m, e| m & truth_mask(e)),
        Expr::Or(c) => c.iter().fold(0, |m, e| m | truth_mask(e)),
        Expr::Not(e) => !truth_mask(e),
        Expr::Compare { op: CmpOp::Eq, left, right } => !(truth_mask(left) ^ truth_mask(right)),
        Expr::Compare { op: CmpOp::Ne, left, right } => truth_mask(left) ^ truth_mask(right),
        Expr::Compare { .. } => unreachable!("generator only emits eq/ne"),
    }
}

const SEGMENTS: [&str; 6] = ["a", "b", "amount", "citizen", "x1", "tier"];
const STRINGS: [&str; 8] = ["national", "a<b", "x & y", "say \"hi\"", "it's", "", " padded ", "€uro"];

fn gen_path(rng: &mut ChaCha8Rng) -> String {
    (0..rng.random_range(1..=3))
        .map(|_| *SEGMENTS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(".")
}

fn gen_num(rng: &mut ChaCha8Rng) -> f64 {
    match rng.random_range(0..3) {
        0 => rng.random_range(-1000..1000) as f64,
        1 => rng.random_range(-400..400) as f64 / 8.0,
        _ => *[0.1, 1e-3, 2.5e6, -0.0].choose(rng).unwrap(),
    }
}

fn gen_scalar(rng: &mut ChaCha8Rng) -> Scalar {
    match rng.random_range(0..3) {
        0 => Scalar::Bool(rng.random_bool(0.5)),
        1 => Scalar::Num(gen_num(rng)),
        _ => Scalar::Str(STRINGS.choose(rng).unwrap().to_string()),
    }
}

/// Well-formed condition mixing every expression form and scalar type.
pub fn gen_expr(rng: &mut ChaCha8Rng, depth: usize) -> Expr {
    if depth <= 1 || rng.random_bool(0.3) {
        return if rng.random_bool(0.7) {
            Expr::var(gen_path(rng))
        } else {
            Expr::constant(rng.random_bool(0.5))
        };
    }
    match rng.random_range(0..4) {
        0 => Expr::And((0..rng.random_range(2..=3)).map(|_| gen_expr(rng, depth - 1)).collect()),
        1 => Expr::Or((0..rng.random_range(2..=3)).map(|_| gen_expr(rng, depth - 1)).collect()),
        2 => Expr::not(gen_expr(rng, depth - 1)),
        _ => {
            let op = *CmpOp::ALL.choose(rng).unwrap();
            let operand = |rng: &mut ChaCha8Rng| match (op.is_ordering(), rng.random_range(0..3)) {
                (_, 0) => Expr::var(gen_path(rng)),
                (true, _) => Expr::constant(gen_num(rng)),
                (false, 1) => Expr::Const(gen_scalar(rng)),
                (false, _) => gen_expr(rng, depth - 1),
            };
            let left = operand(rng);
            let right = operand(rng);
            Expr::cmp(op, left, right)
        }
    }
}

// ---------------------------------------------------------------- rules

const TASKS: [&str; 6] = ["Booking", "Payment", "Ship", "Notify", "Audit", "Bill"];

fn two_tasks(rng: &mut ChaCha8Rng) -> (String, String) {
    let picked: Vec<&&str> = TASKS.choose_multiple(rng, 2).collect();
    (picked[0].to_string(), picked[1].to_string())
}

pub fn gen_rule(rng: &mut ChaCha8Rng, id: &str) -> Rule {
    let (a, b) = two_tasks(rng);
    match rng.random_range(0..3) {
        0 => {
            let relation = *Relation::ALL.choose(rng).unwrap();
            Rule::Behavior(BehaviorRule::new(id, relation, a, b))
        }
        1 => Rule::Constraint(ConstraintRule {
            id: id.into(),
            task: a,
            mode: if rng.random_bool(0.5) { Mode::Pre } else { Mode::Post },
            condition: gen_expr(rng, 4),
            on_false: match rng.random_range(0..3) {
                0 => OnFalse::Fault,
                1 => OnFalse::Skip,
                _ => OnFalse::Reroute(b),
            },
        }),
        _ => Rule::Discovery(DiscoveryRule {
            id: id.into(),
            task: a,
            family: rng.random_bool(0.5).then(|| format!("F{}", rng.random_range(0..3))),
            predicate: gen_expr(rng, 4),
        }),
    }
}

// ---------------------------------------------------------------- goal models

const PARTICIPANTS: [&str; 3] = ["Citizen", "Bank", "Office"];
const VARIABLES: [&str; 5] = ["v1", "v2", "tax.amount", "payment.info", "status"];
const NAMES: [&str; 5] = ["Tax payment", "Pay & close", "<draft>", "Check \"balance\"", "Notify"];

fn gen_vars(rng: &mut ChaCha8Rng) -> Vec<String> {
    let n = rng.random_range(0..=2);
    VARIABLES.choose_multiple(rng, n).map(|v| v.to_string()).collect()
}

fn gen_goal(rng: &mut ChaCha8Rng, tasks: Vec<String>, depth: usize, next: &mut usize) -> Goal {
    *next += 1;
    let id = format!("G{next}");
    let name = NAMES.choose(rng).unwrap().to_string();
    let ordered = rng.random_bool(0.5);
    if tasks.len() <= 1 || depth == 0 || rng.random_bool(0.3) {
        return Goal {
            id,
            name,
            ordered,
            children: Vec::new(),
            task_refs: tasks,
        };
    }
    let parts = rng.random_range(2..=tasks.len().min(3));
    let mut cuts: Vec<usize> = (1..tasks.len()).collect::<Vec<_>>().choose_multiple(rng, parts - 1).copied().collect();
    cuts.sort();
    cuts.push(tasks.len());
    let mut children = Vec::new();
    let mut start = 0;
    for cut in cuts {
        children.push(gen_goal(rng, tasks[start..cut].to_vec(), depth - 1, next));
        start = cut;
    }
    Goal {
        id,
        name,
        ordered,
        children,
        task_refs: Vec::new(),
    }
}

/// Random valid goal model; every task is referenced by exactly one leaf.
pub fn gen_goal_model(rng: &mut ChaCha8Rng) -> GoalModel {
    let n = rng.random_range(1..=8);
    let tasks: Vec<Task> = (0..n)
        .map(|i| Task {
            id: format!("T{i}"),
            name: NAMES.choose(rng).unwrap().to_string(),
            operation: format!("op{i}"),
            participant: PARTICIPANTS.choose(rng).unwrap().to_string(),
            inputs: gen_vars(rng),
            outputs: gen_vars(rng),
            family: rng.random_bool(0.4).then(|| format!("Family{}", rng.random_range(0..2))),
        })
        .collect();
    let mut ids: Vec<String> = tasks.iter().map(|t| t.id.clone()).collect();
    ids.shuffle(rng);
    let mut next = 0;
    let root = gen_goal(rng, ids, 3, &mut next);
    GoalModel {
        requester: rng.random_bool(0.5).then(|| PARTICIPANTS.choose(rng).unwrap().to_string()),
        tasks,
        root,
    }
}

pub fn goal_ids(goal: &Goal, out: &mut Vec<String>) {
    out.push(goal.id.clone());
    goal.children.iter().for_each(|c| goal_ids(c, out));
}

/// (task, chain of goals from the root down to its leaf), in document order.
fn task_paths(goal: &Goal, path: &mut Vec<(String, bool)>, out: &mut Vec<(String, Vec<(String, bool)>)>) {
    path.push((goal.id.clone(), goal.ordered));
    for t in &goal.task_refs {
        out.push((t.clone(), path.clone()));
    }
    for c in &goal.children {
        task_paths(c, path, out);
    }
    path.pop();
}

/// Walk oracle for a goal selection: selected tasks in document order, and
/// the pairs of adjacent selected tasks whose deepest common goal is ordered.
pub fn walk_oracle(model: &GoalModel, selected: &[String]) -> (Vec<String>, BTreeSet<(String, String)>) {
    let mut all = Vec::new();
    task_paths(&model.root, &mut Vec::new(), &mut all);
    let chosen: Vec<&(String, Vec<(String, bool)>)> = all
        .iter()
        .filter(|(_, path)| path.iter().any(|(g, _)| selected.contains(g)))
        .collect();
    let mut pairs = BTreeSet::new();
    for w in chosen.windows(2) {
        let (a, pa) = w[0];
        let (b, pb) = w[1];
        let common = pa.iter().zip(pb).take_while(|(x, y)| x.0 == y.0).last().expect("shared root");
        let same_leaf = pa.len() == pb.len() && pa.last() == pb.last();
        let lca_ordered = if same_leaf { pa.last().unwrap().1 } else { common.0 .1 };
        if lca_ordered {
            pairs.insert((a.clone(), b.clone()));
        }
    }
    (chosen.iter().map(|(t, _)| t.clone()).collect(), pairs)
}

// ---------------------------------------------------------------- dependency

/// Random precedence/response rules over `n` tasks named T0..; may be cyclic.
pub fn gen_order_rules(rng: &mut ChaCha8Rng, n: usize) -> Vec<BehaviorRule> {
    let count = rng.random_range(0..=n + 2);
    (0..count)
        .map(|i| {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            let relation = if rng.random_bool(0.5) { Relation::Precedence } else { Relation::Response };
            BehaviorRule::new(format!("O{i}"), relation, format!("T{a}"), format!("T{b}"))
        })
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// True iff some total order of T0..T{n-1} puts every antecedent first.
pub fn permutation_oracle_acyclic(n: usize, rules: &[BehaviorRule]) -> bool {
    let index = |t: &str| t[1..].parse::<usize>().unwrap();
    permutations(n).iter().any(|perm| {
        let pos = |t: &str| perm.iter().position(|x| *x == index(t)).unwrap();
        rules.iter().all(|r| pos(&r.antecedent) < pos(&r.consequent))
    })
}

/// Number of total orders of `tasks` consistent with `edges`.
pub fn linear_extensions(tasks: &[&str], edges: &[(&str, &str)]) -> usize {
    permutations(tasks.len())
        .iter()
        .filter(|perm| {
            let pos = |t: &str| perm.iter().position(|i| tasks[*i] == t).unwrap();
            edges.iter().all(|(a, b)| pos(a) < pos(b))
        })
        .count()
}

// ---------------------------------------------------------------- registries

pub fn gen_registry(rng: &mut ChaCha8Rng) -> Vec<Provider> {
    let n = rng.random_range(0..=8);
    let mut ids: Vec<usize> = (0..20).collect();
    ids.shuffle(rng);
    ids[..n]
        .iter()
        .map(|i| {
            let mut p = Provider::new(format!("P{i:02}"), format!("F{}", rng.random_range(0..3)));
            if rng.random_bool(0.85) {
                p = p.with_attr("hours", rng.random_range(0..6) as f64);
            }
            if rng.random_bool(0.3) {
                p = p.with_attr("tier", "gold");
            }
            p
        })
        .collect()
}

/// Discovery rules of the form `hours <op> k`, optionally family-bound.
pub fn gen_hour_rules(rng: &mut ChaCha8Rng) -> Vec<DiscoveryRule> {
    (0..rng.random_range(0..=3))
        .map(|i| DiscoveryRule {
            id: format!("D{i}"),
            task: ["T1", "T2"].choose(rng).unwrap().to_string(),
            family: rng.random_bool(0.4).then(|| format!("F{}", rng.random_range(0..3))),
            predicate: Expr::cmp(
                *CmpOp::ALL.choose(rng).unwrap(),
                Expr::var("hours"),
                Expr::constant(rng.random_range(0..6) as f64),
            ),
        })
        .collect()
}

/// Linear filter oracle for discovery, evaluating `hours <op> k` directly.
pub fn discover_oracle(providers: &[Provider], rules: &[DiscoveryRule], task: &str) -> Vec<String> {
    let mut hits: Vec<(String, String)> = Vec::new();
    for p in providers {
        let mut ok = true;
        for r in rules.iter().filter(|r| r.task == task) {
            if let Some(f) = &r.family {
                ok &= *f == p.family;
            }
            let Expr::Compare { op, right, .. } = &r.predicate else { unreachable!() };
            let Expr::Const(Scalar::Num(k)) = **right else { unreachable!() };
            ok &= match p.attributes.get("hours") {
                Some(Scalar::Num(h)) => match op {
                    CmpOp::Eq => *h == k,
                    CmpOp::Ne => *h != k,
                    CmpOp::Lt => *h < k,
                    CmpOp::Le => *h <= k,
                    CmpOp::Gt => *h > k,
                    CmpOp::Ge => *h >= k,
                },
                _ => false,
            };
        }
        if ok {
            hits.push((p.family.clone(), p.id.clone()));
        }
    }
    hits.sort();
    hits.into_iter().map(|(_, id)| id).collect()
}

// ---------------------------------------------------------------- traces

/// A random well-formed trace over tasks A..D.
pub fn gen_trace(rng: &mut ChaCha8Rng) -> Vec<TraceEvent> {
    let tasks = ["A", "B", "C", "D"];
    let mut events = Vec::new();
    let mut open: Vec<&str> = Vec::new();
    let mut tick = 0;
    for _ in 0..rng.random_range(0..14) {
        tick += rng.random_range(0..2);
        match rng.random_range(0..10) {
            0..=4 => {
                let t = *tasks.choose(rng).unwrap();
                if !open.contains(&t) {
                    open.push(t);
                    events.push(TraceEvent::new(tick, EventKind::TaskStart, t));
                }
            }
            5..=8 if !open.is_empty() => {
                let t = open.remove(rng.random_range(0..open.len()));
                events.push(TraceEvent::new(tick, EventKind::TaskEnd, t));
            }
            9 if rng.random_bool(0.3) => {
                events.push(TraceEvent::new(tick, EventKind::FaultRaised, "F.fault"));
                break;
            }
            _ => {}
        }
    }
    events
}

pub fn gen_trace_rules(rng: &mut ChaCha8Rng) -> Vec<BehaviorRule> {
    let tasks = ["A", "B", "C", "D"];
    (0..rng.random_range(1..=4))
        .map(|i| {
            let pair: Vec<&&str> = tasks.choose_multiple(rng, 2).collect();
            BehaviorRule::new(format!("B{i}"), *Relation::ALL.choose(rng).unwrap(), *pair[0], *pair[1])
        })
        .collect()
}

/// Event-scan oracle: does the trace violate the rule?
pub fn scan_violates(events: &[TraceEvent], rule: &BehaviorRule) -> bool {
    let completed = !events.iter().any(|e| e.kind == EventKind::FaultRaised);
    let is = |e: &TraceEvent, kind: &EventKind, task: &str| e.kind == *kind && e.subject == task;
    let (a, b) = (rule.antecedent.as_str(), rule.consequent.as_str());
    match rule.relation {
        Relation::Precedence => (0..events.len()).any(|j| {
            is(&events[j], &EventKind::TaskStart, b) && !(0..j).any(|i| is(&events[i], &EventKind::TaskEnd, a))
        }),
        Relation::Response => {
            completed
                && (0..events.len()).any(|i| {
                    is(&events[i], &EventKind::TaskEnd, a)
                        && !(i + 1..events.len()).any(|j| is(&events[j], &EventKind::TaskEnd, b))
                })
        }
        Relation::Exclusive => {
            events.iter().any(|e| is(e, &EventKind::TaskStart, a)) && events.iter().any(|e| is(e, &EventKind::TaskStart, b))
        }
    }
}

// ---------------------------------------------------------------- processes

struct Names(usize);

impl Names {
    fn next(&mut self, prefix: &str) -> String {
        self.0 += 1;
        format!("{prefix}{}", self.0)
    }
}

fn gen_activity(rng: &mut ChaCha8Rng, depth: usize, links: &[PartnerLink], vars: &[String], names: &mut Names) -> Activity {
    let pick_vars = |rng: &mut ChaCha8Rng| -> Vec<String> {
        let n = rng.random_range(0..=vars.len().min(2));
        vars.choose_multiple(rng, n).cloned().collect()
    };
    let call = |rng: &mut ChaCha8Rng, names: &mut Names, inputs: bool, outputs: bool| TaskCall {
        name: names.next("Task"),
        partner_link: links.choose(rng).unwrap().name.clone(),
        operation: format!("op{}", rng.random_range(0..3)),
        inputs: if inputs { pick_vars(rng) } else { Vec::new() },
        outputs: if outputs { pick_vars(rng) } else { Vec::new() },
    };
    if depth == 0 || rng.random_bool(0.35) {
        return match rng.random_range(0..10) {
            0..=4 => Activity::Invoke(call(rng, names, true, true)),
            5 => Activity::Receive(call(rng, names, false, true)),
            6 => Activity::Reply(call(rng, names, true, false)),
            7 => Activity::Fault { name: names.next("Fault") },
            _ => Activity::Empty,
        };
    }
    match rng.random_range(0..3) {
        0 | 1 => {
            let children = (0..rng.random_range(1..=3))
                .map(|_| gen_activity(rng, depth - 1, links, vars, names))
                .collect();
            if rng.random_bool(0.5) {
                Activity::Sequence(children)
            } else {
                Activity::Flow(children)
            }
        }
        _ => Activity::If(IfActivity {
            name: names.next("Gate"),
            rule: rng.random_bool(0.6).then(|| format!("R{}", rng.random_range(0..9))),
            condition: gen_expr(rng, 3),
            then: Box::new(gen_activity(rng, depth - 1, links, vars, names)),
            otherwise: rng
                .random_bool(0.6)
                .then(|| Box::new(gen_activity(rng, depth - 1, links, vars, names))),
        }),
    }
}

/// Random valid process document; `bound` decides whether links carry providers.
pub fn gen_process(rng: &mut ChaCha8Rng, bound: bool) -> BpelProcess {
    let links: Vec<PartnerLink> = (0..rng.random_range(1..=3))
        .map(|i| PartnerLink {
            name: format!("Role{i}PL"),
            family: format!("Family{i}"),
            provider: (bound || rng.random_bool(0.5)).then(|| format!("svc{i}")),
        })
        .collect();
    let vars: Vec<String> = VARIABLES[..rng.random_range(0..=VARIABLES.len())]
        .iter()
        .map(|v| v.to_string())
        .collect();
    let body = gen_activity(rng, 3, &links, &vars, &mut Names(0));
    BpelProcess {
        name: NAMES.choose(rng).unwrap().to_string(),
        partner_links: links,
        variables: vars,
        body,
    }
}

// ---------------------------------------------------------------- soundness

/// A composable rule set: ordering rules only point forward (so they are
/// acyclic), and exclusive tasks, placed last, have no outgoing edges and no
/// incoming response edges. Each exclusive task gets a guard; some other
/// tasks (at most two) get a post-condition that faults.
pub struct SoundCase {
    pub tasks: Vec<String>,
    pub rules: Vec<BehaviorRule>,
    pub constraints: Vec<ConstraintRule>,
}

pub fn gen_sound_case(rng: &mut ChaCha8Rng) -> SoundCase {
    let n = rng.random_range(1..=6);
    let pairs = rng.random_range(0..=2).min(n / 2);
    let first_exclusive = n - 2 * pairs;
    let tasks: Vec<String> = (0..n).map(|i| format!("T{i}")).collect();
    let mut rules = Vec::new();
    for i in 0..first_exclusive {
        for j in i + 1..n {
            if rng.random_bool(0.35) {
                let relation = if j < first_exclusive && rng.random_bool(0.4) {
                    Relation::Response
                } else {
                    Relation::Precedence
                };
                rules.push(BehaviorRule::new(format!("B{i}{j}"), relation, tasks[i].clone(), tasks[j].clone()));
            }
        }
    }
    let mut constraints = Vec::new();
    for p in 0..pairs {
        let (a, b) = (first_exclusive + 2 * p, first_exclusive + 2 * p + 1);
        rules.push(BehaviorRule::new(format!("X{p}"), Relation::Exclusive, tasks[a].clone(), tasks[b].clone()));
        for t in [a, b] {
            constraints.push(ConstraintRule {
                id: format!("G{t}"),
                task: tasks[t].clone(),
                mode: Mode::Pre,
                condition: Expr::var(format!("route.{t}")),
                on_false: OnFalse::Skip,
            });
        }
    }
    for (t, task) in tasks.iter().enumerate().take(first_exclusive) {
        if constraints.len() < 2 * pairs + 2 && rng.random_bool(0.2) {
            constraints.push(ConstraintRule {
                id: format!("C{t}"),
                task: task.clone(),
                mode: Mode::Post,
                condition: Expr::var(format!("ok.{t}")),
                on_false: OnFalse::Fault,
            });
        }
    }
    SoundCase {
        tasks,
        rules,
        constraints,
    }
}

pub fn compose_case(case: &SoundCase) -> Result<BpelProcess> {
    let tasks: Vec<&str> = case.tasks.iter().map(String::as_str).collect();
    let dep = build_dependency_graph(&tasks, &[], &case.rules)?;
    let wf = synthesize_workflow(&dep, &case.constraints)?;
    let annotated = attach_constraints(&wf, &case.constraints)?;
    let catalog: Vec<Task> = tasks
        .iter()
        .enumerate()
        .map(|(i, t)| Task::new(*t, format!("op{i}"), PARTICIPANTS[i % 3]))
        .collect();
    graph_to_bpel(&annotated, &catalog, None, "Generated")
}

// ---------------------------------------------------------------- tax scenario

/// Artifacts of the tax payment walk-through, in their text forms.
pub struct TaxRun {
    pub abstract_bpel: String,
    pub bound_bpel: String,
    pub completed: brain_core::runtime::ExecutionTrace,
    pub completed_violations: usize,
    pub faulted: brain_core::runtime::ExecutionTrace,
}

pub fn run_tax_scenario(fi: &str, seed: u64) -> Result<TaxRun> {
    use brain_core::bpel::serialize_bpel;
    use brain_core::pipeline::{self, Fixtures};
    use brain_core::runtime::parse_env;

    let f = Fixtures::load(fixtures())?;
    let composition = pipeline::compose(&f.goals, &f.rules, &["TaxPayment"])?;
    let explicit = [("FinancialInstitutionPL".to_string(), fi.to_string())].into();
    let bound = pipeline::bind(&composition.process, &explicit, &f.rules, &f.registry)?;
    let rules = pipeline::behavior_rules(&f.rules);
    let ok = pipeline::simulate(&bound, &f.mocks, &parse_env(&fixture("env-sufficient.xml"))?, seed, &rules)?;
    let bad = pipeline::simulate(&bound, &f.mocks, &parse_env(&fixture("env-insufficient.xml"))?, seed, &rules)?;
    Ok(TaxRun {
        abstract_bpel: serialize_bpel(&composition.process),
        bound_bpel: serialize_bpel(&bound),
        completed_violations: ok.violations.len(),
        completed: ok.trace,
        faulted: bad.trace,
    })
}

/// Lines present in one text but not the other, counted from both sides.
pub fn line_diff(a: &str, b: &str) -> usize {
    let (la, lb): (Vec<&str>, Vec<&str>) = (a.lines().collect(), b.lines().collect());
    if la.len() != lb.len() {
        return la.len().max(lb.len());
    }
    la.iter().zip(&lb).filter(|(x, y)| x != y).count()
}
