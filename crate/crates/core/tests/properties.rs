mod common;

use std::collections::{BTreeMap, BTreeSet};

use brain_core::bpel::{parse_bpel, serialize_bpel, BpelProcess};
use brain_core::pipeline::{self, Fixtures};
use brain_core::registry::Registry;
use brain_core::rules::{Env, Relation, Scalar};
use brain_core::runtime::{check_conformance, enumerate_schedules, execute, EventKind, MockResponse, Mocks};
use common::*;
use proptest::prelude::*;
use rand::Rng;

fn task_names(process: &BpelProcess) -> Vec<String> {
    process.body.task_calls().iter().map(|c| c.name.clone()).collect()
}

fn flat_mocks(process: &BpelProcess, latency: u64) -> Mocks {
    let mut mocks = Mocks::new();
    for call in process.body.task_calls() {
        let provider = process.partner_link(&call.partner_link).unwrap().provider.clone().unwrap();
        mocks.insert(&provider, &call.operation, MockResponse { outputs: Env::new(), latency });
    }
    mocks
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn composed_processes_are_valid_and_complete(seed in any::<u64>()) {
        let case = gen_sound_case(&mut rng(seed));
        let process = compose_case(&case).unwrap();
        process.validate().unwrap();
        let mut names = task_names(&process);
        names.sort();
        let mut want = case.tasks.clone();
        want.sort();
        prop_assert_eq!(names, want);
        prop_assert_eq!(parse_bpel(&serialize_bpel(&process)).unwrap(), process);
    }

    #[test]
    fn every_schedule_of_a_composed_process_conforms(seed in any::<u64>()) {
        let case = gen_sound_case(&mut rng(seed));
        let process = compose_case(&case).unwrap();
        let schedules = enumerate_schedules(&process, 1_000).unwrap();
        prop_assert!(!schedules.is_empty());
        for trace in &schedules {
            trace.check().unwrap();
            let violations = check_conformance(trace, &case.rules);
            prop_assert!(violations.is_empty(), "{:?}\n{}", violations, trace.to_text());
        }
    }

    #[test]
    fn execution_stops_at_the_first_fault(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let process = gen_process(&mut rng, true);
        let mocks = flat_mocks(&process, rng.random_range(0..3));
        let env: Env = ["a", "b", "a.b", "tier", "x1"]
            .iter()
            .map(|k| (k.to_string(), Scalar::Bool(rng.random_bool(0.5))))
            .collect();
        let trace = execute(&process, &mocks, &env, seed).unwrap();
        trace.check().unwrap();
        if let Some(at) = trace.events.iter().position(|e| e.kind == EventKind::FaultRaised) {
            prop_assert_eq!(at, trace.events.len() - 1);
            prop_assert!(!trace.is_completed());
        } else {
            prop_assert!(trace.is_completed());
            let starts = trace.events.iter().filter(|e| e.kind == EventKind::TaskStart).count();
            let ends = trace.events.iter().filter(|e| e.kind == EventKind::TaskEnd).count();
            prop_assert_eq!(starts, ends);
        }
        prop_assert_eq!(execute(&process, &mocks, &env, seed).unwrap(), trace);
    }

    #[test]
    fn discovery_is_a_deterministic_filter(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let providers = gen_registry(&mut rng);
        let rules = gen_hour_rules(&mut rng);
        let mut registry = Registry::new();
        for p in &providers {
            registry.register(p.clone()).unwrap();
        }
        for task in ["T1", "T2"] {
            let all: Vec<&str> = registry.discover(task, &[]).iter().map(|p| p.id.as_str()).collect();
            prop_assert_eq!(all.len(), providers.len());
            let hits: Vec<&str> = registry.discover(task, &rules).iter().map(|p| p.id.as_str()).collect();
            prop_assert!(hits.iter().all(|h| all.contains(h)));
            let again: Vec<&str> = registry.discover(task, &rules).iter().map(|p| p.id.as_str()).collect();
            prop_assert_eq!(&again, &hits);
            // Each rule only narrows the result.
            for k in 0..rules.len() {
                let fewer: BTreeSet<&str> = registry.discover(task, &rules[..k]).iter().map(|p| p.id.as_str()).collect();
                let more: BTreeSet<&str> = registry.discover(task, &rules[..k + 1]).iter().map(|p| p.id.as_str()).collect();
                prop_assert!(more.is_subset(&fewer));
            }
        }
    }
}

#[test]
fn schedules_are_linear_extensions() {
    for seed in 0..200 {
        let mut case = gen_sound_case(&mut rng(seed));
        case.rules.retain(|r| r.relation != Relation::Exclusive);
        case.constraints.clear();
        let process = compose_case(&case).unwrap();
        let edges: Vec<(&str, &str)> = case
            .rules
            .iter()
            .map(|r| (r.antecedent.as_str(), r.consequent.as_str()))
            .collect();
        for trace in enumerate_schedules(&process, 1_000).unwrap() {
            let order = trace.task_order();
            assert_eq!(order.len(), case.tasks.len(), "seed {seed}");
            let pos = |t: &str| order.iter().position(|x| *x == t).unwrap();
            assert!(edges.iter().all(|(a, b)| pos(a) < pos(b)), "seed {seed}: {order:?}");
        }
    }
}

#[test]
fn diamond_has_every_linear_extension() {
    use brain_core::rules::BehaviorRule;
    let case = SoundCase {
        tasks: ["A", "B", "C", "D"].map(String::from).to_vec(),
        rules: vec![
            BehaviorRule::new("r1", Relation::Precedence, "A", "B"),
            BehaviorRule::new("r2", Relation::Precedence, "A", "C"),
            BehaviorRule::new("r3", Relation::Precedence, "B", "D"),
            BehaviorRule::new("r4", Relation::Precedence, "C", "D"),
        ],
        constraints: Vec::new(),
    };
    let process = compose_case(&case).unwrap();
    let orders: BTreeSet<Vec<String>> = enumerate_schedules(&process, 100)
        .unwrap()
        .iter()
        .map(|t| t.task_order().iter().map(|s| s.to_string()).collect())
        .collect();
    let expected = linear_extensions(&["A", "B", "C", "D"], &[("A", "B"), ("A", "C"), ("B", "D"), ("C", "D")]);
    assert_eq!(expected, 2);
    assert_eq!(orders.len(), expected);
}

fn tax() -> (Fixtures, BpelProcess) {
    let fixtures = Fixtures::load(fixtures()).unwrap();
    let process = parse_bpel(&fixture("golden/taxpayment.abstract.bpel.xml")).unwrap();
    (fixtures, process)
}

fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(l, p)| (l.to_string(), p.to_string())).collect()
}

#[test]
fn binding_is_idempotent() {
    let (f, process) = tax();
    let once = pipeline::bind(&process, &BTreeMap::new(), &f.rules, &f.registry).unwrap();
    let twice = pipeline::bind(&once, &BTreeMap::new(), &f.rules, &f.registry).unwrap();
    assert_eq!(once, twice);
    assert_eq!(serialize_bpel(&once), fixture("golden/taxpayment.bound.bpel.xml"));
}

#[test]
fn bindings_commute() {
    let (f, process) = tax();
    let fi = ("FinancialInstitutionPL", "FI-Beta");
    let citizen = ("CitizenPL", "citizen-portal");
    let bind = |p: &BpelProcess, pairs: &[(&str, &str)]| pipeline::bind(p, &map(pairs), &f.rules, &f.registry).unwrap();
    let together = bind(&process, &[fi, citizen]);
    assert_eq!(bind(&bind(&process, &[fi]), &[citizen]), together);
    assert_eq!(bind(&bind(&process, &[citizen]), &[fi]), together);
}
