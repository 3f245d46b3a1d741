//! The designer pipeline shared by the CLI, the HTTP server and the FFI:
//! goals → dependency analysis → workflow → abstract process → bound
//! process → simulation and conformance report.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bpel::{bind_partners, graph_to_bpel, BpelProcess};
use crate::composer::{attach_constraints, build_dependency_graph, synthesize_workflow, DependencyGraph, WorkflowGraph};
use crate::error::{Error, Result};
use crate::goals::{load_goal_model, GoalModel, Selection};
use crate::registry::{Provider, Registry};
use crate::rules::{BehaviorRule, ConstraintRule, DiscoveryRule, Env, RuleKind, RuleRepository};
use crate::runtime::{check_conformance, execute, ExecutionTrace, Mocks, Violation};

/// Result of resolving a goal selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub goals: Vec<String>,
    pub selection: Selection,
    /// Behavior rules whose tasks are all selected.
    pub rules: Vec<BehaviorRule>,
    pub dependency: DependencyGraph,
}

impl Analysis {
    pub fn task_ids(&self) -> Vec<&str> {
        self.selection.tasks.iter().map(|t| t.id.as_str()).collect()
    }

    /// Name given to generated processes.
    pub fn process_name(&self) -> String {
        self.goals.join("-")
    }
}

pub fn analyze(model: &GoalModel, repo: &RuleRepository, goal_ids: &[&str]) -> Result<Analysis> {
    let selection = model.select(goal_ids)?;
    let selected: BTreeSet<&str> = selection.tasks.iter().map(|t| t.id.as_str()).collect();
    let rules: Vec<BehaviorRule> = repo
        .query(Some(RuleKind::Behavior), None)
        .into_iter()
        .filter_map(|r| r.as_behavior())
        .filter(|r| selected.contains(r.antecedent.as_str()) && selected.contains(r.consequent.as_str()))
        .cloned()
        .collect();
    let tasks: Vec<&str> = selection.tasks.iter().map(|t| t.id.as_str()).collect();
    let dependency = build_dependency_graph(&tasks, &selection.implied, &rules)?;
    Ok(Analysis {
        goals: goal_ids.iter().map(|g| g.to_string()).collect(),
        selection,
        rules,
        dependency,
    })
}

/// Constraint rules attached to selected tasks, in id order.
pub fn applicable_constraints(analysis: &Analysis, repo: &RuleRepository) -> Vec<ConstraintRule> {
    let tasks: BTreeSet<&str> = analysis.task_ids().into_iter().collect();
    repo.query(Some(RuleKind::Constraint), None)
        .into_iter()
        .filter_map(|r| r.as_constraint())
        .filter(|r| tasks.contains(r.task.as_str()))
        .cloned()
        .collect()
}

pub fn synthesize(analysis: &Analysis, repo: &RuleRepository) -> Result<WorkflowGraph> {
    synthesize_workflow(&analysis.dependency, &applicable_constraints(analysis, repo))
}

/// Looks up constraint rules by id.
pub fn constraint_rules(repo: &RuleRepository, ids: &[&str]) -> Result<Vec<ConstraintRule>> {
    ids.iter()
        .map(|id| {
            let rule = repo.get(id)?;
            rule.as_constraint().cloned().ok_or_else(|| Error::InvalidRule {
                id: id.to_string(),
                reason: format!("a {} rule cannot be attached as a decision point", rule.kind().as_str()),
            })
        })
        .collect()
}

/// Attaches decision points and generates the abstract process.
pub fn generate(
    model: &GoalModel,
    analysis: &Analysis,
    workflow: &WorkflowGraph,
    constraints: &[ConstraintRule],
) -> Result<(WorkflowGraph, BpelProcess)> {
    let annotated = attach_constraints(workflow, constraints)?;
    let process = graph_to_bpel(&annotated, &model.tasks, model.requester.as_deref(), &analysis.process_name())?;
    Ok((annotated, process))
}

/// Output of the whole composition step.
#[derive(Debug, Clone, PartialEq)]
pub struct Composition {
    pub analysis: Analysis,
    pub workflow: WorkflowGraph,
    pub annotated: WorkflowGraph,
    pub process: BpelProcess,
}

/// Select, synthesize and attach every applicable constraint rule.
pub fn compose(model: &GoalModel, repo: &RuleRepository, goal_ids: &[&str]) -> Result<Composition> {
    let analysis = analyze(model, repo, goal_ids)?;
    let workflow = synthesize(&analysis, repo)?;
    let constraints = applicable_constraints(&analysis, repo);
    let (annotated, process) = generate(model, &analysis, &workflow, &constraints)?;
    Ok(Composition {
        analysis,
        workflow,
        annotated,
        process,
    })
}

/// Broker proposals for a partner link: providers of the link's family
/// satisfying the discovery rules of every task that uses the link.
pub fn propose<'r>(
    process: &BpelProcess,
    link: &str,
    repo: &RuleRepository,
    registry: &'r Registry,
) -> Result<Vec<&'r Provider>> {
    let partner = process
        .partner_link(link)
        .ok_or_else(|| Error::UnknownPartnerLink(link.to_string()))?;
    let rules: Vec<DiscoveryRule> = repo
        .query(Some(RuleKind::Discovery), None)
        .into_iter()
        .filter_map(|r| r.as_discovery().cloned())
        .collect();
    let mut candidates: Vec<&Provider> = registry.family(&partner.family);
    for call in process.body.task_calls().into_iter().filter(|c| c.partner_link == link) {
        let allowed: BTreeSet<&str> = registry.discover(&call.name, &rules).iter().map(|p| p.id.as_str()).collect();
        candidates.retain(|p| allowed.contains(p.id.as_str()));
    }
    Ok(candidates)
}

/// Binds partner links. Explicit bindings must name proposed providers.
/// Other links keep their provider while it is still proposed and otherwise
/// take the first proposal.
pub fn bind(
    process: &BpelProcess,
    explicit: &BTreeMap<String, String>,
    repo: &RuleRepository,
    registry: &Registry,
) -> Result<BpelProcess> {
    if let Some(unknown) = explicit.keys().find(|l| process.partner_link(l).is_none()) {
        return Err(Error::UnknownPartnerLink(unknown.clone()));
    }
    let mut bindings = BTreeMap::new();
    for link in &process.partner_links {
        let proposals = propose(process, &link.name, repo, registry)?;
        let chosen = match explicit.get(&link.name) {
            Some(id) => {
                let provider = registry.get(id).ok_or_else(|| Error::UnknownProvider(id.clone()))?;
                if provider.family != link.family {
                    return Err(Error::FamilyMismatch {
                        link: link.name.clone(),
                        provider: id.clone(),
                        expected: link.family.clone(),
                        actual: provider.family.clone(),
                    });
                }
                if !proposals.iter().any(|p| p.id == *id) {
                    return Err(Error::ProviderNotProposed {
                        link: link.name.clone(),
                        provider: id.clone(),
                    });
                }
                id.clone()
            }
            None => match (&link.provider, proposals.first()) {
                (Some(current), _) if proposals.iter().any(|p| p.id == *current) => current.clone(),
                (_, Some(first)) => first.id.clone(),
                (_, None) => return Err(Error::NoProviderFound(link.name.clone())),
            },
        };
        bindings.insert(link.name.clone(), chosen);
    }
    bind_partners(process, &bindings, registry)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub trace: ExecutionTrace,
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn conformant(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn simulate(
    process: &BpelProcess,
    mocks: &Mocks,
    env: &Env,
    seed: u64,
    rules: &[BehaviorRule],
) -> Result<Report> {
    let trace = execute(process, mocks, env, seed)?;
    let violations = check_conformance(&trace, rules);
    Ok(Report { trace, violations })
}

/// Every behavior rule of a repository.
pub fn behavior_rules(repo: &RuleRepository) -> Vec<BehaviorRule> {
    repo.query(Some(RuleKind::Behavior), None)
        .into_iter()
        .filter_map(|r| r.as_behavior().cloned())
        .collect()
}

/// Fixture directory contents: `goals.xml`, `rules/*.xml`, `providers.xml`
/// and `mocks.xml`. Missing provider or mock files load as empty.
#[derive(Debug, Clone)]
pub struct Fixtures {
    pub goals: GoalModel,
    pub rules: RuleRepository,
    pub registry: Registry,
    pub mocks: Mocks,
}

impl Fixtures {
    pub fn load(dir: impl AsRef<Path>) -> Result<Fixtures> {
        let dir = dir.as_ref();
        let read = |name: &str| -> Result<Option<String>> {
            match fs::read_to_string(dir.join(name)) {
                Ok(text) => Ok(Some(text)),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
                Err(e) => Err(e.into()),
            }
        };
        let goals = read("goals.xml")?
            .ok_or_else(|| Error::Io(format!("{} has no goals.xml", dir.display())))?;
        let rules_dir = dir.join("rules");
        Ok(Fixtures {
            goals: load_goal_model(&goals)?,
            rules: if rules_dir.is_dir() {
                RuleRepository::load_dir(rules_dir)?
            } else {
                RuleRepository::new()
            },
            registry: read("providers.xml")?.map_or(Ok(Registry::new()), |t| Registry::from_xml(&t))?,
            mocks: read("mocks.xml")?.map_or(Ok(Mocks::new()), |t| Mocks::from_xml(&t))?,
        })
    }
}
