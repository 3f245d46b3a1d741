//! Designer sessions: the three design steps as an explicit stage machine.
//!
//! Any step may be repeated; repeating a step discards the artifacts of the
//! steps after it, so the stage can move back.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bpel::{graph_to_bpel, BpelProcess};
use crate::composer::WorkflowGraph;
use crate::error::Error;
use crate::goals::GoalModel;
use crate::pipeline::{self, Analysis, Report};
use crate::registry::{Provider, Registry};
use crate::rules::{Env, RuleRepository};
use crate::runtime::Mocks;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Goals,
    Workflow,
    Schema,
    Instance,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Goals => "goals",
            Stage::Workflow => "workflow",
            Stage::Schema => "schema",
            Stage::Instance => "instance",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SessionError {
    #[error("this step needs stage `{required}`, the session is at `{current}`")]
    Stage { required: Stage, current: Stage },
    #[error(transparent)]
    Domain(#[from] Error),
}

pub type SessionResult<T> = std::result::Result<T, SessionError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub stage: Stage,
    pub analysis: Option<Analysis>,
    pub workflow: Option<WorkflowGraph>,
    /// Constraint rules attached as decision points.
    pub constraints: Vec<String>,
    pub annotated: Option<WorkflowGraph>,
    pub abstract_process: Option<BpelProcess>,
    pub executable: Option<BpelProcess>,
}

impl Session {
    pub fn new(id: impl Into<String>) -> Self {
        Session {
            id: id.into(),
            stage: Stage::Goals,
            analysis: None,
            workflow: None,
            constraints: Vec::new(),
            annotated: None,
            abstract_process: None,
            executable: None,
        }
    }

    fn require(&self, required: Stage) -> SessionResult<()> {
        if self.stage < required {
            return Err(SessionError::Stage {
                required,
                current: self.stage,
            });
        }
        Ok(())
    }

    /// Drops every artifact produced after `stage`.
    fn reset_after(&mut self, stage: Stage) {
        if stage < Stage::Workflow {
            self.analysis = None;
        }
        if stage < Stage::Schema {
            self.workflow = None;
            self.constraints.clear();
            self.annotated = None;
            self.abstract_process = None;
        }
        if stage < Stage::Instance {
            self.executable = None;
        }
        self.stage = stage;
    }

    pub fn select(&mut self, model: &GoalModel, repo: &RuleRepository, goals: &[&str]) -> SessionResult<&Analysis> {
        let analysis = pipeline::analyze(model, repo, goals)?;
        self.reset_after(Stage::Goals);
        self.analysis = Some(analysis);
        self.stage = Stage::Workflow;
        Ok(self.analysis.as_ref().expect("just set"))
    }

    /// Synthesizes the workflow and its undecorated abstract process.
    pub fn synthesize(&mut self, model: &GoalModel, repo: &RuleRepository) -> SessionResult<&WorkflowGraph> {
        self.require(Stage::Workflow)?;
        let analysis = self.analysis.as_ref().expect("present from stage workflow on");
        let workflow = pipeline::synthesize(analysis, repo)?;
        let process = graph_to_bpel(&workflow, &model.tasks, model.requester.as_deref(), &analysis.process_name())?;
        self.reset_after(Stage::Workflow);
        self.annotated = Some(workflow.clone());
        self.abstract_process = Some(process);
        self.workflow = Some(workflow);
        self.stage = Stage::Schema;
        Ok(self.workflow.as_ref().expect("just set"))
    }

    /// Replaces the attached decision points with the given constraint rules.
    pub fn attach(&mut self, model: &GoalModel, repo: &RuleRepository, rule_ids: &[&str]) -> SessionResult<(&WorkflowGraph, &BpelProcess)> {
        self.require(Stage::Schema)?;
        let rules = pipeline::constraint_rules(repo, rule_ids)?;
        let analysis = self.analysis.as_ref().expect("present from stage workflow on");
        let workflow = self.workflow.as_ref().expect("present from stage schema on");
        let (annotated, process) = pipeline::generate(model, analysis, workflow, &rules)?;
        self.reset_after(Stage::Schema);
        self.constraints = rule_ids.iter().map(|r| r.to_string()).collect();
        self.annotated = Some(annotated);
        self.abstract_process = Some(process);
        Ok((
            self.annotated.as_ref().expect("just set"),
            self.abstract_process.as_ref().expect("just set"),
        ))
    }

    pub fn proposals<'r>(&self, link: &str, repo: &RuleRepository, registry: &'r Registry) -> SessionResult<Vec<&'r Provider>> {
        self.require(Stage::Schema)?;
        let process = self.abstract_process.as_ref().expect("present from stage schema on");
        Ok(pipeline::propose(process, link, repo, registry)?)
    }

    /// Binds (or rebinds) partner links; links not mentioned keep their
    /// current provider when there is one.
    pub fn bind(&mut self, bindings: &BTreeMap<String, String>, repo: &RuleRepository, registry: &Registry) -> SessionResult<&BpelProcess> {
        self.require(Stage::Schema)?;
        let base = self
            .executable
            .as_ref()
            .or(self.abstract_process.as_ref())
            .expect("present from stage schema on");
        let bound = pipeline::bind(base, bindings, repo, registry)?;
        self.executable = Some(bound);
        self.stage = Stage::Instance;
        Ok(self.executable.as_ref().expect("just set"))
    }

    /// Runs the bound process and checks the trace against the behavior
    /// rules of the selection.
    pub fn simulate(&self, mocks: &Mocks, env: &Env, seed: u64) -> SessionResult<Report> {
        self.require(Stage::Instance)?;
        let process = self.executable.as_ref().expect("present at stage instance");
        let rules = &self.analysis.as_ref().expect("present").rules;
        Ok(pipeline::simulate(process, mocks, env, seed, rules)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sessions serialize")
    }

    pub fn from_json(text: &str) -> Result<Session, Error> {
        serde_json::from_str(text).map_err(|e| Error::Io(format!("bad session snapshot: {e}")))
    }
}
