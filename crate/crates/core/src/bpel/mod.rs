//! BPEL-subset process documents: model, generation from workflow graphs,
//! partner binding and canonical XML.
//!
//! Conditions are written in the rule expression dialect rather than XPath.
//! There are no scopes, fault handlers, compensation or correlation sets;
//! `<fault>` simply terminates the instance.

mod bind;
mod generate;
mod xml;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rules::Expr;

pub use bind::{assign_partners, bind_partners};
pub use generate::{graph_to_bpel, link_name};
pub use xml::{parse_bpel, serialize_bpel};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartnerLink {
    pub name: String,
    pub family: String,
    pub provider: Option<String>,
}

/// A task-level message exchange with a partner.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskCall {
    pub name: String,
    pub partner_link: String,
    pub operation: String,
    #[serde(default)]
    pub inputs: Vec<String>,
    #[serde(default)]
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IfActivity {
    pub name: String,
    /// Rule the condition was taken from.
    pub rule: Option<String>,
    pub condition: Expr,
    pub then: Box<Activity>,
    pub otherwise: Option<Box<Activity>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activity {
    Sequence(Vec<Activity>),
    Flow(Vec<Activity>),
    If(IfActivity),
    Invoke(TaskCall),
    /// Inbound request; only its outputs are meaningful.
    Receive(TaskCall),
    /// Outbound response; only its inputs are meaningful.
    Reply(TaskCall),
    Fault { name: String },
    Empty,
}

impl Activity {
    pub fn task_call(&self) -> Option<&TaskCall> {
        match self {
            Activity::Invoke(c) | Activity::Receive(c) | Activity::Reply(c) => Some(c),
            _ => None,
        }
    }

    /// Every task call, in document order.
    pub fn task_calls(&self) -> Vec<&TaskCall> {
        let mut out = Vec::new();
        self.visit(&mut |a| {
            if let Some(call) = a.task_call() {
                out.push(call);
            }
        });
        out
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Activity)) {
        f(self);
        match self {
            Activity::Sequence(children) | Activity::Flow(children) => {
                children.iter().for_each(|c| c.visit(f))
            }
            Activity::If(branch) => {
                branch.then.visit(f);
                if let Some(otherwise) = &branch.otherwise {
                    otherwise.visit(f);
                }
            }
            _ => {}
        }
    }

    pub fn element_name(&self) -> &'static str {
        match self {
            Activity::Sequence(_) => "sequence",
            Activity::Flow(_) => "flow",
            Activity::If(_) => "if",
            Activity::Invoke(_) => "invoke",
            Activity::Receive(_) => "receive",
            Activity::Reply(_) => "reply",
            Activity::Fault { .. } => "fault",
            Activity::Empty => "empty",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpelProcess {
    pub name: String,
    pub partner_links: Vec<PartnerLink>,
    pub variables: Vec<String>,
    pub body: Activity,
}

impl BpelProcess {
    pub fn partner_link(&self, name: &str) -> Option<&PartnerLink> {
        self.partner_links.iter().find(|l| l.name == name)
    }

    /// Executable once every partner link is bound to a provider.
    pub fn is_executable(&self) -> bool {
        self.partner_links.iter().all(|l| l.provider.is_some())
    }

    /// Checks document-level invariants, reporting the first violation with
    /// a path to the offending element.
    pub fn validate(&self) -> Result<()> {
        let violation = |path: String| Err(Error::SchemaViolation(path));
        if self.name.is_empty() {
            return violation("process@name".into());
        }
        let mut links = BTreeSet::new();
        for link in &self.partner_links {
            if link.name.is_empty() || link.family.is_empty() || !links.insert(link.name.as_str()) {
                return violation(format!("process/partnerLinks/partnerLink[{}]", link.name));
            }
        }
        let mut vars = BTreeSet::new();
        for var in &self.variables {
            if var.is_empty() || var.contains(',') || !vars.insert(var.as_str()) {
                return violation(format!("process/variables/variable[{var}]"));
            }
        }
        let mut names = BTreeSet::new();
        check_activity(&self.body, "process", &links, &vars, &mut names)
    }
}

fn check_activity<'a>(
    activity: &'a Activity,
    parent: &str,
    links: &BTreeSet<&str>,
    vars: &BTreeSet<&str>,
    names: &mut BTreeSet<&'a str>,
) -> Result<()> {
    let here = format!("{parent}/{}", activity.element_name());
    let mut unique = |name: &'a str, path: &str| {
        if name.is_empty() || !names.insert(name) {
            Err(Error::SchemaViolation(format!("{path}[{name}]@name")))
        } else {
            Ok(())
        }
    };
    match activity {
        Activity::Sequence(children) | Activity::Flow(children) => {
            if children.is_empty() {
                return Err(Error::SchemaViolation(format!("{here} is empty")));
            }
            for child in children {
                check_activity(child, &here, links, vars, names)?;
            }
            Ok(())
        }
        Activity::If(branch) => {
            unique(&branch.name, &here)?;
            branch
                .condition
                .validate()
                .map_err(|e| Error::SchemaViolation(format!("{here}[{}]/condition: {e}", branch.name)))?;
            check_activity(&branch.then, &format!("{here}/then"), links, vars, names)?;
            if let Some(otherwise) = &branch.otherwise {
                check_activity(otherwise, &format!("{here}/else"), links, vars, names)?;
            }
            Ok(())
        }
        Activity::Invoke(call) | Activity::Receive(call) | Activity::Reply(call) => {
            unique(&call.name, &here)?;
            let at = format!("{here}[{}]", call.name);
            if !links.contains(call.partner_link.as_str()) {
                return Err(Error::SchemaViolation(format!("{at}@partnerLink")));
            }
            if call.operation.is_empty() {
                return Err(Error::SchemaViolation(format!("{at}@operation")));
            }
            for var in call.inputs.iter().chain(&call.outputs) {
                if !vars.contains(var.as_str()) {
                    return Err(Error::SchemaViolation(format!("{at}: undeclared variable `{var}`")));
                }
            }
            Ok(())
        }
        Activity::Fault { name } => unique(name, &here),
        Activity::Empty => Ok(()),
    }
}
