use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum EventKind {
    TaskStart,
    TaskEnd,
    RuleEval { rule: Option<String>, verdict: bool },
    FaultRaised,
    BranchTaken { branch: String },
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::TaskStart => "taskStart",
            EventKind::TaskEnd => "taskEnd",
            EventKind::RuleEval { .. } => "ruleEval",
            EventKind::FaultRaised => "faultRaised",
            EventKind::BranchTaken { .. } => "branchTaken",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub tick: u64,
    #[serde(flatten)]
    pub kind: EventKind,
    pub subject: String,
}

impl TraceEvent {
    pub fn new(tick: u64, kind: EventKind, subject: impl Into<String>) -> Self {
        TraceEvent {
            tick,
            kind,
            subject: subject.into(),
        }
    }

    pub fn is_start_of(&self, task: &str) -> bool {
        self.kind == EventKind::TaskStart && self.subject == task
    }

    pub fn is_end_of(&self, task: &str) -> bool {
        self.kind == EventKind::TaskEnd && self.subject == task
    }
}

/// `tick kind subject [detail]`
impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.tick, self.kind.as_str(), self.subject)?;
        match &self.kind {
            EventKind::RuleEval { rule, verdict } => {
                write!(f, " {} {verdict}", rule.as_deref().unwrap_or("-"))
            }
            EventKind::BranchTaken { branch } => write!(f, " {branch}"),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Completed,
    Faulted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub events: Vec<TraceEvent>,
    pub status: Status,
}

impl ExecutionTrace {
    /// Builds a trace whose status follows from the presence of a fault.
    pub fn from_events(events: Vec<TraceEvent>) -> Self {
        let status = if events.iter().any(|e| e.kind == EventKind::FaultRaised) {
            Status::Faulted
        } else {
            Status::Completed
        };
        ExecutionTrace { events, status }
    }

    pub fn is_completed(&self) -> bool {
        self.status == Status::Completed
    }

    /// Task ids in start order.
    pub fn task_order(&self) -> Vec<&str> {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::TaskStart)
            .map(|e| e.subject.as_str())
            .collect()
    }

    pub fn to_text(&self) -> String {
        self.events.iter().map(|e| format!("{e}\n")).collect()
    }

    /// Parses the line format and checks the trace invariants: ticks never
    /// decrease, every taskEnd closes an open taskStart, and nothing follows
    /// a faultRaised. Blank lines are ignored.
    pub fn parse(text: &str) -> Result<ExecutionTrace> {
        let mut events = Vec::new();
        for (number, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::InvalidTrace(format!("line {}: {msg}", number + 1));
            let fields: Vec<&str> = line.split_whitespace().collect();
            let (tick, kind, subject, detail) = match fields.as_slice() {
                [tick, kind, subject, detail @ ..] => (tick, *kind, *subject, detail),
                _ => return Err(bad("expected `tick kind subject [detail]`")),
            };
            let tick: u64 = tick.parse().map_err(|_| bad("tick is not a non-negative integer"))?;
            let kind = match (kind, detail) {
                ("taskStart", []) => EventKind::TaskStart,
                ("taskEnd", []) => EventKind::TaskEnd,
                ("faultRaised", []) => EventKind::FaultRaised,
                ("branchTaken", [branch]) => EventKind::BranchTaken {
                    branch: branch.to_string(),
                },
                ("ruleEval", [rule, verdict]) => EventKind::RuleEval {
                    rule: (*rule != "-").then(|| rule.to_string()),
                    verdict: verdict.parse().map_err(|_| bad("verdict must be true or false"))?,
                },
                _ => return Err(bad(&format!("malformed `{kind}` event"))),
            };
            events.push(TraceEvent::new(tick, kind, subject));
        }
        let trace = ExecutionTrace::from_events(events);
        trace.check()?;
        Ok(trace)
    }

    pub fn check(&self) -> Result<()> {
        let mut open: Vec<&str> = Vec::new();
        let mut last_tick = 0;
        for (i, event) in self.events.iter().enumerate() {
            let bad = |msg: String| Err(Error::InvalidTrace(format!("event {}: {msg}", i + 1)));
            if event.tick < last_tick {
                return bad("ticks decrease".into());
            }
            last_tick = event.tick;
            match event.kind {
                EventKind::TaskStart => open.push(&event.subject),
                EventKind::TaskEnd => match open.iter().position(|t| *t == event.subject) {
                    Some(pos) => {
                        open.remove(pos);
                    }
                    None => return bad(format!("taskEnd of `{}` without taskStart", event.subject)),
                },
                EventKind::FaultRaised if i + 1 != self.events.len() => {
                    return bad("events after faultRaised".into())
                }
                _ => {}
            }
        }
        Ok(())
    }
}
