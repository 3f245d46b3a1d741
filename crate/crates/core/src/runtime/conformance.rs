use serde::{Deserialize, Serialize};

use crate::rules::{BehaviorRule, Relation};

use super::trace::{ExecutionTrace, TraceEvent};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: String,
    pub evidence: Vec<TraceEvent>,
}

/// Checks a trace against behavior rules; at most one violation per rule.
///
/// - precedence(A, B): every taskStart(B) has an earlier taskEnd(A).
///   Evidence: the first offending taskStart(B).
/// - response(A, B): in a completed trace, every taskEnd(A) has a later
///   taskEnd(B). Evidence: the first offending taskEnd(A).
/// - exclusive(A, B): not both A and B start. Evidence: the first start of
///   each.
pub fn check_conformance(trace: &ExecutionTrace, rules: &[BehaviorRule]) -> Vec<Violation> {
    let events = &trace.events;
    let mut out = Vec::new();
    for rule in rules {
        let (a, b) = (rule.antecedent.as_str(), rule.consequent.as_str());
        let evidence: Option<Vec<TraceEvent>> = match rule.relation {
            Relation::Precedence => {
                let mut a_ended = false;
                events.iter().find_map(|e| {
                    if e.is_end_of(a) {
                        a_ended = true;
                    }
                    (e.is_start_of(b) && !a_ended).then(|| vec![e.clone()])
                })
            }
            Relation::Response if trace.is_completed() => {
                events.iter().enumerate().find_map(|(i, e)| {
                    (e.is_end_of(a) && !events[i + 1..].iter().any(|later| later.is_end_of(b)))
                        .then(|| vec![e.clone()])
                })
            }
            Relation::Response => None,
            Relation::Exclusive => {
                let first_start = |task: &str| events.iter().find(|e| e.is_start_of(task));
                match (first_start(a), first_start(b)) {
                    (Some(x), Some(y)) => Some(vec![x.clone(), y.clone()]),
                    _ => None,
                }
            }
        };
        if let Some(evidence) = evidence {
            out.push(Violation {
                rule: rule.id.clone(),
                evidence,
            });
        }
    }
    out
}
