//! Deterministic simulation of executable processes against mock endpoints
//! and conformance checking of the resulting traces.

mod conformance;
mod exec;
mod mocks;
mod trace;

pub use conformance::{check_conformance, Violation};
pub use exec::{enumerate_schedules, execute, MAX_ENUMERATED_RUNS, MAX_ENUMERATED_TASKS};
pub use mocks::{parse_env, serialize_env, MockResponse, Mocks};
pub use trace::{EventKind, ExecutionTrace, Status, TraceEvent};
