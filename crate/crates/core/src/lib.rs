//! Rule-driven composition of business processes: goals and business rules
//! in, BPEL-subset process documents out, plus a deterministic simulator and
//! trace conformance checker to exercise the result.

pub mod bpel;
pub mod composer;
pub mod error;
pub mod goals;
pub mod patterns;
pub mod pipeline;
pub mod registry;
pub mod rules;
pub mod runtime;
pub mod server;
pub mod session;
mod xml;

pub use error::{Error, Result};
