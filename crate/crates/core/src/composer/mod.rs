//! The process designer pipeline: dependency analysis, pattern-based
//! workflow synthesis and decision-point insertion.

mod constraints;
mod dependency;
mod graph;
mod synthesis;

pub use constraints::attach_constraints;
pub use dependency::{build_dependency_graph, DependencyGraph};
pub use graph::{GatewayKind, Guard, Node, WorkflowGraph};
pub use synthesis::{synthesize_fragment, synthesize_workflow};
