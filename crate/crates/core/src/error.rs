use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// The variant name doubles as the stable domain error name surfaced by the
/// HTTP API and the FFI layer (see [`Error::name`]).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("XML syntax error: {0}")]
    XmlSyntax(String),
    #[error("unknown rule kind `{0}`")]
    UnknownRuleKind(String),
    #[error("missing attribute `{0}`")]
    MissingAttribute(String),
    #[error("unexpected element `{0}`")]
    UnknownElement(String),
    #[error("malformed expression: {0}")]
    MalformedExpr(String),
    #[error("invalid rule `{id}`: {reason}")]
    InvalidRule { id: String, reason: String },
    #[error("duplicate rule id `{0}`")]
    DuplicateId(String),
    #[error("`{0}` not found")]
    NotFound(String),

    #[error("goal references unknown task `{0}`")]
    DanglingTaskRef(String),
    #[error("duplicate goal id `{0}`")]
    DuplicateGoalId(String),
    #[error("goal hierarchy is not a tree")]
    CyclicGoal,
    #[error("invalid goal `{id}`: {reason}")]
    InvalidGoal { id: String, reason: String },
    #[error("duplicate task id `{0}`")]
    DuplicateTaskId(String),
    #[error("unknown goal `{0}`")]
    UnknownGoal(String),
    #[error("empty goal selection")]
    EmptySelection,

    #[error("behavior rules form a cycle: {}", .0.join(" -> "))]
    CyclicRules(Vec<String>),
    #[error("exclusive pair ({0}, {1}) conflicts with the ordering rules")]
    ExclusiveConflict(String, String),
    #[error("rule references unknown task `{0}`")]
    DanglingRuleRef(String),
    #[error("exclusive pair ({0}, {1}) has no guard: attach a pre-condition to each task")]
    MissingGuard(String, String),
    #[error("constraint targets task `{0}` which is not in the workflow")]
    UnknownAttachedTask(String),
    #[error("reroute to `{0}` would jump backwards")]
    BackwardReroute(String),
    #[error("reroute target `{0}` is not a later step of the same sequence")]
    InvalidRerouteTarget(String),
    #[error("invalid workflow graph: {0}")]
    InvalidGraph(String),

    #[error("task `{0}` is missing from the catalog")]
    UnresolvedTask(String),
    #[error("partner link `{link}` needs family `{expected}` but provider `{provider}` is `{actual}`")]
    FamilyMismatch {
        link: String,
        provider: String,
        expected: String,
        actual: String,
    },
    #[error("partner link `{0}` is not bound")]
    UnboundLink(String),
    #[error("unknown partner link `{0}`")]
    UnknownPartnerLink(String),
    #[error("schema violation at {0}")]
    SchemaViolation(String),

    #[error("duplicate provider `{0}`")]
    DuplicateProvider(String),
    #[error("unknown provider `{0}`")]
    UnknownProvider(String),
    #[error("no provider satisfies the discovery rules for `{0}`")]
    NoProviderFound(String),
    #[error("provider `{provider}` is not among the proposals for `{link}`")]
    ProviderNotProposed { link: String, provider: String },

    #[error("no mock for operation `{operation}` of provider `{provider}`")]
    MissingMock { provider: String, operation: String },
    #[error("schedule space too large: {0}")]
    TooLarge(String),
    #[error("invalid trace: {0}")]
    InvalidTrace(String),

    #[error("{0}")]
    Io(String),
}

impl Error {
    /// Stable, machine-readable name of the error kind.
    pub fn name(&self) -> &'static str {
        match self {
            Error::XmlSyntax(_) => "XmlSyntax",
            Error::UnknownRuleKind(_) => "UnknownRuleKind",
            Error::MissingAttribute(_) => "MissingAttribute",
            Error::UnknownElement(_) => "UnknownElement",
            Error::MalformedExpr(_) => "MalformedExpr",
            Error::InvalidRule { .. } => "InvalidRule",
            Error::DuplicateId(_) => "DuplicateId",
            Error::NotFound(_) => "NotFound",
            Error::DanglingTaskRef(_) => "DanglingTaskRef",
            Error::DuplicateGoalId(_) => "DuplicateGoalId",
            Error::CyclicGoal => "CyclicGoal",
            Error::InvalidGoal { .. } => "InvalidGoal",
            Error::DuplicateTaskId(_) => "DuplicateTaskId",
            Error::UnknownGoal(_) => "UnknownGoal",
            Error::EmptySelection => "EmptySelection",
            Error::CyclicRules(_) => "CyclicRules",
            Error::ExclusiveConflict(..) => "ExclusiveConflict",
            Error::DanglingRuleRef(_) => "DanglingRuleRef",
            Error::MissingGuard(..) => "MissingGuard",
            Error::UnknownAttachedTask(_) => "UnknownAttachedTask",
            Error::BackwardReroute(_) => "BackwardReroute",
            Error::InvalidRerouteTarget(_) => "InvalidRerouteTarget",
            Error::InvalidGraph(_) => "InvalidGraph",
            Error::UnresolvedTask(_) => "UnresolvedTask",
            Error::FamilyMismatch { .. } => "FamilyMismatch",
            Error::UnboundLink(_) => "UnboundLink",
            Error::UnknownPartnerLink(_) => "UnknownPartnerLink",
            Error::SchemaViolation(_) => "SchemaViolation",
            Error::DuplicateProvider(_) => "DuplicateProvider",
            Error::UnknownProvider(_) => "UnknownProvider",
            Error::NoProviderFound(_) => "NoProviderFound",
            Error::ProviderNotProposed { .. } => "ProviderNotProposed",
            Error::MissingMock { .. } => "MissingMock",
            Error::TooLarge(_) => "TooLarge",
            Error::InvalidTrace(_) => "InvalidTrace",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
