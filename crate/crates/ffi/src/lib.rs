//! C interface to `brain-core`.
//!
//! Every fallible function returns a [`BrainStatus`] and hands results back
//! through out pointers, which are only written on success. After a failure,
//! [`brain_last_error`] describes it for the calling thread.
//!
//! Strings returned by the library belong to the caller and are released
//! with [`brain_string_free`]. Handles are released with their `_free`
//! function; passing NULL to any `_free` function is a no-op.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use brain_core::bpel::{parse_bpel, serialize_bpel, BpelProcess};
use brain_core::goals::{load_goal_model, GoalModel};
use brain_core::pipeline;
use brain_core::registry::Registry;
use brain_core::rules::{parse_rule, RuleRepository};
use brain_core::runtime::{check_conformance, parse_env, ExecutionTrace, Mocks};
use brain_core::Error;

/// Result of a call. `Ok` is zero; the remaining codes name the failure.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrainStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Panic = 4,
    XmlSyntax = 10,
    UnknownRuleKind = 11,
    MissingAttribute = 12,
    UnknownElement = 13,
    MalformedExpr = 14,
    InvalidRule = 15,
    DuplicateId = 16,
    NotFound = 17,
    DanglingTaskRef = 20,
    DuplicateGoalId = 21,
    CyclicGoal = 22,
    InvalidGoal = 23,
    DuplicateTaskId = 24,
    UnknownGoal = 25,
    EmptySelection = 26,
    CyclicRules = 30,
    ExclusiveConflict = 31,
    DanglingRuleRef = 32,
    MissingGuard = 33,
    UnknownAttachedTask = 34,
    BackwardReroute = 35,
    InvalidRerouteTarget = 36,
    InvalidGraph = 37,
    UnresolvedTask = 40,
    FamilyMismatch = 41,
    UnboundLink = 42,
    UnknownPartnerLink = 43,
    SchemaViolation = 44,
    DuplicateProvider = 50,
    UnknownProvider = 51,
    NoProviderFound = 52,
    ProviderNotProposed = 53,
    MissingMock = 60,
    TooLarge = 61,
    InvalidTrace = 62,
    Io = 70,
}

impl BrainStatus {
    fn of(error: &Error) -> BrainStatus {
        use BrainStatus::*;
        match error {
            Error::XmlSyntax(_) => XmlSyntax,
            Error::UnknownRuleKind(_) => UnknownRuleKind,
            Error::MissingAttribute(_) => MissingAttribute,
            Error::UnknownElement(_) => UnknownElement,
            Error::MalformedExpr(_) => MalformedExpr,
            Error::InvalidRule { .. } => InvalidRule,
            Error::DuplicateId(_) => DuplicateId,
            Error::NotFound(_) => NotFound,
            Error::DanglingTaskRef(_) => DanglingTaskRef,
            Error::DuplicateGoalId(_) => DuplicateGoalId,
            Error::CyclicGoal => CyclicGoal,
            Error::InvalidGoal { .. } => InvalidGoal,
            Error::DuplicateTaskId(_) => DuplicateTaskId,
            Error::UnknownGoal(_) => UnknownGoal,
            Error::EmptySelection => EmptySelection,
            Error::CyclicRules(_) => CyclicRules,
            Error::ExclusiveConflict(..) => ExclusiveConflict,
            Error::DanglingRuleRef(_) => DanglingRuleRef,
            Error::MissingGuard(..) => MissingGuard,
            Error::UnknownAttachedTask(_) => UnknownAttachedTask,
            Error::BackwardReroute(_) => BackwardReroute,
            Error::InvalidRerouteTarget(_) => InvalidRerouteTarget,
            Error::InvalidGraph(_) => InvalidGraph,
            Error::UnresolvedTask(_) => UnresolvedTask,
            Error::FamilyMismatch { .. } => FamilyMismatch,
            Error::UnboundLink(_) => UnboundLink,
            Error::UnknownPartnerLink(_) => UnknownPartnerLink,
            Error::SchemaViolation(_) => SchemaViolation,
            Error::DuplicateProvider(_) => DuplicateProvider,
            Error::UnknownProvider(_) => UnknownProvider,
            Error::NoProviderFound(_) => NoProviderFound,
            Error::ProviderNotProposed { .. } => ProviderNotProposed,
            Error::MissingMock { .. } => MissingMock,
            Error::TooLarge(_) => TooLarge,
            Error::InvalidTrace(_) => InvalidTrace,
            Error::Io(_) => Io,
        }
    }

    fn name(self) -> &'static CStr {
        use BrainStatus::*;
        match self {
            Ok => c"Ok",
            NullArgument => c"NullArgument",
            InvalidUtf8 => c"InvalidUtf8",
            InvalidArgument => c"InvalidArgument",
            Panic => c"Panic",
            XmlSyntax => c"XmlSyntax",
            UnknownRuleKind => c"UnknownRuleKind",
            MissingAttribute => c"MissingAttribute",
            UnknownElement => c"UnknownElement",
            MalformedExpr => c"MalformedExpr",
            InvalidRule => c"InvalidRule",
            DuplicateId => c"DuplicateId",
            NotFound => c"NotFound",
            DanglingTaskRef => c"DanglingTaskRef",
            DuplicateGoalId => c"DuplicateGoalId",
            CyclicGoal => c"CyclicGoal",
            InvalidGoal => c"InvalidGoal",
            DuplicateTaskId => c"DuplicateTaskId",
            UnknownGoal => c"UnknownGoal",
            EmptySelection => c"EmptySelection",
            CyclicRules => c"CyclicRules",
            ExclusiveConflict => c"ExclusiveConflict",
            DanglingRuleRef => c"DanglingRuleRef",
            MissingGuard => c"MissingGuard",
            UnknownAttachedTask => c"UnknownAttachedTask",
            BackwardReroute => c"BackwardReroute",
            InvalidRerouteTarget => c"InvalidRerouteTarget",
            InvalidGraph => c"InvalidGraph",
            UnresolvedTask => c"UnresolvedTask",
            FamilyMismatch => c"FamilyMismatch",
            UnboundLink => c"UnboundLink",
            UnknownPartnerLink => c"UnknownPartnerLink",
            SchemaViolation => c"SchemaViolation",
            DuplicateProvider => c"DuplicateProvider",
            UnknownProvider => c"UnknownProvider",
            NoProviderFound => c"NoProviderFound",
            ProviderNotProposed => c"ProviderNotProposed",
            MissingMock => c"MissingMock",
            TooLarge => c"TooLarge",
            InvalidTrace => c"InvalidTrace",
            Io => c"Io",
        }
    }
}

/// A goal model.
pub struct BrainGoals(GoalModel);
/// A rule repository.
pub struct BrainRules(RuleRepository);
/// A provider registry.
pub struct BrainRegistry(Registry);
/// An abstract or executable process document.
pub struct BrainProcess(BpelProcess);
/// An execution trace.
pub struct BrainTrace(ExecutionTrace);

struct Failure {
    status: BrainStatus,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            status: BrainStatus::of(&e),
            message: e.to_string(),
        }
    }
}

fn fail(status: BrainStatus, message: impl Into<String>) -> Failure {
    Failure {
        status,
        message: message.into(),
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

/// Runs `body`, turning failures and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> BrainStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => BrainStatus::Ok,
        Ok(Err(failure)) => {
            set_last_error(&failure.message);
            failure.status
        }
        Err(_) => {
            set_last_error("internal panic");
            BrainStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(BrainStatus::NullArgument, format!("{what} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(BrainStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| fail(BrainStatus::NullArgument, format!("{what} is NULL")))
}

fn check_out<T>(out: *mut T) -> Result<(), Failure> {
    if out.is_null() {
        Err(fail(BrainStatus::NullArgument, "output pointer is NULL"))
    } else {
        Ok(())
    }
}

unsafe fn give<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

unsafe fn give_string(out: *mut *mut c_char, value: String) {
    *out = CString::new(value.replace('\0', " ")).expect("nul bytes removed").into_raw();
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn brain_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static name of a status code, such as "FamilyMismatch".
#[no_mangle]
pub extern "C" fn brain_status_name(status: BrainStatus) -> *const c_char {
    status.name().as_ptr()
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn brain_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a goal model document.
///
/// # Safety
/// `xml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brain_goals_parse(xml: *const c_char, out: *mut *mut BrainGoals) -> BrainStatus {
    guard(|| {
        check_out(out)?;
        let model = load_goal_model(text(xml, "xml")?)?;
        give(out, BrainGoals(model));
        Ok(())
    })
}

/// # Safety
/// `goals` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn brain_goals_free(goals: *mut BrainGoals) {
    free(goals)
}

/// Creates an empty rule repository.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brain_rules_new(out: *mut *mut BrainRules) -> BrainStatus {
    guard(|| {
        check_out(out)?;
        give(out, BrainRules(RuleRepository::new()));
        Ok(())
    })
}

/// Loads every `*.xml` rule file of a directory.
///
/// # Safety
/// `dir` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brain_rules_load_dir(dir: *const c_char, out: *mut *mut BrainRules) -> BrainStatus {
    guard(|| {
        check_out(out)?;
        let repo = RuleRepository::load_dir(text(dir, "dir")?)?;
        give(out, BrainRules(repo));
        Ok(())
    })
}

/// Adds one rule document; an id already present fails with DuplicateId.
///
/// # Safety
/// `rules` must be a live handle and `xml` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn brain_rules_add(rules: *mut BrainRules, xml: *const c_char) -> BrainStatus {
    guard(|| {
        let repo = rules
            .as_mut()
            .ok_or_else(|| fail(BrainStatus::NullArgument, "rules is NULL"))?;
        repo.0.put(parse_rule(text(xml, "xml")?)?)?;
        Ok(())
    })
}

/// Number of rules in the repository; 0 for NULL.
///
/// # Safety
/// `rules` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn brain_rules_len(rules: *const BrainRules) -> usize {
    rules.as_ref().map_or(0, |r| r.0.len())
}

/// # Safety
/// `rules` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn brain_rules_free(rules: *mut BrainRules) {
    free(rules)
}

/// Parses a `<providers>` document.
///
/// # Safety
/// `xml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brain_registry_parse(xml: *const c_char, out: *mut *mut BrainRegistry) -> BrainStatus {
    guard(|| {
        check_out(out)?;
        let registry = Registry::from_xml(text(xml, "xml")?)?;
        give(out, BrainRegistry(registry));
        Ok(())
    })
}

/// # Safety
/// `registry` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn brain_registry_free(registry: *mut BrainRegistry) {
    free(registry)
}

/// Composes the abstract process for a comma-separated list of goal ids,
/// attaching every applicable constraint rule.
///
/// # Safety
/// Handles must be live, `goal_ids` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn brain_compose(
    goals: *const BrainGoals,
    rules: *const BrainRules,
    goal_ids: *const c_char,
    out: *mut *mut BrainProcess,
) -> BrainStatus {
    guard(|| {
        check_out(out)?;
        let model = handle(goals, "goals")?;
        let repo = handle(rules, "rules")?;
        let ids: Vec<&str> = text(goal_ids, "goal_ids")?
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect();
        let composition = pipeline::compose(&model.0, &repo.0, &ids)?;
        give(out, BrainProcess(composition.process));
        Ok(())
    })
}

/// Parses a process document.
///
/// # Safety
/// `xml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brain_process_parse(xml: *const c_char, out: *mut *mut BrainProcess) -> BrainStatus {
    guard(|| {
        check_out(out)?;
        let process = parse_bpel(text(xml, "xml")?)?;
        give(out, BrainProcess(process));
        Ok(())
    })
}

/// Canonical XML of a process. Free the result with `brain_string_free`.
///
/// # Safety
/// `process` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brain_process_serialize(process: *const BrainProcess, out: *mut *mut c_char) -> BrainStatus {
    guard(|| {
        check_out(out)?;
        let process = handle(process, "process")?;
        give_string(out, serialize_bpel(&process.0));
        Ok(())
    })
}

/// # Safety
/// `process` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn brain_process_free(process: *mut BrainProcess) {
    free(process)
}

fn parse_bindings(text: &str) -> Result<BTreeMap<String, String>, Failure> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| match pair.split_once('=') {
            Some((link, provider)) if !link.is_empty() && !provider.is_empty() => {
                Ok((link.trim().to_string(), provider.trim().to_string()))
            }
            _ => Err(fail(
                BrainStatus::InvalidArgument,
                format!("expected LINK=PROVIDER, got `{pair}`"),
            )),
        })
        .collect()
}

/// Binds every partner link. `bindings` is NULL or a comma-separated list
/// of `LINK=PROVIDER`; other links keep their provider when it is still
/// proposed and otherwise take the first proposal. `rules` may be NULL, in
/// which case no discovery rules apply.
///
/// # Safety
/// Non-NULL pointers must be live handles or NUL-terminated strings; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn brain_bind(
    process: *const BrainProcess,
    rules: *const BrainRules,
    registry: *const BrainRegistry,
    bindings: *const c_char,
    out: *mut *mut BrainProcess,
) -> BrainStatus {
    guard(|| {
        check_out(out)?;
        let process = handle(process, "process")?;
        let registry = handle(registry, "registry")?;
        let empty = RuleRepository::new();
        let repo = rules.as_ref().map_or(&empty, |r| &r.0);
        let explicit = if bindings.is_null() {
            BTreeMap::new()
        } else {
            parse_bindings(text(bindings, "bindings")?)?
        };
        let bound = pipeline::bind(&process.0, &explicit, repo, &registry.0)?;
        give(out, BrainProcess(bound));
        Ok(())
    })
}

/// Runs an executable process against a `<mocks>` document in the
/// environment given by an `<env>` document.
///
/// # Safety
/// `process` must be a live handle, the documents NUL-terminated strings,
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn brain_simulate(
    process: *const BrainProcess,
    mocks_xml: *const c_char,
    env_xml: *const c_char,
    seed: u64,
    out: *mut *mut BrainTrace,
) -> BrainStatus {
    guard(|| {
        check_out(out)?;
        let process = handle(process, "process")?;
        let mocks = Mocks::from_xml(text(mocks_xml, "mocks_xml")?)?;
        let env = parse_env(text(env_xml, "env_xml")?)?;
        let trace = brain_core::runtime::execute(&process.0, &mocks, &env, seed)?;
        give(out, BrainTrace(trace));
        Ok(())
    })
}

/// Parses the line-oriented trace format.
///
/// # Safety
/// `trace_text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brain_trace_parse(trace_text: *const c_char, out: *mut *mut BrainTrace) -> BrainStatus {
    guard(|| {
        check_out(out)?;
        let trace = ExecutionTrace::parse(text(trace_text, "trace_text")?)?;
        give(out, BrainTrace(trace));
        Ok(())
    })
}

/// Text form of a trace. Free the result with `brain_string_free`.
///
/// # Safety
/// `trace` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brain_trace_text(trace: *const BrainTrace, out: *mut *mut c_char) -> BrainStatus {
    guard(|| {
        check_out(out)?;
        let trace = handle(trace, "trace")?;
        give_string(out, trace.0.to_text());
        Ok(())
    })
}

/// True when the trace completed without a fault; false for NULL.
///
/// # Safety
/// `trace` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn brain_trace_is_completed(trace: *const BrainTrace) -> bool {
    trace.as_ref().is_some_and(|t| t.0.is_completed())
}

/// # Safety
/// `trace` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn brain_trace_free(trace: *mut BrainTrace) {
    free(trace)
}

/// Checks a trace against the behavior rules of a repository. Writes the
/// number of violations and, when `report` is not NULL, one line per
/// violation (`violation RULE: evidence`).
///
/// # Safety
/// Handles must be live; `violations` must be writable; `report` must be
/// NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn brain_check(
    trace: *const BrainTrace,
    rules: *const BrainRules,
    violations: *mut usize,
    report: *mut *mut c_char,
) -> BrainStatus {
    guard(|| {
        check_out(violations)?;
        let trace = handle(trace, "trace")?;
        let repo = handle(rules, "rules")?;
        let found = check_conformance(&trace.0, &pipeline::behavior_rules(&repo.0));
        *violations = found.len();
        if !report.is_null() {
            let lines: String = found
                .iter()
                .map(|v| {
                    let evidence: Vec<String> = v.evidence.iter().map(ToString::to_string).collect();
                    format!("violation {}: {}\n", v.rule, evidence.join("; "))
                })
                .collect();
            give_string(report, lines);
        }
        Ok(())
    })
}
