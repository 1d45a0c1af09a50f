//! Misuse detection over object lifecycles.
//!
//! Every method is replayed along its bounded paths (see [`paths`]); each
//! object allocated from a class with a rule gets a lifecycle holding its
//! events per path. Lifecycles are checked for typestate, constraint,
//! never-type and forbidden-method violations, then predicates are
//! propagated between objects until no further consumer becomes invalid.

mod checks;
pub mod paths;
pub mod sim;
pub mod transform;
pub mod values;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use checks::{
    check_constraints, check_forbidden, check_never_type, check_required_predicates,
    check_typestate, propagate_predicates,
};
pub use paths::PATH_BUDGET;
pub use sim::{EventOcc, ObjId, ReqOcc};
pub use transform::{parse_transformation, MalformedTransformation, Transformation};
pub use values::{ArgValue, Const, Origin};

use crate::diag::Diagnostic;
use crate::frontend::{CompilationUnitIR, MethodIR, SourceLocation, StmtId, ValueRef, Visibility};
use crate::rulelang::{Component, ConstraintSpec, ParamKind, RuleSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ErrorType {
    ConstraintError,
    IncompleteOperationError,
    RequiredPredicateError,
    NeverTypeOfError,
    ForbiddenMethodError,
    TypestateError,
}

impl ErrorType {
    pub const ALL: [ErrorType; 6] = [
        ErrorType::ConstraintError,
        ErrorType::IncompleteOperationError,
        ErrorType::RequiredPredicateError,
        ErrorType::NeverTypeOfError,
        ErrorType::ForbiddenMethodError,
        ErrorType::TypestateError,
    ];

    /// Column abbreviation: C, IO, RP, NT, FM, TS.
    pub fn abbrev(self) -> &'static str {
        match self {
            ErrorType::ConstraintError => "C",
            ErrorType::IncompleteOperationError => "IO",
            ErrorType::RequiredPredicateError => "RP",
            ErrorType::NeverTypeOfError => "NT",
            ErrorType::ForbiddenMethodError => "FM",
            ErrorType::TypestateError => "TS",
        }
    }

    pub fn from_abbrev(s: &str) -> Option<ErrorType> {
        ErrorType::ALL.into_iter().find(|e| e.abbrev() == s)
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorType::ConstraintError => "ConstraintError",
            ErrorType::IncompleteOperationError => "IncompleteOperationError",
            ErrorType::RequiredPredicateError => "RequiredPredicateError",
            ErrorType::NeverTypeOfError => "NeverTypeOfError",
            ErrorType::ForbiddenMethodError => "ForbiddenMethodError",
            ErrorType::TypestateError => "TypestateError",
        }
    }
}

impl std::fmt::Display for ErrorType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PathFlags {
    /// The violation vanishes on some path that runs a loop body.
    pub loop_guarded: bool,
    pub exists_on_all_paths: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum FindingDetail {
    #[serde(rename_all = "camelCase")]
    Constraint {
        event: String,
        method: String,
        param_index: usize,
        constraint: ConstraintSpec,
        /// Resolved value; for transformation constraints the checked component.
        value: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        component: Option<Component>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        transformation: Option<Transformation>,
        #[serde(default)]
        malformed: bool,
        #[serde(default)]
        defaulted: bool,
    },
    #[serde(rename_all = "camelCase")]
    IncompleteOperation {
        last_event: String,
        last_method: String,
        expected_events: Vec<String>,
        expected_methods: Vec<String>,
    },
    #[serde(rename_all = "camelCase")]
    RequiredPredicate {
        event: String,
        method: String,
        param_index: usize,
        param_kind: ParamKind,
        predicate: String,
        /// Rule classes of the tracked objects the argument came from.
        upstream_classes: Vec<String>,
    },
    #[serde(rename_all = "camelCase")]
    NeverType {
        event: String,
        method: String,
        param_index: usize,
        forbidden_source_type: String,
        origin: String,
        /// Name of the public-method String parameter the value came from.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        public_parameter: Option<String>,
    },
    #[serde(rename_all = "camelCase")]
    ForbiddenMethod {
        event: String,
        method: String,
        pattern: String,
    },
    #[serde(rename_all = "camelCase")]
    Typestate {
        event: String,
        method: String,
        expected_events: Vec<String>,
        expected_methods: Vec<String>,
    },
}

impl FindingDetail {
    pub fn error_type(&self) -> ErrorType {
        match self {
            FindingDetail::Constraint { .. } => ErrorType::ConstraintError,
            FindingDetail::IncompleteOperation { .. } => ErrorType::IncompleteOperationError,
            FindingDetail::RequiredPredicate { .. } => ErrorType::RequiredPredicateError,
            FindingDetail::NeverType { .. } => ErrorType::NeverTypeOfError,
            FindingDetail::ForbiddenMethod { .. } => ErrorType::ForbiddenMethodError,
            FindingDetail::Typestate { .. } => ErrorType::TypestateError,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Finding {
    pub error_type: ErrorType,
    pub rule_class: String,
    pub location: SourceLocation,
    /// Method whose body was analyzed.
    pub method: String,
    pub allocation_site: SourceLocation,
    pub detail: FindingDetail,
    pub path_flags: PathFlags,
    pub message: String,
}

impl Finding {
    fn dedup_key(&self) -> (ErrorType, SourceLocation, String, String) {
        (
            self.error_type,
            self.location.clone(),
            self.rule_class.clone(),
            serde_json::to_string(&self.detail).unwrap_or_default(),
        )
    }
}

/// Total order used for analyzer output.
pub fn finding_order(a: &Finding, b: &Finding) -> std::cmp::Ordering {
    (&a.location, a.error_type, &a.rule_class)
        .cmp(&(&b.location, b.error_type, &b.rule_class))
        .then_with(|| {
            let da = serde_json::to_string(&a.detail).unwrap_or_default();
            let db = serde_json::to_string(&b.detail).unwrap_or_default();
            da.cmp(&db)
        })
        .then_with(|| a.method.cmp(&b.method))
}

#[derive(Debug, Clone)]
pub struct LifecyclePath {
    pub path_index: usize,
    pub events: Vec<EventOcc>,
    pub requires: Vec<ReqOcc>,
    pub normal_exit: bool,
    pub escapes: bool,
    pub executes_loop: bool,
}

/// One tracked object of one method.
#[derive(Debug, Clone)]
pub struct ObjectLifecycle {
    pub allocation: ObjId,
    pub allocation_site: SourceLocation,
    pub rule_class: String,
    pub method: String,
    pub method_is_public: bool,
    /// Paths on which the allocation executes.
    pub paths: Vec<LifecyclePath>,
    pub truncated: bool,
}

impl ObjectLifecycle {
    pub fn path_indices(&self) -> BTreeSet<usize> {
        self.paths.iter().map(|p| p.path_index).collect()
    }

    /// Flags for a violation seen on `violating` paths.
    pub fn flags(&self, violating: &BTreeSet<usize>) -> PathFlags {
        PathFlags {
            exists_on_all_paths: !violating.is_empty() && *violating == self.path_indices(),
            loop_guarded: self
                .paths
                .iter()
                .any(|p| p.executes_loop && !violating.contains(&p.path_index)),
        }
    }
}

/// Lifecycles of every tracked object in `m`, plus replay diagnostics.
pub fn collect_object_lifecycles_with_diagnostics(
    m: &MethodIR,
    rules: &RuleSet,
) -> (Vec<ObjectLifecycle>, Vec<Diagnostic>) {
    let trace = sim::trace_method(m, rules, None);
    let mut out = Vec::new();
    for (obj, info) in &trace.objects {
        let mut paths = Vec::new();
        for (i, p) in trace.paths.iter().enumerate() {
            if !p.allocated.contains(obj) {
                continue;
            }
            paths.push(LifecyclePath {
                path_index: i,
                events: p.events.iter().filter(|e| e.obj == *obj).cloned().collect(),
                requires: p.requires.iter().filter(|r| r.consumer == *obj).cloned().collect(),
                normal_exit: p.normal_exit,
                escapes: p.escapes.contains(obj),
                executes_loop: p.executes_loop,
            });
        }
        out.push(ObjectLifecycle {
            allocation: *obj,
            allocation_site: info.location.clone(),
            rule_class: info.rule_class.clone(),
            method: m.name.clone(),
            method_is_public: m.visibility == Visibility::Public,
            paths,
            truncated: trace.truncated,
        });
    }
    (out, trace.diagnostics.into_iter().collect())
}

pub fn collect_object_lifecycles(m: &MethodIR, rules: &RuleSet) -> Vec<ObjectLifecycle> {
    collect_object_lifecycles_with_diagnostics(m, rules).0
}

/// Constant value of `value` as read by statement `stmt`, if every path
/// reaching the statement agrees on it.
pub fn resolve_value(m: &MethodIR, stmt: StmtId, value: &ValueRef) -> Option<Const> {
    let s = m.statement(stmt)?;
    let idx = s.kind.operands().iter().position(|v| *v == value)?;
    let trace = sim::trace_method(m, &RuleSet::default(), Some((stmt, idx)));
    let mut seen = trace.paths.iter().flat_map(|p| p.probes.iter());
    let first = seen.next()?.konst.clone()?;
    seen.all(|v| v.konst.as_ref() == Some(&first)).then_some(first)
}

/// Findings of one method, unsorted and not deduplicated.
pub fn analyze_method(m: &MethodIR, rules: &RuleSet) -> (Vec<Finding>, Vec<Diagnostic>) {
    let (lifecycles, mut diags) = collect_object_lifecycles_with_diagnostics(m, rules);
    let mut findings = Vec::new();
    let mut own_invalid = BTreeSet::new();
    for lc in &lifecycles {
        let Some(rule) = rules.get(&lc.rule_class) else {
            continue;
        };
        let mut own = check_typestate(lc, rule, &mut diags);
        own.extend(check_forbidden(lc, rule));
        own.extend(check_constraints(lc, rule, &mut diags));
        own.extend(check_never_type(lc, rule, &mut diags));
        if !own.is_empty() {
            own_invalid.insert(lc.allocation);
        }
        findings.extend(own);
    }
    let invalid = propagate_predicates(&lifecycles, &own_invalid);
    let classes: BTreeMap<ObjId, &str> = lifecycles
        .iter()
        .map(|lc| (lc.allocation, lc.rule_class.as_str()))
        .collect();
    for lc in &lifecycles {
        if let Some(rule) = rules.get(&lc.rule_class) {
            findings.extend(check_required_predicates(lc, rule, &invalid, &classes));
        }
    }
    (findings, diags)
}

/// All findings of a unit, deduplicated and deterministically ordered, plus
/// diagnostics.
pub fn analyze_unit_with_diagnostics(
    unit: &CompilationUnitIR,
    rules: &RuleSet,
) -> (Vec<Finding>, Vec<Diagnostic>) {
    let mut all = Vec::new();
    let mut diags = BTreeSet::new();
    for m in &unit.methods {
        let (f, d) = analyze_method(m, rules);
        all.extend(f);
        diags.extend(d);
    }
    // inlined helper bodies are analyzed twice; keep the first copy
    let mut seen = BTreeSet::new();
    all.retain(|f| seen.insert(f.dedup_key()));
    all.sort_by(finding_order);
    (all, diags.into_iter().collect())
}

pub fn analyze_unit(unit: &CompilationUnitIR, rules: &RuleSet) -> Vec<Finding> {
    analyze_unit_with_diagnostics(unit, rules).0
}
