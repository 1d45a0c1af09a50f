//! Per-lifecycle checks. Each check collects violations per path, merges
//! occurrences at the same statement and derives path flags from the set of
//! violating paths.

use std::collections::{BTreeMap, BTreeSet};

use super::sim::{EventOcc, ObjId};
use super::transform::{parse_transformation, Transformation};
use super::values::{Const, Origin};
use super::{Finding, FindingDetail, ObjectLifecycle};
use crate::diag::Diagnostic;
use crate::frontend::StmtId;
use crate::rulelang::{
    Component, ConstraintKind, ConstraintSpec, Literal, ParamKind, RuleSpec, ValueKind,
};

fn expected_methods(rule: &RuleSpec, labels: &BTreeSet<String>) -> Vec<String> {
    let ms: BTreeSet<String> = labels
        .iter()
        .filter_map(|l| rule.event(l))
        .map(|e| e.pattern.method_name.clone())
        .collect();
    ms.into_iter().collect()
}

fn finding(
    lc: &ObjectLifecycle,
    at: &EventOcc,
    detail: FindingDetail,
    paths: &BTreeSet<usize>,
    message: String,
) -> Finding {
    Finding {
        error_type: detail.error_type(),
        rule_class: lc.rule_class.clone(),
        location: at.location.clone(),
        method: lc.method.clone(),
        allocation_site: lc.allocation_site.clone(),
        detail,
        path_flags: lc.flags(paths),
        message,
    }
}

struct Occ<'a> {
    at: &'a EventOcc,
    expected: BTreeSet<String>,
    paths: BTreeSet<usize>,
}

fn record<'a>(
    map: &mut BTreeMap<StmtId, Occ<'a>>,
    at: &'a EventOcc,
    expected: Vec<&str>,
    path: usize,
) {
    let o = map.entry(at.statement).or_insert_with(|| Occ {
        at,
        expected: BTreeSet::new(),
        paths: BTreeSet::new(),
    });
    o.expected.extend(expected.into_iter().map(String::from));
    o.paths.insert(path);
}

/// Typestate and incomplete-operation violations. Only the first violation
/// of a path is reported; a path ending in a non-accepting state reports at
/// its last event, unless the object escapes or the path ends in a throw.
pub fn check_typestate(
    lc: &ObjectLifecycle,
    rule: &RuleSpec,
    diags: &mut Vec<Diagnostic>,
) -> Vec<Finding> {
    let a = &rule.automaton;
    let mut ts = BTreeMap::new();
    let mut io = BTreeMap::new();
    for p in &lc.paths {
        let mut state = a.initial();
        let mut broken = false;
        for e in &p.events {
            match a.step(state, &e.label) {
                Some(n) => state = n,
                None => {
                    record(&mut ts, e, a.outgoing(state), p.path_index);
                    broken = true;
                    break;
                }
            }
        }
        if broken || a.is_accepting(state) {
            continue;
        }
        let Some(last) = p.events.last() else {
            continue;
        };
        if p.escapes {
            let d = Diagnostic::new(
                "escaped-incomplete",
                format!(
                    "{} object escapes `{}` before its operation completes; not reported",
                    rule.simple_name(),
                    lc.method
                ),
            )
            .at(last.location.clone());
            if !diags.contains(&d) {
                diags.push(d);
            }
            continue;
        }
        if !p.normal_exit {
            continue;
        }
        record(&mut io, last, a.outgoing(state), p.path_index);
    }
    let mut out = Vec::new();
    for o in ts.values() {
        let methods = expected_methods(rule, &o.expected);
        let message = format!(
            "call to `{}` is out of order on {}; expected {}",
            o.at.method,
            rule.simple_name(),
            list_or_end(&methods)
        );
        let detail = FindingDetail::Typestate {
            event: o.at.label.clone(),
            method: o.at.method.clone(),
            expected_events: o.expected.iter().cloned().collect(),
            expected_methods: methods,
        };
        out.push(finding(lc, o.at, detail, &o.paths, message));
    }
    for o in io.values() {
        let methods = expected_methods(rule, &o.expected);
        let message = format!(
            "operation on {} is not completed after `{}`; missing a call to {}",
            rule.simple_name(),
            o.at.method,
            list_or_end(&methods)
        );
        let detail = FindingDetail::IncompleteOperation {
            last_event: o.at.label.clone(),
            last_method: o.at.method.clone(),
            expected_events: o.expected.iter().cloned().collect(),
            expected_methods: methods,
        };
        out.push(finding(lc, o.at, detail, &o.paths, message));
    }
    out
}

fn list_or_end(methods: &[String]) -> String {
    if methods.is_empty() {
        "no further call".into()
    } else {
        methods
            .iter()
            .map(|m| format!("`{m}`"))
            .collect::<Vec<_>>()
            .join(" or ")
    }
}

pub fn check_forbidden(lc: &ObjectLifecycle, rule: &RuleSpec) -> Vec<Finding> {
    let mut occ = BTreeMap::new();
    for p in &lc.paths {
        for e in &p.events {
            if rule.is_forbidden(&e.label) {
                record(&mut occ, e, vec![], p.path_index);
            }
        }
    }
    occ.values()
        .map(|o| {
            let pattern = rule
                .event(&o.at.label)
                .map(|e| e.pattern.to_string())
                .unwrap_or_default();
            let message = format!(
                "`{}` on {} is forbidden (matches `{pattern}`)",
                o.at.method,
                rule.simple_name()
            );
            let detail = FindingDetail::ForbiddenMethod {
                event: o.at.label.clone(),
                method: o.at.method.clone(),
                pattern,
            };
            finding(lc, o.at, detail, &o.paths, message)
        })
        .collect()
}

/// Outcome of checking one resolved value against one constraint.
struct Violation {
    value: String,
    component: Option<Component>,
    transformation: Option<Transformation>,
    malformed: bool,
    defaulted: bool,
    why: String,
}

fn in_set(values: &[Literal], text: &str) -> bool {
    values.iter().any(|v| v.matches_text(text))
}

fn evaluate(kind: &ConstraintKind, k: &Const) -> Option<Violation> {
    let text = k.text();
    let plain = |why: String| Violation {
        value: text.clone(),
        component: None,
        transformation: None,
        malformed: false,
        defaulted: false,
        why,
    };
    match kind {
        ConstraintKind::ValueInSet { values } => {
            (!in_set(values, &text)).then(|| plain(format!("{k} is not an allowed value")))
        }
        ConstraintKind::ValueNotInSet { values } => {
            in_set(values, &text).then(|| plain(format!("{k} is a disallowed value")))
        }
        ConstraintKind::IntAtLeast { bound } => match k {
            Const::Int(i) if i < bound => Some(plain(format!("{i} is below {bound}"))),
            _ => None,
        },
        ConstraintKind::TransformationComponentInSet {
            component,
            negated,
            values,
            guard,
        } => {
            let Const::Str(spec) = k else { return None };
            let t = match parse_transformation(spec) {
                Ok(t) => t,
                Err(e) => {
                    return Some(Violation {
                        malformed: true,
                        why: format!("malformed transformation: {}", e.0),
                        ..plain(String::new())
                    })
                }
            };
            if let Some(g) = guard {
                if in_set(&g.values, t.component(g.component)) == g.negated {
                    return None;
                }
            }
            let v = t.component(*component).to_string();
            if in_set(values, &v) != *negated {
                return None;
            }
            let why = format!(
                "{} `{v}` of `{spec}` is not allowed{}",
                component.keyword(),
                if t.defaulted { " (provider default)" } else { "" }
            );
            Some(Violation {
                value: v,
                component: Some(*component),
                defaulted: t.defaulted,
                transformation: Some(t),
                malformed: false,
                why,
            })
        }
    }
}

/// Constraint violations on resolved arguments. An argument is resolved
/// only when every path reaching the event yields the same literal;
/// otherwise an `unresolved` diagnostic is emitted instead of a finding.
pub fn check_constraints(
    lc: &ObjectLifecycle,
    rule: &RuleSpec,
    diags: &mut Vec<Diagnostic>,
) -> Vec<Finding> {
    let mut out = Vec::new();
    let mut malformed_seen: BTreeSet<(StmtId, usize)> = BTreeSet::new();
    for c in &rule.constraints {
        let mut occ: BTreeMap<StmtId, Vec<(usize, &EventOcc)>> = BTreeMap::new();
        for p in &lc.paths {
            for e in &p.events {
                if rule.covers(&c.target_event, &e.label) && c.param_index < e.args.len() {
                    occ.entry(e.statement).or_default().push((p.path_index, e));
                }
            }
        }
        for (stmt, list) in occ {
            let at = list[0].1;
            let args: Vec<_> = list.iter().map(|(_, e)| &e.args[c.param_index]).collect();
            if args.iter().all(|a| a.kind == ValueKind::Null) {
                continue;
            }
            let first = args[0].konst.as_ref();
            let resolved = first.filter(|f| args.iter().all(|a| a.konst.as_ref() == Some(*f)));
            let Some(k) = resolved else {
                let d = Diagnostic::new(
                    "unresolved",
                    format!(
                        "argument {} of `{}` is not a constant; constraint `{c}` not checked",
                        c.param_index, at.method
                    ),
                )
                .at(at.location.clone());
                if !diags.contains(&d) {
                    diags.push(d);
                }
                continue;
            };
            let Some(v) = evaluate(&c.kind, k) else {
                continue;
            };
            if v.malformed && !malformed_seen.insert((stmt, c.param_index)) {
                continue;
            }
            let paths: BTreeSet<usize> = list.iter().map(|(p, _)| *p).collect();
            out.push(constraint_finding(lc, rule, at, c, v, &paths));
        }
    }
    out
}

fn constraint_finding(
    lc: &ObjectLifecycle,
    rule: &RuleSpec,
    at: &EventOcc,
    c: &ConstraintSpec,
    v: Violation,
    paths: &BTreeSet<usize>,
) -> Finding {
    let message = format!(
        "{}.{} argument {}: {}",
        rule.simple_name(),
        at.method,
        c.param_index,
        v.why
    );
    let detail = FindingDetail::Constraint {
        event: at.label.clone(),
        method: at.method.clone(),
        param_index: c.param_index,
        constraint: c.clone(),
        value: v.value,
        component: v.component,
        transformation: v.transformation,
        malformed: v.malformed,
        defaulted: v.defaulted,
    };
    finding(lc, at, detail, paths, message)
}

/// Parameters restricted by NEVERTYPE that receive a String-derived value.
pub fn check_never_type(
    lc: &ObjectLifecycle,
    rule: &RuleSpec,
    diags: &mut Vec<Diagnostic>,
) -> Vec<Finding> {
    let mut out = Vec::new();
    for nt in &rule.never_type {
        let mut occ: BTreeMap<StmtId, (&EventOcc, &Origin, BTreeSet<usize>)> = BTreeMap::new();
        for p in &lc.paths {
            for e in &p.events {
                if !rule.covers(&nt.target_event, &e.label) {
                    continue;
                }
                let Some(a) = e.args.get(nt.param_index) else {
                    continue;
                };
                if a.origin.is_string() {
                    occ.entry(e.statement)
                        .or_insert((e, &a.origin, BTreeSet::new()))
                        .2
                        .insert(p.path_index);
                } else if a.origin == Origin::Unknown && a.kind != ValueKind::Null {
                    let d = Diagnostic::new(
                        "unresolved-provenance",
                        format!(
                            "origin of argument {} of `{}` is unknown; {} restriction not checked",
                            nt.param_index, e.method, nt.forbidden_source_type
                        ),
                    )
                    .at(e.location.clone());
                    if !diags.contains(&d) {
                        diags.push(d);
                    }
                }
            }
        }
        for (at, origin, paths) in occ.values() {
            let public_parameter = match origin {
                Origin::Variable {
                    name,
                    parameter: true,
                } if lc.method_is_public => Some(name.clone()),
                _ => None,
            };
            let message = format!(
                "argument {} of `{}` on {} comes from a {} ({})",
                nt.param_index,
                at.method,
                rule.simple_name(),
                nt.forbidden_source_type,
                origin.describe()
            );
            let detail = FindingDetail::NeverType {
                event: at.label.clone(),
                method: at.method.clone(),
                param_index: nt.param_index,
                forbidden_source_type: nt.forbidden_source_type.clone(),
                origin: origin.describe(),
                public_parameter,
            };
            out.push(finding(lc, at, detail, paths, message));
        }
    }
    out
}

fn satisfied(producers: &BTreeSet<ObjId>, invalid: &BTreeSet<ObjId>) -> bool {
    producers.iter().any(|p| !invalid.contains(p))
}

/// Objects whose predicates cannot be trusted: those with own findings,
/// closed under "consumes no valid predicate for some requirement".
pub fn propagate_predicates(
    lifecycles: &[ObjectLifecycle],
    own_invalid: &BTreeSet<ObjId>,
) -> BTreeSet<ObjId> {
    let mut invalid = own_invalid.clone();
    loop {
        let before = invalid.len();
        for lc in lifecycles {
            if invalid.contains(&lc.allocation) {
                continue;
            }
            let broken = lc
                .paths
                .iter()
                .flat_map(|p| &p.requires)
                .any(|r| !satisfied(&r.producers, &invalid));
            if broken {
                invalid.insert(lc.allocation);
            }
        }
        if invalid.len() == before {
            return invalid;
        }
    }
}

/// REQUIRES clauses not met by a valid predicate reaching the argument.
pub fn check_required_predicates(
    lc: &ObjectLifecycle,
    rule: &RuleSpec,
    invalid: &BTreeSet<ObjId>,
    classes: &BTreeMap<ObjId, &str>,
) -> Vec<Finding> {
    struct Acc<'a> {
        at: &'a super::sim::ReqOcc,
        upstream: BTreeSet<String>,
        paths: BTreeSet<usize>,
    }
    let mut occ: BTreeMap<(StmtId, usize), Acc> = BTreeMap::new();
    for p in &lc.paths {
        for r in &p.requires {
            if satisfied(&r.producers, invalid) {
                continue;
            }
            let a = occ.entry((r.statement, r.requirement)).or_insert(Acc {
                at: r,
                upstream: BTreeSet::new(),
                paths: BTreeSet::new(),
            });
            a.upstream
                .extend(r.upstream.iter().filter_map(|u| classes.get(u)).map(|c| c.to_string()));
            a.paths.insert(p.path_index);
        }
    }
    occ.into_values()
        .map(|a| {
            let r = a.at;
            let spec = &rule.requires[r.requirement];
            let param_kind = rule
                .event(&r.label)
                .and_then(|e| e.pattern.parameter_kinds.get(r.param_index).copied())
                .unwrap_or(ParamKind::Wildcard);
            let upstream: Vec<String> = a.upstream.into_iter().collect();
            let message = if upstream.is_empty() {
                format!(
                    "argument {} of `{}` on {} is not known to be `{}`",
                    r.param_index,
                    r.method,
                    rule.simple_name(),
                    spec.predicate_name
                )
            } else {
                format!(
                    "argument {} of `{}` on {} is not `{}`: it comes from a misused {}",
                    r.param_index,
                    r.method,
                    rule.simple_name(),
                    spec.predicate_name,
                    upstream
                        .iter()
                        .map(|c| crate::rulelang::simple_name(c))
                        .collect::<Vec<_>>()
                        .join(", ")
                )
            };
            Finding {
                error_type: super::ErrorType::RequiredPredicateError,
                rule_class: lc.rule_class.clone(),
                location: r.location.clone(),
                method: lc.method.clone(),
                allocation_site: lc.allocation_site.clone(),
                detail: FindingDetail::RequiredPredicate {
                    event: r.label.clone(),
                    method: r.method.clone(),
                    param_index: r.param_index,
                    param_kind,
                    predicate: spec.predicate_name.clone(),
                    upstream_classes: upstream,
                },
                path_flags: lc.flags(&a.paths),
                message,
            }
        })
        .collect()
}
