//! Substitution of calls to small local helpers.
//!
//! A helper qualifies when it is a private method of the same unit whose
//! body is a single block. Its parameters are bound by assignments, its
//! locals renamed with a per-site suffix and its return value assigned to
//! the call's result. Helpers taking part in a call cycle are never inlined.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::ir::*;
use crate::diag::Diagnostic;

/// Inline qualifying local helper calls up to `depth` levels deep.
pub fn inline_local_helpers(unit: &CompilationUnitIR, depth: usize) -> CompilationUnitIR {
    let mut out = unit.clone();
    if depth == 0 {
        return out;
    }
    let by_key: HashMap<(&str, usize), &MethodIR> = unit
        .methods
        .iter()
        .map(|m| ((m.name.as_str(), m.arity()), m))
        .collect();

    let recursive = recursive_methods(unit);
    for name in &recursive {
        out.diagnostics.push(
            Diagnostic::new(
                "recursive-helper",
                format!("`{name}` is part of a call cycle and is not inlined"),
            )
            .at(unit
                .methods
                .iter()
                .find(|m| &m.name == name)
                .map(|m| m.location.clone())
                .unwrap_or_default()),
        );
    }
    let helper = |method: &str, arity: usize| -> Option<&MethodIR> {
        let m = by_key.get(&(method, arity))?;
        let ok = m.visibility == Visibility::Private
            && m.is_straight_line()
            && !recursive.contains(&m.name);
        ok.then_some(*m)
    };

    for _ in 0..depth {
        let mut changed = false;
        for m in &mut out.methods {
            changed |= inline_once(m, &helper);
        }
        if !changed {
            break;
        }
    }
    out
}

fn local_call(kind: &StatementKind) -> Option<(&str, usize)> {
    match kind {
        StatementKind::Invocation {
            receiver: None,
            owner: None,
            method,
            args,
            ..
        } => Some((method, args.len())),
        _ => None,
    }
}

/// Methods that can reach themselves through local calls.
fn recursive_methods(unit: &CompilationUnitIR) -> BTreeSet<String> {
    let mut edges: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let names: BTreeSet<&str> = unit.methods.iter().map(|m| m.name.as_str()).collect();
    for m in &unit.methods {
        let e = edges.entry(&m.name).or_default();
        for s in m.statements() {
            if let Some((callee, _)) = local_call(&s.kind) {
                if names.contains(callee) {
                    e.insert(callee);
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    for start in names {
        let mut stack: Vec<&str> = edges[start].iter().copied().collect();
        let mut seen = BTreeSet::new();
        while let Some(n) = stack.pop() {
            if n == start {
                out.insert(start.to_string());
                break;
            }
            if seen.insert(n) {
                stack.extend(edges.get(n).into_iter().flatten().copied());
            }
        }
    }
    out
}

/// One inlining level over `m`; returns whether anything was substituted.
fn inline_once<'h>(m: &mut MethodIR, helper: &impl Fn(&str, usize) -> Option<&'h MethodIR>) -> bool {
    let mut next_id = m.next_statement_id();
    let mut site = m
        .statements()
        .filter_map(|s| s.kind.defined_var())
        .filter_map(|v| v.rsplit_once("$i").and_then(|(_, n)| n.parse::<usize>().ok()))
        .max()
        .unwrap_or(0);
    let mut replaced: HashMap<StmtId, ValueRef> = HashMap::new();
    let mut changed = false;

    for bi in 0..m.blocks.len() {
        let old = std::mem::take(&mut m.blocks[bi].statements);
        let mut new = Vec::with_capacity(old.len());
        for stmt in old {
            let Some(h) = local_call(&stmt.kind).and_then(|(n, a)| helper(n, a)) else {
                new.push(stmt);
                continue;
            };
            changed = true;
            site += 1;
            let suffix = format!("$i{site}");
            let StatementKind::Invocation { result, args, .. } = &stmt.kind else {
                unreachable!()
            };
            let locals: BTreeSet<&str> = h
                .parameters
                .iter()
                .map(|p| p.name.as_str())
                .chain(h.statements().filter_map(|s| s.kind.defined_var()))
                .filter(|v| *v != "this" && !v.starts_with("this."))
                .collect();
            let rename = |name: &str| -> String {
                if locals.contains(name) {
                    format!("{name}{suffix}")
                } else {
                    name.to_string()
                }
            };
            for (p, a) in h.parameters.iter().zip(args) {
                new.push(Statement {
                    id: next_id,
                    kind: StatementKind::Assignment {
                        target: rename(&p.name),
                        source: a.clone(),
                    },
                    location: stmt.location.clone(),
                });
                next_id += 1;
            }
            let mut ids: HashMap<StmtId, StmtId> = HashMap::new();
            for hs in h.statements() {
                ids.insert(hs.id, next_id);
                next_id += 1;
            }
            let map_value = |v: &ValueRef| -> ValueRef {
                match v {
                    ValueRef::Variable {
                        name,
                        declared_type,
                    } => ValueRef::var(rename(name), declared_type.clone()),
                    ValueRef::CallResult { statement } => ValueRef::CallResult {
                        statement: ids.get(statement).copied().unwrap_or(*statement),
                    },
                    other => other.clone(),
                }
            };
            let mut returned: Option<ValueRef> = None;
            for hs in h.statements() {
                let kind = match &hs.kind {
                    StatementKind::Allocation {
                        target,
                        class_name,
                        factory,
                        args,
                    } => StatementKind::Allocation {
                        target: rename(target),
                        class_name: class_name.clone(),
                        factory: factory.clone(),
                        args: args.iter().map(&map_value).collect(),
                    },
                    StatementKind::Invocation {
                        result,
                        receiver,
                        owner,
                        method,
                        args,
                    } => StatementKind::Invocation {
                        result: result.as_deref().map(&rename),
                        receiver: receiver.as_ref().map(&map_value),
                        owner: owner.clone(),
                        method: method.clone(),
                        args: args.iter().map(&map_value).collect(),
                    },
                    StatementKind::Assignment { target, source } => StatementKind::Assignment {
                        target: rename(target),
                        source: map_value(source),
                    },
                    StatementKind::Return { value } => {
                        returned = value.as_ref().map(&map_value);
                        continue;
                    }
                };
                new.push(Statement {
                    id: ids[&hs.id],
                    kind,
                    location: hs.location.clone(),
                });
            }
            let value = returned.unwrap_or(ValueRef::Unknown);
            match result {
                Some(r) => new.push(Statement {
                    id: next_id,
                    kind: StatementKind::Assignment {
                        target: r.clone(),
                        source: value,
                    },
                    location: stmt.location.clone(),
                }),
                None => {
                    // the call's value may be used as CallResult elsewhere
                    let tmp = format!("$r{suffix}");
                    new.push(Statement {
                        id: next_id,
                        kind: StatementKind::Assignment {
                            target: tmp.clone(),
                            source: value,
                        },
                        location: stmt.location.clone(),
                    });
                    replaced.insert(stmt.id, ValueRef::var(tmp, h.return_type.clone()));
                }
            }
            next_id += 1;
        }
        m.blocks[bi].statements = new;
    }

    if !replaced.is_empty() {
        let fix = |v: &mut ValueRef| {
            if let ValueRef::CallResult { statement } = v {
                if let Some(r) = replaced.get(statement) {
                    *v = r.clone();
                }
            }
        };
        for b in &mut m.blocks {
            for s in &mut b.statements {
                match &mut s.kind {
                    StatementKind::Allocation { args, .. } => args.iter_mut().for_each(fix),
                    StatementKind::Invocation { receiver, args, .. } => {
                        receiver.iter_mut().for_each(fix);
                        args.iter_mut().for_each(fix);
                    }
                    StatementKind::Assignment { source, .. } => fix(source),
                    StatementKind::Return { value } => value.iter_mut().for_each(fix),
                }
            }
        }
    }
    changed
}
