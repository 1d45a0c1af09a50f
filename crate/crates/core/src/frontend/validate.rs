//! Structural checks on IR produced by the parser or loaded from JSON.

use std::collections::{BTreeSet, HashMap, HashSet};

use super::ir::*;

/// Problems with one method's CFG; empty when well-formed.
pub fn validate_method(m: &MethodIR) -> Vec<String> {
    let mut errs = Vec::new();
    let mut ids = HashSet::new();
    for b in &m.blocks {
        if !ids.insert(b.id) {
            errs.push(format!("duplicate block id {}", b.id));
        }
    }
    if !ids.contains(&m.entry) {
        errs.push(format!("entry block {} does not exist", m.entry));
    }
    for e in &m.exits {
        if !ids.contains(e) {
            errs.push(format!("exit block {e} does not exist"));
        }
    }
    for b in &m.blocks {
        for s in &b.successors {
            if !ids.contains(s) {
                errs.push(format!("block {} has edge to missing block {s}", b.id));
            }
        }
    }
    if errs.is_empty() {
        let succ: HashMap<BlockId, &[BlockId]> =
            m.blocks.iter().map(|b| (b.id, b.successors.as_slice())).collect();
        let mut seen = BTreeSet::new();
        let mut stack = vec![m.entry];
        while let Some(b) = stack.pop() {
            if seen.insert(b) {
                stack.extend(succ[&b].iter().copied());
            }
        }
        for b in &m.blocks {
            if !seen.contains(&b.id) {
                errs.push(format!("block {} is unreachable from entry", b.id));
            }
        }
    }

    let mut invocations = HashSet::new();
    let mut stmt_ids = HashSet::new();
    for s in m.statements() {
        if !stmt_ids.insert(s.id) {
            errs.push(format!("duplicate statement id {}", s.id));
        }
        if matches!(s.kind, StatementKind::Invocation { .. }) {
            invocations.insert(s.id);
        }
        if s.location.line == 0 || s.location.column == 0 {
            errs.push(format!("statement {} has a zero line or column", s.id));
        }
    }
    for s in m.statements() {
        for v in s.kind.operands() {
            if let ValueRef::CallResult { statement } = v {
                if !invocations.contains(statement) {
                    errs.push(format!(
                        "statement {} refers to #{statement}, which is not an invocation",
                        s.id
                    ));
                }
            }
        }
    }
    errs
}

/// Problems anywhere in the unit, each prefixed with the method name.
pub fn validate_unit(u: &CompilationUnitIR) -> Vec<String> {
    let mut errs = Vec::new();
    let mut keys = HashSet::new();
    for m in &u.methods {
        if !keys.insert((m.name.as_str(), m.arity())) {
            errs.push(format!("duplicate method `{}` with arity {}", m.name, m.arity()));
        }
        for e in validate_method(m) {
            errs.push(format!("method `{}`: {e}", m.name));
        }
    }
    errs
}
