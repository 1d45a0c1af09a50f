//! Per-path replay of a method: value tracking, event extraction and
//! predicate bookkeeping.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::paths::{enumerate_paths, CfgPath, LoopInfo, PATH_BUDGET};
use super::values::*;
use crate::diag::Diagnostic;
use crate::frontend::{BlockId, MethodIR, SourceLocation, Statement, StatementKind, StmtId, ValueRef};
use crate::rulelang::{PredicateBinding, RuleSet, RuleSpec, ValueKind, CONSTRUCTOR};

/// Tracked objects are identified by their allocation statement.
pub type ObjId = StmtId;

#[derive(Debug, Clone)]
pub struct ObjInfo {
    pub rule_class: String,
    pub location: SourceLocation,
}

#[derive(Debug, Clone)]
pub struct EventOcc {
    pub obj: ObjId,
    pub statement: StmtId,
    /// Declared (non-alias) event label.
    pub label: String,
    pub method: String,
    pub args: Vec<ArgValue>,
    pub location: SourceLocation,
    pub block: BlockId,
    pub in_loop_body: bool,
}

/// One evaluation of a REQUIRES clause at an event.
#[derive(Debug, Clone)]
pub struct ReqOcc {
    pub consumer: ObjId,
    pub statement: StmtId,
    /// Index into the consumer rule's `requires`.
    pub requirement: usize,
    pub label: String,
    pub method: String,
    pub param_index: usize,
    /// Objects whose predicate of the required name reaches the argument.
    pub producers: BTreeSet<ObjId>,
    /// Tracked objects the argument value came from (producers included).
    pub upstream: BTreeSet<ObjId>,
    pub location: SourceLocation,
}

#[derive(Debug, Clone, Default)]
pub struct PathTrace {
    pub normal_exit: bool,
    /// Some block of the path lies inside a loop body.
    pub executes_loop: bool,
    pub allocated: Vec<ObjId>,
    pub events: Vec<EventOcc>,
    pub escapes: BTreeSet<ObjId>,
    pub requires: Vec<ReqOcc>,
    /// Values of the probed operand each time its statement ran.
    pub probes: Vec<ArgValue>,
}

#[derive(Debug, Clone, Default)]
pub struct MethodTrace {
    pub paths: Vec<PathTrace>,
    pub truncated: bool,
    pub objects: BTreeMap<ObjId, ObjInfo>,
    pub diagnostics: BTreeSet<Diagnostic>,
}

/// Replay every bounded path of `m`. `probe` records the value of one
/// operand (by statement and operand index) whenever that statement runs.
pub fn trace_method(m: &MethodIR, rules: &RuleSet, probe: Option<(StmtId, usize)>) -> MethodTrace {
    let loops = LoopInfo::compute(m);
    let (paths, truncated) = enumerate_paths(m, &loops, PATH_BUDGET);
    let mut out = MethodTrace {
        truncated,
        ..Default::default()
    };
    if truncated {
        out.diagnostics.insert(
            Diagnostic::new(
                "path-budget",
                format!(
                    "method `{}` has more than {PATH_BUDGET} paths; only the first {PATH_BUDGET} are analyzed",
                    m.name
                ),
            )
            .at(m.location.clone()),
        );
    }
    for p in &paths {
        let trace = PathSim {
            m,
            rules,
            loops: &loops,
            probe,
            env: HashMap::new(),
            results: HashMap::new(),
            tracked: HashMap::new(),
            preds: HashMap::new(),
            trace: PathTrace {
                normal_exit: p.normal_exit,
                ..Default::default()
            },
            objects: &mut out.objects,
            diags: &mut out.diagnostics,
        }
        .run(p);
        out.paths.push(trace);
    }
    out
}

struct PathSim<'a, 'o> {
    m: &'a MethodIR,
    rules: &'a RuleSet,
    loops: &'a LoopInfo,
    probe: Option<(StmtId, usize)>,
    env: HashMap<String, ArgValue>,
    results: HashMap<StmtId, ArgValue>,
    tracked: HashMap<ObjId, &'a RuleSpec>,
    /// Carrier identity -> (predicate name, producing object).
    preds: HashMap<Ident, Vec<(String, ObjId)>>,
    trace: PathTrace,
    objects: &'o mut BTreeMap<ObjId, ObjInfo>,
    diags: &'o mut BTreeSet<Diagnostic>,
}

impl<'a> PathSim<'a, '_> {
    fn run(mut self, path: &CfgPath) -> PathTrace {
        self.trace.executes_loop = path.blocks.iter().any(|b| self.loops.in_body(*b));
        for b in &path.blocks {
            let block = self.m.block(*b).expect("path blocks exist");
            for s in &block.statements {
                self.step(s, *b);
            }
        }
        self.trace
    }

    fn eval(&mut self, v: &ValueRef) -> ArgValue {
        match v {
            ValueRef::StringLiteral { value } => ArgValue {
                konst: Some(Const::Str(value.clone())),
                kind: ValueKind::Str,
                origin: Origin::Literal,
                ..ArgValue::unknown()
            },
            ValueRef::IntLiteral { value } => ArgValue {
                konst: Some(Const::Int(*value)),
                kind: ValueKind::Int,
                origin: Origin::NotString,
                ..ArgValue::unknown()
            },
            ValueRef::CharArrayLiteral { value } => ArgValue {
                konst: Some(Const::Chars(value.clone())),
                kind: ValueKind::Chars,
                origin: Origin::NotString,
                ..ArgValue::unknown()
            },
            ValueRef::NullLiteral => ArgValue {
                kind: ValueKind::Null,
                origin: Origin::NotString,
                ..ArgValue::unknown()
            },
            ValueRef::Variable {
                name,
                declared_type,
            } => {
                if let Some(v) = self.env.get(name) {
                    return v.clone();
                }
                let param = self.m.parameter(name);
                let ty = param.map(|p| p.type_name.as_str()).unwrap_or(declared_type);
                let kind = kind_of_type(ty);
                let origin = match kind {
                    ValueKind::Str => Origin::Variable {
                        name: name.clone(),
                        parameter: param.is_some(),
                    },
                    ValueKind::Unknown => Origin::Unknown,
                    _ => Origin::NotString,
                };
                let v = ArgValue {
                    ident: Some(Ident::Ext(name.clone())),
                    kind,
                    origin,
                    ..ArgValue::unknown()
                };
                self.env.insert(name.clone(), v.clone());
                v
            }
            ValueRef::CallResult { statement } => self
                .results
                .get(statement)
                .cloned()
                .unwrap_or_else(ArgValue::unknown),
            ValueRef::Unknown => ArgValue::unknown(),
        }
    }

    fn step(&mut self, s: &Statement, block: BlockId) {
        if let Some((pid, idx)) = self.probe {
            if pid == s.id {
                let ops = s.kind.operands();
                let v = ops.get(idx).map(|v| self.eval(v)).unwrap_or_else(ArgValue::unknown);
                self.trace.probes.push(v);
            }
        }
        match &s.kind {
            StatementKind::Allocation {
                target,
                class_name,
                factory,
                args,
            } => {
                let args: Vec<ArgValue> = args.iter().map(|a| self.eval(a)).collect();
                let kind = kind_of_type(class_name);
                let val = ArgValue {
                    ident: Some(Ident::Def(s.id)),
                    kind,
                    origin: if kind == ValueKind::Str {
                        Origin::Call {
                            method: "new String".into(),
                        }
                    } else {
                        Origin::NotString
                    },
                    ..ArgValue::unknown()
                };
                if let Some(rule) = self.rules.find(class_name) {
                    let method = factory.as_deref().unwrap_or(CONSTRUCTOR);
                    let kinds: Vec<ValueKind> = args.iter().map(|a| a.kind).collect();
                    match rule.match_call(method, &kinds) {
                        Some(ev) if !self.tracked.contains_key(&s.id) => {
                            let label = ev.label.clone();
                            self.tracked.insert(s.id, rule);
                            self.trace.allocated.push(s.id);
                            self.objects.entry(s.id).or_insert_with(|| ObjInfo {
                                rule_class: rule.class_name.clone(),
                                location: s.location.clone(),
                            });
                            for e in &rule.ensures {
                                if e.binding == PredicateBinding::ThisObject {
                                    self.add_pred(Ident::Def(s.id), &e.predicate_name, s.id);
                                }
                            }
                            self.event(s.id, s, block, &label, method, args, None);
                        }
                        Some(_) => {}
                        None => {
                            self.diags.insert(
                                Diagnostic::new(
                                    "unmatched-allocation",
                                    format!(
                                        "`{method}` with {} argument(s) matches no event of {}; object not tracked",
                                        kinds.len(),
                                        rule.simple_name()
                                    ),
                                )
                                .at(s.location.clone()),
                            );
                        }
                    }
                }
                self.env.insert(target.clone(), val);
            }
            StatementKind::Invocation {
                result,
                receiver,
                owner,
                method,
                args,
            } => {
                let recv = receiver.as_ref().map(|r| self.eval(r));
                let args: Vec<ArgValue> = args.iter().map(|a| self.eval(a)).collect();
                let mut val = call_result(recv.as_ref(), owner.as_deref(), method, &args)
                    .with_ident(Ident::Def(s.id));
                let obj = match recv.as_ref().and_then(|r| r.ident.as_ref()) {
                    Some(Ident::Def(o)) if self.tracked.contains_key(o) => Some(*o),
                    _ => None,
                };
                if let Some(o) = obj {
                    let rule = self.tracked[&o];
                    let kinds: Vec<ValueKind> = args.iter().map(|a| a.kind).collect();
                    if let Some(ev) = rule.match_call(method, &kinds) {
                        let label = ev.label.clone();
                        val.producer = Some(o);
                        self.event(o, s, block, &label, method, args, Some(s.id));
                    }
                }
                // zero-argument accessors hand on the receiver's predicates
                if method.starts_with("get") && s.kind.args().is_empty() {
                    if let Some(rid) = recv.as_ref().and_then(|r| r.ident.clone()) {
                        if let Some(ps) = self.preds.get(&rid).cloned() {
                            self.preds.entry(Ident::Def(s.id)).or_default().extend(ps);
                        }
                        if val.producer.is_none() {
                            val.producer = recv.as_ref().and_then(|r| r.producer);
                        }
                    }
                }
                self.results.insert(s.id, val.clone());
                if let Some(r) = result {
                    self.env.insert(r.clone(), val);
                }
            }
            StatementKind::Assignment { target, source } => {
                let mut val = self.eval(source);
                if val.ident.is_none() {
                    val.ident = Some(Ident::Def(s.id));
                }
                if target.starts_with("this.") {
                    self.mark_escape(&val);
                }
                self.env.insert(target.clone(), val);
            }
            StatementKind::Return { value } => {
                if let Some(v) = value {
                    let val = self.eval(v);
                    self.mark_escape(&val);
                }
            }
        }
    }

    fn mark_escape(&mut self, v: &ArgValue) {
        if let Some(Ident::Def(o)) = &v.ident {
            if self.tracked.contains_key(o) {
                self.trace.escapes.insert(*o);
            }
        }
    }

    fn add_pred(&mut self, carrier: Ident, name: &str, producer: ObjId) {
        self.preds
            .entry(carrier)
            .or_default()
            .push((name.to_string(), producer));
    }

    #[allow(clippy::too_many_arguments)]
    fn event(
        &mut self,
        obj: ObjId,
        s: &Statement,
        block: BlockId,
        label: &str,
        method: &str,
        args: Vec<ArgValue>,
        result: Option<StmtId>,
    ) {
        let rule = self.tracked[&obj];
        for (ri, req) in rule.requires.iter().enumerate() {
            let PredicateBinding::Param { event, index } = &req.binding else {
                continue;
            };
            if !rule.covers(event, label) || *index >= args.len() {
                continue;
            }
            let a = &args[*index];
            if a.kind == ValueKind::Null {
                continue;
            }
            let producers: BTreeSet<ObjId> = a
                .ident
                .as_ref()
                .and_then(|id| self.preds.get(id))
                .into_iter()
                .flatten()
                .filter(|(n, _)| *n == req.predicate_name)
                .map(|(_, p)| *p)
                .collect();
            let mut upstream = producers.clone();
            upstream.extend(a.producer);
            self.trace.requires.push(ReqOcc {
                consumer: obj,
                statement: s.id,
                requirement: ri,
                label: label.to_string(),
                method: method.to_string(),
                param_index: *index,
                producers,
                upstream,
                location: s.location.clone(),
            });
        }
        for e in &rule.ensures {
            match &e.binding {
                PredicateBinding::ReturnValue { event } if rule.covers(event, label) => {
                    if let Some(r) = result {
                        self.add_pred(Ident::Def(r), &e.predicate_name, obj);
                    }
                }
                PredicateBinding::Param { event, index } if rule.covers(event, label) => {
                    if let Some(id) = args.get(*index).and_then(|a| a.ident.clone()) {
                        self.add_pred(id, &e.predicate_name, obj);
                    }
                }
                _ => {}
            }
        }
        self.trace.events.push(EventOcc {
            obj,
            statement: s.id,
            label: label.to_string(),
            method: method.to_string(),
            args,
            location: s.location.clone(),
            block,
            in_loop_body: self.loops.in_body(block),
        });
    }
}
