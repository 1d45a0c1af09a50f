//! AST to IR lowering: one CFG per method, calls flattened in source order.

use std::collections::{BTreeMap, HashMap};

use super::ast::*;
use super::ir::*;
use crate::diag::Diagnostic;

/// Method-level bail-out: the construct is outside the supported subset.
#[derive(Debug)]
struct Skip {
    construct: String,
    pos: Pos,
}

type LResult<T> = Result<T, Skip>;

struct FieldInfo {
    ty: String,
    constant: Option<ValueRef>,
}

struct UnitCtx<'a> {
    file: &'a str,
    class_name: &'a str,
    imports: HashMap<&'a str, &'a str>,
    fields: HashMap<&'a str, FieldInfo>,
}

impl UnitCtx<'_> {
    fn resolve_type(&self, name: &str) -> String {
        if name.contains('.') {
            return name.to_string();
        }
        match self.imports.get(name) {
            Some(q) => q.to_string(),
            None => name.to_string(),
        }
    }

    fn loc(&self, pos: Pos) -> SourceLocation {
        SourceLocation::new(self.file, pos.line.max(1), pos.col.max(1))
    }
}

pub fn lower_unit(unit: &CompilationUnit, file: &str) -> CompilationUnitIR {
    let mut out = CompilationUnitIR::new(file);
    out.package_name = unit.package.clone().unwrap_or_default();
    let mut skipped: Vec<(String, Pos)> = unit.skipped.clone();
    let Some(class) = &unit.class else {
        out.diagnostics.push(Diagnostic::new(
            "no-class",
            "no supported top-level class declaration",
        ));
        for (what, pos) in skipped {
            out.diagnostics.push(
                Diagnostic::new("skipped-type", format!("{what} is not analyzed"))
                    .at(SourceLocation::new(file, pos.line, pos.col)),
            );
        }
        return out;
    };
    out.class_name = class.name.clone();
    skipped.extend(class.skipped.iter().cloned());

    let mut fields = HashMap::new();
    for f in &class.fields {
        for d in &f.decls {
            let ty = format!("{}{}", f.ty.display(), "[]".repeat(d.dims));
            let constant = match (&d.init, f.modifiers.is_final) {
                (Some(Expr::Lit(Lit::Str(s), _)), true) => Some(ValueRef::string(s.clone())),
                (Some(Expr::Lit(Lit::Int(i), _)), true) => Some(ValueRef::int(*i)),
                _ => None,
            };
            fields.insert(d.name.as_str(), FieldInfo { ty, constant });
        }
    }
    let ctx = UnitCtx {
        file,
        class_name: &class.name,
        imports: unit
            .imports
            .iter()
            .map(|(s, q)| (s.as_str(), q.as_str()))
            .collect(),
        fields,
    };

    let mut seen: BTreeMap<(String, usize), usize> = BTreeMap::new();
    for m in &class.methods {
        let stmts = match &m.body {
            MethodBody::Abstract => continue,
            MethodBody::Broken(msg, pos) => {
                out.diagnostics.push(
                    Diagnostic::new(
                        "parse-error",
                        format!("method `{}` skipped: {msg}", m.name),
                    )
                    .at(ctx.loc(*pos)),
                );
                continue;
            }
            MethodBody::Parsed(s) => s,
        };
        let count = seen.entry((m.name.clone(), m.params.len())).or_insert(0);
        *count += 1;
        let name = if *count == 1 {
            m.name.clone()
        } else {
            format!("{}#{}", m.name, count)
        };
        match MethodLowerer::new(&ctx, m).run(stmts) {
            Ok(mut ir) => {
                ir.name = name;
                out.methods.push(ir);
            }
            Err(skip) => out.diagnostics.push(
                Diagnostic::new(
                    "skipped-method",
                    format!(
                        "method `{}` skipped: unsupported construct `{}`",
                        m.name, skip.construct
                    ),
                )
                .at(ctx.loc(skip.pos)),
            ),
        }
    }
    for (what, pos) in skipped {
        out.diagnostics.push(
            Diagnostic::new("skipped-type", format!("{what} is not analyzed"))
                .at(ctx.loc(pos)),
        );
    }
    out
}

#[derive(Default)]
struct BlockBuf {
    stmts: Vec<Statement>,
    succs: Vec<BlockId>,
    loop_header: bool,
}

struct MethodLowerer<'a> {
    ctx: &'a UnitCtx<'a>,
    decl: &'a MethodDecl,
    blocks: Vec<BlockBuf>,
    cur: BlockId,
    exits: Vec<BlockId>,
    next_stmt: StmtId,
    next_tmp: usize,
    locals: HashMap<String, String>,
    // (continue target, break target)
    loops: Vec<(BlockId, BlockId)>,
}

impl<'a> MethodLowerer<'a> {
    fn new(ctx: &'a UnitCtx<'a>, decl: &'a MethodDecl) -> Self {
        let mut locals = HashMap::new();
        for p in &decl.params {
            locals.insert(p.name.clone(), p.ty.display());
        }
        MethodLowerer {
            ctx,
            decl,
            blocks: vec![BlockBuf::default()],
            cur: 0,
            exits: Vec::new(),
            next_stmt: 0,
            next_tmp: 0,
            locals,
            loops: Vec::new(),
        }
    }

    fn run(mut self, body: &[Stmt]) -> LResult<MethodIR> {
        for s in body {
            self.stmt(s)?;
        }
        let end = self.cur;
        self.exits.push(end);
        Ok(self.finish())
    }

    fn finish(self) -> MethodIR {
        // keep only blocks reachable from the entry, renumbered in creation order
        let mut reachable = vec![false; self.blocks.len()];
        let mut stack = vec![0];
        while let Some(b) = stack.pop() {
            if reachable[b] {
                continue;
            }
            reachable[b] = true;
            stack.extend(self.blocks[b].succs.iter().copied());
        }
        let mut remap = vec![usize::MAX; self.blocks.len()];
        let mut n = 0;
        for (i, r) in reachable.iter().enumerate() {
            if *r {
                remap[i] = n;
                n += 1;
            }
        }
        let mut blocks = Vec::with_capacity(n);
        for (i, b) in self.blocks.into_iter().enumerate() {
            if !reachable[i] {
                continue;
            }
            let mut succs: Vec<BlockId> = Vec::new();
            for s in b.succs {
                if !succs.contains(&remap[s]) {
                    succs.push(remap[s]);
                }
            }
            blocks.push(BasicBlock {
                id: remap[i],
                statements: b.stmts,
                successors: succs,
                loop_header: b.loop_header,
            });
        }
        let mut exits: Vec<BlockId> = self
            .exits
            .iter()
            .filter(|e| reachable[**e])
            .map(|e| remap[*e])
            .collect();
        exits.sort_unstable();
        exits.dedup();
        let m = self.decl;
        let visibility = if m.modifiers.public {
            Visibility::Public
        } else if m.modifiers.private {
            Visibility::Private
        } else if m.modifiers.protected {
            Visibility::Protected
        } else {
            Visibility::Package
        };
        MethodIR {
            name: m.name.clone(),
            visibility,
            is_static: m.modifiers.is_static,
            parameters: m
                .params
                .iter()
                .map(|p| Parameter {
                    name: p.name.clone(),
                    type_name: p.ty.display(),
                })
                .collect(),
            return_type: m
                .return_type
                .as_ref()
                .map(|t| t.display())
                .unwrap_or_else(|| "void".into()),
            blocks,
            entry: 0,
            exits,
            location: self.ctx.loc(m.pos),
        }
    }

    // ---- CFG helpers -------------------------------------------------------

    fn new_block(&mut self) -> BlockId {
        self.blocks.push(BlockBuf::default());
        self.blocks.len() - 1
    }

    fn edge(&mut self, from: BlockId, to: BlockId) {
        self.blocks[from].succs.push(to);
    }

    /// Continue in a fresh block with no predecessors (dead code after a jump).
    fn terminate(&mut self) {
        self.cur = self.new_block();
    }

    fn emit(&mut self, kind: StatementKind, pos: Pos) -> StmtId {
        let id = self.next_stmt;
        self.next_stmt += 1;
        let location = self.ctx.loc(pos);
        self.blocks[self.cur].stmts.push(Statement { id, kind, location });
        id
    }

    fn temp(&mut self) -> String {
        self.next_tmp += 1;
        format!("$n{}", self.next_tmp)
    }

    fn skip<T>(construct: &str, pos: Pos) -> LResult<T> {
        Err(Skip {
            construct: construct.to_string(),
            pos,
        })
    }

    // ---- statements --------------------------------------------------------

    fn stmt(&mut self, s: &Stmt) -> LResult<()> {
        match s {
            Stmt::Local { ty, decls } => {
                for d in decls {
                    let t = format!("{}{}", ty.display(), "[]".repeat(d.dims));
                    if let Some(init) = &d.init {
                        self.assign_to(&d.name, &t, init, d.pos)?;
                    }
                    self.locals.insert(d.name.clone(), t);
                }
            }
            Stmt::Expr(e) => self.expr_stmt(e)?,
            Stmt::If { cond, then, other } => {
                self.value(cond)?;
                let head = self.cur;
                let then_start = self.new_block();
                self.edge(head, then_start);
                self.cur = then_start;
                self.stmt(then)?;
                let then_end = self.cur;
                let join = self.new_block();
                self.edge(then_end, join);
                match other {
                    Some(o) => {
                        let else_start = self.new_block();
                        self.edge(head, else_start);
                        self.cur = else_start;
                        self.stmt(o)?;
                        let else_end = self.cur;
                        self.edge(else_end, join);
                    }
                    None => self.edge(head, join),
                }
                self.cur = join;
            }
            Stmt::While { cond, body, .. } => {
                let header = self.new_block();
                self.blocks[header].loop_header = true;
                self.edge(self.cur, header);
                self.cur = header;
                self.value(cond)?;
                let header_end = self.cur;
                let body_start = self.new_block();
                let exit = self.new_block();
                self.edge(header_end, body_start);
                self.edge(header_end, exit);
                self.loops.push((header, exit));
                self.cur = body_start;
                self.stmt(body)?;
                self.edge(self.cur, header);
                self.loops.pop();
                self.cur = exit;
            }
            Stmt::For {
                init,
                cond,
                update,
                body,
                ..
            } => {
                for s in init {
                    self.stmt(s)?;
                }
                let header = self.new_block();
                self.blocks[header].loop_header = true;
                self.edge(self.cur, header);
                self.cur = header;
                if let Some(c) = cond {
                    self.value(c)?;
                }
                let header_end = self.cur;
                let body_start = self.new_block();
                let step = self.new_block();
                let exit = self.new_block();
                self.edge(header_end, body_start);
                self.edge(header_end, exit);
                self.loops.push((step, exit));
                self.cur = body_start;
                self.stmt(body)?;
                self.edge(self.cur, step);
                self.loops.pop();
                self.cur = step;
                for u in update {
                    self.expr_stmt(u)?;
                }
                self.edge(self.cur, header);
                self.cur = exit;
            }
            Stmt::ForEach {
                ty,
                name,
                iter,
                body,
                pos,
            } => {
                self.value(iter)?;
                let header = self.new_block();
                self.blocks[header].loop_header = true;
                self.edge(self.cur, header);
                let body_start = self.new_block();
                let exit = self.new_block();
                self.edge(header, body_start);
                self.edge(header, exit);
                self.loops.push((header, exit));
                self.cur = body_start;
                let t = ty.display();
                self.locals.insert(name.clone(), t);
                self.emit(
                    StatementKind::Assignment {
                        target: name.clone(),
                        source: ValueRef::Unknown,
                    },
                    *pos,
                );
                self.stmt(body)?;
                self.edge(self.cur, header);
                self.loops.pop();
                self.cur = exit;
            }
            Stmt::Return(e, pos) => {
                let value = match e {
                    Some(e) => Some(self.value(e)?),
                    None => None,
                };
                self.emit(StatementKind::Return { value }, *pos);
                self.exits.push(self.cur);
                self.terminate();
            }
            Stmt::Break(pos) => {
                let Some(&(_, brk)) = self.loops.last() else {
                    return Self::skip("break outside loop", *pos);
                };
                self.edge(self.cur, brk);
                self.terminate();
            }
            Stmt::Continue(pos) => {
                let Some(&(cont, _)) = self.loops.last() else {
                    return Self::skip("continue outside loop", *pos);
                };
                self.edge(self.cur, cont);
                self.terminate();
            }
            Stmt::Throw(e, _) => {
                self.value(e)?;
                // abrupt end: neither an exit nor a successor
                self.terminate();
            }
            Stmt::Block(stmts) => {
                for s in stmts {
                    self.stmt(s)?;
                }
            }
            Stmt::Try {
                resources,
                body,
                finally,
            } => {
                for s in resources.iter().chain(body).chain(finally.iter().flatten()) {
                    self.stmt(s)?;
                }
            }
            Stmt::Sync { lock, body } => {
                self.value(lock)?;
                for s in body {
                    self.stmt(s)?;
                }
            }
            Stmt::Empty => {}
            Stmt::Unsupported(what, pos) => return Self::skip(what, *pos),
        }
        Ok(())
    }

    fn expr_stmt(&mut self, e: &Expr) -> LResult<()> {
        match e {
            Expr::Assign {
                target, op, value, pos,
            } => {
                let name = self.assign_target(target)?;
                match (name, op.as_str()) {
                    (Some((n, t)), "=") => self.assign_to(&n, &t, value, *pos)?,
                    (Some((n, _)), _) => {
                        self.value(value)?;
                        self.emit(
                            StatementKind::Assignment {
                                target: n,
                                source: ValueRef::Unknown,
                            },
                            *pos,
                        );
                    }
                    (None, _) => {
                        self.value(value)?;
                    }
                }
            }
            Expr::Call {
                target,
                name,
                args,
                pos,
            } => {
                self.call(target.as_deref(), name, args, *pos, None)?;
            }
            _ => {
                self.value(e)?;
            }
        }
        Ok(())
    }

    /// Resolve an assignment target to a tracked variable, evaluating any
    /// side effects of non-variable targets.
    fn assign_target(&mut self, target: &Expr) -> LResult<Option<(String, String)>> {
        match target {
            Expr::Name(n, _) => {
                if let Some(t) = self.locals.get(n) {
                    return Ok(Some((n.clone(), t.clone())));
                }
                if let Some(f) = self.ctx.fields.get(n.as_str()) {
                    return Ok(Some((format!("this.{n}"), f.ty.clone())));
                }
                Ok(Some((n.clone(), String::new())))
            }
            Expr::Field { target: t, name, .. } if matches!(**t, Expr::This(_)) => {
                let ty = self
                    .ctx
                    .fields
                    .get(name.as_str())
                    .map(|f| f.ty.clone())
                    .unwrap_or_default();
                Ok(Some((format!("this.{name}"), ty)))
            }
            other => {
                match other {
                    Expr::Index { array, index, .. } => {
                        self.value(array)?;
                        self.value(index)?;
                    }
                    Expr::Field { target, .. } => {
                        self.value(target)?;
                    }
                    _ => {}
                }
                Ok(None)
            }
        }
    }

    /// Lower `target = e` so that calls and allocations define `target` directly.
    fn assign_to(&mut self, target: &str, ty: &str, e: &Expr, pos: Pos) -> LResult<()> {
        match e {
            Expr::Call {
                target: t,
                name,
                args,
                pos,
            } => {
                self.call(t.as_deref(), name, args, *pos, Some(target.to_string()))?;
            }
            Expr::New { ty: cty, args, pos } => {
                let class_name = self.ctx.resolve_type(&cty.name);
                let args = self.values(args)?;
                self.emit(
                    StatementKind::Allocation {
                        target: target.to_string(),
                        class_name,
                        factory: None,
                        args,
                    },
                    *pos,
                );
            }
            Expr::Cast { expr, .. } => self.assign_to(target, ty, expr, pos)?,
            Expr::ArrayInit(items, p) => {
                let elem = ty.strip_suffix("[]").unwrap_or("?");
                self.array(target, elem, &[], Some(items), *p)?;
            }
            Expr::NewArray {
                elem,
                dims,
                init,
                pos,
            } => {
                self.array(target, &elem.display(), dims, init.as_deref(), *pos)?;
            }
            _ => {
                let source = self.value(e)?;
                self.emit(
                    StatementKind::Assignment {
                        target: target.to_string(),
                        source,
                    },
                    pos,
                );
            }
        }
        Ok(())
    }

    /// Array creation into `target`. A `char` array built only from char
    /// literals becomes a `CharArrayLiteral`.
    fn array(
        &mut self,
        target: &str,
        elem: &str,
        dims: &[Expr],
        init: Option<&[Expr]>,
        pos: Pos,
    ) -> LResult<()> {
        if let (Some(items), "char") = (init, elem) {
            let chars: Option<String> = items
                .iter()
                .map(|i| match i {
                    Expr::Lit(Lit::Char(c), _) => Some(*c),
                    _ => None,
                })
                .collect();
            if let Some(value) = chars {
                self.emit(
                    StatementKind::Assignment {
                        target: target.to_string(),
                        source: ValueRef::CharArrayLiteral { value },
                    },
                    pos,
                );
                return Ok(());
            }
        }
        let args = self.values(dims)?;
        for i in init.unwrap_or_default() {
            self.value(i)?;
        }
        self.emit(
            StatementKind::Allocation {
                target: target.to_string(),
                class_name: format!("{elem}[]"),
                factory: None,
                args,
            },
            pos,
        );
        Ok(())
    }

    // ---- expressions -------------------------------------------------------

    fn values(&mut self, es: &[Expr]) -> LResult<Vec<ValueRef>> {
        es.iter().map(|e| self.value(e)).collect()
    }

    fn is_variable(&self, name: &str) -> bool {
        self.locals.contains_key(name) || self.ctx.fields.contains_key(name)
    }

    /// `a.b.C` used as a qualifier where `a` is not a variable: a type name.
    fn as_type_name(&self, e: &Expr) -> Option<String> {
        fn segments(e: &Expr, out: &mut Vec<String>) -> bool {
            match e {
                Expr::Name(n, _) => {
                    out.push(n.clone());
                    true
                }
                Expr::Field { target, name, .. } => {
                    let ok = segments(target, out);
                    out.push(name.clone());
                    ok
                }
                _ => false,
            }
        }
        let mut segs = Vec::new();
        if !segments(e, &mut segs) || self.is_variable(&segs[0]) || segs[0] == "super" {
            return None;
        }
        let looks_like_type = segs
            .iter()
            .any(|s| s.chars().next().is_some_and(|c| c.is_ascii_uppercase()));
        if !looks_like_type {
            return None;
        }
        Some(segs.join("."))
    }

    fn field_value(&self, name: &str) -> Option<ValueRef> {
        let f = self.ctx.fields.get(name)?;
        Some(match &f.constant {
            Some(c) => c.clone(),
            None => ValueRef::var(format!("this.{name}"), f.ty.clone()),
        })
    }

    fn value(&mut self, e: &Expr) -> LResult<ValueRef> {
        Ok(match e {
            Expr::Lit(l, _) => match l {
                Lit::Str(s) => ValueRef::string(s.clone()),
                Lit::Int(i) => ValueRef::int(*i),
                Lit::Null => ValueRef::NullLiteral,
                _ => ValueRef::Unknown,
            },
            Expr::Name(n, _) => {
                if let Some(t) = self.locals.get(n) {
                    ValueRef::var(n.clone(), t.clone())
                } else if let Some(v) = self.field_value(n) {
                    v
                } else if n.chars().next().is_some_and(|c| c.is_ascii_uppercase()) {
                    ValueRef::Unknown
                } else {
                    ValueRef::var(n.clone(), "")
                }
            }
            Expr::This(_) => ValueRef::var("this", self.ctx.class_name),
            Expr::Field { target, name, .. } => {
                if matches!(**target, Expr::This(_)) {
                    return Ok(self.field_value(name).unwrap_or(ValueRef::Unknown));
                }
                if let Some(t) = self.as_type_name(target) {
                    if t == self.ctx.class_name {
                        if let Some(v) = self.field_value(name) {
                            return Ok(v);
                        }
                    }
                    return Ok(ValueRef::Unknown);
                }
                self.value(target)?;
                ValueRef::Unknown
            }
            Expr::Call {
                target,
                name,
                args,
                pos,
            } => self.call(target.as_deref(), name, args, *pos, None)?,
            Expr::New { .. } | Expr::NewArray { .. } | Expr::ArrayInit(..) => {
                let t = self.temp();
                let ty = match e {
                    Expr::New { ty, .. } => self.ctx.resolve_type(&ty.name),
                    Expr::NewArray { elem, .. } => format!("{}[]", elem.display()),
                    _ => "?[]".into(),
                };
                self.assign_to(&t, &ty, e, e.pos())?;
                ValueRef::var(t, ty)
            }
            Expr::Assign { target, .. } => {
                self.expr_stmt(e)?;
                match self.assign_target(target)? {
                    Some((n, t)) => ValueRef::var(n, t),
                    None => ValueRef::Unknown,
                }
            }
            Expr::Binary { op, lhs, rhs, pos } => {
                let l = self.value(lhs)?;
                let r = self.value(rhs)?;
                if op == "+" && (self.is_stringy(&l) || self.is_stringy(&r)) {
                    let id = self.emit(
                        StatementKind::Invocation {
                            result: None,
                            receiver: None,
                            owner: Some("String".into()),
                            method: "concat".into(),
                            args: vec![l, r],
                        },
                        *pos,
                    );
                    return Ok(ValueRef::CallResult { statement: id });
                }
                match (op.as_str(), &l, &r) {
                    (_, ValueRef::IntLiteral { value: a }, ValueRef::IntLiteral { value: b }) => {
                        let v = match op.as_str() {
                            "+" => a.checked_add(*b),
                            "-" => a.checked_sub(*b),
                            "*" => a.checked_mul(*b),
                            "/" => a.checked_div(*b),
                            _ => None,
                        };
                        v.map(ValueRef::int).unwrap_or(ValueRef::Unknown)
                    }
                    _ => ValueRef::Unknown,
                }
            }
            Expr::Unary { op, expr, pos } => {
                if op == "++" || op == "--" {
                    if let Some((n, _)) = self.assign_target(expr)? {
                        self.emit(
                            StatementKind::Assignment {
                                target: n,
                                source: ValueRef::Unknown,
                            },
                            *pos,
                        );
                    }
                } else {
                    self.value(expr)?;
                }
                ValueRef::Unknown
            }
            Expr::Cond {
                cond,
                then,
                other,
                pos,
            } => {
                if then.has_side_effects() || other.has_side_effects() {
                    return Self::skip("conditional expression with calls", *pos);
                }
                self.value(cond)?;
                ValueRef::Unknown
            }
            Expr::Cast { expr, .. } => self.value(expr)?,
            Expr::Index { array, index, .. } => {
                self.value(array)?;
                self.value(index)?;
                ValueRef::Unknown
            }
            Expr::InstanceOf { expr, .. } => {
                self.value(expr)?;
                ValueRef::Unknown
            }
            Expr::ClassLit(_) => ValueRef::Unknown,
            Expr::Unsupported(what, pos) => return Self::skip(what, *pos),
        })
    }

    fn is_stringy(&self, v: &ValueRef) -> bool {
        match v {
            ValueRef::StringLiteral { .. } => true,
            ValueRef::Variable { declared_type, .. } => declared_type == "String",
            ValueRef::CallResult { statement } => self.blocks.iter().any(|b| {
                b.stmts.iter().any(|s| {
                    s.id == *statement
                        && matches!(&s.kind, StatementKind::Invocation { method, owner, .. }
                            if method == "concat" && owner.as_deref() == Some("String"))
                })
            }),
            _ => false,
        }
    }

    /// Lower a call. Static `getInstance*` factories become allocations.
    fn call(
        &mut self,
        target: Option<&Expr>,
        name: &str,
        args: &[Expr],
        pos: Pos,
        result: Option<String>,
    ) -> LResult<ValueRef> {
        let (receiver, owner) = match target {
            None if name == "this" || name == "super" => {
                let args = self.values(args)?;
                let id = self.emit(
                    StatementKind::Invocation {
                        result: None,
                        receiver: None,
                        owner: Some(name.to_string()),
                        method: "<init>".into(),
                        args,
                    },
                    pos,
                );
                return Ok(ValueRef::CallResult { statement: id });
            }
            None => (None, None),
            Some(Expr::This(_)) => (None, None),
            Some(t) => match self.as_type_name(t) {
                Some(ty) => {
                    let class_name = self.ctx.resolve_type(&ty);
                    if name.starts_with("getInstance") {
                        let args = self.values(args)?;
                        let target = match result {
                            Some(r) => r,
                            None => self.temp(),
                        };
                        self.emit(
                            StatementKind::Allocation {
                                target: target.clone(),
                                class_name: class_name.clone(),
                                factory: Some(name.to_string()),
                                args,
                            },
                            pos,
                        );
                        let declared = self
                            .locals
                            .get(&target)
                            .cloned()
                            .unwrap_or_else(|| crate::rulelang::simple_name(&class_name).to_string());
                        return Ok(ValueRef::var(target, declared));
                    }
                    if ty == self.ctx.class_name {
                        (None, None)
                    } else {
                        (None, Some(class_name))
                    }
                }
                None => (Some(self.value(t)?), None),
            },
        };
        let args = self.values(args)?;
        let has_result = result.is_some();
        let id = self.emit(
            StatementKind::Invocation {
                result: result.clone(),
                receiver,
                owner,
                method: name.to_string(),
                args,
            },
            pos,
        );
        Ok(match (has_result, result) {
            (true, Some(r)) => {
                let t = self.locals.get(&r).cloned().unwrap_or_default();
                ValueRef::var(r, t)
            }
            _ => ValueRef::CallResult { statement: id },
        })
    }
}
