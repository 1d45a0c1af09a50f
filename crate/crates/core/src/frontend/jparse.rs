//! Recursive-descent parser for the Java subset.

use super::ast::*;
use super::jlex::{tokenize, JTok, JToken};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

type PResult<T> = Result<T, ParseError>;

const PRIMITIVES: &[&str] = &[
    "byte", "short", "int", "long", "char", "float", "double", "boolean", "void",
];

const MODIFIERS: &[&str] = &[
    "public",
    "protected",
    "private",
    "static",
    "final",
    "abstract",
    "native",
    "synchronized",
    "transient",
    "volatile",
    "strictfp",
    "default",
    "sealed",
    "non",
];

const TYPE_KEYWORDS: &[&str] = &["class", "interface", "enum", "record"];

pub fn parse_unit(src: &str) -> PResult<CompilationUnit> {
    let toks = tokenize(src).map_err(|e| ParseError {
        pos: Pos {
            line: e.line,
            col: e.col,
        },
        message: e.message,
    })?;
    let mut p = Parser { toks: &toks, i: 0 };
    p.unit()
}

/// Parse a single method body (a `{ ... }` block) for tests and tools.
pub fn parse_block(src: &str) -> PResult<Vec<Stmt>> {
    let toks = tokenize(src).map_err(|e| ParseError {
        pos: Pos {
            line: e.line,
            col: e.col,
        },
        message: e.message,
    })?;
    let mut p = Parser { toks: &toks, i: 0 };
    let body = p.block()?;
    if !p.at_end() {
        return Err(p.error("end of input"));
    }
    Ok(body)
}

struct Parser<'a> {
    toks: &'a [JToken],
    i: usize,
}

impl<'a> Parser<'a> {
    fn at_end(&self) -> bool {
        self.i >= self.toks.len()
    }

    fn peek(&self) -> Option<&'a JTok> {
        self.toks.get(self.i).map(|t| &t.tok)
    }

    fn peek_at(&self, n: usize) -> Option<&'a JTok> {
        self.toks.get(self.i + n).map(|t| &t.tok)
    }

    fn pos(&self) -> Pos {
        match self.toks.get(self.i).or_else(|| self.toks.last()) {
            Some(t) => Pos {
                line: t.line,
                col: t.col,
            },
            None => Pos { line: 1, col: 1 },
        }
    }

    fn error(&self, expected: &str) -> ParseError {
        let found = match self.peek() {
            Some(JTok::Ident(s)) => format!("`{s}`"),
            Some(JTok::Op(o)) => format!("`{o}`"),
            Some(JTok::Str(_)) => "string literal".into(),
            Some(JTok::Char(_)) => "char literal".into(),
            Some(JTok::Int(_)) | Some(JTok::Number) => "number".into(),
            Some(JTok::At) => "`@`".into(),
            None => "end of input".into(),
        };
        ParseError {
            pos: self.pos(),
            message: format!("expected {expected}, found {found}"),
        }
    }

    fn is_op(&self, op: &str) -> bool {
        matches!(self.peek(), Some(JTok::Op(o)) if *o == op)
    }

    fn is_op_at(&self, n: usize, op: &str) -> bool {
        matches!(self.peek_at(n), Some(JTok::Op(o)) if *o == op)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(JTok::Ident(s)) if s == kw)
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.is_op(op) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: &str) -> PResult<()> {
        if self.eat_op(op) {
            Ok(())
        } else {
            Err(self.error(&format!("`{op}`")))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(JTok::Ident(s)) => {
                self.i += 1;
                Ok(s.clone())
            }
            _ => Err(self.error("identifier")),
        }
    }

    /// Two tokens with no whitespace between them (for `>>` and `>>=`).
    fn adjacent(&self, n: usize) -> bool {
        match (self.toks.get(self.i + n), self.toks.get(self.i + n + 1)) {
            (Some(a), Some(b)) => b.offset == a.offset + 1,
            _ => false,
        }
    }

    /// Skip a balanced group starting at the current `open` token.
    fn skip_balanced(&mut self, open: &str, close: &str) -> PResult<()> {
        let start = self.pos();
        self.expect_op(open)?;
        let mut depth = 1;
        while depth > 0 {
            match self.peek() {
                None => {
                    return Err(ParseError {
                        pos: start,
                        message: format!("unbalanced `{open}`"),
                    })
                }
                Some(JTok::Op(o)) if *o == open => depth += 1,
                Some(JTok::Op(o)) if *o == close => depth -= 1,
                _ => {}
            }
            self.i += 1;
        }
        Ok(())
    }

    fn skip_annotations(&mut self) -> PResult<()> {
        while matches!(self.peek(), Some(JTok::At)) && !matches!(self.peek_at(1), Some(JTok::Ident(s)) if s == "interface")
        {
            self.i += 1;
            self.qualified_name()?;
            if self.is_op("(") {
                self.skip_balanced("(", ")")?;
            }
        }
        Ok(())
    }

    fn modifiers(&mut self) -> PResult<Modifiers> {
        let mut m = Modifiers::default();
        loop {
            self.skip_annotations()?;
            match self.peek() {
                Some(JTok::Ident(s)) if MODIFIERS.contains(&s.as_str()) => {
                    // `default` inside a switch never reaches here; `non-sealed` is two tokens
                    if s == "non" {
                        if !(self.is_op_at(1, "-")) {
                            break;
                        }
                        self.i += 3;
                        continue;
                    }
                    match s.as_str() {
                        "public" => m.public = true,
                        "protected" => m.protected = true,
                        "private" => m.private = true,
                        "static" => m.is_static = true,
                        "final" => m.is_final = true,
                        _ => {}
                    }
                    self.i += 1;
                }
                _ => break,
            }
        }
        Ok(m)
    }

    fn qualified_name(&mut self) -> PResult<String> {
        let mut name = self.ident()?;
        while self.is_op(".") && matches!(self.peek_at(1), Some(JTok::Ident(_))) {
            self.i += 1;
            name.push('.');
            name.push_str(&self.ident()?);
        }
        Ok(name)
    }

    // ---- declarations ------------------------------------------------------

    fn unit(&mut self) -> PResult<CompilationUnit> {
        let mut unit = CompilationUnit::default();
        let save = self.i;
        self.skip_annotations()?;
        if self.eat_kw("package") {
            unit.package = Some(self.qualified_name()?);
            self.expect_op(";")?;
        } else {
            self.i = save;
        }
        while self.eat_kw("import") {
            let is_static = self.eat_kw("static");
            let name = self.qualified_name()?;
            let wildcard = self.is_op(".") && self.is_op_at(1, "*");
            if wildcard {
                self.i += 2;
            }
            self.expect_op(";")?;
            if !is_static && !wildcard {
                let simple = name.rsplit('.').next().unwrap_or(&name).to_string();
                unit.imports.push((simple, name));
            }
        }
        while !self.at_end() {
            if self.eat_op(";") {
                continue;
            }
            self.modifiers()?;
            let pos = self.pos();
            let annotation_type = matches!(self.peek(), Some(JTok::At));
            if annotation_type {
                self.i += 1;
            }
            let kw = match self.peek() {
                Some(JTok::Ident(s)) if TYPE_KEYWORDS.contains(&s.as_str()) => s.clone(),
                _ => return Err(self.error("type declaration")),
            };
            self.i += 1;
            let name = self.ident()?;
            if unit.class.is_none() && (kw == "class" || kw == "interface" || kw == "record") && !annotation_type {
                unit.class = Some(self.class_body_decl(name, &kw)?);
            } else {
                self.skip_type_rest()?;
                unit.skipped.push((format!("{kw} {name}"), pos));
            }
        }
        Ok(unit)
    }

    /// Skip everything from after a type name through its closing brace.
    fn skip_type_rest(&mut self) -> PResult<()> {
        while !self.is_op("{") {
            if self.at_end() {
                return Err(self.error("`{`"));
            }
            if self.is_op("(") {
                self.skip_balanced("(", ")")?;
                continue;
            }
            self.i += 1;
        }
        self.skip_balanced("{", "}")
    }

    fn class_body_decl(&mut self, name: String, kw: &str) -> PResult<ClassDecl> {
        let mut class = ClassDecl {
            name: name.clone(),
            ..Default::default()
        };
        if self.is_op("<") {
            self.skip_type_args()?;
        }
        if kw == "record" && self.is_op("(") {
            self.skip_balanced("(", ")")?;
        }
        while !self.is_op("{") {
            if self.at_end() {
                return Err(self.error("`{`"));
            }
            self.i += 1;
        }
        self.expect_op("{")?;
        while !self.eat_op("}") {
            if self.at_end() {
                return Err(self.error("`}`"));
            }
            self.member(&mut class)?;
        }
        Ok(class)
    }

    fn member(&mut self, class: &mut ClassDecl) -> PResult<()> {
        if self.eat_op(";") {
            return Ok(());
        }
        if self.is_op("{") {
            return self.skip_balanced("{", "}");
        }
        if self.is_kw("static") && self.is_op_at(1, "{") {
            self.i += 1;
            return self.skip_balanced("{", "}");
        }
        let pos = self.pos();
        let modifiers = self.modifiers()?;
        let annotation_type = matches!(self.peek(), Some(JTok::At));
        if annotation_type {
            self.i += 1;
        }
        if let Some(JTok::Ident(kw)) = self.peek() {
            if TYPE_KEYWORDS.contains(&kw.as_str()) && matches!(self.peek_at(1), Some(JTok::Ident(_))) {
                let kw = kw.clone();
                self.i += 1;
                let name = self.ident()?;
                self.skip_type_rest()?;
                class.skipped.push((format!("{kw} {name}"), pos));
                return Ok(());
            }
        }
        if self.is_op("<") {
            self.skip_type_args()?;
        }
        let pos = self.pos();
        // constructor
        if matches!(self.peek(), Some(JTok::Ident(s)) if *s == class.name) && self.is_op_at(1, "(") {
            self.i += 1;
            let params = self.params()?;
            let body = self.method_body()?;
            class.methods.push(MethodDecl {
                modifiers,
                return_type: None,
                name: "<init>".into(),
                params,
                body,
                pos,
            });
            return Ok(());
        }
        let ty = self.parse_type()?;
        let name_pos = self.pos();
        let name = self.ident()?;
        if self.is_op("(") {
            let params = self.params()?;
            while self.is_op("[") {
                self.skip_balanced("[", "]")?;
            }
            let body = self.method_body()?;
            class.methods.push(MethodDecl {
                modifiers,
                return_type: Some(ty),
                name,
                params,
                body,
                pos,
            });
            return Ok(());
        }
        let mut decls = vec![self.declarator_rest(name, name_pos)?];
        while self.eat_op(",") {
            let p = self.pos();
            let n = self.ident()?;
            decls.push(self.declarator_rest(n, p)?);
        }
        self.expect_op(";")?;
        class.fields.push(FieldDecl {
            modifiers,
            ty,
            decls,
        });
        Ok(())
    }

    fn params(&mut self) -> PResult<Vec<Param>> {
        self.expect_op("(")?;
        let mut out = Vec::new();
        if self.eat_op(")") {
            return Ok(out);
        }
        loop {
            self.modifiers()?;
            let mut ty = self.parse_type()?;
            if self.eat_op("...") {
                ty.dims += 1;
            }
            // receiver parameter `Foo this`
            let name = if self.eat_kw("this") {
                "this".to_string()
            } else {
                self.ident()?
            };
            while self.is_op("[") && self.is_op_at(1, "]") {
                self.i += 2;
                ty.dims += 1;
            }
            out.push(Param { ty, name });
            if self.eat_op(")") {
                return Ok(out);
            }
            self.expect_op(",")?;
        }
    }

    fn method_body(&mut self) -> PResult<MethodBody> {
        if self.eat_kw("throws") {
            while !self.is_op("{") && !self.is_op(";") {
                if self.at_end() {
                    return Err(self.error("method body"));
                }
                self.i += 1;
            }
        }
        if self.eat_kw("default") {
            // annotation element default value
            while !self.is_op(";") {
                if self.at_end() {
                    return Err(self.error("`;`"));
                }
                self.i += 1;
            }
        }
        if self.eat_op(";") {
            return Ok(MethodBody::Abstract);
        }
        if !self.is_op("{") {
            return Err(self.error("method body"));
        }
        let start = self.i;
        self.skip_balanced("{", "}")?;
        let end = self.i;
        let mut sub = Parser {
            toks: &self.toks[..end],
            i: start,
        };
        Ok(match sub.block() {
            Ok(stmts) => MethodBody::Parsed(stmts),
            Err(e) => MethodBody::Broken(e.message, e.pos),
        })
    }

    // ---- types -------------------------------------------------------------

    fn skip_type_args(&mut self) -> PResult<()> {
        self.expect_op("<")?;
        let mut depth = 1;
        while depth > 0 {
            match self.peek() {
                Some(JTok::Op("<")) => depth += 1,
                Some(JTok::Op(">")) => depth -= 1,
                Some(JTok::Op(".")) | Some(JTok::Op(",")) | Some(JTok::Op("?")) | Some(JTok::Op("["))
                | Some(JTok::Op("]")) | Some(JTok::Op("&")) | Some(JTok::Ident(_)) | Some(JTok::At) => {}
                _ => return Err(self.error("type argument")),
            }
            self.i += 1;
        }
        Ok(())
    }

    fn parse_type(&mut self) -> PResult<TypeRef> {
        self.skip_annotations()?;
        let mut name = self.ident()?;
        if self.is_op("<") {
            self.skip_type_args()?;
        }
        while self.is_op(".") && matches!(self.peek_at(1), Some(JTok::Ident(_))) {
            self.i += 1;
            name.push('.');
            name.push_str(&self.ident()?);
            if self.is_op("<") {
                self.skip_type_args()?;
            }
        }
        let mut dims = 0;
        while self.is_op("[") && self.is_op_at(1, "]") {
            self.i += 2;
            dims += 1;
        }
        Ok(TypeRef { name, dims })
    }

    /// Speculatively parse `Type Ident`; restores the position on failure.
    fn try_local_decl_head(&mut self) -> Option<TypeRef> {
        let save = self.i;
        let ok = (|| {
            self.modifiers().ok()?;
            if matches!(self.peek(), Some(JTok::Ident(s)) if is_reserved(s)) {
                return None;
            }
            let ty = self.parse_type().ok()?;
            match (self.peek(), self.peek_at(1)) {
                (Some(JTok::Ident(n)), Some(JTok::Op(o)))
                    if !is_reserved(n) && matches!(*o, "=" | ";" | "," | "[" | ":") =>
                {
                    Some(ty)
                }
                _ => None,
            }
        })();
        if ok.is_none() {
            self.i = save;
        }
        ok
    }

    fn declarator_rest(&mut self, name: String, pos: Pos) -> PResult<Declarator> {
        let mut dims = 0;
        while self.is_op("[") && self.is_op_at(1, "]") {
            self.i += 2;
            dims += 1;
        }
        let init = if self.eat_op("=") {
            Some(if self.is_op("{") {
                self.array_init()?
            } else {
                self.expr()?
            })
        } else {
            None
        };
        Ok(Declarator {
            name,
            dims,
            init,
            pos,
        })
    }

    // ---- statements --------------------------------------------------------

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect_op("{")?;
        let mut out = Vec::new();
        while !self.eat_op("}") {
            if self.at_end() {
                return Err(self.error("`}`"));
            }
            out.push(self.stmt()?);
        }
        Ok(out)
    }

    fn local_decl(&mut self, ty: TypeRef) -> PResult<Stmt> {
        let mut decls = Vec::new();
        loop {
            let p = self.pos();
            let n = self.ident()?;
            decls.push(self.declarator_rest(n, p)?);
            if !self.eat_op(",") {
                break;
            }
        }
        Ok(Stmt::Local { ty, decls })
    }

    fn paren_expr(&mut self) -> PResult<Expr> {
        self.expect_op("(")?;
        let e = self.expr()?;
        self.expect_op(")")?;
        Ok(e)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let pos = self.pos();
        if self.is_op("{") {
            return Ok(Stmt::Block(self.block()?));
        }
        if self.eat_op(";") {
            return Ok(Stmt::Empty);
        }
        if let Some(JTok::Ident(kw)) = self.peek() {
            match kw.as_str() {
                "if" => {
                    self.i += 1;
                    let cond = self.paren_expr()?;
                    let then = Box::new(self.stmt()?);
                    let other = if self.eat_kw("else") {
                        Some(Box::new(self.stmt()?))
                    } else {
                        None
                    };
                    return Ok(Stmt::If { cond, then, other });
                }
                "while" => {
                    self.i += 1;
                    let cond = self.paren_expr()?;
                    let body = Box::new(self.stmt()?);
                    return Ok(Stmt::While { cond, body, pos });
                }
                "do" => {
                    self.i += 1;
                    self.stmt()?;
                    if !self.eat_kw("while") {
                        return Err(self.error("`while`"));
                    }
                    self.paren_expr()?;
                    self.expect_op(";")?;
                    return Ok(Stmt::Unsupported("do-while loop", pos));
                }
                "for" => {
                    self.i += 1;
                    return self.for_stmt(pos);
                }
                "return" => {
                    self.i += 1;
                    let value = if self.is_op(";") { None } else { Some(self.expr()?) };
                    self.expect_op(";")?;
                    return Ok(Stmt::Return(value, pos));
                }
                "break" | "continue" => {
                    let is_break = kw == "break";
                    self.i += 1;
                    let labeled = matches!(self.peek(), Some(JTok::Ident(_)));
                    if labeled {
                        self.i += 1;
                    }
                    self.expect_op(";")?;
                    return Ok(match (labeled, is_break) {
                        (true, _) => Stmt::Unsupported("labeled jump", pos),
                        (false, true) => Stmt::Break(pos),
                        (false, false) => Stmt::Continue(pos),
                    });
                }
                "throw" => {
                    self.i += 1;
                    let e = self.expr()?;
                    self.expect_op(";")?;
                    return Ok(Stmt::Throw(e, pos));
                }
                "try" => {
                    self.i += 1;
                    return self.try_stmt();
                }
                "switch" => {
                    self.i += 1;
                    self.skip_balanced("(", ")")?;
                    self.skip_balanced("{", "}")?;
                    return Ok(Stmt::Unsupported("switch", pos));
                }
                "synchronized" if self.is_op_at(1, "(") => {
                    self.i += 1;
                    let lock = self.paren_expr()?;
                    let body = self.block()?;
                    return Ok(Stmt::Sync { lock, body });
                }
                "assert" => {
                    self.i += 1;
                    self.expr()?;
                    if self.eat_op(":") {
                        self.expr()?;
                    }
                    self.expect_op(";")?;
                    return Ok(Stmt::Empty);
                }
                "yield" if !self.is_op_at(1, "=") && !self.is_op_at(1, "(") => {
                    self.i += 1;
                    self.expr()?;
                    self.expect_op(";")?;
                    return Ok(Stmt::Unsupported("yield", pos));
                }
                _ => {}
            }
            if self.is_op_at(1, ":") && !is_reserved(kw) {
                self.i += 2;
                self.stmt()?;
                return Ok(Stmt::Unsupported("labeled statement", pos));
            }
        }
        // local class declarations
        {
            let save = self.i;
            if self.modifiers().is_ok() {
                if let Some(JTok::Ident(kw)) = self.peek() {
                    if TYPE_KEYWORDS.contains(&kw.as_str()) && matches!(self.peek_at(1), Some(JTok::Ident(_))) {
                        self.i += 2;
                        self.skip_type_rest()?;
                        return Ok(Stmt::Unsupported("local class", pos));
                    }
                }
            }
            self.i = save;
        }
        if let Some(ty) = self.try_local_decl_head() {
            let s = self.local_decl(ty)?;
            self.expect_op(";")?;
            return Ok(s);
        }
        let e = self.expr()?;
        self.expect_op(";")?;
        Ok(Stmt::Expr(e))
    }

    fn for_stmt(&mut self, pos: Pos) -> PResult<Stmt> {
        self.expect_op("(")?;
        if let Some(ty) = self.try_local_decl_head() {
            if self.is_op_at(1, ":") {
                let name = self.ident()?;
                self.expect_op(":")?;
                let iter = self.expr()?;
                self.expect_op(")")?;
                let body = Box::new(self.stmt()?);
                return Ok(Stmt::ForEach {
                    ty,
                    name,
                    iter,
                    body,
                    pos,
                });
            }
            let init = vec![self.local_decl(ty)?];
            return self.for_rest(init, pos);
        }
        let mut init = Vec::new();
        if !self.is_op(";") {
            loop {
                init.push(Stmt::Expr(self.expr()?));
                if !self.eat_op(",") {
                    break;
                }
            }
        }
        self.for_rest(init, pos)
    }

    fn for_rest(&mut self, init: Vec<Stmt>, pos: Pos) -> PResult<Stmt> {
        self.expect_op(";")?;
        let cond = if self.is_op(";") { None } else { Some(self.expr()?) };
        self.expect_op(";")?;
        let mut update = Vec::new();
        if !self.is_op(")") {
            loop {
                update.push(self.expr()?);
                if !self.eat_op(",") {
                    break;
                }
            }
        }
        self.expect_op(")")?;
        let body = Box::new(self.stmt()?);
        Ok(Stmt::For {
            init,
            cond,
            update,
            body,
            pos,
        })
    }

    fn try_stmt(&mut self) -> PResult<Stmt> {
        let mut resources = Vec::new();
        if self.eat_op("(") {
            while !self.eat_op(")") {
                if let Some(ty) = self.try_local_decl_head() {
                    resources.push(self.local_decl(ty)?);
                } else {
                    resources.push(Stmt::Expr(self.expr()?));
                }
                self.eat_op(";");
            }
        }
        let body = self.block()?;
        while self.eat_kw("catch") {
            self.skip_balanced("(", ")")?;
            // exceptional edges are not modelled; the handler body is dropped
            self.skip_balanced("{", "}")?;
        }
        let finally = if self.eat_kw("finally") {
            Some(self.block()?)
        } else {
            None
        };
        Ok(Stmt::Try {
            resources,
            body,
            finally,
        })
    }

    // ---- expressions -------------------------------------------------------

    pub fn expr(&mut self) -> PResult<Expr> {
        if let Some(e) = self.try_lambda()? {
            return Ok(e);
        }
        let pos = self.pos();
        let lhs = self.ternary()?;
        if let Some((op, n)) = self.assign_op() {
            self.i += n;
            let value = if self.is_op("{") { self.array_init()? } else { self.expr()? };
            return Ok(Expr::Assign {
                target: Box::new(lhs),
                op,
                value: Box::new(value),
                pos,
            });
        }
        Ok(lhs)
    }

    fn assign_op(&self) -> Option<(String, usize)> {
        match self.peek()? {
            JTok::Op(o) if matches!(*o, "=" | "+=" | "-=" | "*=" | "/=" | "%=" | "&=" | "|=" | "^=" | "<<=") => {
                Some((o.to_string(), 1))
            }
            JTok::Op(">") if self.adjacent(0) && self.is_op_at(1, ">=") => Some((">>=".into(), 2)),
            JTok::Op(">")
                if self.adjacent(0) && self.adjacent(1) && self.is_op_at(1, ">") && self.is_op_at(2, ">=") =>
            {
                Some((">>>=".into(), 3))
            }
            _ => None,
        }
    }

    fn try_lambda(&mut self) -> PResult<Option<Expr>> {
        let pos = self.pos();
        let is_lambda = match self.peek() {
            Some(JTok::Ident(_)) => self.is_op_at(1, "->"),
            Some(JTok::Op("(")) => {
                let mut depth = 0;
                let mut j = self.i;
                loop {
                    match self.toks.get(j).map(|t| &t.tok) {
                        Some(JTok::Op("(")) => depth += 1,
                        Some(JTok::Op(")")) => {
                            depth -= 1;
                            if depth == 0 {
                                break;
                            }
                        }
                        None => break,
                        _ => {}
                    }
                    j += 1;
                }
                matches!(self.toks.get(j + 1).map(|t| &t.tok), Some(JTok::Op("->")))
            }
            _ => false,
        };
        if !is_lambda {
            return Ok(None);
        }
        if self.is_op("(") {
            self.skip_balanced("(", ")")?;
        } else {
            self.i += 1;
        }
        self.expect_op("->")?;
        if self.is_op("{") {
            self.skip_balanced("{", "}")?;
        } else {
            self.expr()?;
        }
        Ok(Some(Expr::Unsupported("lambda", pos)))
    }

    fn ternary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        let cond = self.binary(1)?;
        if self.eat_op("?") {
            let then = self.expr()?;
            self.expect_op(":")?;
            let other = if let Some(l) = self.try_lambda()? { l } else { self.ternary()? };
            return Ok(Expr::Cond {
                cond: Box::new(cond),
                then: Box::new(then),
                other: Box::new(other),
                pos,
            });
        }
        Ok(cond)
    }

    /// Current binary operator, its precedence and token count.
    fn binop(&self) -> Option<(String, u8, usize)> {
        let t = self.peek()?;
        let (op, prec, n): (String, u8, usize) = match t {
            JTok::Op(">") => {
                if self.adjacent(0) && self.is_op_at(1, ">") {
                    if self.adjacent(1) && self.is_op_at(2, ">") {
                        if self.adjacent(2) && self.is_op_at(3, ">=") {
                            return None;
                        }
                        (">>>".into(), 8, 3)
                    } else if self.adjacent(1) && self.is_op_at(2, ">=") {
                        return None;
                    } else {
                        (">>".into(), 8, 2)
                    }
                } else if self.adjacent(0) && self.is_op_at(1, ">=") {
                    return None;
                } else {
                    (">".into(), 7, 1)
                }
            }
            JTok::Op(o) => {
                let prec = match *o {
                    "||" => 1,
                    "&&" => 2,
                    "|" => 3,
                    "^" => 4,
                    "&" => 5,
                    "==" | "!=" => 6,
                    "<" | "<=" | ">=" => 7,
                    "<<" => 8,
                    "+" | "-" => 9,
                    "*" | "/" | "%" => 10,
                    _ => return None,
                };
                (o.to_string(), prec, 1)
            }
            JTok::Ident(s) if s == "instanceof" => ("instanceof".into(), 7, 1),
            _ => return None,
        };
        Some((op, prec, n))
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let pos = self.pos();
        let mut lhs = self.unary()?;
        while let Some((op, prec, n)) = self.binop() {
            if prec < min_prec {
                break;
            }
            self.i += n;
            if op == "instanceof" {
                self.eat_kw("final");
                self.parse_type()?;
                // pattern binding `x instanceof Foo f`
                if matches!(self.peek(), Some(JTok::Ident(s)) if !is_reserved(s)) {
                    self.i += 1;
                }
                lhs = Expr::InstanceOf {
                    expr: Box::new(lhs),
                    pos,
                };
                continue;
            }
            let rhs = self.binary(prec + 1)?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                pos,
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        if let Some(JTok::Op(o)) = self.peek() {
            if matches!(*o, "+" | "-" | "!" | "~" | "++" | "--") {
                self.i += 1;
                let expr = self.unary()?;
                if *o == "-" {
                    if let Expr::Lit(Lit::Int(v), _) = expr {
                        return Ok(Expr::Lit(Lit::Int(-v), pos));
                    }
                }
                return Ok(Expr::Unary {
                    op: o.to_string(),
                    expr: Box::new(expr),
                    pos,
                });
            }
            if *o == "(" {
                if let Some(ty) = self.try_cast_head() {
                    let expr = if let Some(l) = self.try_lambda()? { l } else { self.unary()? };
                    return Ok(Expr::Cast {
                        ty,
                        expr: Box::new(expr),
                        pos,
                    });
                }
            }
        }
        self.postfix()
    }

    fn try_cast_head(&mut self) -> Option<TypeRef> {
        let save = self.i;
        self.i += 1;
        let ty = match self.parse_type() {
            Ok(t) => t,
            Err(_) => {
                self.i = save;
                return None;
            }
        };
        // intersection casts `(A & B)`
        while self.is_op("&") {
            self.i += 1;
            if self.parse_type().is_err() {
                self.i = save;
                return None;
            }
        }
        if !self.eat_op(")") {
            self.i = save;
            return None;
        }
        let primitive = PRIMITIVES.contains(&ty.name.as_str());
        let starts_operand = match self.peek() {
            Some(JTok::Ident(s)) => !matches!(s.as_str(), "instanceof"),
            Some(JTok::Str(_)) | Some(JTok::Char(_)) | Some(JTok::Int(_)) | Some(JTok::Number) => true,
            Some(JTok::Op(o)) => matches!(*o, "(" | "!" | "~") || (primitive && matches!(*o, "-" | "+")),
            _ => false,
        };
        if starts_operand {
            Some(ty)
        } else {
            self.i = save;
            None
        }
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect_op("(")?;
        let mut out = Vec::new();
        if self.eat_op(")") {
            return Ok(out);
        }
        loop {
            out.push(self.expr()?);
            if self.eat_op(")") {
                return Ok(out);
            }
            self.expect_op(",")?;
        }
    }

    fn array_init(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        self.expect_op("{")?;
        let mut items = Vec::new();
        while !self.eat_op("}") {
            items.push(if self.is_op("{") { self.array_init()? } else { self.expr()? });
            if !self.eat_op(",") {
                self.expect_op("}")?;
                break;
            }
        }
        Ok(Expr::ArrayInit(items, pos))
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let start = self.pos();
        let mut e = self.primary()?;
        loop {
            if self.is_op(".") {
                self.i += 1;
                if self.is_op("<") {
                    self.skip_type_args()?;
                }
                match self.peek() {
                    Some(JTok::Ident(s)) if s == "new" => {
                        self.i += 1;
                        self.parse_type()?;
                        self.args()?;
                        if self.is_op("{") {
                            self.skip_balanced("{", "}")?;
                        }
                        e = Expr::Unsupported("inner class creation", start);
                    }
                    Some(JTok::Ident(s)) if s == "class" => {
                        self.i += 1;
                        e = Expr::ClassLit(start);
                    }
                    Some(JTok::Ident(s)) if s == "this" => {
                        self.i += 1;
                        e = Expr::This(start);
                    }
                    Some(JTok::Ident(_)) => {
                        let name = self.ident()?;
                        if self.is_op("(") {
                            let args = self.args()?;
                            e = Expr::Call {
                                target: Some(Box::new(e)),
                                name,
                                args,
                                pos: start,
                            };
                        } else {
                            e = Expr::Field {
                                target: Box::new(e),
                                name,
                                pos: start,
                            };
                        }
                    }
                    _ => return Err(self.error("member name")),
                }
            } else if self.is_op("[") {
                // `Foo[].class` or `int[]::new`
                if self.is_op_at(1, "]") {
                    while self.is_op("[") && self.is_op_at(1, "]") {
                        self.i += 2;
                    }
                    continue;
                }
                self.i += 1;
                let index = self.expr()?;
                self.expect_op("]")?;
                e = Expr::Index {
                    array: Box::new(e),
                    index: Box::new(index),
                    pos: start,
                };
            } else if self.is_op("::") {
                self.i += 1;
                if !self.eat_kw("new") {
                    self.ident()?;
                }
                e = Expr::Unsupported("method reference", start);
            } else if self.is_op("++") || self.is_op("--") {
                let op = if self.is_op("++") { "++" } else { "--" };
                self.i += 1;
                e = Expr::Unary {
                    op: op.into(),
                    expr: Box::new(e),
                    pos: start,
                };
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        let tok = match self.peek() {
            Some(t) => t.clone(),
            None => return Err(self.error("expression")),
        };
        match tok {
            JTok::Str(s) => {
                self.i += 1;
                Ok(Expr::Lit(Lit::Str(s), pos))
            }
            JTok::Int(v) => {
                self.i += 1;
                Ok(Expr::Lit(Lit::Int(v), pos))
            }
            JTok::Number => {
                self.i += 1;
                Ok(Expr::Lit(Lit::Other, pos))
            }
            JTok::Char(c) => {
                self.i += 1;
                Ok(Expr::Lit(Lit::Char(c), pos))
            }
            JTok::Op("(") => {
                self.i += 1;
                let e = self.expr()?;
                self.expect_op(")")?;
                Ok(e)
            }
            JTok::Ident(s) => match s.as_str() {
                "true" | "false" => {
                    self.i += 1;
                    Ok(Expr::Lit(Lit::Bool, pos))
                }
                "null" => {
                    self.i += 1;
                    Ok(Expr::Lit(Lit::Null, pos))
                }
                "this" => {
                    self.i += 1;
                    if self.is_op("(") {
                        let args = self.args()?;
                        return Ok(Expr::Call {
                            target: None,
                            name: "this".into(),
                            args,
                            pos,
                        });
                    }
                    Ok(Expr::This(pos))
                }
                "super" => {
                    self.i += 1;
                    if self.is_op("(") {
                        let args = self.args()?;
                        return Ok(Expr::Call {
                            target: None,
                            name: "super".into(),
                            args,
                            pos,
                        });
                    }
                    Ok(Expr::Name("super".into(), pos))
                }
                "new" => {
                    self.i += 1;
                    self.creator(pos)
                }
                "switch" => {
                    self.i += 1;
                    self.skip_balanced("(", ")")?;
                    self.skip_balanced("{", "}")?;
                    Ok(Expr::Unsupported("switch", pos))
                }
                _ if PRIMITIVES.contains(&s.as_str()) => {
                    // `int.class`, `byte[].class`, `int[]::new`
                    self.i += 1;
                    Ok(Expr::Name(s.clone(), pos))
                }
                _ => {
                    self.i += 1;
                    if self.is_op("(") {
                        let args = self.args()?;
                        return Ok(Expr::Call {
                            target: None,
                            name: s.clone(),
                            args,
                            pos,
                        });
                    }
                    Ok(Expr::Name(s.clone(), pos))
                }
            },
            _ => Err(self.error("expression")),
        }
    }

    fn creator(&mut self, pos: Pos) -> PResult<Expr> {
        if self.is_op("<") {
            self.skip_type_args()?;
        }
        self.skip_annotations()?;
        let mut name = self.ident()?;
        if self.is_op("<") {
            self.skip_type_args()?;
        }
        while self.eat_op(".") {
            self.skip_annotations()?;
            name.push('.');
            name.push_str(&self.ident()?);
            if self.is_op("<") {
                self.skip_type_args()?;
            }
        }
        if self.is_op("[") {
            let mut dims = Vec::new();
            let mut ndims = 0;
            while self.eat_op("[") {
                ndims += 1;
                if !self.eat_op("]") {
                    dims.push(self.expr()?);
                    self.expect_op("]")?;
                }
            }
            let init = if self.is_op("{") {
                match self.array_init()? {
                    Expr::ArrayInit(items, _) => Some(items),
                    _ => None,
                }
            } else {
                None
            };
            return Ok(Expr::NewArray {
                elem: TypeRef {
                    name,
                    dims: ndims - 1,
                },
                dims,
                init,
                pos,
            });
        }
        let args = self.args()?;
        if self.is_op("{") {
            self.skip_balanced("{", "}")?;
            return Ok(Expr::Unsupported("anonymous class", pos));
        }
        Ok(Expr::New {
            ty: TypeRef { name, dims: 0 },
            args,
            pos,
        })
    }
}

fn is_reserved(s: &str) -> bool {
    matches!(
        s,
        "if" | "else"
            | "while"
            | "for"
            | "do"
            | "return"
            | "break"
            | "continue"
            | "throw"
            | "try"
            | "catch"
            | "finally"
            | "switch"
            | "case"
            | "new"
            | "this"
            | "super"
            | "instanceof"
            | "true"
            | "false"
            | "null"
            | "class"
            | "synchronized"
            | "assert"
    )
}
