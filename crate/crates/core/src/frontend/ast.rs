//! Syntax tree for the Java subset. Only what lowering needs is kept; other
//! constructs are parsed far enough to be skipped and recorded as
//! `Unsupported` with the construct name.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeRef {
    /// Erased name as written, e.g. `Cipher`, `javax.crypto.Cipher`, `byte`.
    pub name: String,
    pub dims: usize,
}

impl TypeRef {
    /// Rendered type name, e.g. `byte[]`.
    pub fn display(&self) -> String {
        format!("{}{}", self.name, "[]".repeat(self.dims))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Lit {
    Str(String),
    Int(i64),
    Char(char),
    Bool,
    Null,
    Other,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Lit(Lit, Pos),
    Name(String, Pos),
    This(Pos),
    Field {
        target: Box<Expr>,
        name: String,
        pos: Pos,
    },
    Call {
        target: Option<Box<Expr>>,
        name: String,
        args: Vec<Expr>,
        pos: Pos,
    },
    New {
        ty: TypeRef,
        args: Vec<Expr>,
        pos: Pos,
    },
    NewArray {
        elem: TypeRef,
        dims: Vec<Expr>,
        init: Option<Vec<Expr>>,
        pos: Pos,
    },
    ArrayInit(Vec<Expr>, Pos),
    /// `op` is `=` or a compound operator such as `+=`.
    Assign {
        target: Box<Expr>,
        op: String,
        value: Box<Expr>,
        pos: Pos,
    },
    Binary {
        op: String,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        pos: Pos,
    },
    Unary {
        op: String,
        expr: Box<Expr>,
        pos: Pos,
    },
    Cond {
        cond: Box<Expr>,
        then: Box<Expr>,
        other: Box<Expr>,
        pos: Pos,
    },
    Cast {
        ty: TypeRef,
        expr: Box<Expr>,
        pos: Pos,
    },
    Index {
        array: Box<Expr>,
        index: Box<Expr>,
        pos: Pos,
    },
    InstanceOf {
        expr: Box<Expr>,
        pos: Pos,
    },
    ClassLit(Pos),
    Unsupported(&'static str, Pos),
}

impl Expr {
    pub fn pos(&self) -> Pos {
        match self {
            Expr::Lit(_, p)
            | Expr::Name(_, p)
            | Expr::This(p)
            | Expr::ArrayInit(_, p)
            | Expr::ClassLit(p)
            | Expr::Unsupported(_, p) => *p,
            Expr::Field { pos, .. }
            | Expr::Call { pos, .. }
            | Expr::New { pos, .. }
            | Expr::NewArray { pos, .. }
            | Expr::Assign { pos, .. }
            | Expr::Binary { pos, .. }
            | Expr::Unary { pos, .. }
            | Expr::Cond { pos, .. }
            | Expr::Cast { pos, .. }
            | Expr::Index { pos, .. }
            | Expr::InstanceOf { pos, .. } => *pos,
        }
    }

    /// Whether evaluating the expression may call or allocate.
    pub fn has_side_effects(&self) -> bool {
        match self {
            Expr::Call { .. } | Expr::New { .. } | Expr::Assign { .. } | Expr::Unsupported(..) => {
                true
            }
            Expr::Unary { op, expr, .. } => op == "++" || op == "--" || expr.has_side_effects(),
            Expr::Lit(..) | Expr::Name(..) | Expr::This(_) | Expr::ClassLit(_) => false,
            Expr::Field { target, .. } => target.has_side_effects(),
            Expr::NewArray { dims, init, .. } => {
                dims.iter().any(Expr::has_side_effects)
                    || init.iter().flatten().any(Expr::has_side_effects)
            }
            Expr::ArrayInit(items, _) => items.iter().any(Expr::has_side_effects),
            Expr::Binary { lhs, rhs, .. } => lhs.has_side_effects() || rhs.has_side_effects(),
            Expr::Cond {
                cond, then, other, ..
            } => cond.has_side_effects() || then.has_side_effects() || other.has_side_effects(),
            Expr::Cast { expr, .. } | Expr::InstanceOf { expr, .. } => expr.has_side_effects(),
            Expr::Index { array, index, .. } => {
                array.has_side_effects() || index.has_side_effects()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Declarator {
    pub name: String,
    /// Extra `[]` after the variable name.
    pub dims: usize,
    pub init: Option<Expr>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Local {
        ty: TypeRef,
        decls: Vec<Declarator>,
    },
    Expr(Expr),
    If {
        cond: Expr,
        then: Box<Stmt>,
        other: Option<Box<Stmt>>,
    },
    While {
        cond: Expr,
        body: Box<Stmt>,
        pos: Pos,
    },
    For {
        init: Vec<Stmt>,
        cond: Option<Expr>,
        update: Vec<Expr>,
        body: Box<Stmt>,
        pos: Pos,
    },
    ForEach {
        ty: TypeRef,
        name: String,
        iter: Expr,
        body: Box<Stmt>,
        pos: Pos,
    },
    Return(Option<Expr>, Pos),
    Break(Pos),
    Continue(Pos),
    Throw(Expr, Pos),
    Block(Vec<Stmt>),
    Try {
        resources: Vec<Stmt>,
        body: Vec<Stmt>,
        finally: Option<Vec<Stmt>>,
    },
    Sync {
        lock: Expr,
        body: Vec<Stmt>,
    },
    Empty,
    Unsupported(&'static str, Pos),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Modifiers {
    pub public: bool,
    pub protected: bool,
    pub private: bool,
    pub is_static: bool,
    pub is_final: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub ty: TypeRef,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MethodBody {
    Parsed(Vec<Stmt>),
    /// The body could not be parsed; the message says why.
    Broken(String, Pos),
    Abstract,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodDecl {
    pub modifiers: Modifiers,
    /// `None` for constructors.
    pub return_type: Option<TypeRef>,
    pub name: String,
    pub params: Vec<Param>,
    pub body: MethodBody,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDecl {
    pub modifiers: Modifiers,
    pub ty: TypeRef,
    pub decls: Vec<Declarator>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClassDecl {
    pub name: String,
    pub methods: Vec<MethodDecl>,
    pub fields: Vec<FieldDecl>,
    /// Nested or secondary type declarations that were skipped.
    pub skipped: Vec<(String, Pos)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompilationUnit {
    pub package: Option<String>,
    /// Single-type imports: simple name -> qualified name.
    pub imports: Vec<(String, String)>,
    pub class: Option<ClassDecl>,
    pub skipped: Vec<(String, Pos)>,
}
