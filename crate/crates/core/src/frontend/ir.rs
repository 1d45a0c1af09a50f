use serde::{Deserialize, Serialize};
use std::fmt;

use crate::diag::Diagnostic;

pub type BlockId = usize;
pub type StmtId = usize;

/// 1-based position of a construct in a source file.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
pub struct SourceLocation {
    pub file: String,
    pub line: u32,
    pub column: u32,
}

impl SourceLocation {
    pub fn new(file: impl Into<String>, line: u32, column: u32) -> Self {
        SourceLocation {
            file: file.into(),
            line,
            column,
        }
    }
}

impl fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CompilationUnitIR {
    /// Path relative to the scan root, with `/` separators.
    pub source_path: String,
    pub package_name: String,
    pub class_name: String,
    pub methods: Vec<MethodIR>,
    pub diagnostics: Vec<Diagnostic>,
}

impl CompilationUnitIR {
    pub fn new(source_path: impl Into<String>) -> Self {
        CompilationUnitIR {
            source_path: source_path.into(),
            package_name: String::new(),
            class_name: String::new(),
            methods: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn qualified_class_name(&self) -> String {
        if self.package_name.is_empty() {
            self.class_name.clone()
        } else {
            format!("{}.{}", self.package_name, self.class_name)
        }
    }

    pub fn method(&self, name: &str) -> Option<&MethodIR> {
        self.methods.iter().find(|m| m.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Visibility {
    Public,
    Protected,
    Package,
    Private,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Parameter {
    pub name: String,
    pub type_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MethodIR {
    /// `<init>` for constructors.
    pub name: String,
    pub visibility: Visibility,
    pub is_static: bool,
    pub parameters: Vec<Parameter>,
    pub return_type: String,
    pub blocks: Vec<BasicBlock>,
    pub entry: BlockId,
    pub exits: Vec<BlockId>,
    pub location: SourceLocation,
}

impl MethodIR {
    pub fn block(&self, id: BlockId) -> Option<&BasicBlock> {
        self.blocks.iter().find(|b| b.id == id)
    }

    pub fn statements(&self) -> impl Iterator<Item = &Statement> {
        self.blocks.iter().flat_map(|b| b.statements.iter())
    }

    pub fn statement(&self, id: StmtId) -> Option<&Statement> {
        self.statements().find(|s| s.id == id)
    }

    pub fn next_statement_id(&self) -> StmtId {
        self.statements().map(|s| s.id + 1).max().unwrap_or(0)
    }

    pub fn parameter(&self, name: &str) -> Option<&Parameter> {
        self.parameters.iter().find(|p| p.name == name)
    }

    /// Whether the body is a single block without branches.
    pub fn is_straight_line(&self) -> bool {
        self.blocks.len() == 1 && self.blocks[0].successors.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.parameters.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BasicBlock {
    pub id: BlockId,
    pub statements: Vec<Statement>,
    pub successors: Vec<BlockId>,
    pub loop_header: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Statement {
    pub id: StmtId,
    #[serde(flatten)]
    pub kind: StatementKind,
    pub location: SourceLocation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum StatementKind {
    /// `new C(args)` or a static factory `C.getInstance*(args)`.
    #[serde(rename_all = "camelCase")]
    Allocation {
        target: String,
        class_name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        factory: Option<String>,
        args: Vec<ValueRef>,
    },
    /// A call. `receiver` is absent for calls on `this` and for static calls,
    /// where `owner` names the class.
    #[serde(rename_all = "camelCase")]
    Invocation {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        result: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        receiver: Option<ValueRef>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        owner: Option<String>,
        method: String,
        args: Vec<ValueRef>,
    },
    Assignment {
        target: String,
        source: ValueRef,
    },
    Return {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        value: Option<ValueRef>,
    },
}

impl StatementKind {
    /// Variable written by this statement, if any.
    pub fn defined_var(&self) -> Option<&str> {
        match self {
            StatementKind::Allocation { target, .. } | StatementKind::Assignment { target, .. } => {
                Some(target)
            }
            StatementKind::Invocation { result, .. } => result.as_deref(),
            StatementKind::Return { .. } => None,
        }
    }

    pub fn args(&self) -> &[ValueRef] {
        match self {
            StatementKind::Allocation { args, .. } | StatementKind::Invocation { args, .. } => args,
            _ => &[],
        }
    }

    /// Every value read by the statement.
    pub fn operands(&self) -> Vec<&ValueRef> {
        match self {
            StatementKind::Allocation { args, .. } => args.iter().collect(),
            StatementKind::Invocation { receiver, args, .. } => {
                receiver.iter().chain(args.iter()).collect()
            }
            StatementKind::Assignment { source, .. } => vec![source],
            StatementKind::Return { value } => value.iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum ValueRef {
    StringLiteral {
        value: String,
    },
    IntLiteral {
        value: i64,
    },
    /// `{'a', 'b'}` char-array initializer; `value` holds the characters.
    CharArrayLiteral {
        value: String,
    },
    NullLiteral,
    #[serde(rename_all = "camelCase")]
    Variable {
        name: String,
        declared_type: String,
    },
    /// Value returned by the Invocation with this statement id.
    CallResult {
        statement: StmtId,
    },
    Unknown,
}

impl ValueRef {
    pub fn string(s: impl Into<String>) -> Self {
        ValueRef::StringLiteral { value: s.into() }
    }

    pub fn int(v: i64) -> Self {
        ValueRef::IntLiteral { value: v }
    }

    pub fn var(name: impl Into<String>, declared_type: impl Into<String>) -> Self {
        ValueRef::Variable {
            name: name.into(),
            declared_type: declared_type.into(),
        }
    }

    pub fn var_name(&self) -> Option<&str> {
        match self {
            ValueRef::Variable { name, .. } => Some(name),
            _ => None,
        }
    }
}

impl fmt::Display for ValueRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueRef::StringLiteral { value } => write!(f, "{value:?}"),
            ValueRef::IntLiteral { value } => write!(f, "{value}"),
            ValueRef::CharArrayLiteral { value } => write!(f, "char[]{{{value:?}}}"),
            ValueRef::NullLiteral => f.write_str("null"),
            ValueRef::Variable { name, .. } => f.write_str(name),
            ValueRef::CallResult { statement } => write!(f, "#{statement}"),
            ValueRef::Unknown => f.write_str("?"),
        }
    }
}
