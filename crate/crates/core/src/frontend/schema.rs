//! JSON interchange format for the IR: flat `methods`, `blocks` and
//! `statements` tables linked by index and id.

use serde::{Deserialize, Serialize};

use super::ir::*;
use super::validate::validate_unit;
use super::FrontendError;
use crate::diag::Diagnostic;

pub const IR_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct Document {
    schema_version: u32,
    unit: UnitDoc,
    methods: Vec<MethodDoc>,
    blocks: Vec<BlockDoc>,
    statements: Vec<StatementDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct UnitDoc {
    source_path: String,
    #[serde(default)]
    package_name: String,
    class_name: String,
    #[serde(default)]
    diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct MethodDoc {
    name: String,
    visibility: Visibility,
    #[serde(default)]
    is_static: bool,
    parameters: Vec<Parameter>,
    return_type: String,
    entry: BlockId,
    exits: Vec<BlockId>,
    location: SourceLocation,
    /// Block ids in order.
    blocks: Vec<BlockId>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct BlockDoc {
    /// Index into `methods`.
    method_index: usize,
    id: BlockId,
    successors: Vec<BlockId>,
    #[serde(default)]
    loop_header: bool,
    /// Statement ids in order.
    statements: Vec<StmtId>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct StatementDoc {
    /// Index into `methods`.
    method_index: usize,
    #[serde(flatten)]
    statement: Statement,
}

/// Serialize a unit into the interchange document.
pub fn dump_ir(u: &CompilationUnitIR) -> serde_json::Value {
    let mut doc = Document {
        schema_version: IR_SCHEMA_VERSION,
        unit: UnitDoc {
            source_path: u.source_path.clone(),
            package_name: u.package_name.clone(),
            class_name: u.class_name.clone(),
            diagnostics: u.diagnostics.clone(),
        },
        methods: Vec::new(),
        blocks: Vec::new(),
        statements: Vec::new(),
    };
    for (mi, m) in u.methods.iter().enumerate() {
        doc.methods.push(MethodDoc {
            name: m.name.clone(),
            visibility: m.visibility,
            is_static: m.is_static,
            parameters: m.parameters.clone(),
            return_type: m.return_type.clone(),
            entry: m.entry,
            exits: m.exits.clone(),
            location: m.location.clone(),
            blocks: m.blocks.iter().map(|b| b.id).collect(),
        });
        for b in &m.blocks {
            doc.blocks.push(BlockDoc {
                method_index: mi,
                id: b.id,
                successors: b.successors.clone(),
                loop_header: b.loop_header,
                statements: b.statements.iter().map(|s| s.id).collect(),
            });
            for s in &b.statements {
                doc.statements.push(StatementDoc {
                    method_index: mi,
                    statement: s.clone(),
                });
            }
        }
    }
    serde_json::to_value(doc).expect("IR serializes")
}

pub fn dump_ir_string(u: &CompilationUnitIR) -> String {
    let mut s = serde_json::to_string_pretty(&dump_ir(u)).expect("IR serializes");
    s.push('\n');
    s
}

fn schema_err(path: impl Into<String>, message: impl Into<String>) -> FrontendError {
    FrontendError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

/// Parse and validate an interchange document.
pub fn load_ir(text: &str) -> Result<CompilationUnitIR, FrontendError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: Document = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema_err(path, e.into_inner().to_string())
    })?;
    if doc.schema_version != IR_SCHEMA_VERSION {
        return Err(schema_err(
            "schemaVersion",
            format!(
                "unsupported version {} (expected {IR_SCHEMA_VERSION})",
                doc.schema_version
            ),
        ));
    }

    let mut unit = CompilationUnitIR::new(doc.unit.source_path);
    unit.package_name = doc.unit.package_name;
    unit.class_name = doc.unit.class_name;
    unit.diagnostics = doc.unit.diagnostics;

    let n = doc.methods.len();
    let mut stmts: Vec<Vec<Option<Statement>>> = vec![Vec::new(); n];
    for (i, s) in doc.statements.into_iter().enumerate() {
        if s.method_index >= n {
            return Err(schema_err(format!("statements[{i}].methodIndex"), "no such method"));
        }
        stmts[s.method_index].push(Some(s.statement));
    }
    let mut blocks: Vec<Vec<BasicBlock>> = vec![Vec::new(); n];
    for (i, b) in doc.blocks.into_iter().enumerate() {
        if b.method_index >= n {
            return Err(schema_err(format!("blocks[{i}].methodIndex"), "no such method"));
        }
        let mut body = Vec::with_capacity(b.statements.len());
        for (k, sid) in b.statements.iter().enumerate() {
            let slot = stmts[b.method_index]
                .iter_mut()
                .find(|s| s.as_ref().is_some_and(|s| s.id == *sid))
                .ok_or_else(|| {
                    schema_err(
                        format!("blocks[{i}].statements[{k}]"),
                        format!("statement {sid} not found (or used twice)"),
                    )
                })?;
            body.push(slot.take().expect("checked above"));
        }
        blocks[b.method_index].push(BasicBlock {
            id: b.id,
            statements: body,
            successors: b.successors,
            loop_header: b.loop_header,
        });
    }
    for (mi, left) in stmts.iter().enumerate() {
        if let Some(s) = left.iter().flatten().next() {
            return Err(schema_err(
                format!("statements (method {mi})"),
                format!("statement {} belongs to no block", s.id),
            ));
        }
    }
    for (mi, (m, mut bs)) in doc.methods.into_iter().zip(blocks).enumerate() {
        let mut ordered = Vec::with_capacity(m.blocks.len());
        for (k, id) in m.blocks.iter().enumerate() {
            let pos = bs.iter().position(|b| b.id == *id).ok_or_else(|| {
                schema_err(
                    format!("methods[{mi}].blocks[{k}]"),
                    format!("block {id} not found"),
                )
            })?;
            ordered.push(bs.swap_remove(pos));
        }
        if let Some(b) = bs.first() {
            return Err(schema_err(
                format!("methods[{mi}].blocks"),
                format!("block {} is not listed", b.id),
            ));
        }
        unit.methods.push(MethodIR {
            name: m.name,
            visibility: m.visibility,
            is_static: m.is_static,
            parameters: m.parameters,
            return_type: m.return_type,
            blocks: ordered,
            entry: m.entry,
            exits: m.exits,
            location: m.location,
        });
    }
    let errs = validate_unit(&unit);
    if !errs.is_empty() {
        return Err(FrontendError::InvalidIr(errs.join("; ")));
    }
    Ok(unit)
}
