//! Allowlist-based detection of cryptographic API misuses in Java code.
//!
//! The pipeline is:
//!
//! 1. [`rulelang`] parses `.rule` files into [`rulelang::RuleSpec`]s, compiling
//!    each call-order pattern into a deterministic typestate automaton.
//! 2. [`frontend`] lowers a Java subset into a per-method CFG IR
//!    ([`frontend::CompilationUnitIR`]), optionally inlining local helpers.
//! 3. [`analysis`] follows every crypto object along bounded CFG paths and
//!    reports the six misuse error types.
//! 4. [`threatmodel`] maps each finding to a vulnerability (attack type and
//!    severity), [`efp`] annotates likely effective false positives and
//!    [`report`] renders the aggregate result.
//!
//! The [`cli`] module wires these together for the `cryptriage` binary.

pub mod analysis;
pub mod cli;
pub mod diag;
pub mod efp;
pub mod frontend;
pub mod pipeline;
pub mod report;
pub mod rulelang;
pub mod threatmodel;

pub use analysis::{analyze_unit, ErrorType, Finding};
pub use diag::Diagnostic;
pub use frontend::{inline_local_helpers, parse_java, CompilationUnitIR};
pub use rulelang::{load_rule_pack, parse_rule, RuleSet, RuleSpec};
pub use threatmodel::{catalog, classify, Severity};

/// Version string embedded in reports.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
