//! Effective-false-positive hints. Flags annotate findings; they never
//! remove or downgrade them.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::analysis::{Finding, FindingDetail, PathFlags};
use crate::frontend::{CompilationUnitIR, MethodIR, StatementKind, ValueRef};
use crate::rulelang::simple_name;
use crate::threatmodel::Classification;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EfpKind {
    TestContext,
    NonSecurityContext,
    ApiForcedString,
    LoopGuarded,
    IntentionalFixture,
}

impl EfpKind {
    pub const ALL: [EfpKind; 5] = [
        EfpKind::TestContext,
        EfpKind::NonSecurityContext,
        EfpKind::ApiForcedString,
        EfpKind::LoopGuarded,
        EfpKind::IntentionalFixture,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Confidence {
    Strong,
    Weak,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EfpFlag {
    pub kind: EfpKind,
    pub confidence: Confidence,
    pub evidence: String,
}

/// Pattern lists and thresholds; every list can be replaced from the config
/// file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct EfpConfig {
    /// Path or package segments marking test code (case-insensitive).
    pub test_path_segments: Vec<String>,
    /// Class-name suffixes marking test code.
    pub test_class_suffixes: Vec<String>,
    /// Identifier fragments suggesting hashing outside a security context.
    pub non_security_tokens: Vec<String>,
    /// Rule classes whose findings count as hash findings.
    pub hash_classes: Vec<String>,
    /// Method-name fragments suggesting deliberate misuse examples.
    pub fixture_method_tokens: Vec<String>,
    /// Findings of one error type in test-like methods needed for
    /// `IntentionalFixture`.
    pub fixture_threshold: usize,
}

impl Default for EfpConfig {
    fn default() -> Self {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect();
        EfpConfig {
            test_path_segments: s(&["test", "tests"]),
            test_class_suffixes: s(&["Test"]),
            non_security_tokens: s(&["checksum", "etag", "cache", "fingerprint", "dedup", "digestfile"]),
            hash_classes: s(&["java.security.MessageDigest"]),
            fixture_method_tokens: s(&["test", "insecure", "vulnerable", "broken", "bad", "weak"]),
            fixture_threshold: 3,
        }
    }
}

/// What is known about the code around a finding.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnalysisContext {
    pub file_path: String,
    pub package_name: String,
    pub enclosing_class_name: String,
    pub enclosing_method_name: String,
    /// Lowercased identifiers of the enclosing method.
    pub identifier_bag: BTreeSet<String>,
    pub path_flags: PathFlags,
    /// Findings of the same error type in the unit that sit in test-like
    /// methods, this one included when it qualifies.
    pub fixture_siblings: usize,
}

fn identifiers(m: &MethodIR) -> BTreeSet<String> {
    let mut bag = BTreeSet::new();
    let mut add = |s: &str| {
        let s = s.trim_start_matches("this.");
        if s.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_') {
            bag.insert(s.split(['#', '$']).next().unwrap_or(s).to_lowercase());
        }
    };
    add(&m.name);
    for p in &m.parameters {
        add(&p.name);
    }
    for s in m.statements() {
        if let Some(v) = s.kind.defined_var() {
            add(v);
        }
        if let StatementKind::Invocation { method, .. } = &s.kind {
            add(method);
        }
        for v in s.kind.operands() {
            if let ValueRef::Variable { name, .. } = v {
                add(name);
            }
        }
    }
    bag
}

fn fixture_like(method: &str, cfg: &EfpConfig) -> bool {
    let m = method.to_lowercase();
    cfg.fixture_method_tokens.iter().any(|t| m.contains(&t.to_lowercase()))
}

/// Contexts for the findings of one unit, in the same order.
pub fn contexts_for_unit(
    unit: &CompilationUnitIR,
    findings: &[Finding],
    cfg: &EfpConfig,
) -> Vec<AnalysisContext> {
    findings
        .iter()
        .map(|f| {
            let siblings = findings
                .iter()
                .filter(|g| g.error_type == f.error_type && fixture_like(&g.method, cfg))
                .count();
            AnalysisContext {
                file_path: f.location.file.clone(),
                package_name: unit.package_name.clone(),
                enclosing_class_name: unit.class_name.clone(),
                enclosing_method_name: f.method.clone(),
                identifier_bag: unit.method(&f.method).map(identifiers).unwrap_or_default(),
                path_flags: f.path_flags,
                fixture_siblings: if fixture_like(&f.method, cfg) { siblings } else { 0 },
            }
        })
        .collect()
}

fn test_evidence(ctx: &AnalysisContext, cfg: &EfpConfig) -> Option<String> {
    let is_seg = |s: &str| cfg.test_path_segments.iter().any(|t| t.eq_ignore_ascii_case(s));
    if let Some(seg) = ctx.file_path.split(['/', '\\']).find(|s| is_seg(s)) {
        return Some(format!("path segment `{seg}`"));
    }
    if let Some(seg) = ctx.package_name.split('.').find(|s| is_seg(s)) {
        return Some(format!("package segment `{seg}`"));
    }
    let class = simple_name(&ctx.enclosing_class_name);
    cfg.test_class_suffixes
        .iter()
        .find(|s| !s.is_empty() && class.ends_with(s.as_str()))
        .map(|s| format!("class suffix `{s}`"))
}

pub fn flag_effective_false_positives(
    f: &Finding,
    _c: Option<&Classification>,
    ctx: &AnalysisContext,
    cfg: &EfpConfig,
) -> Vec<EfpFlag> {
    let mut out = Vec::new();
    if let Some(evidence) = test_evidence(ctx, cfg) {
        out.push(EfpFlag {
            kind: EfpKind::TestContext,
            confidence: Confidence::Weak,
            evidence,
        });
    }
    let is_hash = cfg
        .hash_classes
        .iter()
        .any(|h| h == &f.rule_class || (!h.contains('.') && h == simple_name(&f.rule_class)));
    if is_hash {
        let hits: Vec<&str> = cfg
            .non_security_tokens
            .iter()
            .map(String::as_str)
            .filter(|t| {
                let t = t.to_lowercase();
                !t.is_empty() && ctx.identifier_bag.iter().any(|i| i.contains(&t))
            })
            .collect();
        if !hits.is_empty() {
            out.push(EfpFlag {
                kind: EfpKind::NonSecurityContext,
                confidence: Confidence::Weak,
                evidence: hits.join(", "),
            });
        }
    }
    if let FindingDetail::NeverType {
        public_parameter: Some(p),
        ..
    } = &f.detail
    {
        out.push(EfpFlag {
            kind: EfpKind::ApiForcedString,
            confidence: Confidence::Strong,
            evidence: format!("public parameter `{p}` of `{}`", ctx.enclosing_method_name),
        });
    }
    if ctx.path_flags.loop_guarded {
        out.push(EfpFlag {
            kind: EfpKind::LoopGuarded,
            confidence: Confidence::Strong,
            evidence: "violation absent on a path through the loop body".into(),
        });
    }
    if ctx.fixture_siblings >= cfg.fixture_threshold.max(1) {
        out.push(EfpFlag {
            kind: EfpKind::IntentionalFixture,
            confidence: Confidence::Weak,
            evidence: format!(
                "{} {} findings in test-like methods",
                ctx.fixture_siblings,
                f.error_type.abbrev()
            ),
        });
    }
    out
}
