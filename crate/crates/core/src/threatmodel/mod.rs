//! Vulnerability catalog and classification of findings.
//!
//! The catalog and its matchers are data (`data/threatmodel.json`, embedded
//! at build time). A finding is tested against every matcher; the entry
//! with the highest severity wins, ties going to the earlier entry.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::analysis::{ErrorType, Finding, FindingDetail};
use crate::rulelang::{simple_name, Component, ConstraintKind, ParamKind};

pub const BUILTIN_THREAT_MODEL: &str = include_str!("../../data/threatmodel.json");
pub const THREAT_MODEL_SCHEMA_VERSION: u32 = 1;

/// Placeholder in method lists standing for `finishingMethods`.
const FINISHING: &str = "$finishing";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Severity {
    #[serde(alias = "L")]
    Low,
    #[serde(alias = "M")]
    Medium,
    #[serde(alias = "H")]
    High,
}

impl Severity {
    pub const ALL: [Severity; 3] = [Severity::High, Severity::Medium, Severity::Low];

    pub fn letter(self) -> &'static str {
        match self {
            Severity::High => "H",
            Severity::Medium => "M",
            Severity::Low => "L",
        }
    }

    pub fn parse(s: &str) -> Option<Severity> {
        match s.to_ascii_lowercase().as_str() {
            "high" | "h" => Some(Severity::High),
            "medium" | "m" => Some(Severity::Medium),
            "low" | "l" => Some(Severity::Low),
            _ => None,
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::High => "High",
            Severity::Medium => "Medium",
            Severity::Low => "Low",
        })
    }
}

pub fn severity_rank(s: Severity) -> u8 {
    match s {
        Severity::High => 3,
        Severity::Medium => 2,
        Severity::Low => 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AttackType {
    PredictabilityThroughInitialization,
    PredictabilityThroughUsage,
    MitMOnTLS,
    CPA,
    CCA,
    Bruteforce,
    CredentialDumping,
    DoS,
}

impl AttackType {
    pub const ALL: [AttackType; 8] = [
        AttackType::PredictabilityThroughInitialization,
        AttackType::PredictabilityThroughUsage,
        AttackType::MitMOnTLS,
        AttackType::CPA,
        AttackType::CCA,
        AttackType::Bruteforce,
        AttackType::CredentialDumping,
        AttackType::DoS,
    ];

    pub fn display_name(self) -> &'static str {
        match self {
            AttackType::PredictabilityThroughInitialization => "Predictability Through Initialization",
            AttackType::PredictabilityThroughUsage => "Predictability Through Usage",
            AttackType::MitMOnTLS => "MitM Attacks on SSL/TLS",
            AttackType::CPA => "Chosen-Plaintext Attack (CPA)",
            AttackType::CCA => "Chosen-Ciphertext Attack (CCA)",
            AttackType::Bruteforce => "Bruteforce Attacks",
            AttackType::CredentialDumping => "Credential Dumping",
            AttackType::DoS => "DoS Attacks",
        }
    }
}

impl fmt::Display for AttackType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

/// Error types are written with their column abbreviations in the data file.
mod abbrev_list {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[ErrorType], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|e| e.abbrev()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<ErrorType>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| {
                ErrorType::from_abbrev(s)
                    .ok_or_else(|| serde::de::Error::custom(format!("unknown error type `{s}`")))
            })
            .collect()
    }
}

/// Conditions on a finding; empty lists do not constrain.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct Matcher {
    #[serde(with = "abbrev_list")]
    pub error_types: Vec<ErrorType>,
    /// Rule classes, simple or fully qualified.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub classes: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<Component>,
    /// Resolved constraint values (case-insensitive).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub constraint_kinds: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub malformed: Option<bool>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub predicates: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub param_kinds: Vec<ParamKind>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub upstream_classes: Vec<String>,
    /// Method of the offending (TS) or last (IO) event.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub methods: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub methods_not: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub expected_methods_any: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub expected_methods_none: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct VulnerabilityEntry {
    pub id: String,
    pub display_name: String,
    pub attack_type: AttackType,
    pub severity: Severity,
    pub novel: bool,
    #[serde(with = "abbrev_list")]
    pub applicable_error_types: Vec<ErrorType>,
    pub matchers: Vec<Matcher>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ThreatModel {
    pub schema_version: u32,
    pub version: String,
    #[serde(default)]
    pub finishing_methods: Vec<String>,
    pub entries: Vec<VulnerabilityEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Classification {
    pub entry_id: String,
    pub display_name: String,
    pub attack_type: AttackType,
    pub severity: Severity,
    /// Every entry with a firing matcher, in catalog order.
    pub matched_alternatives: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ThreatModelError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: invalid threat model at `{at}`: {message}")]
    Schema {
        path: String,
        at: String,
        message: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

fn contains_ci(list: &[String], s: &str) -> bool {
    list.iter().any(|x| x.eq_ignore_ascii_case(s))
}

fn class_matches(list: &[String], class: &str) -> bool {
    list.iter()
        .any(|c| c == class || (!c.contains('.') && c == simple_name(class)))
}

fn constraint_kind_name(k: &ConstraintKind) -> &'static str {
    match k {
        ConstraintKind::ValueInSet { .. } => "valueInSet",
        ConstraintKind::ValueNotInSet { .. } => "valueNotInSet",
        ConstraintKind::IntAtLeast { .. } => "intAtLeast",
        ConstraintKind::TransformationComponentInSet { .. } => "transformationComponentInSet",
    }
}

impl ThreatModel {
    pub fn builtin() -> &'static ThreatModel {
        static TM: OnceLock<ThreatModel> = OnceLock::new();
        TM.get_or_init(|| {
            ThreatModel::from_json(BUILTIN_THREAT_MODEL, "<builtin>")
                .unwrap_or_else(|e| panic!("builtin threat model: {e}"))
        })
    }

    pub fn from_json(text: &str, path: &str) -> Result<ThreatModel, ThreatModelError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let tm: ThreatModel =
            serde_path_to_error::deserialize(de).map_err(|e| ThreatModelError::Schema {
                path: path.to_string(),
                at: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        tm.validate().map_err(|message| ThreatModelError::Invalid {
            path: path.to_string(),
            message,
        })?;
        Ok(tm)
    }

    pub fn load(path: &Path) -> Result<ThreatModel, ThreatModelError> {
        let text = std::fs::read_to_string(path).map_err(|source| ThreatModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        ThreatModel::from_json(&text, &path.display().to_string())
    }

    fn validate(&self) -> Result<(), String> {
        if self.schema_version != THREAT_MODEL_SCHEMA_VERSION {
            return Err(format!(
                "unsupported schemaVersion {} (expected {THREAT_MODEL_SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        let mut ids = BTreeSet::new();
        for e in &self.entries {
            if !ids.insert(e.id.as_str()) {
                return Err(format!("duplicate entry id `{}`", e.id));
            }
            for (i, m) in e.matchers.iter().enumerate() {
                if m.error_types.is_empty() {
                    return Err(format!("{}: matcher {i} lists no error types", e.id));
                }
                if let Some(x) = m
                    .error_types
                    .iter()
                    .find(|t| !e.applicable_error_types.contains(t))
                {
                    return Err(format!(
                        "{}: matcher {i} uses {} which the entry does not apply to",
                        e.id,
                        x.abbrev()
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn entry(&self, id: &str) -> Option<&VulnerabilityEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    fn expand<'a>(&'a self, list: &'a [String]) -> impl Iterator<Item = &'a str> + 'a {
        list.iter().flat_map(move |s| {
            if s == FINISHING {
                self.finishing_methods.iter().map(String::as_str).collect::<Vec<_>>()
            } else {
                vec![s.as_str()]
            }
        })
    }

    fn any_in(&self, list: &[String], items: &[String]) -> bool {
        self.expand(list).any(|x| items.iter().any(|i| i == x))
    }

    pub fn matches(&self, m: &Matcher, f: &Finding) -> bool {
        if !m.error_types.contains(&f.error_type) {
            return false;
        }
        if !m.classes.is_empty() && !class_matches(&m.classes, &f.rule_class) {
            return false;
        }
        let d = &f.detail;
        if !m.components.is_empty() || !m.values.is_empty() || !m.constraint_kinds.is_empty() || m.malformed.is_some() {
            let FindingDetail::Constraint {
                constraint,
                value,
                component,
                malformed,
                ..
            } = d
            else {
                return false;
            };
            if !m.components.is_empty() && !component.is_some_and(|c| m.components.contains(&c)) {
                return false;
            }
            if !m.values.is_empty() && !contains_ci(&m.values, value) {
                return false;
            }
            if !m.constraint_kinds.is_empty()
                && !m.constraint_kinds.iter().any(|k| k == constraint_kind_name(&constraint.kind))
            {
                return false;
            }
            if m.malformed.is_some_and(|b| b != *malformed) {
                return false;
            }
        }
        if !m.predicates.is_empty() || !m.param_kinds.is_empty() || !m.upstream_classes.is_empty() {
            let FindingDetail::RequiredPredicate {
                predicate,
                param_kind,
                upstream_classes,
                ..
            } = d
            else {
                return false;
            };
            if !m.predicates.is_empty() && !m.predicates.contains(predicate) {
                return false;
            }
            if !m.param_kinds.is_empty() && !m.param_kinds.contains(param_kind) {
                return false;
            }
            if !m.upstream_classes.is_empty()
                && !upstream_classes.iter().any(|u| class_matches(&m.upstream_classes, u))
            {
                return false;
            }
        }
        let (method, expected) = match d {
            FindingDetail::Typestate {
                method,
                expected_methods,
                ..
            } => (Some(method), Some(expected_methods)),
            FindingDetail::IncompleteOperation {
                last_method,
                expected_methods,
                ..
            } => (Some(last_method), Some(expected_methods)),
            FindingDetail::Constraint { method, .. }
            | FindingDetail::RequiredPredicate { method, .. }
            | FindingDetail::NeverType { method, .. }
            | FindingDetail::ForbiddenMethod { method, .. } => (Some(method), None),
        };
        if !m.methods.is_empty() && !method.is_some_and(|x| self.expand(&m.methods).any(|y| y == x)) {
            return false;
        }
        if method.is_some_and(|x| self.expand(&m.methods_not).any(|y| y == x)) {
            return false;
        }
        if !m.expected_methods_any.is_empty()
            && !expected.is_some_and(|e| self.any_in(&m.expected_methods_any, e))
        {
            return false;
        }
        if expected.is_some_and(|e| self.any_in(&m.expected_methods_none, e)) {
            return false;
        }
        true
    }

    /// Entry chosen for a finding, or `None` when no matcher fires.
    pub fn classify(&self, f: &Finding) -> Option<Classification> {
        let hits: Vec<&VulnerabilityEntry> = self
            .entries
            .iter()
            .filter(|e| e.applicable_error_types.contains(&f.error_type))
            .filter(|e| e.matchers.iter().any(|m| self.matches(m, f)))
            .collect();
        // max_by_key keeps the last maximum; search reversed to favour catalog order
        let best = hits.iter().rev().max_by_key(|e| severity_rank(e.severity))?;
        Some(Classification {
            entry_id: best.id.clone(),
            display_name: best.display_name.clone(),
            attack_type: best.attack_type,
            severity: best.severity,
            matched_alternatives: hits.iter().map(|e| e.id.clone()).collect(),
        })
    }
}

/// The built-in catalog.
pub fn catalog() -> &'static [VulnerabilityEntry] {
    &ThreatModel::builtin().entries
}

/// Classify against the built-in catalog.
pub fn classify(f: &Finding) -> Option<Classification> {
    ThreatModel::builtin().classify(f)
}

#[cfg(test)]
mod tests;
