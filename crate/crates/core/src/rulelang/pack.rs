use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use super::{parse_rule, RuleError, RuleSet, RuleSpec};

pub const BUILTIN_PACK_VERSION: &str = "starter-1.0.0";

/// Name of the optional file holding a pack's version string.
pub const VERSION_FILE: &str = "PACK_VERSION";

const BUILTIN: &[(&str, &str)] = &[
    ("AEADParameters.rule", include_str!("../../rules/AEADParameters.rule")),
    ("Cipher.rule", include_str!("../../rules/Cipher.rule")),
    ("IvParameterSpec.rule", include_str!("../../rules/IvParameterSpec.rule")),
    ("KeyGenerator.rule", include_str!("../../rules/KeyGenerator.rule")),
    ("KeyPairGenerator.rule", include_str!("../../rules/KeyPairGenerator.rule")),
    ("KeyStore.rule", include_str!("../../rules/KeyStore.rule")),
    ("Mac.rule", include_str!("../../rules/Mac.rule")),
    ("MessageDigest.rule", include_str!("../../rules/MessageDigest.rule")),
    ("PBEKeySpec.rule", include_str!("../../rules/PBEKeySpec.rule")),
    ("PBEParameterSpec.rule", include_str!("../../rules/PBEParameterSpec.rule")),
    ("SSLContext.rule", include_str!("../../rules/SSLContext.rule")),
    ("SecretKeySpec.rule", include_str!("../../rules/SecretKeySpec.rule")),
    ("SecureRandom.rule", include_str!("../../rules/SecureRandom.rule")),
    ("Signature.rule", include_str!("../../rules/Signature.rule")),
    ("TrustManagerFactory.rule", include_str!("../../rules/TrustManagerFactory.rule")),
];

/// Result of loading a pack: the rules plus non-fatal warnings.
#[derive(Debug, Clone)]
pub struct PackLoad {
    pub rules: RuleSet,
    pub warnings: Vec<String>,
}

/// The starter pack compiled into the binary.
pub fn builtin_pack() -> RuleSet {
    let mut set = RuleSet::new(BUILTIN_PACK_VERSION);
    for (name, text) in BUILTIN {
        let rule = parse_rule(text).unwrap_or_else(|e| panic!("builtin rule {name}: {e}"));
        set.insert(rule)
            .unwrap_or_else(|r| panic!("builtin rule {name}: duplicate {}", r.class_name));
    }
    set
}

/// Load every `*.rule` file of a directory (non-recursive).
pub fn load_rule_pack(dir: &Path) -> Result<PackLoad, RuleError> {
    let io = |source| RuleError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "rule"))
        .collect();
    files.sort();

    let version = match fs::read_to_string(dir.join(VERSION_FILE)) {
        Ok(v) if !v.trim().is_empty() => v.trim().to_string(),
        _ => "unversioned".to_string(),
    };
    let mut set = RuleSet::new(version);
    let mut warnings = Vec::new();
    if files.is_empty() {
        warnings.push(format!("{}: no .rule files found", dir.display()));
    }
    let mut origin: Vec<(String, PathBuf)> = Vec::new();
    for path in files {
        let text = fs::read_to_string(&path).map_err(|source| RuleError::Io {
            path: path.clone(),
            source,
        })?;
        let rule = parse_rule(&text).map_err(|e| e.in_file(&path))?;
        for w in lint_rule(&rule) {
            warnings.push(format!("{}: {w}", path.display()));
        }
        let class = rule.class_name.clone();
        if let Err(dup) = set.insert(rule) {
            let first = origin
                .iter()
                .find(|(c, _)| *c == dup.class_name)
                .map(|(_, p)| p.display().to_string())
                .unwrap_or_default();
            return Err(RuleError::DuplicateClass {
                class: dup.class_name,
                first,
                second: path.display().to_string(),
            });
        }
        origin.push((class, path));
    }
    Ok(PackLoad {
        rules: set,
        warnings,
    })
}

/// Non-fatal findings about a rule: unused or shadowed events and
/// accepting states that can only be reached through shadowed events.
pub fn lint_rule(rule: &RuleSpec) -> Vec<String> {
    let mut out = Vec::new();
    let mut used: BTreeSet<&str> = BTreeSet::new();
    for label in rule.order_pattern.labels() {
        for m in rule.members(&label) {
            used.insert(rule.event(m).map(|e| e.label.as_str()).unwrap_or_default());
        }
    }
    for e in &rule.events {
        if !used.contains(e.label.as_str()) {
            out.push(format!(
                "{}: event `{}` is not used in ORDER",
                rule.class_name, e.label
            ));
        }
    }
    let shadowed = rule.shadowed_events();
    for (later, earlier) in &shadowed {
        out.push(format!(
            "{}: event `{later}` is shadowed by earlier event `{earlier}` and never matches",
            rule.class_name
        ));
    }
    if !shadowed.is_empty() {
        let dead: BTreeSet<&str> = shadowed.iter().map(|(l, _)| *l).collect();
        let reach = rule.automaton.reachable_with(|l| !dead.contains(l));
        for s in rule.automaton.accepting() {
            if !reach.contains(s) {
                out.push(format!(
                    "{}: accepting state {s} is unreachable through matchable events",
                    rule.class_name
                ));
            }
        }
    }
    out
}
