//! The allowlist rule language.
//!
//! One `.rule` file describes every secure usage of one API class: the events
//! (method calls) it knows about, the order they must occur in, constraints on
//! argument values, predicates exchanged with other objects, forbidden calls,
//! and parameters that must never originate from a `String`. The grammar is
//! documented in `docs/rule-language.md`.

mod automaton;
mod error;
mod lexer;
mod pack;
mod parser;
mod pattern;

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

pub use automaton::{compile_order, StateId, TypestateAutomaton};
pub use error::{Pos, RuleError};
pub use pack::{builtin_pack, lint_rule, load_rule_pack, PackLoad, BUILTIN_PACK_VERSION};
pub use parser::parse_rule;
pub use pattern::OrderPattern;

/// Method name used for constructor events.
pub const CONSTRUCTOR: &str = "<init>";

/// Semantic kind of a rule event parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ParamKind {
    Secret,
    Data,
    Algorithm,
    Key,
    Salt,
    Iv,
    Iterations,
    Size,
    Random,
    Spec,
    Wildcard,
}

impl ParamKind {
    pub fn from_keyword(s: &str) -> Option<ParamKind> {
        Some(match s {
            "secret" => ParamKind::Secret,
            "data" => ParamKind::Data,
            "algorithm" => ParamKind::Algorithm,
            "key" => ParamKind::Key,
            "salt" => ParamKind::Salt,
            "iv" => ParamKind::Iv,
            "iterations" => ParamKind::Iterations,
            "size" => ParamKind::Size,
            "random" => ParamKind::Random,
            "spec" => ParamKind::Spec,
            "_" => ParamKind::Wildcard,
            _ => return None,
        })
    }

    pub fn keyword(self) -> &'static str {
        match self {
            ParamKind::Secret => "secret",
            ParamKind::Data => "data",
            ParamKind::Algorithm => "algorithm",
            ParamKind::Key => "key",
            ParamKind::Salt => "salt",
            ParamKind::Iv => "iv",
            ParamKind::Iterations => "iterations",
            ParamKind::Size => "size",
            ParamKind::Random => "random",
            ParamKind::Spec => "spec",
            ParamKind::Wildcard => "_",
        }
    }

    /// Whether an argument of the given observed kind may bind this parameter.
    /// Only clear mismatches are rejected; unknown values bind anything.
    pub fn accepts(self, value: ValueKind) -> bool {
        use ParamKind as P;
        use ValueKind as V;
        if self == P::Wildcard {
            return true;
        }
        match value {
            V::Unknown | V::Other => true,
            V::Int => matches!(self, P::Iterations | P::Size),
            V::Str => matches!(self, P::Algorithm | P::Secret),
            V::Chars => matches!(self, P::Secret),
            V::Bytes => matches!(self, P::Data | P::Key | P::Salt | P::Iv | P::Secret),
            V::Random => matches!(self, P::Random),
            V::Key => matches!(self, P::Key),
            V::Null => !matches!(self, P::Iterations | P::Size),
        }
    }
}

/// Coarse kind of an actual argument at a call site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueKind {
    Str,
    Int,
    Chars,
    Bytes,
    Random,
    Key,
    Null,
    Other,
    Unknown,
}

/// A call shape: method name plus parameter kinds (arity is their count).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EventPattern {
    pub method_name: String,
    pub parameter_kinds: Vec<ParamKind>,
}

impl EventPattern {
    pub fn arity(&self) -> usize {
        self.parameter_kinds.len()
    }

    pub fn matches(&self, method: &str, args: &[ValueKind]) -> bool {
        self.method_name == method
            && self.arity() == args.len()
            && self
                .parameter_kinds
                .iter()
                .zip(args)
                .all(|(k, v)| k.accepts(*v))
    }

    /// True when every call matched by `other` is also matched by `self`.
    pub fn subsumes(&self, other: &EventPattern) -> bool {
        self.method_name == other.method_name
            && self.arity() == other.arity()
            && self
                .parameter_kinds
                .iter()
                .zip(&other.parameter_kinds)
                .all(|(a, b)| *a == ParamKind::Wildcard || a == b)
    }
}

impl fmt::Display for EventPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kinds: Vec<_> = self.parameter_kinds.iter().map(|k| k.keyword()).collect();
        write!(f, "{}({})", self.method_name, kinds.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventDecl {
    pub label: String,
    pub pattern: EventPattern,
    pub pos: Pos,
}

/// `label := a | b`: one name standing for several declared events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventAlias {
    pub label: String,
    pub members: Vec<String>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Int(i64),
    Str(String),
}

impl Literal {
    /// Textual comparison, case-insensitive (JCA names are case-insensitive).
    pub fn matches_text(&self, text: &str) -> bool {
        match self {
            Literal::Str(s) => s.eq_ignore_ascii_case(text),
            Literal::Int(i) => i.to_string() == text,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Int(i) => write!(f, "{i}"),
            Literal::Str(s) => write!(f, "\"{s}\""),
        }
    }
}

/// Component of a `algorithm/mode/padding` transformation string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Component {
    Algorithm,
    Mode,
    Padding,
}

impl Component {
    pub fn from_keyword(s: &str) -> Option<Component> {
        match s {
            "algorithm" => Some(Component::Algorithm),
            "mode" => Some(Component::Mode),
            "padding" => Some(Component::Padding),
            _ => None,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Component::Algorithm => "algorithm",
            Component::Mode => "mode",
            Component::Padding => "padding",
        }
    }
}

/// Condition on another component of the same transformation string.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ComponentGuard {
    pub component: Component,
    pub negated: bool,
    pub values: Vec<Literal>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum ConstraintKind {
    ValueInSet {
        values: Vec<Literal>,
    },
    ValueNotInSet {
        values: Vec<Literal>,
    },
    IntAtLeast {
        bound: i64,
    },
    /// `negated` turns the allowlist into a denylist for this component.
    TransformationComponentInSet {
        component: Component,
        negated: bool,
        values: Vec<Literal>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        guard: Option<ComponentGuard>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstraintSpec {
    pub target_event: String,
    pub param_index: usize,
    #[serde(flatten)]
    pub kind: ConstraintKind,
}

impl fmt::Display for ConstraintSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn set(vs: &[Literal]) -> String {
            let items: Vec<_> = vs.iter().map(|v| v.to_string()).collect();
            format!("{{{}}}", items.join(", "))
        }
        write!(f, "{}[{}] ", self.target_event, self.param_index)?;
        match &self.kind {
            ConstraintKind::ValueInSet { values } => write!(f, "in {}", set(values)),
            ConstraintKind::ValueNotInSet { values } => write!(f, "notin {}", set(values)),
            ConstraintKind::IntAtLeast { bound } => write!(f, ">= {bound}"),
            ConstraintKind::TransformationComponentInSet {
                component,
                negated,
                values,
                guard,
            } => {
                let op = if *negated { "notin" } else { "in" };
                write!(f, "{} {op} {}", component.keyword(), set(values))?;
                if let Some(g) = guard {
                    let op = if g.negated { "notin" } else { "in" };
                    write!(f, " when {} {op} {}", g.component.keyword(), set(&g.values))?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum PredicateBinding {
    ThisObject,
    ReturnValue { event: String },
    Param { event: String, index: usize },
}

impl fmt::Display for PredicateBinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredicateBinding::ThisObject => f.write_str("this"),
            PredicateBinding::ReturnValue { event } => write!(f, "{event}.return"),
            PredicateBinding::Param { event, index } => write!(f, "{event}[{index}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PredicateSpec {
    pub predicate_name: String,
    pub binding: PredicateBinding,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NeverTypeSpec {
    pub target_event: String,
    pub param_index: usize,
    pub forbidden_source_type: String,
}

/// One allowlist rule, validated and with its automaton compiled.
#[derive(Debug, Clone)]
pub struct RuleSpec {
    pub class_name: String,
    pub events: Vec<EventDecl>,
    pub aliases: Vec<EventAlias>,
    pub order_pattern: OrderPattern,
    pub automaton: TypestateAutomaton,
    pub constraints: Vec<ConstraintSpec>,
    pub requires: Vec<PredicateSpec>,
    pub ensures: Vec<PredicateSpec>,
    pub forbidden: Vec<String>,
    pub never_type: Vec<NeverTypeSpec>,
}

impl RuleSpec {
    pub fn simple_name(&self) -> &str {
        simple_name(&self.class_name)
    }

    pub fn event(&self, label: &str) -> Option<&EventDecl> {
        self.events.iter().find(|e| e.label == label)
    }

    pub fn alias(&self, label: &str) -> Option<&EventAlias> {
        self.aliases.iter().find(|a| a.label == label)
    }

    /// Declared event labels a (possibly aliased) label stands for.
    pub fn members<'a>(&'a self, label: &'a str) -> Vec<&'a str> {
        match self.alias(label) {
            Some(a) => a.members.iter().map(String::as_str).collect(),
            None if self.event(label).is_some() => vec![label],
            None => Vec::new(),
        }
    }

    /// Whether event `base` is covered by `label` (itself or via alias).
    pub fn covers(&self, label: &str, base: &str) -> bool {
        label == base || self.alias(label).is_some_and(|a| a.members.iter().any(|m| m == base))
    }

    /// First declared event matching a call, in declaration order.
    pub fn match_call(&self, method: &str, args: &[ValueKind]) -> Option<&EventDecl> {
        self.events.iter().find(|e| e.pattern.matches(method, args))
    }

    pub fn is_forbidden(&self, base: &str) -> bool {
        self.forbidden.iter().any(|f| self.covers(f, base))
    }

    /// Events whose pattern can never match because an earlier declaration
    /// subsumes it, paired with the shadowing label.
    pub fn shadowed_events(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        for (i, later) in self.events.iter().enumerate() {
            if let Some(earlier) = self.events[..i]
                .iter()
                .find(|e| e.pattern.subsumes(&later.pattern))
            {
                out.push((later.label.as_str(), earlier.label.as_str()));
            }
        }
        out
    }
}

pub fn simple_name(class_name: &str) -> &str {
    class_name.rsplit('.').next().unwrap_or(class_name)
}

/// Rules keyed by fully-qualified class name. Immutable after load.
#[derive(Debug, Clone, Default)]
pub struct RuleSet {
    rules: BTreeMap<String, RuleSpec>,
    pub pack_version: String,
}

impl RuleSet {
    pub fn new(pack_version: impl Into<String>) -> Self {
        RuleSet {
            rules: BTreeMap::new(),
            pack_version: pack_version.into(),
        }
    }

    /// Insert a rule; returns the rule back if its class is already present.
    pub fn insert(&mut self, rule: RuleSpec) -> Result<(), Box<RuleSpec>> {
        if self.rules.contains_key(&rule.class_name) {
            return Err(Box::new(rule));
        }
        self.rules.insert(rule.class_name.clone(), rule);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Rules in class-name order.
    pub fn iter(&self) -> impl Iterator<Item = &RuleSpec> {
        self.rules.values()
    }

    pub fn get(&self, class_name: &str) -> Option<&RuleSpec> {
        self.rules.get(class_name)
    }

    /// Resolve a class name from source. Unqualified names fall back to
    /// simple-name matching.
    pub fn find(&self, class_name: &str) -> Option<&RuleSpec> {
        if let Some(r) = self.rules.get(class_name) {
            return Some(r);
        }
        if class_name.contains('.') {
            return None;
        }
        self.rules.values().find(|r| r.simple_name() == class_name)
    }
}
