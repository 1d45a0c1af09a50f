//! Abstract values tracked along one path.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::frontend::StmtId;
use crate::rulelang::{simple_name, ValueKind};

/// Identity of a runtime value: the statement that created it, or an
/// external name (parameter, field, undeclared variable) first read on the
/// path.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "camelCase")]
pub enum Ident {
    Def(StmtId),
    Ext(String),
}

/// A literal value known at a program point.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "camelCase")]
pub enum Const {
    Str(String),
    Int(i64),
    Chars(String),
}

impl Const {
    pub fn text(&self) -> String {
        match self {
            Const::Str(s) | Const::Chars(s) => s.clone(),
            Const::Int(i) => i.to_string(),
        }
    }
}

impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const::Str(s) => write!(f, "{s:?}"),
            Const::Int(i) => write!(f, "{i}"),
            Const::Chars(s) => write!(f, "char[]{s:?}"),
        }
    }
}

/// Whether (and how) a value derives from a `java.lang.String`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Origin {
    NotString,
    Unknown,
    Literal,
    Variable { name: String, parameter: bool },
    Call { method: String },
}

impl Origin {
    pub fn is_string(&self) -> bool {
        matches!(
            self,
            Origin::Literal | Origin::Variable { .. } | Origin::Call { .. }
        )
    }

    pub fn describe(&self) -> String {
        match self {
            Origin::NotString => "non-String value".into(),
            Origin::Unknown => "unknown".into(),
            Origin::Literal => "String literal".into(),
            Origin::Variable { name, parameter: true } => format!("String parameter `{name}`"),
            Origin::Variable { name, .. } => format!("String variable `{name}`"),
            Origin::Call { method } => format!("String returned by `{method}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArgValue {
    pub ident: Option<Ident>,
    pub konst: Option<Const>,
    pub kind: ValueKind,
    pub origin: Origin,
    /// Allocation id of the tracked object whose event produced the value.
    pub producer: Option<StmtId>,
}

impl ArgValue {
    pub fn unknown() -> Self {
        ArgValue {
            ident: None,
            konst: None,
            kind: ValueKind::Unknown,
            origin: Origin::Unknown,
            producer: None,
        }
    }

    pub fn with_ident(mut self, ident: Ident) -> Self {
        self.ident = Some(ident);
        self
    }
}

/// Coarse kind from a declared or allocated type name.
pub fn kind_of_type(type_name: &str) -> ValueKind {
    let t = simple_name(type_name.trim());
    match t {
        "" => ValueKind::Unknown,
        "String" | "CharSequence" => ValueKind::Str,
        "char[]" => ValueKind::Chars,
        "byte[]" => ValueKind::Bytes,
        "int" | "long" | "short" | "byte" | "Integer" | "Long" | "Short" => ValueKind::Int,
        "SecureRandom" | "Random" => ValueKind::Random,
        "Key" | "SecretKey" | "PrivateKey" | "PublicKey" | "SecretKeySpec" => ValueKind::Key,
        t if t.ends_with("PrivateKey") || t.ends_with("PublicKey") || t.ends_with("SecretKey") => {
            ValueKind::Key
        }
        _ => ValueKind::Other,
    }
}

/// Methods whose result is a `String` regardless of receiver.
const STRING_RETURNING: &[&str] = &[
    "getProperty",
    "getenv",
    "readLine",
    "nextLine",
    "getParameter",
    "getHeader",
    "getText",
    "getString",
    "substring",
    "valueOf",
    "format",
    "toUpperCase",
    "toLowerCase",
    "replace",
    "join",
];

/// Methods that return their receiver's text unchanged (or as chars/bytes).
const TEXT_PASSTHROUGH: &[&str] = &["toString", "trim", "intern", "toCharArray", "getBytes"];

/// Abstract result of an invocation that is not a tracked event.
pub fn call_result(
    recv: Option<&ArgValue>,
    owner: Option<&str>,
    method: &str,
    args: &[ArgValue],
) -> ArgValue {
    let recv_origin = recv.map(|r| r.origin.clone()).unwrap_or(Origin::Unknown);
    let mut v = ArgValue::unknown();
    if TEXT_PASSTHROUGH.contains(&method) && args.is_empty() {
        let text = recv.and_then(|r| r.konst.as_ref()).map(Const::text);
        v.kind = match method {
            "toCharArray" => ValueKind::Chars,
            "getBytes" => ValueKind::Bytes,
            _ => ValueKind::Str,
        };
        v.konst = text.map(|t| match method {
            "toCharArray" => Const::Chars(t),
            _ => Const::Str(t),
        });
        v.origin = if recv_origin.is_string() {
            recv_origin
        } else if method == "toString" {
            Origin::Call {
                method: method.into(),
            }
        } else if recv_origin == Origin::Unknown {
            Origin::Unknown
        } else {
            Origin::NotString
        };
        return v;
    }
    if method == "concat"
        && (owner == Some("String") || recv.is_some_and(|r| r.kind == ValueKind::Str))
    {
        let parts: Vec<&ArgValue> = recv.into_iter().chain(args.iter()).collect();
        v.kind = ValueKind::Str;
        v.konst = parts
            .iter()
            .map(|p| p.konst.as_ref().map(Const::text))
            .collect::<Option<Vec<String>>>()
            .map(|t| Const::Str(t.concat()));
        v.origin = parts
            .iter()
            .map(|p| &p.origin)
            .find(|o| matches!(o, Origin::Variable { parameter: true, .. }))
            .or_else(|| parts.iter().map(|p| &p.origin).find(|o| o.is_string()))
            .cloned()
            .unwrap_or(Origin::Call {
                method: "concat".into(),
            });
        return v;
    }
    if STRING_RETURNING.contains(&method) {
        v.kind = ValueKind::Str;
        v.origin = Origin::Call {
            method: method.into(),
        };
        return v;
    }
    let (kind, known) = match method {
        "generateKey" | "generateSecret" | "getPrivate" | "getPublic" | "getKey" | "unwrap"
        | "translateKey" => (ValueKind::Key, true),
        "digest" | "doFinal" | "sign" | "wrap" | "generateSeed" | "getEncoded" | "getIV"
        | "getSalt" | "update" => (ValueKind::Bytes, true),
        "nextInt" | "nextLong" | "length" | "size" | "read" | "getIterationCount" => {
            (ValueKind::Int, true)
        }
        _ => (ValueKind::Unknown, false),
    };
    v.kind = kind;
    if known {
        v.origin = Origin::NotString;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(s: &str) -> ArgValue {
        ArgValue {
            konst: Some(Const::Str(s.into())),
            kind: ValueKind::Str,
            origin: Origin::Literal,
            ..ArgValue::unknown()
        }
    }

    #[test]
    fn type_kinds() {
        assert_eq!(kind_of_type("java.lang.String"), ValueKind::Str);
        assert_eq!(kind_of_type("RSAPrivateKey"), ValueKind::Key);
        assert_eq!(kind_of_type("PBEKeySpec"), ValueKind::Other);
        assert_eq!(kind_of_type(""), ValueKind::Unknown);
    }

    #[test]
    fn to_char_array_keeps_text_and_origin() {
        let v = call_result(Some(&lit("changeit")), None, "toCharArray", &[]);
        assert_eq!(v.konst, Some(Const::Chars("changeit".into())));
        assert_eq!(v.origin, Origin::Literal);
        assert_eq!(v.kind, ValueKind::Chars);
    }

    #[test]
    fn concat_folds_literals() {
        let v = call_result(None, Some("String"), "concat", &[lit("AES/"), lit("GCM")]);
        assert_eq!(v.konst, Some(Const::Str("AES/GCM".into())));
    }
}
