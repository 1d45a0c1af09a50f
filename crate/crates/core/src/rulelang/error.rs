use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::PathBuf;
use thiserror::Error;

/// 1-based position inside a rule file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("{pos}: syntax error: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        pos: Pos,
        expected: Vec<String>,
        found: String,
    },
    #[error("{pos}: event label `{label}` is not declared in EVENTS")]
    UndeclaredEvent { pos: Pos, label: String },
    #[error("{pos}: event label `{label}` is declared twice")]
    DuplicateLabel { pos: Pos, label: String },
    #[error("{pos}: parameter index {index} is out of range for event `{label}` (arity {arity})")]
    ParamOutOfRange {
        pos: Pos,
        label: String,
        index: usize,
        arity: usize,
    },
    #[error("{pos}: {message}")]
    Invalid { pos: Pos, message: String },
    #[error("duplicate rule for class `{class}` in {first} and {second}")]
    DuplicateClass {
        class: String,
        first: String,
        second: String,
    },
    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<RuleError>,
    },
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RuleError {
    pub fn syntax(pos: Pos, expected: &[&str], found: &str) -> Self {
        RuleError::Syntax {
            pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: found.to_string(),
        }
    }

    pub fn invalid(pos: Pos, message: impl Into<String>) -> Self {
        RuleError::Invalid {
            pos,
            message: message.into(),
        }
    }

    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        RuleError::InFile {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// Position of the error inside its rule file, when known.
    pub fn pos(&self) -> Option<Pos> {
        match self {
            RuleError::Syntax { pos, .. }
            | RuleError::UndeclaredEvent { pos, .. }
            | RuleError::DuplicateLabel { pos, .. }
            | RuleError::ParamOutOfRange { pos, .. }
            | RuleError::Invalid { pos, .. } => Some(*pos),
            RuleError::InFile { source, .. } => source.pos(),
            _ => None,
        }
    }
}
