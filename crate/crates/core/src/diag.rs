use serde::{Deserialize, Serialize};
use std::fmt;

use crate::frontend::SourceLocation;

/// A non-fatal note produced anywhere in the pipeline.
///
/// `code` is a short stable identifier (`skipped-method`, `unresolved`, ...)
/// so that tests and downstream tools can filter without parsing messages.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<SourceLocation>,
}

impl Diagnostic {
    pub fn new(code: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            code: code.into(),
            message: message.into(),
            location: None,
        }
    }

    pub fn at(mut self, location: SourceLocation) -> Self {
        self.location = Some(location);
        self
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.location {
            Some(loc) => write!(f, "{}: [{}] {}", loc, self.code, self.message),
            None => write!(f, "[{}] {}", self.code, self.message),
        }
    }
}
