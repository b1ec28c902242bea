use std::fmt;

use serde::Serialize;

/// A single positioned problem found while loading or validating an instance.
///
/// `location` is either a `line:column` pair (syntax errors) or a JSON pointer
/// into the instance document (semantic errors).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub location: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(location: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            location: location.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("unknown {kind} `{name}`")]
    UnknownEntity { kind: &'static str, name: String },

    #[error("edge <{junior}, {senior}> would create a cycle")]
    Cycle { junior: String, senior: String },

    #[error("edge <{junior}, {senior}> already present")]
    DuplicateEdge { junior: String, senior: String },

    #[error("edge <{junior}, {senior}> is not a direct edge")]
    EdgeNotFound { junior: String, senior: String },

    #[error("attribute `{0}` already defined")]
    DuplicateAttribute(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("attribute `{attr}` has no value for `{entity}`")]
    MissingValue { attr: String, entity: String },

    #[error("attribute `{0}` is not ordered")]
    NotOrdered(String),

    #[error("value `{value}` is outside the scope of `{attr}`")]
    Scope { attr: String, value: String },

    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unbound variable `{0}`")]
    Bind(String),

    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("type error: {0}")]
    Type(String),

    #[error("role `{role}` has several minimal enclosing authority ranges: {ranges}")]
    AmbiguousRange { role: String, ranges: String },

    #[error("invalid instance ({} problem(s))", .0.len())]
    Load(Vec<Diagnostic>),
}

impl Error {
    pub(crate) fn unknown(kind: &'static str, name: impl Into<String>) -> Self {
        Error::UnknownEntity {
            kind,
            name: name.into(),
        }
    }

    /// The diagnostics carried by this error; non-load errors yield one entry.
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        match self {
            Error::Load(diags) => diags.clone(),
            Error::Parse { line, column, .. } => {
                vec![Diagnostic::new(format!("{line}:{column}"), self.to_string())]
            }
            other => vec![Diagnostic::new("/", other.to_string())],
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
