use std::fmt;

use serde::{Deserialize, Serialize};

/// A runtime value: an atomic token (role name, user name, scope element)
/// or an ordered pair of tokens (an authority range, an AUA entry).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Atom(String),
    Pair(String, String),
}

impl Value {
    pub fn atom(s: impl Into<String>) -> Self {
        Value::Atom(s.into())
    }

    pub fn pair(a: impl Into<String>, b: impl Into<String>) -> Self {
        Value::Pair(a.into(), b.into())
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Value::Atom(s) => Some(s),
            Value::Pair(..) => None,
        }
    }

    pub fn as_pair(&self) -> Option<(&str, &str)> {
        match self {
            Value::Pair(a, b) => Some((a, b)),
            Value::Atom(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Atom(s) => f.write_str(s),
            Value::Pair(a, b) => write!(f, "({a}, {b})"),
        }
    }
}
