//! Authorization verdicts with explanation traces.

use std::fmt;

use serde::Serialize;

use crate::value::Value;

/// One witness chosen for an existential quantifier (or, for the reference
/// models, one fact the verdict relied on).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    /// Pre-order index of the quantifier node in the rule, when the witness
    /// comes from rule evaluation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node: Option<usize>,
    pub binder: String,
    pub value: Value,
}

impl Witness {
    pub fn fact(binder: impl Into<String>, value: Value) -> Self {
        Witness {
            node: None,
            binder: binder.into(),
            value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    /// Index of the top-level disjunct that fired (0 when the rule is not a disjunction).
    pub disjunct: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
    pub witnesses: Vec<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decision {
    pub allowed: bool,
    pub trace: Vec<TraceStep>,
}

impl Decision {
    pub fn deny() -> Self {
        Decision {
            allowed: false,
            trace: Vec::new(),
        }
    }

    pub fn allow(step: TraceStep) -> Self {
        Decision {
            allowed: true,
            trace: vec![step],
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.allowed { "allow" } else { "deny" })?;
        for step in &self.trace {
            write!(f, "\n  disjunct {}", step.disjunct)?;
            if let Some(s) = &step.subject {
                write!(f, " for {s}")?;
            }
            for w in &step.witnesses {
                write!(f, "\n    {} = {}", w.binder, w.value)?;
            }
        }
        Ok(())
    }
}
