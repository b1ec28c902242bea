//! Attribute-based role-role assignment (ARRA).
//!
//! Role hierarchies, attribute stores and a quantified rule language for
//! authorizing hierarchy edits, together with reference semantics for RRA97
//! and UARBAC and translators from both into ARRA.

pub mod arra;
pub mod attributes;
pub mod decision;
pub mod error;
pub mod fixtures;
pub mod format;
pub mod hierarchy;
pub mod ids;
pub mod rra97;
pub mod rule_engine;
pub mod translator;
pub mod uarbac;
pub mod value;

pub use arra::{ArraInstance, ArraParts, DeleteSemantics, EdgeEffect, Flags, RuleSet};
pub use attributes::{AttrValue, AttributeSchema, Attributes, OrderSpec, ScopeSpec, Target, ValueKind};
pub use decision::{Decision, TraceStep, Witness};
pub use error::{Diagnostic, Error, Result};
pub use format::{Instance, ModelKind};
pub use hierarchy::{Reachability, RoleGraph};
pub use ids::{RoleId, UserId};
pub use rra97::{Rra97Instance, Rra97Parts};
pub use uarbac::{Permission, UarbacInstance, UarbacParts};
pub use value::Value;
