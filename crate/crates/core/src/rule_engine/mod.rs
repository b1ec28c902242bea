//! The rule language: AST, parser and evaluator for `is_authorizedR_op`
//! predicates and set-builder role selections.

mod ast;
mod eval;
mod parser;

pub use ast::{AttrRef, Binder, Domain, Expr, Quantifier, Relation, RuleAst, SetBuilder, Term};
pub use eval::{evaluate, evaluate_set_form, replay, select_roles};
pub use parser::{check_rule, parse_rule, parse_set_builder, Kind, RuleContext};
