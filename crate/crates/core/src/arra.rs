//! ARRA model state and authorization entry points.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::attributes::{Attributes, Target};
use crate::decision::Decision;
use crate::error::{Error, Result};
use crate::hierarchy::RoleGraph;
use crate::ids::{check_name, RoleId, UserId};
use crate::rule_engine::{self, check_rule, RuleAst, RuleContext, SetBuilder};
use crate::value::Value;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeleteSemantics {
    #[default]
    Main,
    /// Closed-range variant: the edge may touch the owned range's bounds.
    Appendix,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Flags {
    /// Widen `aroles(au)` to every admin role junior to an assigned one.
    pub aroles_closure: bool,
    /// Which deleteEdge formula a translated RRA97 instance carries.
    pub delete_semantics: DeleteSemantics,
}

/// The rules for one administrative operation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpRules {
    /// `is_authorizedR_op(au, r1, r2)`.
    pub single: RuleAst,
    /// Optional per-member rule for the set form, over `(au, r1, r)`.
    pub set: Option<RuleAst>,
}

/// Operation name → rules. The key set is AOP.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleSet {
    rules: BTreeMap<String, OpRules>,
}

impl RuleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, op: impl Into<String>, single: RuleAst, set: Option<RuleAst>) {
        self.rules.insert(op.into(), OpRules { single, set });
    }

    pub fn get(&self, op: &str) -> Option<&OpRules> {
        self.rules.get(op)
    }

    pub fn ops(&self) -> impl Iterator<Item = &str> {
        self.rules.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &OpRules)> {
        self.rules.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

/// What an authorized operation does to RH.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeEffect {
    /// Add the direct edge `r1 < r2`.
    Insert,
    /// Remove the direct edge `r1 < r2`.
    Delete,
}

/// The RH mutation performed by a known operation name.
pub fn effect_of(op: &str) -> Option<EdgeEffect> {
    match op {
        "insertEdge" | "assign" => Some(EdgeEffect::Insert),
        "deleteEdge" | "revoke" => Some(EdgeEffect::Delete),
        _ => None,
    }
}

/// The components of an ARRA instance, before validation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArraParts {
    pub admin_users: BTreeSet<UserId>,
    pub roles: RoleGraph,
    pub admin_roles: RoleGraph,
    pub aua: BTreeSet<(UserId, RoleId)>,
    pub attributes: Attributes,
    pub rules: RuleSet,
    pub flags: Flags,
}

/// A validated ARRA instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArraInstance {
    parts: ArraParts,
    role_values: Vec<Value>,
    admin_role_values: Vec<Value>,
    aua_values: Vec<Value>,
}

fn check(kind: &'static str, name: &str) -> Result<()> {
    match check_name(name) {
        Some(why) => Err(Error::Schema(format!("{kind} `{name}`: {why}"))),
        None => Ok(()),
    }
}

impl ArraInstance {
    pub fn new(mut parts: ArraParts) -> Result<Self> {
        for u in &parts.admin_users {
            check("admin user", u.as_str())?;
        }
        for r in parts.roles.nodes() {
            check("role", r.as_str())?;
        }
        for r in parts.admin_roles.nodes() {
            check("admin role", r.as_str())?;
        }
        for (u, ar) in &parts.aua {
            if !parts.admin_users.contains(u) {
                return Err(Error::unknown("admin user", u.as_str()));
            }
            if !parts.admin_roles.contains(ar.as_str()) {
                return Err(Error::unknown("admin role", ar.as_str()));
            }
        }
        parts.attributes.rebind(&parts.roles)?;
        let inst = ArraInstance {
            role_values: parts.roles.nodes().iter().map(|r| Value::atom(r.as_str())).collect(),
            admin_role_values: parts
                .admin_roles
                .nodes()
                .iter()
                .map(|r| Value::atom(r.as_str()))
                .collect(),
            aua_values: parts
                .aua
                .iter()
                .map(|(u, r)| Value::pair(u.as_str(), r.as_str()))
                .collect(),
            parts,
        };
        for (target, attr, entity, _) in inst.parts.attributes.assignments() {
            if !inst.has_entity(target, entity) {
                return Err(Error::UnknownEntity {
                    kind: target_kind(target),
                    name: format!("{entity} (value of `{attr}`)"),
                });
            }
        }
        let attrs = &inst.parts.attributes;
        for (_, rules) in inst.parts.rules.iter() {
            check_rule(&rules.single, &RuleContext::single_form(attrs))?;
            if let Some(set) = &rules.set {
                check_rule(set, &RuleContext::set_form(attrs))?;
            }
        }
        Ok(inst)
    }

    pub fn parts(&self) -> &ArraParts {
        &self.parts
    }

    pub fn into_parts(self) -> ArraParts {
        self.parts
    }

    pub fn admin_users(&self) -> &BTreeSet<UserId> {
        &self.parts.admin_users
    }

    pub fn roles(&self) -> &RoleGraph {
        &self.parts.roles
    }

    pub fn admin_roles(&self) -> &RoleGraph {
        &self.parts.admin_roles
    }

    pub fn aua(&self) -> &BTreeSet<(UserId, RoleId)> {
        &self.parts.aua
    }

    pub fn attributes(&self) -> &Attributes {
        &self.parts.attributes
    }

    pub fn rules(&self) -> &RuleSet {
        &self.parts.rules
    }

    pub fn flags(&self) -> &Flags {
        &self.parts.flags
    }

    /// AOP.
    pub fn ops(&self) -> impl Iterator<Item = &str> {
        self.parts.rules.ops()
    }

    pub(crate) fn role_values(&self) -> &[Value] {
        &self.role_values
    }

    pub(crate) fn admin_role_values(&self) -> &[Value] {
        &self.admin_role_values
    }

    pub(crate) fn aua_values(&self) -> &[Value] {
        &self.aua_values
    }

    pub fn has_entity(&self, target: Target, name: &str) -> bool {
        match target {
            Target::AdminUser => self.parts.admin_users.contains(name),
            Target::AdminRole => self.parts.admin_roles.contains(name),
            Target::Role => self.parts.roles.contains(name),
        }
    }

    /// `aroles(au)`, sorted; widened along ARH when `aroles_closure` is set.
    pub fn aroles(&self, user: &str) -> Result<Vec<Value>> {
        if !self.parts.admin_users.contains(user) {
            return Err(Error::unknown("admin user", user));
        }
        let direct: BTreeSet<&str> = self
            .parts
            .aua
            .iter()
            .filter(|(u, _)| u.as_str() == user)
            .map(|(_, r)| r.as_str())
            .collect();
        let out: Vec<Value> = if self.parts.flags.aroles_closure {
            let arh = self.parts.admin_roles.closure();
            self.parts
                .admin_roles
                .nodes()
                .iter()
                .filter(|r| direct.iter().any(|d| arh.contains(r.as_str(), d)))
                .map(|r| Value::atom(r.as_str()))
                .collect()
        } else {
            direct.into_iter().map(Value::atom).collect()
        };
        Ok(out)
    }

    fn op_rules(&self, op: &str) -> Result<&OpRules> {
        self.parts.rules.get(op).ok_or_else(|| Error::unknown("operation", op))
    }

    fn require_user(&self, au: &str) -> Result<()> {
        if self.parts.admin_users.contains(au) {
            Ok(())
        } else {
            Err(Error::unknown("admin user", au))
        }
    }

    fn require_role(&self, r: &str) -> Result<()> {
        if self.parts.roles.contains(r) {
            Ok(())
        } else {
            Err(Error::unknown("role", r))
        }
    }

    /// `is_authorizedR_op(au, r1, r2)`.
    pub fn authorize(&self, op: &str, au: &str, r1: &str, r2: &str) -> Result<Decision> {
        let rules = self.op_rules(op)?;
        self.require_user(au)?;
        self.require_role(r1)?;
        self.require_role(r2)?;
        rule_engine::evaluate(
            &rules.single,
            self,
            &[
                ("au", Value::atom(au)),
                ("r1", Value::atom(r1)),
                ("r2", Value::atom(r2)),
            ],
        )
    }

    /// `is_authorizedR_op(au, χ, r)`: all-or-nothing over the selected roles.
    pub fn authorize_set(&self, op: &str, au: &str, builder: &SetBuilder, r: &str) -> Result<Decision> {
        let rules = self.op_rules(op)?;
        self.require_user(au)?;
        self.require_role(r)?;
        let chi = rule_engine::select_roles(builder, self)?;
        match &rules.set {
            Some(set) => rule_engine::evaluate_set_form(set, "r", self, au, &chi, r),
            None => rule_engine::evaluate_set_form(&rules.single, "r2", self, au, &chi, r),
        }
    }

    /// Replaces RH, re-resolving hierarchy-derived attribute scopes.
    pub fn with_roles(&self, roles: RoleGraph) -> Result<ArraInstance> {
        let mut parts = self.parts.clone();
        parts.roles = roles;
        ArraInstance::new(parts)
    }

    /// Authorizes `op` and, when allowed, performs its edge mutation.
    pub fn apply(&self, op: &str, au: &str, r1: &str, r2: &str) -> Result<(Decision, Option<ArraInstance>)> {
        let effect = effect_of(op).ok_or_else(|| Error::unknown("operation with a known effect", op))?;
        let decision = self.authorize(op, au, r1, r2)?;
        if !decision.allowed {
            return Ok((decision, None));
        }
        let roles = match effect {
            EdgeEffect::Insert => self.parts.roles.insert_edge(r1, r2)?,
            EdgeEffect::Delete => self.parts.roles.delete_edge(r1, r2)?,
        };
        let next = self.with_roles(roles)?;
        Ok((decision, Some(next)))
    }
}

pub(crate) fn target_kind(t: Target) -> &'static str {
    match t {
        Target::AdminUser => "admin user",
        Target::AdminRole => "admin role",
        Target::Role => "role",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::{load_str, Instance};
    use crate::rule_engine::parse_set_builder;

    /// `a < b < c`; `lead` may attach any role to `c`, `chief` sits above `lead`.
    fn small(closure: bool) -> ArraInstance {
        let text = format!(
            r#"{{
                "model": "arra",
                "roles": ["a", "b", "c"],
                "rh": [["a", "b"], ["b", "c"]],
                "admin_users": ["ann", "bob"],
                "admin_roles": ["lead", "chief"],
                "arh": [["lead", "chief"]],
                "aua": [["ann", "chief"], ["bob", "lead"]],
                "rules": [
                    {{"op": "insertEdge", "form": "(and (in \"lead\" (aroles au)) (eq r2 \"c\"))"}},
                    {{"op": "deleteEdge", "form": "(in \"lead\" (aroles au))"}}
                ],
                "flags": {{"aroles_closure": {closure}}}
            }}"#
        );
        match load_str(&text).unwrap() {
            Instance::Arra(i) => i,
            _ => unreachable!(),
        }
    }

    #[test]
    fn aroles_closure_widens_to_juniors() {
        assert_eq!(small(false).aroles("ann").unwrap(), vec![Value::atom("chief")]);
        assert_eq!(
            small(true).aroles("ann").unwrap(),
            vec![Value::atom("chief"), Value::atom("lead")]
        );
        assert_eq!(small(true).aroles("bob").unwrap(), vec![Value::atom("lead")]);
        assert!(small(true).aroles("nobody").is_err());
    }

    #[test]
    fn authorize_checks_entities_first() {
        let i = small(true);
        assert!(i.authorize("insertEdge", "bob", "a", "c").unwrap().allowed);
        assert!(!i.authorize("insertEdge", "bob", "a", "b").unwrap().allowed);
        assert!(!small(false).authorize("insertEdge", "ann", "a", "c").unwrap().allowed);
        assert!(matches!(
            i.authorize("renameRole", "bob", "a", "c"),
            Err(Error::UnknownEntity { .. })
        ));
        assert!(matches!(
            i.authorize("insertEdge", "eve", "a", "c"),
            Err(Error::UnknownEntity { .. })
        ));
        assert!(matches!(
            i.authorize("insertEdge", "bob", "a", "z"),
            Err(Error::UnknownEntity { .. })
        ));
    }

    #[test]
    fn set_form_falls_back_to_the_single_rule() {
        let i = small(true);
        let both = parse_set_builder("(select x (junior x \"c\"))", i.attributes()).unwrap();
        let d = i.authorize_set("insertEdge", "bob", &both, "c").unwrap();
        assert!(d.allowed);
        assert_eq!(d.trace.len(), 2);
        let none = parse_set_builder("(select x false)", i.attributes()).unwrap();
        assert!(!i.authorize_set("insertEdge", "bob", &none, "c").unwrap().allowed);
        assert!(!i.authorize_set("insertEdge", "bob", &both, "b").unwrap().allowed);
    }

    #[test]
    fn apply_mutates_only_when_allowed() {
        let i = small(true);
        let (d, next) = i.apply("deleteEdge", "bob", "b", "c").unwrap();
        assert!(d.allowed);
        let next = next.unwrap();
        assert!(!next.roles().has_edge("b", "c"));
        let (_, back) = next.apply("insertEdge", "bob", "b", "c").unwrap();
        assert_eq!(back.unwrap(), i);
        let (d, next) = small(false).apply("deleteEdge", "ann", "b", "c").unwrap();
        assert!(!d.allowed && next.is_none());
        assert!(i.apply("insertEdge", "bob", "c", "c").is_err());
    }

    #[test]
    fn effects_follow_operation_names() {
        assert_eq!(effect_of("insertEdge"), Some(EdgeEffect::Insert));
        assert_eq!(effect_of("revoke"), Some(EdgeEffect::Delete));
        assert_eq!(effect_of("frobnicate"), None);
    }
}
