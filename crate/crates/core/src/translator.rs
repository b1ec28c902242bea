//! Compilation of RRA97 and UARBAC instances into ARRA, and the
//! differential check that compares a reference model with its translation.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::arra::{ArraInstance, ArraParts, DeleteSemantics, Flags, RuleSet};
use crate::attributes::{AttrValue, AttributeSchema, Attributes, OrderSpec, ScopeSpec, Target, ValueKind};
use crate::decision::Decision;
use crate::error::{Error, Result};
use crate::hierarchy::RoleGraph;
use crate::ids::{RoleId, UserId};
use crate::rra97::Rra97Instance;
use crate::rule_engine::{parse_rule, RuleAst, RuleContext};
use crate::uarbac::{Permission, UarbacInstance, ROLE_CLASS};
use crate::value::Value;

/// insertEdge: both roles inside one owned range, incomparable, and either
/// sharing their immediate authority range or preserving the encapsulation
/// of a range they touch.
pub const INSERT_EDGE_RULE: &str = r#"
(and
  (exists (u ar1) aua
    (and (eq u au)
      (exists (s t) (attr authRange ar1)
        (and (in-range r1 s t) (in-range r2 s t)))))
  (incomparable r1 r2)
  (or
    (exists ar2 ar
      (exists (m n) (attr authRange ar2)
        (and (in-range r1 m n) (in-range r2 m n)
          (forall ar3 ar
            (forall (mm nn) (attr authRange ar3)
              (implies
                (and (forall z (range mm nn) (in-range z m n))
                     (exists z (range m n) (not (in-range z mm nn))))
                (and (not (in-range r1 mm nn)) (not (in-range r2 mm nn)))))))))
    (exists ar3 ar
      (exists (x y) (attr authRange ar3)
        (and
          (or (and (eq r1 y) (senior r2 x)) (and (eq r2 x) (junior r1 y)))
          (forall p (range x y)
            (forall q roles
              (implies (not (in-range q x y))
                (and
                  (iff (edge p q (rh*-with r1 r2)) (edge y q (rh*-with r1 r2)))
                  (iff (edge q p (rh*-with r1 r2)) (edge q x (rh*-with r1 r2))))))))))))
"#;

/// deleteEdge: a direct edge strictly inside an owned range whose endpoints
/// are not the bottom / top of any authority range.
pub const DELETE_EDGE_RULE: &str = r#"
(exists (u ar1) aua
  (and (eq u au)
    (exists (x y) (attr authRange ar1)
      (and (in-range r1 x y) (in-range r2 x y) (edge r1 r2 rh)
        (forall ar4 ar
          (forall (uu vv) (attr authRange ar4)
            (and (not (eq r1 uu)) (not (eq r2 vv)))))))))
"#;

/// deleteEdge, closed-range variant: endpoints may touch the owned range's
/// bounds, except the edge may not start at its bottom or end at its top.
pub const DELETE_EDGE_APPENDIX_RULE: &str = r#"
(exists ar (aroles au)
  (exists (x y) (attr authRange ar)
    (and
      (or (in-range r1 x y) (eq r1 x) (eq r1 y))
      (or (in-range r2 x y) (eq r2 x) (eq r2 y))
      (edge r1 r2 rh)
      (not (eq r1 x))
      (not (eq r2 y)))))
"#;

pub const ASSIGN_RULE: &str = r#"
(or
  (and (in r1 (attr grantAuth au)) (in r2 (attr empowerAuth au)))
  (and (in r1 (attr grantAuth au)) (in "empower" (attr roleClassAuth au)))
  (and (in "grant" (attr roleClassAuth au)) (in r2 (attr empowerAuth au)))
  (and (in "grant" (attr roleClassAuth au)) (in "empower" (attr roleClassAuth au))))
"#;

pub const REVOKE_RULE: &str = r#"
(and
  (edge r1 r2 rh)
  (or
    (and (in r1 (attr grantAuth au)) (in r2 (attr empowerAuth au)))
    (in r1 (attr adminAuth au))
    (in r2 (attr adminAuth au))
    (in "admin" (attr roleClassAuth au))))
"#;

fn rule(src: &str, attrs: &Attributes) -> Result<RuleAst> {
    parse_rule(src, &RuleContext::single_form(attrs))
}

/// Map an RRA97 instance: authRange over RH⁺ carries can-modify, and the
/// two edge rules are emitted once each.
pub fn map_rra97(src: &Rra97Instance) -> Result<ArraInstance> {
    let p = src.parts();
    let mut attributes = Attributes::new();
    attributes.define(
        AttributeSchema::unordered(
            "authRange",
            Target::AdminRole,
            ScopeSpec::HierarchyClosure,
            ValueKind::Set,
        ),
        &p.roles,
    )?;
    for ar in p.admin_roles.nodes() {
        let ranges: BTreeSet<Value> = p
            .can_modify
            .iter()
            .filter(|(holder, _)| holder == ar)
            .map(|(_, (x, y))| Value::pair(x.as_str(), y.as_str()))
            .collect();
        attributes.set_value(Target::AdminRole, "authRange", ar.as_str(), AttrValue::Set(ranges))?;
    }
    let delete = match p.delete_semantics {
        DeleteSemantics::Main => DELETE_EDGE_RULE,
        DeleteSemantics::Appendix => DELETE_EDGE_APPENDIX_RULE,
    };
    let mut rules = RuleSet::new();
    rules.insert("insertEdge", rule(INSERT_EDGE_RULE, &attributes)?, None);
    rules.insert("deleteEdge", rule(delete, &attributes)?, None);
    ArraInstance::new(ArraParts {
        admin_users: p.users.clone(),
        roles: p.roles.clone(),
        admin_roles: p.admin_roles.clone(),
        aua: p.aua.clone(),
        attributes,
        rules,
        flags: Flags {
            aroles_closure: false,
            delete_semantics: p.delete_semantics,
        },
    })
}

/// Map a UARBAC instance: object permissions on roles become the
/// role-valued grantAuth / empowerAuth / adminAuth, class permissions on
/// `role` become roleClassAuth.
pub fn map_uarbac(src: &UarbacInstance) -> Result<ArraInstance> {
    let p = src.parts();
    let ordered = |name: &str| AttributeSchema {
        name: name.into(),
        target: Target::AdminUser,
        scope: ScopeSpec::Roles,
        value_kind: ValueKind::Set,
        ordered: true,
        scope_order: OrderSpec::RoleHierarchy,
    };
    let modes: BTreeSet<Value> = p.access_modes[ROLE_CLASS].iter().map(Value::atom).collect();
    let mut attributes = Attributes::new();
    for name in ["grantAuth", "empowerAuth", "adminAuth"] {
        attributes.define(ordered(name), &p.roles)?;
    }
    attributes.define(
        AttributeSchema::unordered(
            "roleClassAuth",
            Target::AdminUser,
            ScopeSpec::Values(modes),
            ValueKind::Set,
        ),
        &p.roles,
    )?;
    for u in &p.users {
        let perms: Vec<&Permission> = src.perms(u.as_str())?.collect();
        let objects = |mode: &str| -> BTreeSet<Value> {
            perms
                .iter()
                .filter_map(|perm| match perm {
                    Permission::Object { class, object, mode: m } if class == ROLE_CLASS && m == mode => {
                        Some(Value::atom(object.as_str()))
                    }
                    _ => None,
                })
                .collect()
        };
        for (name, mode) in [
            ("grantAuth", "grant"),
            ("empowerAuth", "empower"),
            ("adminAuth", "admin"),
        ] {
            attributes.set_value(Target::AdminUser, name, u.as_str(), AttrValue::Set(objects(mode)))?;
        }
        let class_modes: BTreeSet<Value> = perms
            .iter()
            .filter_map(|perm| match perm {
                Permission::Class { class, mode } if class == ROLE_CLASS => Some(Value::atom(mode.as_str())),
                _ => None,
            })
            .collect();
        attributes.set_value(
            Target::AdminUser,
            "roleClassAuth",
            u.as_str(),
            AttrValue::Set(class_modes),
        )?;
    }
    let mut rules = RuleSet::new();
    rules.insert("assign", rule(ASSIGN_RULE, &attributes)?, None);
    rules.insert("revoke", rule(REVOKE_RULE, &attributes)?, None);
    ArraInstance::new(ArraParts {
        admin_users: p.users.clone(),
        roles: p.roles.clone(),
        admin_roles: RoleGraph::default(),
        aua: BTreeSet::new(),
        attributes,
        rules,
        flags: Flags::default(),
    })
}

/// A model whose decisions a translation must reproduce.
pub trait ReferenceModel {
    fn users(&self) -> Vec<UserId>;
    fn roles(&self) -> Vec<RoleId>;
    /// Operation names, matching the translated AOP.
    fn ops(&self) -> Vec<&'static str>;
    fn decide(&self, op: &str, user: &str, r1: &str, r2: &str) -> Result<Decision>;
}

impl ReferenceModel for Rra97Instance {
    fn users(&self) -> Vec<UserId> {
        Rra97Instance::users(self).iter().cloned().collect()
    }

    fn roles(&self) -> Vec<RoleId> {
        Rra97Instance::roles(self).nodes().iter().cloned().collect()
    }

    fn ops(&self) -> Vec<&'static str> {
        vec!["insertEdge", "deleteEdge"]
    }

    fn decide(&self, op: &str, user: &str, r1: &str, r2: &str) -> Result<Decision> {
        match op {
            "insertEdge" => self.can_insert_edge(user, r1, r2),
            "deleteEdge" => self.can_delete_edge(user, r1, r2),
            _ => Err(Error::unknown("operation", op)),
        }
    }
}

impl ReferenceModel for UarbacInstance {
    fn users(&self) -> Vec<UserId> {
        UarbacInstance::users(self).iter().cloned().collect()
    }

    fn roles(&self) -> Vec<RoleId> {
        UarbacInstance::roles(self).nodes().iter().cloned().collect()
    }

    fn ops(&self) -> Vec<&'static str> {
        vec!["assign", "revoke"]
    }

    fn decide(&self, op: &str, user: &str, r1: &str, r2: &str) -> Result<Decision> {
        match op {
            "assign" => self.can_grant_role_to_role(user, r1, r2),
            "revoke" => self.can_revoke_role_from_role(user, r1, r2),
            _ => Err(Error::unknown("operation", op)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Disagreement {
    pub op: String,
    pub user: String,
    pub r1: String,
    pub r2: String,
    pub reference: Decision,
    pub arra: Decision,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiffReport {
    pub decisions: usize,
    pub disagreements: Vec<Disagreement>,
}

impl DiffReport {
    pub fn is_clean(&self) -> bool {
        self.disagreements.is_empty()
    }
}

impl fmt::Display for DiffReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} decisions, {} disagreements",
            self.decisions,
            self.disagreements.len()
        )?;
        for d in &self.disagreements {
            let verdict = |d: &Decision| if d.allowed { "allow" } else { "deny" };
            write!(
                f,
                "\n  {} {} {} {}: reference {}, arra {}",
                d.op,
                d.user,
                d.r1,
                d.r2,
                verdict(&d.reference),
                verdict(&d.arra)
            )?;
        }
        Ok(())
    }
}

/// Compares every (user, op, ordered pair of distinct roles) decision.
/// A reference `EdgeNotFound` counts as a denial.
pub fn diff_decisions(reference: &dyn ReferenceModel, arra: &ArraInstance) -> Result<DiffReport> {
    let users = reference.users();
    let roles = reference.roles();
    if users.iter().collect::<BTreeSet<_>>() != arra.admin_users().iter().collect() {
        return Err(Error::Schema("user sets differ between the models".into()));
    }
    if roles.iter().collect::<BTreeSet<_>>() != arra.roles().nodes().iter().collect() {
        return Err(Error::Schema("role sets differ between the models".into()));
    }
    let ops = reference.ops();
    for op in &ops {
        if arra.rules().get(op).is_none() {
            return Err(Error::Schema(format!("operation `{op}` has no ARRA rule")));
        }
    }
    let mut report = DiffReport {
        decisions: 0,
        disagreements: Vec::new(),
    };
    for u in &users {
        for op in &ops {
            for r1 in &roles {
                for r2 in &roles {
                    if r1 == r2 {
                        continue;
                    }
                    let (u, r1, r2) = (u.as_str(), r1.as_str(), r2.as_str());
                    let left = match reference.decide(op, u, r1, r2) {
                        Err(Error::EdgeNotFound { .. }) => Decision::deny(),
                        other => other?,
                    };
                    let right = arra.authorize(op, u, r1, r2)?;
                    report.decisions += 1;
                    if left.allowed != right.allowed {
                        report.disagreements.push(Disagreement {
                            op: op.to_string(),
                            user: u.into(),
                            r1: r1.into(),
                            r2: r2.into(),
                            reference: left,
                            arra: right,
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Mutation check: removes the first element of the first non-empty
/// set-valued assignment.
pub fn drop_first_set_element(inst: &ArraInstance) -> Result<ArraInstance> {
    let mut parts = inst.parts().clone();
    let victim = parts.attributes.assignments().find_map(|(t, a, e, v)| match v {
        AttrValue::Set(s) => s.iter().next().map(|first| {
            let mut rest = s.clone();
            rest.remove(first);
            (t, a.to_string(), e.to_string(), rest)
        }),
        AttrValue::Atomic(_) => None,
    });
    let Some((t, a, e, rest)) = victim else {
        return Err(Error::Schema("no non-empty set value to drop".into()));
    };
    parts.attributes.set_value(t, &a, &e, AttrValue::Set(rest))?;
    ArraInstance::new(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::format::Instance;

    fn rra() -> Rra97Instance {
        match fixtures::rra97_example().unwrap() {
            Instance::Rra97(i) => i,
            _ => unreachable!(),
        }
    }

    fn uarbac() -> UarbacInstance {
        match fixtures::uarbac_example().unwrap() {
            Instance::Uarbac(i) => i,
            _ => unreachable!(),
        }
    }

    fn set(values: &[Value]) -> AttrValue {
        AttrValue::Set(values.iter().cloned().collect())
    }

    #[test]
    fn rra97_ranges_become_auth_range() {
        let a = map_rra97(&rra()).unwrap();
        let got = a
            .attributes()
            .get_value(Target::AdminRole, "authRange", "PSO1")
            .unwrap();
        assert_eq!(got, set(&[Value::pair("E1", "PL1"), Value::pair("E2", "PL2")]));
        let dso = a.attributes().get_value(Target::AdminRole, "authRange", "DSO").unwrap();
        assert_eq!(dso, set(&[Value::pair("ED", "DIR")]));
        assert_eq!(a.rules().ops().collect::<Vec<_>>(), ["deleteEdge", "insertEdge"]);
        assert_eq!(a.roles(), rra().roles());
    }

    #[test]
    fn delete_semantics_picks_the_rule() {
        let mut parts = rra().parts().clone();
        parts.delete_semantics = DeleteSemantics::Appendix;
        let a = map_rra97(&Rra97Instance::new(parts).unwrap()).unwrap();
        let want = rule(DELETE_EDGE_APPENDIX_RULE, a.attributes()).unwrap();
        assert_eq!(a.rules().get("deleteEdge").unwrap().single, want);
        assert_eq!(a.flags().delete_semantics, DeleteSemantics::Appendix);
    }

    #[test]
    fn uarbac_permissions_split_by_mode() {
        let a = map_uarbac(&uarbac()).unwrap();
        let get = |attr: &str, u: &str| a.attributes().get_value(Target::AdminUser, attr, u).unwrap();
        assert_eq!(get("grantAuth", "u1"), set(&[Value::atom("r1")]));
        assert_eq!(get("adminAuth", "u1"), set(&[Value::atom("r2"), Value::atom("r3")]));
        assert_eq!(get("roleClassAuth", "u3"), set(&[Value::atom("admin")]));
        assert_eq!(get("roleClassAuth", "u1"), set(&[]));
        assert!(a.attributes().schema(Target::AdminUser, "grantAuth").unwrap().ordered);
    }

    #[test]
    fn dropping_a_range_is_detected() {
        let src = rra();
        let broken = drop_first_set_element(&map_rra97(&src).unwrap()).unwrap();
        assert!(!diff_decisions(&src, &broken).unwrap().is_clean());
    }

    #[test]
    fn mismatched_user_sets_are_rejected() {
        let a = map_uarbac(&uarbac()).unwrap();
        assert!(diff_decisions(&rra(), &a).is_err());
    }
}
