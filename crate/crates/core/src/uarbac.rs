//! Reference semantics for UARBAC's role-role administration.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::decision::{Decision, TraceStep, Witness};
use crate::error::{Error, Result};
use crate::hierarchy::RoleGraph;
use crate::ids::UserId;
use crate::value::Value;

pub const ROLE_CLASS: &str = "role";
pub const GRANT: &str = "grant";
pub const EMPOWER: &str = "empower";
pub const ADMIN: &str = "admin";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Permission {
    /// `[class, object, mode]`.
    Object {
        class: String,
        object: String,
        mode: String,
    },
    /// `[class, mode]`: the mode over every object of the class.
    Class { class: String, mode: String },
}

impl Permission {
    pub fn object(class: impl Into<String>, object: impl Into<String>, mode: impl Into<String>) -> Self {
        Permission::Object {
            class: class.into(),
            object: object.into(),
            mode: mode.into(),
        }
    }

    pub fn class(class: impl Into<String>, mode: impl Into<String>) -> Self {
        Permission::Class {
            class: class.into(),
            mode: mode.into(),
        }
    }

    pub fn class_name(&self) -> &str {
        match self {
            Permission::Object { class, .. } | Permission::Class { class, .. } => class,
        }
    }

    pub fn mode(&self) -> &str {
        match self {
            Permission::Object { mode, .. } | Permission::Class { mode, .. } => mode,
        }
    }
}

impl fmt::Display for Permission {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Permission::Object { class, object, mode } => write!(f, "[{class}, {object}, {mode}]"),
            Permission::Class { class, mode } => write!(f, "[{class}, {mode}]"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UarbacParts {
    pub users: BTreeSet<UserId>,
    pub roles: RoleGraph,
    /// AM(c) for every class c; the key set is C.
    pub access_modes: BTreeMap<String, BTreeSet<String>>,
    pub authorized_perms: BTreeMap<UserId, BTreeSet<Permission>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UarbacInstance {
    parts: UarbacParts,
}

impl UarbacInstance {
    pub fn new(parts: UarbacParts) -> Result<Self> {
        if !parts.access_modes.contains_key(ROLE_CLASS) {
            return Err(Error::Schema("class `role` is not declared".into()));
        }
        for (u, perms) in &parts.authorized_perms {
            if !parts.users.contains(u) {
                return Err(Error::unknown("user", u.as_str()));
            }
            for p in perms {
                let modes = parts
                    .access_modes
                    .get(p.class_name())
                    .ok_or_else(|| Error::unknown("class", p.class_name()))?;
                if !modes.contains(p.mode()) {
                    return Err(Error::Schema(format!(
                        "permission {p}: `{}` is not an access mode of class `{}`",
                        p.mode(),
                        p.class_name()
                    )));
                }
                if let Permission::Object { class, object, .. } = p {
                    if class == ROLE_CLASS && !parts.roles.contains(object) {
                        return Err(Error::unknown("role", object.as_str()));
                    }
                }
            }
        }
        Ok(UarbacInstance { parts })
    }

    pub fn parts(&self) -> &UarbacParts {
        &self.parts
    }

    pub fn users(&self) -> &BTreeSet<UserId> {
        &self.parts.users
    }

    pub fn roles(&self) -> &RoleGraph {
        &self.parts.roles
    }

    /// The user's permissions (empty when none are listed).
    pub fn perms(&self, user: &str) -> Result<impl Iterator<Item = &Permission>> {
        if !self.parts.users.contains(user) {
            return Err(Error::unknown("user", user));
        }
        Ok(self.parts.authorized_perms.get(user).into_iter().flatten())
    }

    /// Exact membership of `p` in `authorized_perms[user]`.
    pub fn has_perm(&self, user: &str, p: &Permission) -> Result<bool> {
        let found = self.perms(user)?.any(|q| q == p);
        Ok(found)
    }

    fn require_role(&self, r: &str) -> Result<()> {
        if self.parts.roles.contains(r) {
            Ok(())
        } else {
            Err(Error::unknown("role", r))
        }
    }

    /// The first held permission among `candidates`.
    fn first_held(&self, user: &str, candidates: &[Permission]) -> Result<Option<Permission>> {
        for p in candidates {
            if self.has_perm(user, p)? {
                return Ok(Some(p.clone()));
            }
        }
        Ok(None)
    }

    /// `[role, r, mode]` or `[role, mode]`.
    fn side(&self, user: &str, r: &str, mode: &str) -> Result<Option<Permission>> {
        self.first_held(
            user,
            &[
                Permission::object(ROLE_CLASS, r, mode),
                Permission::class(ROLE_CLASS, mode),
            ],
        )
    }

    /// grantRoleToRole(r1, r2): grant on `r1` and empower on `r2`, each by
    /// object or class permission.
    pub fn can_grant_role_to_role(&self, user: &str, r1: &str, r2: &str) -> Result<Decision> {
        self.require_role(r1)?;
        self.require_role(r2)?;
        let grant = self.side(user, r1, GRANT)?;
        let empower = self.side(user, r2, EMPOWER)?;
        Ok(match (grant, empower) {
            (Some(g), Some(e)) => {
                let disjunct = match (&g, &e) {
                    (Permission::Object { .. }, Permission::Object { .. }) => 0,
                    (Permission::Object { .. }, Permission::Class { .. }) => 1,
                    (Permission::Class { .. }, Permission::Object { .. }) => 2,
                    (Permission::Class { .. }, Permission::Class { .. }) => 3,
                };
                Decision::allow(TraceStep {
                    disjunct,
                    subject: None,
                    witnesses: vec![perm_fact(&g), perm_fact(&e)],
                })
            }
            _ => Decision::deny(),
        })
    }

    /// revokeRoleFromRole(r1, r2) for the direct edge `r1 < r2`.
    pub fn can_revoke_role_from_role(&self, user: &str, r1: &str, r2: &str) -> Result<Decision> {
        self.require_role(r1)?;
        self.require_role(r2)?;
        if !self.parts.users.contains(user) {
            return Err(Error::unknown("user", user));
        }
        if !self.parts.roles.has_edge(r1, r2) {
            return Err(Error::EdgeNotFound {
                junior: r1.into(),
                senior: r2.into(),
            });
        }
        let g = Permission::object(ROLE_CLASS, r1, GRANT);
        let e = Permission::object(ROLE_CLASS, r2, EMPOWER);
        if self.has_perm(user, &g)? && self.has_perm(user, &e)? {
            return Ok(allow(0, &[g, e]));
        }
        let options = [
            Permission::object(ROLE_CLASS, r1, ADMIN),
            Permission::object(ROLE_CLASS, r2, ADMIN),
            Permission::class(ROLE_CLASS, ADMIN),
        ];
        for (i, p) in options.iter().enumerate() {
            if self.has_perm(user, p)? {
                return Ok(allow(i + 1, std::slice::from_ref(p)));
            }
        }
        Ok(Decision::deny())
    }
}

fn perm_fact(p: &Permission) -> Witness {
    Witness::fact("permission", Value::atom(p.to_string()))
}

fn allow(disjunct: usize, perms: &[Permission]) -> Decision {
    Decision::allow(TraceStep {
        disjunct,
        subject: None,
        witnesses: perms.iter().map(perm_fact).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::RoleId;

    fn instance() -> UarbacInstance {
        let rid = |s: &str| RoleId::from(s);
        let roles = RoleGraph::new(["r1", "r2", "r3"], [(rid("r2"), rid("r3"))]).unwrap();
        let o = |r: &str, m: &str| Permission::object(ROLE_CLASS, r, m);
        let c = |m: &str| Permission::class(ROLE_CLASS, m);
        let perms = [
            (
                "u1",
                vec![o("r1", GRANT), o("r2", EMPOWER), o("r2", ADMIN), o("r3", ADMIN)],
            ),
            (
                "u2",
                vec![o("r1", ADMIN), o("r1", EMPOWER), o("r2", EMPOWER), o("r3", GRANT)],
            ),
            ("u3", vec![c(ADMIN)]),
            ("u4", vec![c(GRANT), c(EMPOWER), c(ADMIN)]),
        ];
        UarbacInstance::new(UarbacParts {
            users: perms.iter().map(|(u, _)| UserId::from(*u)).collect(),
            roles,
            access_modes: [(ROLE_CLASS.to_string(), [GRANT, EMPOWER, ADMIN].map(String::from).into())].into(),
            authorized_perms: perms
                .into_iter()
                .map(|(u, ps)| (UserId::from(u), ps.into_iter().collect()))
                .collect(),
        })
        .unwrap()
    }

    #[test]
    fn perms_and_grants() {
        let i = instance();
        assert!(i.has_perm("u1", &Permission::object(ROLE_CLASS, "r1", GRANT)).unwrap());
        assert!(i.has_perm("u3", &Permission::class(ROLE_CLASS, ADMIN)).unwrap());
        assert!(!i.has_perm("u3", &Permission::object(ROLE_CLASS, "r1", GRANT)).unwrap());
        assert!(i.can_grant_role_to_role("u1", "r1", "r2").unwrap().allowed);
        assert!(i.can_grant_role_to_role("u4", "r3", "r1").unwrap().allowed);
        assert!(!i.can_grant_role_to_role("u3", "r1", "r2").unwrap().allowed);
    }

    #[test]
    fn revocations() {
        let i = instance();
        assert!(i.can_revoke_role_from_role("u1", "r2", "r3").unwrap().allowed);
        assert!(i.can_revoke_role_from_role("u3", "r2", "r3").unwrap().allowed);
        assert!(!i.can_revoke_role_from_role("u2", "r2", "r3").unwrap().allowed);
        assert!(matches!(
            i.can_revoke_role_from_role("u3", "r1", "r3"),
            Err(Error::EdgeNotFound { .. })
        ));
    }
}
