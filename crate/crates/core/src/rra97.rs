//! Reference semantics for RRA97 role-role administration over can-modify.

use std::collections::BTreeSet;

use crate::arra::DeleteSemantics;
use crate::decision::{Decision, TraceStep, Witness};
use crate::error::{Error, Result};
use crate::hierarchy::{Reachability, RoleGraph};
use crate::ids::{RoleId, UserId};
use crate::value::Value;

/// An authority range `(x, y)`, stored as its two endpoints.
pub type Range = (RoleId, RoleId);

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Rra97Parts {
    pub users: BTreeSet<UserId>,
    pub roles: RoleGraph,
    pub admin_roles: RoleGraph,
    pub aua: BTreeSet<(UserId, RoleId)>,
    pub can_modify: BTreeSet<(RoleId, Range)>,
    pub delete_semantics: DeleteSemantics,
}

/// A validated RRA97 instance: every can-modify range is proper and encapsulated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rra97Instance {
    parts: Rra97Parts,
}

/// Encapsulation of `(x, y)`: for every `p` strictly inside and every `q`
/// outside the interior (the endpoints included), `q > p ↔ q ≥ y` and
/// `q < p ↔ q ≤ x`.
pub fn is_encapsulated(g: &RoleGraph, x: &str, y: &str) -> Result<bool> {
    let interior = g.open_range(x, y)?;
    Ok(encapsulated_under(g.closure(), &interior, x, y))
}

/// Encapsulation checked against an arbitrary reachability relation, with
/// the interior given explicitly.
fn encapsulated_under(rel: &Reachability, interior: &BTreeSet<RoleId>, x: &str, y: &str) -> bool {
    let (Some(ix), Some(iy)) = (rel.index_of(x), rel.index_of(y)) else {
        return false;
    };
    let inside: Vec<usize> = interior.iter().filter_map(|r| rel.index_of(r.as_str())).collect();
    for q in 0..rel.len() {
        if inside.contains(&q) {
            continue;
        }
        for &p in &inside {
            let above = rel.reaches_idx(p, q) == rel.reflexive_idx(iy, q);
            let below = rel.reaches_idx(q, p) == rel.reflexive_idx(q, ix);
            if !(above && below) {
                return false;
            }
        }
    }
    true
}

fn range_value(r: &Range) -> Value {
    Value::pair(r.0.as_str(), r.1.as_str())
}

impl Rra97Instance {
    pub fn new(parts: Rra97Parts) -> Result<Self> {
        for (u, ar) in &parts.aua {
            if !parts.users.contains(u) {
                return Err(Error::unknown("user", u.as_str()));
            }
            if !parts.admin_roles.contains(ar.as_str()) {
                return Err(Error::unknown("admin role", ar.as_str()));
            }
        }
        for (ar, (x, y)) in &parts.can_modify {
            if !parts.admin_roles.contains(ar.as_str()) {
                return Err(Error::unknown("admin role", ar.as_str()));
            }
            if !parts.roles.is_junior(x.as_str(), y.as_str())? {
                return Err(Error::Schema(format!(
                    "range ({x}, {y}) of {ar}: {x} is not strictly junior to {y}"
                )));
            }
            if !is_encapsulated(&parts.roles, x.as_str(), y.as_str())? {
                return Err(Error::Schema(format!("range ({x}, {y}) of {ar} is not encapsulated")));
            }
        }
        Ok(Rra97Instance { parts })
    }

    pub fn parts(&self) -> &Rra97Parts {
        &self.parts
    }

    pub fn users(&self) -> &BTreeSet<UserId> {
        &self.parts.users
    }

    pub fn roles(&self) -> &RoleGraph {
        &self.parts.roles
    }

    pub fn can_modify(&self) -> &BTreeSet<(RoleId, Range)> {
        &self.parts.can_modify
    }

    /// Distinct authority ranges across all admin roles.
    pub fn ranges(&self) -> BTreeSet<&Range> {
        self.parts.can_modify.iter().map(|(_, r)| r).collect()
    }

    /// Ranges held through the user's direct admin-role assignments.
    pub fn owned_ranges(&self, user: &str) -> Result<BTreeSet<&Range>> {
        if !self.parts.users.contains(user) {
            return Err(Error::unknown("user", user));
        }
        let roles: BTreeSet<&RoleId> = self
            .parts
            .aua
            .iter()
            .filter(|(u, _)| u.as_str() == user)
            .map(|(_, r)| r)
            .collect();
        Ok(self
            .parts
            .can_modify
            .iter()
            .filter(|(ar, _)| roles.contains(ar))
            .map(|(_, r)| r)
            .collect())
    }

    pub fn is_encapsulated(&self, x: &str, y: &str) -> Result<bool> {
        is_encapsulated(&self.parts.roles, x, y)
    }

    /// AR_immediate(r): the unique range whose interior contains `r` and
    /// strictly contains no other such interior.
    pub fn immediate_authority_range(&self, r: &str) -> Result<Option<Range>> {
        let g = &self.parts.roles;
        if !g.contains(r) {
            return Err(Error::unknown("role", r));
        }
        let mut enclosing = Vec::new();
        for range in self.ranges() {
            let interior = g.open_range(range.0.as_str(), range.1.as_str())?;
            if interior.contains(r) {
                enclosing.push((range, interior));
            }
        }
        let minimal: Vec<&Range> = enclosing
            .iter()
            .filter(|(_, outer)| {
                !enclosing
                    .iter()
                    .any(|(_, inner)| inner.len() < outer.len() && inner.is_subset(outer))
            })
            .map(|(r, _)| *r)
            .collect();
        match minimal.as_slice() {
            [] => Ok(None),
            [one] => Ok(Some((*one).clone())),
            many => Err(Error::AmbiguousRange {
                role: r.into(),
                ranges: many
                    .iter()
                    .map(|(x, y)| format!("({x}, {y})"))
                    .collect::<Vec<_>>()
                    .join(", "),
            }),
        }
    }

    fn require_role(&self, r: &str) -> Result<()> {
        if self.parts.roles.contains(r) {
            Ok(())
        } else {
            Err(Error::unknown("role", r))
        }
    }

    /// May `user` add the edge `a < b`?
    pub fn can_insert_edge(&self, user: &str, a: &str, b: &str) -> Result<Decision> {
        let g = &self.parts.roles;
        self.require_role(a)?;
        self.require_role(b)?;
        let owned = self.owned_ranges(user)?;
        if !g.incomparable(a, b)? {
            return Ok(Decision::deny());
        }
        let mut holder = None;
        for r in &owned {
            if g.in_open_range(a, r.0.as_str(), r.1.as_str())? && g.in_open_range(b, r.0.as_str(), r.1.as_str())? {
                holder = Some(*r);
                break;
            }
        }
        let Some(holder) = holder else {
            return Ok(Decision::deny());
        };
        let owned_fact = Witness::fact("owned range", range_value(holder));

        let (ia, ib) = (self.immediate_authority_range(a)?, self.immediate_authority_range(b)?);
        if let (Some(ra), Some(rb)) = (&ia, &ib) {
            if ra == rb {
                return Ok(Decision::allow(TraceStep {
                    disjunct: 0,
                    subject: None,
                    witnesses: vec![owned_fact, Witness::fact("AR_immediate", range_value(ra))],
                }));
            }
        }

        let hypothetical = g.closure_with(a, b);
        for range in self.ranges() {
            let (x, y) = (range.0.as_str(), range.1.as_str());
            let endpoint = (a == y && g.is_senior(b, x)?) || (b == x && g.is_junior(a, y)?);
            if endpoint && encapsulated_under(&hypothetical, &g.open_range(x, y)?, x, y) {
                return Ok(Decision::allow(TraceStep {
                    disjunct: 1,
                    subject: None,
                    witnesses: vec![owned_fact, Witness::fact("preserved range", range_value(range))],
                }));
            }
        }
        Ok(Decision::deny())
    }

    /// May `user` remove the direct edge `junior < senior`?
    pub fn can_delete_edge(&self, user: &str, junior: &str, senior: &str) -> Result<Decision> {
        let g = &self.parts.roles;
        self.require_role(junior)?;
        self.require_role(senior)?;
        let owned = self.owned_ranges(user)?;
        if !g.has_edge(junior, senior) {
            return Err(Error::EdgeNotFound {
                junior: junior.into(),
                senior: senior.into(),
            });
        }
        match self.parts.delete_semantics {
            DeleteSemantics::Main => {
                if self
                    .ranges()
                    .iter()
                    .any(|(p, q)| junior == p.as_str() || senior == q.as_str())
                {
                    return Ok(Decision::deny());
                }
                for r in owned {
                    let (x, y) = (r.0.as_str(), r.1.as_str());
                    if g.in_open_range(junior, x, y)? && g.in_open_range(senior, x, y)? {
                        return Ok(Decision::allow(TraceStep {
                            disjunct: 0,
                            subject: None,
                            witnesses: vec![Witness::fact("owned range", range_value(r))],
                        }));
                    }
                }
                Ok(Decision::deny())
            }
            DeleteSemantics::Appendix => {
                for r in owned {
                    let (x, y) = (r.0.as_str(), r.1.as_str());
                    let closed = |v: &str| -> Result<bool> { Ok(v == x || v == y || g.in_open_range(v, x, y)?) };
                    if closed(junior)? && closed(senior)? && junior != x && senior != y {
                        return Ok(Decision::allow(TraceStep {
                            disjunct: 0,
                            subject: None,
                            witnesses: vec![Witness::fact("owned range", range_value(r))],
                        }));
                    }
                }
                Ok(Decision::deny())
            }
        }
    }
}
