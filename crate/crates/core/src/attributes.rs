//! Attribute schemas and the attribute value store.
//!
//! Admin-user (AATT), admin-role (ARATT) and regular-role (RATT) attributes
//! live in separate namespaces keyed by [`Target`], so an admin-user `dept`
//! and a role `dept` may coexist.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hierarchy::RoleGraph;
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    AdminUser,
    AdminRole,
    Role,
}

impl Target {
    pub fn as_str(self) -> &'static str {
        match self {
            Target::AdminUser => "admin_user",
            Target::AdminRole => "admin_role",
            Target::Role => "role",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    Atomic,
    Set,
}

/// Where an attribute's scope comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScopeSpec {
    /// An explicit finite set of values.
    Values(BTreeSet<Value>),
    /// The current set of regular roles.
    Roles,
    /// The pairs of the transitive closure of RH (RH⁺), junior-first.
    HierarchyClosure,
}

/// Where an ordered attribute's scope hierarchy comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderSpec {
    /// Explicit pairs `(lower, higher)` over the scope.
    Pairs(BTreeSet<(Value, Value)>),
    /// The regular role hierarchy itself; only valid with [`ScopeSpec::Roles`].
    RoleHierarchy,
}

impl OrderSpec {
    pub fn none() -> Self {
        OrderSpec::Pairs(BTreeSet::new())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeSchema {
    pub name: String,
    pub target: Target,
    pub scope: ScopeSpec,
    pub value_kind: ValueKind,
    pub ordered: bool,
    pub scope_order: OrderSpec,
}

impl AttributeSchema {
    pub fn unordered(name: impl Into<String>, target: Target, scope: ScopeSpec, value_kind: ValueKind) -> Self {
        AttributeSchema {
            name: name.into(),
            target,
            scope,
            value_kind,
            ordered: false,
            scope_order: OrderSpec::none(),
        }
    }

    /// Whether scope elements are pairs.
    pub fn pair_valued(&self) -> bool {
        match &self.scope {
            ScopeSpec::HierarchyClosure => true,
            ScopeSpec::Roles => false,
            ScopeSpec::Values(vals) => vals.iter().next().is_some_and(|v| v.as_pair().is_some()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttrValue {
    Atomic(Value),
    Set(BTreeSet<Value>),
}

/// Reflexive-transitive closure of a scope hierarchy: `up[a]` holds every `b` with `a ≤ b`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct OrderClosure {
    up: BTreeMap<Value, BTreeSet<Value>>,
}

impl OrderClosure {
    fn build(attr: &str, scope: &BTreeSet<Value>, pairs: &BTreeSet<(Value, Value)>) -> Result<Self> {
        let mut adj: BTreeMap<&Value, Vec<&Value>> = BTreeMap::new();
        for (lo, hi) in pairs {
            for v in [lo, hi] {
                if !scope.contains(v) {
                    return Err(Error::Schema(format!(
                        "order of `{attr}` mentions `{v}` outside its scope"
                    )));
                }
            }
            adj.entry(lo).or_default().push(hi);
        }
        let mut up = BTreeMap::new();
        for start in scope {
            let mut seen = BTreeSet::new();
            let mut stack: Vec<&Value> = adj.get(start).cloned().unwrap_or_default();
            while let Some(v) = stack.pop() {
                if v == start {
                    return Err(Error::Schema(format!("order of `{attr}` is cyclic through `{start}`")));
                }
                if seen.insert(v.clone()) {
                    stack.extend(adj.get(v).into_iter().flatten().copied());
                }
            }
            seen.insert(start.clone());
            up.insert(start.clone(), seen);
        }
        Ok(OrderClosure { up })
    }

    fn leq(&self, a: &Value, b: &Value) -> bool {
        self.up.get(a).is_some_and(|s| s.contains(b))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Entry {
    schema: AttributeSchema,
    scope: BTreeSet<Value>,
    order: Option<OrderClosure>,
}

impl Entry {
    fn resolve(schema: AttributeSchema, rh: &RoleGraph) -> Result<Self> {
        let name = &schema.name;
        let scope: BTreeSet<Value> = match &schema.scope {
            ScopeSpec::Values(v) => {
                let pairs = v.iter().filter(|x| x.as_pair().is_some()).count();
                if pairs != 0 && pairs != v.len() {
                    return Err(Error::Schema(format!("scope of `{name}` mixes atoms and pairs")));
                }
                v.clone()
            }
            ScopeSpec::Roles => rh.nodes().iter().map(|r| Value::atom(r.as_str())).collect(),
            ScopeSpec::HierarchyClosure => rh
                .transitive_pairs()
                .into_iter()
                .map(|(a, b)| Value::pair(a.as_str(), b.as_str()))
                .collect(),
        };
        let order = match (&schema.scope_order, schema.ordered) {
            (OrderSpec::Pairs(p), false) if p.is_empty() => None,
            (OrderSpec::Pairs(_), false) | (OrderSpec::RoleHierarchy, false) => {
                return Err(Error::Schema(format!(
                    "unordered attribute `{name}` declares a scope order"
                )))
            }
            (OrderSpec::Pairs(p), true) => {
                if p.is_empty() {
                    return Err(Error::Schema(format!(
                        "ordered attribute `{name}` has an empty scope order"
                    )));
                }
                Some(OrderClosure::build(name, &scope, p)?)
            }
            (OrderSpec::RoleHierarchy, true) => {
                if schema.scope != ScopeSpec::Roles {
                    return Err(Error::Schema(format!(
                        "attribute `{name}` is ordered by RH but its scope is not the role set"
                    )));
                }
                let pairs = rh
                    .edges()
                    .iter()
                    .map(|(a, b)| (Value::atom(a.as_str()), Value::atom(b.as_str())))
                    .collect();
                Some(OrderClosure::build(name, &scope, &pairs)?)
            }
        };
        Ok(Entry { schema, scope, order })
    }
}

static EMPTY: BTreeSet<Value> = BTreeSet::new();

/// Registered schemas plus the entity → value assignments.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Attributes {
    entries: BTreeMap<(Target, String), Entry>,
    values: BTreeMap<(Target, String, String), AttrValue>,
}

impl Attributes {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a schema; relation and role scopes are resolved against `rh`.
    pub fn define(&mut self, schema: AttributeSchema, rh: &RoleGraph) -> Result<()> {
        let key = (schema.target, schema.name.clone());
        if self.entries.contains_key(&key) {
            return Err(Error::DuplicateAttribute(schema.name));
        }
        let entry = Entry::resolve(schema, rh)?;
        self.entries.insert(key, entry);
        Ok(())
    }

    /// Re-resolves every hierarchy-derived scope and order against `rh`, then
    /// re-checks every stored value.
    pub fn rebind(&mut self, rh: &RoleGraph) -> Result<()> {
        for entry in self.entries.values_mut() {
            *entry = Entry::resolve(entry.schema.clone(), rh)?;
        }
        for ((target, attr, _), value) in &self.values {
            let entry = &self.entries[&(*target, attr.clone())];
            check_value(entry, value)?;
        }
        Ok(())
    }

    pub fn schemas(&self) -> impl Iterator<Item = &AttributeSchema> {
        self.entries.values().map(|e| &e.schema)
    }

    pub fn schema(&self, target: Target, name: &str) -> Option<&AttributeSchema> {
        self.entries.get(&(target, name.to_owned())).map(|e| &e.schema)
    }

    /// All schemas with this name, across targets.
    pub fn by_name<'a>(&'a self, name: &str) -> impl Iterator<Item = &'a AttributeSchema> + 'a {
        let name = name.to_owned();
        self.entries.values().map(|e| &e.schema).filter(move |s| s.name == name)
    }

    fn entry(&self, target: Target, name: &str) -> Result<&Entry> {
        self.entries
            .get(&(target, name.to_owned()))
            .ok_or_else(|| Error::unknown("attribute", name))
    }

    /// The resolved scope of an attribute.
    pub fn scope(&self, target: Target, name: &str) -> Result<&BTreeSet<Value>> {
        Ok(&self.entry(target, name)?.scope)
    }

    pub fn set_value(&mut self, target: Target, attr: &str, entity: &str, value: AttrValue) -> Result<()> {
        let entry = self.entry(target, attr)?;
        check_value(entry, &value)?;
        self.values.insert((target, attr.to_owned(), entity.to_owned()), value);
        Ok(())
    }

    pub fn remove_value(&mut self, target: Target, attr: &str, entity: &str) -> Option<AttrValue> {
        self.values.remove(&(target, attr.to_owned(), entity.to_owned()))
    }

    /// The explicitly stored assignments, in sorted order.
    pub fn assignments(&self) -> impl Iterator<Item = (Target, &str, &str, &AttrValue)> {
        self.values.iter().map(|((t, a, e), v)| (*t, a.as_str(), e.as_str(), v))
    }

    /// `att(entity)`. Unassigned set attributes read as ∅; unassigned atomic
    /// attributes are `MissingValue`.
    pub fn get_value(&self, target: Target, attr: &str, entity: &str) -> Result<AttrValue> {
        let entry = self.entry(target, attr)?;
        match self.values.get(&(target, attr.to_owned(), entity.to_owned())) {
            Some(v) => Ok(v.clone()),
            None => match entry.schema.value_kind {
                ValueKind::Set => Ok(AttrValue::Set(BTreeSet::new())),
                ValueKind::Atomic => Err(Error::MissingValue {
                    attr: attr.into(),
                    entity: entity.into(),
                }),
            },
        }
    }

    /// Borrowing read of a set-valued attribute (atomic values are rejected).
    pub fn value_set(&self, target: Target, attr: &str, entity: &str) -> Result<&BTreeSet<Value>> {
        let entry = self.entry(target, attr)?;
        if entry.schema.value_kind != ValueKind::Set {
            return Err(Error::Type(format!("attribute `{attr}` is atomic")));
        }
        match self.values.get(&(target, attr.to_owned(), entity.to_owned())) {
            Some(AttrValue::Set(s)) => Ok(s),
            Some(AttrValue::Atomic(_)) => unreachable!("checked on insert"),
            None => Ok(&EMPTY),
        }
    }

    /// Borrowing read of an atomic attribute.
    pub fn value_atomic(&self, target: Target, attr: &str, entity: &str) -> Result<&Value> {
        let entry = self.entry(target, attr)?;
        if entry.schema.value_kind != ValueKind::Atomic {
            return Err(Error::Type(format!("attribute `{attr}` is set-valued")));
        }
        match self.values.get(&(target, attr.to_owned(), entity.to_owned())) {
            Some(AttrValue::Atomic(v)) => Ok(v),
            Some(AttrValue::Set(_)) => unreachable!("checked on insert"),
            None => Err(Error::MissingValue {
                attr: attr.into(),
                entity: entity.into(),
            }),
        }
    }

    /// Set-valued dominance: `X ≥ Y` iff every `x ∈ X` dominates every `y ∈ Y`
    /// in the reflexive-transitive closure of the scope hierarchy.
    pub fn set_dominates<'a, X, Y>(&self, target: Target, attr: &str, xs: X, ys: Y) -> Result<bool>
    where
        X: IntoIterator<Item = &'a Value>,
        Y: IntoIterator<Item = &'a Value>,
    {
        let entry = self.entry(target, attr)?;
        let Some(order) = &entry.order else {
            return Err(Error::NotOrdered(attr.into()));
        };
        let in_scope = |v: &Value| -> Result<()> {
            if entry.scope.contains(v) {
                Ok(())
            } else {
                Err(Error::Scope {
                    attr: attr.into(),
                    value: v.to_string(),
                })
            }
        };
        let xs: Vec<&Value> = xs.into_iter().collect();
        let ys: Vec<&Value> = ys.into_iter().collect();
        for v in xs.iter().chain(ys.iter()) {
            in_scope(v)?;
        }
        Ok(xs.iter().all(|x| ys.iter().all(|y| order.leq(y, x))))
    }
}

fn check_value(entry: &Entry, value: &AttrValue) -> Result<()> {
    let attr = &entry.schema.name;
    let check = |v: &Value| {
        if entry.scope.contains(v) {
            Ok(())
        } else {
            Err(Error::Scope {
                attr: attr.clone(),
                value: v.to_string(),
            })
        }
    };
    match (entry.schema.value_kind, value) {
        (ValueKind::Atomic, AttrValue::Atomic(v)) => check(v),
        (ValueKind::Set, AttrValue::Set(vs)) => vs.iter().try_for_each(check),
        (ValueKind::Atomic, AttrValue::Set(_)) => {
            Err(Error::Type(format!("attribute `{attr}` is atomic but was given a set")))
        }
        (ValueKind::Set, AttrValue::Atomic(_)) => Err(Error::Type(format!(
            "attribute `{attr}` is set-valued but was given a single value"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::tests::example_rh;

    fn tokens(xs: &[&str]) -> BTreeSet<Value> {
        xs.iter().map(|x| Value::atom(*x)).collect()
    }

    fn auth_range() -> AttributeSchema {
        AttributeSchema::unordered(
            "authRange",
            Target::AdminRole,
            ScopeSpec::HierarchyClosure,
            ValueKind::Set,
        )
    }

    #[test]
    fn auth_range_values() {
        let rh = example_rh();
        let mut attrs = Attributes::new();
        attrs.define(auth_range(), &rh).unwrap();
        let ranges: BTreeSet<Value> = [Value::pair("E1", "PL1"), Value::pair("E2", "PL2")].into();
        attrs
            .set_value(Target::AdminRole, "authRange", "PSO1", AttrValue::Set(ranges.clone()))
            .unwrap();
        assert_eq!(
            attrs.get_value(Target::AdminRole, "authRange", "PSO1").unwrap(),
            AttrValue::Set(ranges)
        );
        // (PE1, QE1) is not in RH⁺
        let bad = AttrValue::Set([Value::pair("PE1", "QE1")].into());
        assert!(matches!(
            attrs.set_value(Target::AdminRole, "authRange", "DSO", bad),
            Err(Error::Scope { .. })
        ));
        assert_eq!(
            attrs.get_value(Target::AdminRole, "authRange", "DSO").unwrap(),
            AttrValue::Set(BTreeSet::new())
        );
        assert!(matches!(
            attrs.define(auth_range(), &rh),
            Err(Error::DuplicateAttribute(_))
        ));
    }

    #[test]
    fn hierarchy_ordered_role_scope() {
        let rh = example_rh();
        let mut attrs = Attributes::new();
        let grant = AttributeSchema {
            name: "grantAuth".into(),
            target: Target::AdminUser,
            scope: ScopeSpec::Roles,
            value_kind: ValueKind::Set,
            ordered: true,
            scope_order: OrderSpec::RoleHierarchy,
        };
        attrs.define(grant, &rh).unwrap();
        assert_eq!(
            attrs.get_value(Target::AdminUser, "grantAuth", "u3").unwrap(),
            AttrValue::Set(BTreeSet::new())
        );
        let dir = [Value::atom("DIR")];
        let low = [Value::atom("ED"), Value::atom("PE1")];
        assert!(attrs.set_dominates(Target::AdminUser, "grantAuth", &dir, &low).unwrap());
        assert!(!attrs.set_dominates(Target::AdminUser, "grantAuth", &low, &dir).unwrap());
    }

    #[test]
    fn schema_errors() {
        let rh = example_rh();
        let mut attrs = Attributes::new();
        let mut s = AttributeSchema::unordered(
            "lvl",
            Target::Role,
            ScopeSpec::Values(tokens(&["a", "b"])),
            ValueKind::Atomic,
        );
        s.ordered = true;
        assert!(matches!(attrs.define(s.clone(), &rh), Err(Error::Schema(_))));
        s.scope_order = OrderSpec::Pairs(
            [
                (Value::atom("a"), Value::atom("b")),
                (Value::atom("b"), Value::atom("a")),
            ]
            .into(),
        );
        assert!(matches!(attrs.define(s.clone(), &rh), Err(Error::Schema(_))));
        s.ordered = false;
        assert!(matches!(attrs.define(s, &rh), Err(Error::Schema(_))));
    }

    #[test]
    fn dominance_cases() {
        let rh = example_rh();
        let mut attrs = Attributes::new();
        let mut s = AttributeSchema::unordered(
            "clearance",
            Target::AdminUser,
            ScopeSpec::Values(tokens(&["a", "b", "c", "d"])),
            ValueKind::Set,
        );
        s.ordered = true;
        // c, d below both a and b
        s.scope_order = OrderSpec::Pairs(
            [("c", "a"), ("c", "b"), ("d", "a"), ("d", "b")]
                .iter()
                .map(|(x, y)| (Value::atom(*x), Value::atom(*y)))
                .collect(),
        );
        attrs.define(s, &rh).unwrap();
        let ab = tokens(&["a", "b"]);
        let cd = tokens(&["c", "d"]);
        assert!(attrs.set_dominates(Target::AdminUser, "clearance", &ab, &cd).unwrap());
        assert!(!attrs.set_dominates(Target::AdminUser, "clearance", &cd, &ab).unwrap());
        assert!(attrs
            .set_dominates(Target::AdminUser, "clearance", &ab, &BTreeSet::new())
            .unwrap());
        let z = tokens(&["z"]);
        assert!(matches!(
            attrs.set_dominates(Target::AdminUser, "clearance", &z, &cd),
            Err(Error::Scope { .. })
        ));

        let dept = AttributeSchema::unordered(
            "dept",
            Target::Role,
            ScopeSpec::Values(tokens(&["IT"])),
            ValueKind::Atomic,
        );
        attrs.define(dept, &rh).unwrap();
        assert!(matches!(
            attrs.set_dominates(Target::Role, "dept", &ab, &cd),
            Err(Error::NotOrdered(_))
        ));
    }

    #[test]
    fn atomic_missing_and_namespaces() {
        let rh = example_rh();
        let mut attrs = Attributes::new();
        let scope = ScopeSpec::Values(tokens(&["Operations", "Account", "IT"]));
        attrs
            .define(
                AttributeSchema::unordered("dept", Target::AdminUser, scope.clone(), ValueKind::Set),
                &rh,
            )
            .unwrap();
        attrs
            .define(
                AttributeSchema::unordered("dept", Target::Role, scope, ValueKind::Atomic),
                &rh,
            )
            .unwrap();
        attrs
            .set_value(
                Target::Role,
                "dept",
                "IT Director",
                AttrValue::Atomic(Value::atom("IT")),
            )
            .unwrap();
        assert_eq!(
            attrs.get_value(Target::Role, "dept", "IT Director").unwrap(),
            AttrValue::Atomic(Value::atom("IT"))
        );
        assert!(matches!(
            attrs.get_value(Target::Role, "dept", "Finance Mgr."),
            Err(Error::MissingValue { .. })
        ));
        assert!(matches!(
            attrs.set_value(Target::Role, "dept", "X", AttrValue::Set(tokens(&["IT"]))),
            Err(Error::Type(_))
        ));
        assert!(matches!(
            attrs.get_value(Target::Role, "nope", "X"),
            Err(Error::UnknownEntity { .. })
        ));
    }

    #[test]
    fn rebind_rejects_values_leaving_scope() {
        let rh = example_rh();
        let mut attrs = Attributes::new();
        attrs.define(auth_range(), &rh).unwrap();
        attrs
            .set_value(
                Target::AdminRole,
                "authRange",
                "DSO",
                AttrValue::Set([Value::pair("ED", "E1")].into()),
            )
            .unwrap();
        let cut = rh.delete_edge("ED", "E1").unwrap();
        assert!(matches!(attrs.rebind(&cut), Err(Error::Scope { .. })));
    }
}
