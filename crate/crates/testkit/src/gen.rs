//! Random instances for every model.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use arra_core::arra::{ArraParts, Flags, RuleSet};
use arra_core::attributes::{AttrValue, AttributeSchema, Attributes, OrderSpec, ScopeSpec, Target, ValueKind};
use arra_core::uarbac::{Permission, ADMIN, EMPOWER, GRANT, ROLE_CLASS};
use arra_core::{
    ArraInstance, DeleteSemantics, RoleGraph, RoleId, Rra97Instance, Rra97Parts, UarbacInstance, UarbacParts, UserId,
    Value,
};

use crate::rules::RuleGen;

fn role_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("r{i:02}")).collect()
}

/// A DAG over `names` whose edges only go from lower to higher index.
pub fn dag_edges<R: Rng>(rng: &mut R, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((order[i], order[j]));
            }
        }
    }
    edges
}

pub fn dag<R: Rng>(rng: &mut R, n: usize, p: f64) -> RoleGraph {
    let names = role_names(n);
    let edges = dag_edges(rng, n, p)
        .into_iter()
        .map(|(a, b)| (RoleId::from(names[a].as_str()), RoleId::from(names[b].as_str())));
    RoleGraph::new(names.iter().map(String::as_str), edges).expect("index-ordered edges are acyclic")
}

/// Builds nested blocks: each block is a single role or a range `x < ... < y`
/// whose interior is a sequence of child blocks. Inter-block edges only join a
/// block's top to a later block's bottom, which keeps every range encapsulated.
struct Nest<'r, R: Rng> {
    rng: &'r mut R,
    names: Vec<String>,
    edges: Vec<(usize, usize)>,
    ranges: Vec<(usize, usize)>,
    budget: usize,
}

impl<R: Rng> Nest<'_, R> {
    fn fresh(&mut self) -> usize {
        self.budget -= 1;
        self.names.push(format!("r{:02}", self.names.len()));
        self.names.len() - 1
    }

    /// Returns the (bottom, top) nodes of the new block.
    fn block(&mut self, depth: usize) -> (usize, usize) {
        if self.budget >= 3 && depth < 3 && self.rng.gen_bool(0.5) {
            let x = self.fresh();
            let y = self.fresh();
            let kids = self.blocks(depth + 1, 3);
            if kids.is_empty() {
                self.edges.push((x, y));
            }
            for &(b, t) in &kids {
                self.edges.push((x, b));
                self.edges.push((t, y));
            }
            self.ranges.push((x, y));
            (x, y)
        } else {
            let r = self.fresh();
            (r, r)
        }
    }

    fn blocks(&mut self, depth: usize, max: usize) -> Vec<(usize, usize)> {
        let n = self.rng.gen_range(0..=max);
        let mut out: Vec<(usize, usize)> = Vec::new();
        for _ in 0..n {
            if self.budget == 0 {
                break;
            }
            out.push(self.block(depth));
        }
        for i in 0..out.len() {
            for j in i + 1..out.len() {
                if self.rng.gen_bool(0.25) {
                    self.edges.push((out[i].1, out[j].0));
                }
            }
        }
        out
    }
}

fn users(n: usize) -> Vec<UserId> {
    (1..=n).map(|i| UserId::from(format!("u{i}").as_str())).collect()
}

/// An RRA97 instance whose can-modify ranges are nested and encapsulated by
/// construction; at most `max_roles` roles.
pub fn rra97<R: Rng>(rng: &mut R, max_roles: usize) -> Rra97Instance {
    let (names, edges, ranges) = loop {
        let mut nest = Nest {
            rng: &mut *rng,
            names: Vec::new(),
            edges: Vec::new(),
            ranges: Vec::new(),
            budget: max_roles,
        };
        nest.blocks(0, 4);
        if nest.names.len() >= 2 {
            break (nest.names, nest.edges, nest.ranges);
        }
    };
    let id = |i: usize| RoleId::from(names[i].as_str());
    let edges: BTreeSet<(RoleId, RoleId)> = edges.into_iter().map(|(a, b)| (id(a), id(b))).collect();
    let roles = RoleGraph::new(names.iter().map(String::as_str), edges).expect("nested blocks are acyclic");

    let n_ar = rng.gen_range(1..=4);
    let ar_names: Vec<String> = (0..n_ar).map(|i| format!("ar{i}")).collect();
    let arh_edges = dag_edges(rng, n_ar, 0.4)
        .into_iter()
        .map(|(a, b)| (RoleId::from(ar_names[a].as_str()), RoleId::from(ar_names[b].as_str())));
    let admin_roles = RoleGraph::new(ar_names.iter().map(String::as_str), arh_edges).unwrap();

    let us = users(rng.gen_range(1..=4));
    let mut aua = BTreeSet::new();
    for u in &us {
        for ar in &ar_names {
            if rng.gen_bool(0.35) {
                aua.insert((u.clone(), RoleId::from(ar.as_str())));
            }
        }
    }
    let mut can_modify = BTreeSet::new();
    for &(x, y) in &ranges {
        if rng.gen_bool(0.8) {
            let ar = ar_names.choose(rng).unwrap();
            can_modify.insert((RoleId::from(ar.as_str()), (id(x), id(y))));
        }
    }
    let delete_semantics = if rng.gen_bool(0.5) {
        DeleteSemantics::Main
    } else {
        DeleteSemantics::Appendix
    };
    Rra97Instance::new(Rra97Parts {
        users: us.into_iter().collect(),
        roles,
        admin_roles,
        aua,
        can_modify,
        delete_semantics,
    })
    .expect("generated ranges are encapsulated")
}

/// A UARBAC instance with at most `max_roles` roles and random permissions.
pub fn uarbac<R: Rng>(rng: &mut R, max_roles: usize) -> UarbacInstance {
    let n = rng.gen_range(1..=max_roles);
    let roles = dag(rng, n, 0.35);
    let us = users(rng.gen_range(1..=4));
    let modes = [GRANT, EMPOWER, ADMIN];
    let mut candidates: Vec<Permission> = modes.iter().map(|m| Permission::class(ROLE_CLASS, *m)).collect();
    for r in roles.nodes() {
        for m in modes {
            candidates.push(Permission::object(ROLE_CLASS, r.as_str(), m));
        }
    }
    let mut authorized_perms = std::collections::BTreeMap::new();
    for u in &us {
        let p_obj = rng.gen_range(0.0..0.6);
        let p_cls = rng.gen_range(0.0..0.3);
        let perms: BTreeSet<Permission> = candidates
            .iter()
            .filter(|p| match p {
                Permission::Object { .. } => rng.gen_bool(p_obj),
                Permission::Class { .. } => rng.gen_bool(p_cls),
            })
            .cloned()
            .collect();
        if !perms.is_empty() || rng.gen_bool(0.5) {
            authorized_perms.insert(u.clone(), perms);
        }
    }
    UarbacInstance::new(UarbacParts {
        users: us.into_iter().collect(),
        roles,
        access_modes: [(ROLE_CLASS.to_string(), modes.map(String::from).into())].into(),
        authorized_perms,
    })
    .expect("generated permissions are valid")
}

pub const LEVELS: [&str; 3] = ["low", "mid", "high"];
pub const TAGS: [&str; 3] = ["t1", "t2", "t3"];

fn values(xs: &[&str]) -> BTreeSet<Value> {
    xs.iter().map(|x| Value::atom(*x)).collect()
}

fn level_order() -> OrderSpec {
    OrderSpec::Pairs(
        [
            (Value::atom("low"), Value::atom("mid")),
            (Value::atom("mid"), Value::atom("high")),
        ]
        .into(),
    )
}

/// The attribute schemas every random ARRA instance carries.
pub fn schemas() -> Vec<AttributeSchema> {
    vec![
        AttributeSchema {
            name: "clearance".into(),
            target: Target::AdminUser,
            scope: ScopeSpec::Values(values(&LEVELS)),
            value_kind: ValueKind::Atomic,
            ordered: true,
            scope_order: level_order(),
        },
        AttributeSchema::unordered(
            "skills",
            Target::AdminUser,
            ScopeSpec::Values(values(&TAGS)),
            ValueKind::Set,
        ),
        AttributeSchema {
            name: "grants".into(),
            target: Target::AdminUser,
            scope: ScopeSpec::Roles,
            value_kind: ValueKind::Set,
            ordered: true,
            scope_order: OrderSpec::RoleHierarchy,
        },
        AttributeSchema {
            name: "level".into(),
            target: Target::Role,
            scope: ScopeSpec::Values(values(&LEVELS)),
            value_kind: ValueKind::Atomic,
            ordered: true,
            scope_order: level_order(),
        },
        AttributeSchema::unordered("tags", Target::Role, ScopeSpec::Values(values(&TAGS)), ValueKind::Set),
        AttributeSchema::unordered("span", Target::AdminRole, ScopeSpec::HierarchyClosure, ValueKind::Set),
    ]
}

fn subset<R: Rng>(rng: &mut R, of: impl IntoIterator<Item = Value>, p: f64) -> AttrValue {
    AttrValue::Set(of.into_iter().filter(|_| rng.gen_bool(p)).collect())
}

/// A small ARRA instance with random hierarchy, assignments and attribute
/// values, and with `rules` random rules per operation (0 for none).
pub fn arra<R: Rng>(rng: &mut R, rules: usize) -> ArraInstance {
    let n = rng.gen_range(2..=6);
    let roles = dag(rng, n, 0.35);
    let n_ar = rng.gen_range(1..=3);
    let ar_names: Vec<String> = (0..n_ar).map(|i| format!("ar{i}")).collect();
    let arh = dag_edges(rng, n_ar, 0.4)
        .into_iter()
        .map(|(a, b)| (RoleId::from(ar_names[a].as_str()), RoleId::from(ar_names[b].as_str())));
    let admin_roles = RoleGraph::new(ar_names.iter().map(String::as_str), arh).unwrap();
    let us = users(rng.gen_range(1..=3));
    let mut aua = BTreeSet::new();
    for u in &us {
        for ar in &ar_names {
            if rng.gen_bool(0.4) {
                aua.insert((u.clone(), RoleId::from(ar.as_str())));
            }
        }
    }

    let mut attributes = Attributes::new();
    for s in schemas() {
        attributes.define(s, &roles).unwrap();
    }
    let level = |rng: &mut R| AttrValue::Atomic(Value::atom(*LEVELS.choose(rng).unwrap()));
    for u in &us {
        if rng.gen_bool(0.95) {
            let v = level(rng);
            attributes
                .set_value(Target::AdminUser, "clearance", u.as_str(), v)
                .unwrap();
        }
        let v = subset(rng, values(&TAGS), 0.5);
        attributes
            .set_value(Target::AdminUser, "skills", u.as_str(), v)
            .unwrap();
        let v = subset(rng, roles.nodes().iter().map(|r| Value::atom(r.as_str())), 0.4);
        attributes
            .set_value(Target::AdminUser, "grants", u.as_str(), v)
            .unwrap();
    }
    for r in roles.nodes() {
        if rng.gen_bool(0.95) {
            let v = level(rng);
            attributes.set_value(Target::Role, "level", r.as_str(), v).unwrap();
        }
        let v = subset(rng, values(&TAGS), 0.4);
        attributes.set_value(Target::Role, "tags", r.as_str(), v).unwrap();
    }
    let closure_pairs: Vec<Value> = roles
        .transitive_pairs()
        .into_iter()
        .map(|(a, b)| Value::pair(a.as_str(), b.as_str()))
        .collect();
    for ar in &ar_names {
        if rng.gen_bool(0.8) {
            let v = subset(rng, closure_pairs.iter().cloned(), 0.4);
            attributes.set_value(Target::AdminRole, "span", ar, v).unwrap();
        }
    }

    let mut parts = ArraParts {
        admin_users: us.into_iter().collect(),
        roles,
        admin_roles,
        aua,
        attributes,
        rules: RuleSet::new(),
        flags: Flags {
            aroles_closure: rng.gen_bool(0.5),
            ..Flags::default()
        },
    };
    if rules > 0 {
        let shell = ArraInstance::new(parts.clone()).expect("generated instance is valid");
        for op in ["insertEdge", "deleteEdge"].iter().take(rules) {
            let single = RuleGen::single_form(&shell).rule(rng, 4);
            let set = rng.gen_bool(0.5).then(|| RuleGen::set_form(&shell).rule(rng, 3));
            parts.rules.insert(*op, single, set);
        }
    }
    ArraInstance::new(parts).expect("generated instance is valid")
}
