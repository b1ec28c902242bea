//! The JSON instance file format shared by all three models.
//!
//! Loading validates everything and reports each problem with a JSON
//! pointer into the document; JSON syntax errors carry `line:column`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arra::{effect_of, ArraInstance, ArraParts, DeleteSemantics, EdgeEffect, Flags, RuleSet};
use crate::attributes::{AttrValue, AttributeSchema, Attributes, OrderSpec, ScopeSpec, Target, ValueKind};
use crate::decision::Decision;
use crate::error::{Diagnostic, Error, Result};
use crate::hierarchy::RoleGraph;
use crate::ids::{check_name, RoleId, UserId};
use crate::rra97::{is_encapsulated, Rra97Instance, Rra97Parts};
use crate::rule_engine::{parse_rule, RuleContext};
use crate::translator::ReferenceModel;
use crate::uarbac::{Permission, UarbacInstance, UarbacParts};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Arra,
    Rra97,
    Uarbac,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Arra => "arra",
            ModelKind::Rra97 => "rra97",
            ModelKind::Uarbac => "uarbac",
        }
    }
}

/// A loaded instance of any supported model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instance {
    Arra(ArraInstance),
    Rra97(Rra97Instance),
    Uarbac(UarbacInstance),
}

impl Instance {
    pub fn kind(&self) -> ModelKind {
        match self {
            Instance::Arra(_) => ModelKind::Arra,
            Instance::Rra97(_) => ModelKind::Rra97,
            Instance::Uarbac(_) => ModelKind::Uarbac,
        }
    }

    /// The single-form decision under the instance's own semantics.
    pub fn decide(&self, op: &str, au: &str, r1: &str, r2: &str) -> Result<Decision> {
        match self {
            Instance::Arra(i) => i.authorize(op, au, r1, r2),
            Instance::Rra97(i) => i.decide(op, au, r1, r2),
            Instance::Uarbac(i) => i.decide(op, au, r1, r2),
        }
    }

    /// Decides `op` and, when allowed, returns the instance with the edge
    /// inserted or deleted. The result is re-validated.
    pub fn apply(&self, op: &str, au: &str, r1: &str, r2: &str) -> Result<(Decision, Option<Instance>)> {
        if let Instance::Arra(i) = self {
            let (d, next) = i.apply(op, au, r1, r2)?;
            return Ok((d, next.map(Instance::Arra)));
        }
        let effect = effect_of(op).ok_or_else(|| Error::UnknownEntity {
            kind: "operation",
            name: op.into(),
        })?;
        let d = self.decide(op, au, r1, r2)?;
        if !d.allowed {
            return Ok((d, None));
        }
        let edit = |g: &RoleGraph| match effect {
            EdgeEffect::Insert => g.insert_edge(r1, r2),
            EdgeEffect::Delete => g.delete_edge(r1, r2),
        };
        let next = match self {
            Instance::Rra97(i) => {
                let mut parts = i.parts().clone();
                parts.roles = edit(&parts.roles)?;
                Instance::Rra97(Rra97Instance::new(parts)?)
            }
            Instance::Uarbac(i) => {
                let mut parts = i.parts().clone();
                parts.roles = edit(&parts.roles)?;
                Instance::Uarbac(UarbacInstance::new(parts)?)
            }
            Instance::Arra(_) => unreachable!(),
        };
        Ok((d, Some(next)))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RangeDoc {
    admin_role: String,
    range: (String, String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum ScopeDoc {
    Named(String),
    Values(Vec<Value>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum OrderDoc {
    Named(String),
    Pairs(Vec<(Value, Value)>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaDoc {
    name: String,
    target: Target,
    scope: ScopeDoc,
    value_kind: ValueKind,
    #[serde(default)]
    ordered: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scope_order: Option<OrderDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ValueDoc {
    attr: String,
    /// Only needed when `attr` is defined for several targets and the
    /// entity name alone does not decide between them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<Target>,
    entity: String,
    value: serde_json::Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleDoc {
    op: String,
    form: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    set_form: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc {
    model: ModelKind,
    roles: Vec<String>,
    #[serde(default)]
    rh: Vec<(String, String)>,
    #[serde(default)]
    admin_users: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    admin_roles: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    arh: Option<Vec<(String, String)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    aua: Option<Vec<(String, String)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    can_modify: Option<Vec<RangeDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    access_modes: Option<BTreeMap<String, Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    authorized_perms: Option<BTreeMap<String, Vec<Vec<String>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    attributes: Option<Vec<SchemaDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<ValueDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rules: Option<Vec<RuleDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    flags: Option<Flags>,
}

/// Collects diagnostics while the document is checked piece by piece.
#[derive(Default)]
struct Diags(Vec<Diagnostic>);

impl Diags {
    fn push(&mut self, at: impl Into<String>, msg: impl Into<String>) {
        self.0.push(Diagnostic::new(at, msg));
    }

    fn err(&mut self, at: impl Into<String>, e: &Error) {
        self.push(at, e.to_string());
    }

    fn finish<T>(self, value: impl FnOnce() -> Result<T>) -> Result<T> {
        if self.0.is_empty() {
            value().map_err(|e| Error::Load(vec![Diagnostic::new("/", e.to_string())]))
        } else {
            Err(Error::Load(self.0))
        }
    }
}

fn names<T: From<String> + Ord>(d: &mut Diags, at: &str, kind: &str, list: &[String]) -> BTreeSet<T> {
    let mut seen = BTreeSet::new();
    let mut out = BTreeSet::new();
    for (i, n) in list.iter().enumerate() {
        if let Some(why) = check_name(n) {
            d.push(format!("{at}/{i}"), format!("{kind} `{n}`: {why}"));
        } else if !seen.insert(n.clone()) {
            d.push(format!("{at}/{i}"), format!("duplicate {kind} `{n}`"));
        } else {
            out.insert(T::from(n.clone()));
        }
    }
    out
}

fn graph(d: &mut Diags, at: &str, nodes: &BTreeSet<RoleId>, edges: &[(String, String)]) -> RoleGraph {
    let mut kept = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, (j, s)) in edges.iter().enumerate() {
        let mut ok = true;
        for r in [j, s] {
            if !nodes.contains(r.as_str()) {
                d.push(format!("{at}/{i}"), format!("unknown role `{r}`"));
                ok = false;
            }
        }
        if ok && j == s {
            d.push(format!("{at}/{i}"), format!("self-edge on `{j}`"));
            ok = false;
        }
        if ok && !seen.insert((j.clone(), s.clone())) {
            d.push(format!("{at}/{i}"), format!("duplicate edge [{j}, {s}]"));
            ok = false;
        }
        if ok {
            kept.push((RoleId::from(j.as_str()), RoleId::from(s.as_str())));
        }
    }
    match RoleGraph::new(nodes.iter().cloned(), kept) {
        Ok(g) => g,
        Err(e) => {
            d.err(at, &e);
            RoleGraph::new(nodes.iter().cloned(), []).expect("edgeless graph")
        }
    }
}

fn forbid(d: &mut Diags, model: ModelKind, key: &str, present: bool) {
    if present {
        d.push(
            format!("/{key}"),
            format!("key `{key}` is not used by model {}", model.as_str()),
        );
    }
}

fn pairs(
    d: &mut Diags,
    at: &str,
    list: &[(String, String)],
    users: &BTreeSet<UserId>,
    roles: &RoleGraph,
) -> BTreeSet<(UserId, RoleId)> {
    let mut out = BTreeSet::new();
    for (i, (u, r)) in list.iter().enumerate() {
        let mut ok = true;
        if !users.contains(u.as_str()) {
            d.push(format!("{at}/{i}"), format!("unknown admin user `{u}`"));
            ok = false;
        }
        if !roles.contains(r) {
            d.push(format!("{at}/{i}"), format!("unknown admin role `{r}`"));
            ok = false;
        }
        if ok && !out.insert((UserId::from(u.as_str()), RoleId::from(r.as_str()))) {
            d.push(format!("{at}/{i}"), format!("duplicate assignment [{u}, {r}]"));
        }
    }
    out
}

/// Parses instance text of any model.
pub fn load_str(text: &str) -> Result<Instance> {
    let doc: Doc = serde_json::from_str(text).map_err(|e| {
        Error::Load(vec![Diagnostic::new(
            format!("{}:{}", e.line(), e.column()),
            e.to_string(),
        )])
    })?;
    let mut d = Diags::default();
    let model = doc.model;
    let roles_set: BTreeSet<RoleId> = names(&mut d, "/roles", "role", &doc.roles);
    let roles = graph(&mut d, "/rh", &roles_set, &doc.rh);
    let users: BTreeSet<UserId> = names(&mut d, "/admin_users", "admin user", &doc.admin_users);

    match model {
        ModelKind::Uarbac => {
            for (key, present) in [
                ("admin_roles", doc.admin_roles.is_some()),
                ("arh", doc.arh.is_some()),
                ("aua", doc.aua.is_some()),
                ("can_modify", doc.can_modify.is_some()),
                ("attributes", doc.attributes.is_some()),
                ("values", doc.values.is_some()),
                ("rules", doc.rules.is_some()),
                ("flags", doc.flags.is_some()),
            ] {
                forbid(&mut d, model, key, present);
            }
            let access_modes: BTreeMap<String, BTreeSet<String>> = doc
                .access_modes
                .unwrap_or_default()
                .into_iter()
                .map(|(c, ms)| (c, ms.into_iter().collect()))
                .collect();
            if !access_modes.contains_key("role") {
                d.push("/access_modes", "class `role` must be declared");
            }
            let mut authorized_perms = BTreeMap::new();
            for (u, perms) in doc.authorized_perms.unwrap_or_default() {
                let at = format!("/authorized_perms/{}", pointer_escape(&u));
                if !users.contains(u.as_str()) {
                    d.push(&at, format!("unknown admin user `{u}`"));
                    continue;
                }
                let mut set = BTreeSet::new();
                for (i, p) in perms.into_iter().enumerate() {
                    let perm = match p.as_slice() {
                        [c, o, m] => Permission::object(c, o, m),
                        [c, m] => Permission::class(c, m),
                        _ => {
                            d.push(
                                format!("{at}/{i}"),
                                "a permission is [class, object, mode] or [class, mode]",
                            );
                            continue;
                        }
                    };
                    match access_modes.get(perm.class_name()) {
                        None => d.push(format!("{at}/{i}"), format!("unknown class `{}`", perm.class_name())),
                        Some(ms) if !ms.contains(perm.mode()) => d.push(
                            format!("{at}/{i}"),
                            format!("`{}` is not an access mode of `{}`", perm.mode(), perm.class_name()),
                        ),
                        _ => {}
                    }
                    if let Permission::Object { class, object, .. } = &perm {
                        if class == "role" && !roles.contains(object) {
                            d.push(format!("{at}/{i}"), format!("unknown role `{object}`"));
                        }
                    }
                    set.insert(perm);
                }
                authorized_perms.insert(UserId::from(u), set);
            }
            d.finish(|| {
                Ok(Instance::Uarbac(UarbacInstance::new(UarbacParts {
                    users,
                    roles,
                    access_modes,
                    authorized_perms,
                })?))
            })
        }
        ModelKind::Rra97 => {
            for (key, present) in [
                ("access_modes", doc.access_modes.is_some()),
                ("authorized_perms", doc.authorized_perms.is_some()),
                ("attributes", doc.attributes.is_some()),
                ("values", doc.values.is_some()),
                ("rules", doc.rules.is_some()),
            ] {
                forbid(&mut d, model, key, present);
            }
            let flags = doc.flags.unwrap_or_default();
            if flags.aroles_closure {
                d.push("/flags/aroles_closure", "aroles_closure applies to arra instances only");
            }
            let ar_set: BTreeSet<RoleId> = names(
                &mut d,
                "/admin_roles",
                "admin role",
                &doc.admin_roles.unwrap_or_default(),
            );
            let admin_roles = graph(&mut d, "/arh", &ar_set, &doc.arh.unwrap_or_default());
            let aua = pairs(&mut d, "/aua", &doc.aua.unwrap_or_default(), &users, &admin_roles);
            let mut can_modify = BTreeSet::new();
            for (i, entry) in doc.can_modify.unwrap_or_default().into_iter().enumerate() {
                let at = format!("/can_modify/{i}");
                let (x, y) = &entry.range;
                if !admin_roles.contains(&entry.admin_role) {
                    d.push(&at, format!("unknown admin role `{}`", entry.admin_role));
                    continue;
                }
                let missing: Vec<&String> = [x, y].into_iter().filter(|r| !roles.contains(r)).collect();
                if !missing.is_empty() {
                    for r in missing {
                        d.push(format!("{at}/range"), format!("unknown role `{r}`"));
                    }
                    continue;
                }
                if !roles.is_junior(x, y).unwrap_or(false) {
                    d.push(
                        format!("{at}/range"),
                        format!("range ({x}, {y}): {x} is not strictly junior to {y}"),
                    );
                    continue;
                }
                if !is_encapsulated(&roles, x, y).unwrap_or(false) {
                    d.push(format!("{at}/range"), format!("range ({x}, {y}) is not encapsulated"));
                    continue;
                }
                let key = (
                    RoleId::from(entry.admin_role),
                    (RoleId::from(x.as_str()), RoleId::from(y.as_str())),
                );
                if !can_modify.insert(key) {
                    d.push(&at, "duplicate can_modify entry");
                }
            }
            d.finish(|| {
                Ok(Instance::Rra97(Rra97Instance::new(Rra97Parts {
                    users,
                    roles,
                    admin_roles,
                    aua,
                    can_modify,
                    delete_semantics: flags.delete_semantics,
                })?))
            })
        }
        ModelKind::Arra => {
            for (key, present) in [
                ("can_modify", doc.can_modify.is_some()),
                ("access_modes", doc.access_modes.is_some()),
                ("authorized_perms", doc.authorized_perms.is_some()),
            ] {
                forbid(&mut d, model, key, present);
            }
            let ar_set: BTreeSet<RoleId> = names(
                &mut d,
                "/admin_roles",
                "admin role",
                &doc.admin_roles.unwrap_or_default(),
            );
            let admin_roles = graph(&mut d, "/arh", &ar_set, &doc.arh.unwrap_or_default());
            let aua = pairs(&mut d, "/aua", &doc.aua.unwrap_or_default(), &users, &admin_roles);
            let mut attributes = Attributes::new();
            for (i, s) in doc.attributes.unwrap_or_default().into_iter().enumerate() {
                let at = format!("/attributes/{i}");
                match schema_from_doc(s) {
                    Ok(schema) => {
                        if let Err(e) = attributes.define(schema, &roles) {
                            d.err(&at, &e);
                        }
                    }
                    Err(msg) => d.push(&at, msg),
                }
            }
            let entity_exists = |t: Target, e: &str| match t {
                Target::AdminUser => users.contains(e),
                Target::AdminRole => admin_roles.contains(e),
                Target::Role => roles.contains(e),
            };
            let mut assigned = BTreeSet::new();
            for (i, v) in doc.values.unwrap_or_default().into_iter().enumerate() {
                let at = format!("/values/{i}");
                let candidates: Vec<&AttributeSchema> = attributes
                    .by_name(&v.attr)
                    .filter(|s| v.target.is_none_or(|t| t == s.target))
                    .collect();
                if candidates.is_empty() {
                    d.push(&at, format!("unknown attribute `{}`", v.attr));
                    continue;
                }
                let fitting: Vec<&AttributeSchema> = candidates
                    .iter()
                    .copied()
                    .filter(|s| entity_exists(s.target, &v.entity))
                    .collect();
                let schema = match fitting.as_slice() {
                    [one] => (*one).clone(),
                    [] => {
                        d.push(
                            &at,
                            format!("`{}` is not an entity that carries `{}`", v.entity, v.attr),
                        );
                        continue;
                    }
                    _ => {
                        d.push(
                            &at,
                            format!("`{}` is ambiguous for `{}`; add a target", v.entity, v.attr),
                        );
                        continue;
                    }
                };
                if !assigned.insert((schema.target, schema.name.clone(), v.entity.clone())) {
                    d.push(&at, format!("`{}` already has a value for `{}`", v.entity, v.attr));
                    continue;
                }
                let decoded = match schema.value_kind {
                    ValueKind::Set => serde_json::from_value::<BTreeSet<Value>>(v.value).map(AttrValue::Set),
                    ValueKind::Atomic => serde_json::from_value::<Value>(v.value).map(AttrValue::Atomic),
                };
                match decoded {
                    Ok(value) => {
                        if let Err(e) = attributes.set_value(schema.target, &schema.name, &v.entity, value) {
                            d.err(format!("{at}/value"), &e);
                        }
                    }
                    Err(e) => d.push(format!("{at}/value"), e.to_string()),
                }
            }
            let mut rules = RuleSet::new();
            let mut ops = BTreeSet::new();
            for (i, r) in doc.rules.unwrap_or_default().into_iter().enumerate() {
                let at = format!("/rules/{i}");
                if !ops.insert(r.op.clone()) {
                    d.push(format!("{at}/op"), format!("duplicate rule for `{}`", r.op));
                    continue;
                }
                let single = parse_rule(&r.form, &RuleContext::single_form(&attributes));
                let set = r
                    .set_form
                    .as_deref()
                    .map(|s| parse_rule(s, &RuleContext::set_form(&attributes)))
                    .transpose();
                match (single, set) {
                    (Ok(single), Ok(set)) => rules.insert(r.op, single, set),
                    (single, set) => {
                        if let Err(e) = single {
                            d.err(format!("{at}/form"), &e);
                        }
                        if let Err(e) = set {
                            d.err(format!("{at}/set_form"), &e);
                        }
                    }
                }
            }
            let flags = doc.flags.unwrap_or_default();
            d.finish(|| {
                Ok(Instance::Arra(ArraInstance::new(ArraParts {
                    admin_users: users,
                    roles,
                    admin_roles,
                    aua,
                    attributes,
                    rules,
                    flags,
                })?))
            })
        }
    }
}

fn pointer_escape(s: &str) -> String {
    s.replace('~', "~0").replace('/', "~1")
}

fn schema_from_doc(s: SchemaDoc) -> std::result::Result<AttributeSchema, String> {
    if let Some(why) = check_name(&s.name) {
        return Err(format!("attribute name `{}`: {why}", s.name));
    }
    if s.name
        .chars()
        .any(|c| c.is_whitespace() || matches!(c, '(' | ')' | '"' | ';'))
    {
        return Err(format!(
            "attribute name `{}` must be a single rule-language token",
            s.name
        ));
    }
    let scope = match s.scope {
        ScopeDoc::Named(n) if n == "roles" => ScopeSpec::Roles,
        ScopeDoc::Named(n) if n == "rh+" => ScopeSpec::HierarchyClosure,
        ScopeDoc::Named(n) => return Err(format!("unknown scope `{n}`; expected a list, \"roles\" or \"rh+\"")),
        ScopeDoc::Values(vs) => ScopeSpec::Values(vs.into_iter().collect()),
    };
    let scope_order = match s.scope_order {
        None => OrderSpec::none(),
        Some(OrderDoc::Named(n)) if n == "rh" => OrderSpec::RoleHierarchy,
        Some(OrderDoc::Named(n)) => return Err(format!("unknown scope_order `{n}`; expected a list or \"rh\"")),
        Some(OrderDoc::Pairs(ps)) => OrderSpec::Pairs(ps.into_iter().collect()),
    };
    Ok(AttributeSchema {
        name: s.name,
        target: s.target,
        scope,
        value_kind: s.value_kind,
        ordered: s.ordered,
        scope_order,
    })
}

pub fn load_path(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Load(vec![Diagnostic::new(path.display().to_string(), e.to_string())]))?;
    load_str(&text)
}

fn role_list(g: &RoleGraph) -> Vec<String> {
    g.nodes().iter().map(|r| r.to_string()).collect()
}

fn edge_list(g: &RoleGraph) -> Vec<(String, String)> {
    g.edges().iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

fn empty_doc(model: ModelKind, roles: &RoleGraph) -> Doc {
    Doc {
        model,
        roles: role_list(roles),
        rh: edge_list(roles),
        admin_users: Vec::new(),
        admin_roles: None,
        arh: None,
        aua: None,
        can_modify: None,
        access_modes: None,
        authorized_perms: None,
        attributes: None,
        values: None,
        rules: None,
        flags: None,
    }
}

fn schema_to_doc(s: &AttributeSchema) -> SchemaDoc {
    SchemaDoc {
        name: s.name.clone(),
        target: s.target,
        scope: match &s.scope {
            ScopeSpec::Roles => ScopeDoc::Named("roles".into()),
            ScopeSpec::HierarchyClosure => ScopeDoc::Named("rh+".into()),
            ScopeSpec::Values(vs) => ScopeDoc::Values(vs.iter().cloned().collect()),
        },
        value_kind: s.value_kind,
        ordered: s.ordered,
        scope_order: match &s.scope_order {
            OrderSpec::RoleHierarchy => Some(OrderDoc::Named("rh".into())),
            OrderSpec::Pairs(ps) if ps.is_empty() => None,
            OrderSpec::Pairs(ps) => Some(OrderDoc::Pairs(ps.iter().cloned().collect())),
        },
    }
}

fn doc_of(inst: &Instance) -> Doc {
    match inst {
        Instance::Arra(a) => {
            let p = a.parts();
            let mut doc = empty_doc(ModelKind::Arra, &p.roles);
            doc.admin_users = p.admin_users.iter().map(|u| u.to_string()).collect();
            doc.admin_roles = Some(role_list(&p.admin_roles));
            doc.arh = Some(edge_list(&p.admin_roles));
            doc.aua = Some(p.aua.iter().map(|(u, r)| (u.to_string(), r.to_string())).collect());
            doc.attributes = Some(p.attributes.schemas().map(schema_to_doc).collect());
            doc.values = Some(
                p.attributes
                    .assignments()
                    .map(|(t, attr, entity, v)| ValueDoc {
                        attr: attr.into(),
                        target: (p.attributes.by_name(attr).count() > 1).then_some(t),
                        entity: entity.into(),
                        value: serde_json::to_value(v).expect("values serialize"),
                    })
                    .collect(),
            );
            doc.rules = Some(
                p.rules
                    .iter()
                    .map(|(op, r)| RuleDoc {
                        op: op.into(),
                        form: r.single.pretty(),
                        set_form: r.set.as_ref().map(|s| s.pretty()),
                    })
                    .collect(),
            );
            doc.flags = Some(p.flags);
            doc
        }
        Instance::Rra97(r) => {
            let p = r.parts();
            let mut doc = empty_doc(ModelKind::Rra97, &p.roles);
            doc.admin_users = p.users.iter().map(|u| u.to_string()).collect();
            doc.admin_roles = Some(role_list(&p.admin_roles));
            doc.arh = Some(edge_list(&p.admin_roles));
            doc.aua = Some(p.aua.iter().map(|(u, r)| (u.to_string(), r.to_string())).collect());
            doc.can_modify = Some(
                p.can_modify
                    .iter()
                    .map(|(ar, (x, y))| RangeDoc {
                        admin_role: ar.to_string(),
                        range: (x.to_string(), y.to_string()),
                    })
                    .collect(),
            );
            if p.delete_semantics != DeleteSemantics::Main {
                doc.flags = Some(Flags {
                    aroles_closure: false,
                    delete_semantics: p.delete_semantics,
                });
            }
            doc
        }
        Instance::Uarbac(u) => {
            let p = u.parts();
            let mut doc = empty_doc(ModelKind::Uarbac, &p.roles);
            doc.admin_users = p.users.iter().map(|u| u.to_string()).collect();
            doc.access_modes = Some(
                p.access_modes
                    .iter()
                    .map(|(c, ms)| (c.clone(), ms.iter().cloned().collect()))
                    .collect(),
            );
            doc.authorized_perms = Some(
                p.authorized_perms
                    .iter()
                    .map(|(u, ps)| {
                        let list = ps
                            .iter()
                            .map(|perm| match perm {
                                Permission::Object { class, object, mode } => {
                                    vec![class.clone(), object.clone(), mode.clone()]
                                }
                                Permission::Class { class, mode } => vec![class.clone(), mode.clone()],
                            })
                            .collect();
                        (u.to_string(), list)
                    })
                    .collect(),
            );
            doc
        }
    }
}

/// Serializes an instance in the same format [`load_str`] reads.
pub fn to_json_string(inst: &Instance) -> String {
    let mut s = serde_json::to_string_pretty(&doc_of(inst)).expect("documents serialize");
    s.push('\n');
    s
}

pub fn save_path(inst: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_json_string(inst))
        .map_err(|e| Error::Load(vec![Diagnostic::new(path.display().to_string(), e.to_string())]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn locations(text: &str) -> Vec<String> {
        match load_str(text) {
            Err(Error::Load(ds)) => ds.into_iter().map(|d| d.location).collect(),
            other => panic!("expected a load error, got {other:?}"),
        }
    }

    #[test]
    fn fixtures_round_trip() {
        for inst in [
            fixtures::rra97_example(),
            fixtures::uarbac_example(),
            fixtures::dept_example(),
        ] {
            let inst = inst.unwrap();
            let text = to_json_string(&inst);
            let back = load_str(&text).unwrap();
            assert_eq!(back, inst);
            assert_eq!(to_json_string(&back), text);
        }
    }

    #[test]
    fn every_problem_is_reported() {
        let locs = locations(
            r#"{"model": "arra", "roles": ["a", "b", "a"], "rh": [["a", "z"], ["b", "b"]],
                "admin_users": ["u"], "admin_roles": ["ar"], "aua": [["v", "ar"]]}"#,
        );
        assert_eq!(locs, ["/roles/2", "/rh/0", "/rh/1", "/aua/0"]);
    }

    #[test]
    fn sections_of_other_models_are_rejected() {
        let locs = locations(
            r#"{"model": "uarbac", "roles": ["a"], "admin_users": ["u"],
                "access_modes": {"role": ["grant"]}, "can_modify": []}"#,
        );
        assert_eq!(locs, ["/can_modify"]);
    }

    #[test]
    fn values_need_a_target_only_when_ambiguous() {
        let doc = |target: &str| {
            format!(
                r#"{{"model": "arra", "roles": ["x"], "admin_users": ["x"],
                    "attributes": [
                        {{"name": "k", "target": "role", "scope": ["p"], "value_kind": "atomic"}},
                        {{"name": "k", "target": "admin_user", "scope": ["p"], "value_kind": "atomic"}}
                    ],
                    "values": [{{"attr": "k", "entity": "x", "value": "p"{target}}}]}}"#
            )
        };
        assert_eq!(locations(&doc("")), ["/values/0"]);
        let Instance::Arra(i) = load_str(&doc(r#", "target": "role""#)).unwrap() else {
            unreachable!()
        };
        assert!(i.attributes().get_value(Target::Role, "k", "x").is_ok());
        assert!(i.attributes().get_value(Target::AdminUser, "k", "x").is_err());
        let again = load_str(&to_json_string(&Instance::Arra(i.clone()))).unwrap();
        assert_eq!(again, Instance::Arra(i));
    }

    #[test]
    fn bad_rules_point_at_their_form() {
        let locs = locations(
            r#"{"model": "arra", "roles": ["a"], "admin_users": ["u"],
                "rules": [{"op": "insertEdge", "form": "(junior r1 r9)"}, {"op": "insertEdge", "form": "true"}]}"#,
        );
        assert_eq!(locs, ["/rules/0/form", "/rules/1/op"]);
    }
}
