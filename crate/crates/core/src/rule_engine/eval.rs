//! Finite-domain evaluation of rule ASTs over an [`ArraInstance`].
//!
//! Quantifier domains iterate in sorted order so that traces are
//! reproducible. `and`, `or` and quantifiers short-circuit.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use crate::arra::{target_kind, ArraInstance};
use crate::decision::{Decision, TraceStep, Witness};
use crate::error::{Error, Result};
use crate::hierarchy::Reachability;
use crate::ids::RoleId;
use crate::value::Value;

use super::ast::{Binder, Domain, Expr, Quantifier, Relation, RuleAst, SetBuilder, Term};

/// A borrowed runtime value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tv<'x> {
    Atom(&'x str),
    Pair(&'x str, &'x str),
}

impl<'x> Tv<'x> {
    fn of(v: &'x Value) -> Self {
        match v {
            Value::Atom(a) => Tv::Atom(a),
            Value::Pair(a, b) => Tv::Pair(a, b),
        }
    }

    fn atom(self) -> Result<&'x str> {
        match self {
            Tv::Atom(a) => Ok(a),
            Tv::Pair(a, b) => Err(Error::Type(format!(
                "pair ({a}, {b}) used where a single value is expected"
            ))),
        }
    }

    /// `v.cmp(self)` under the derived `Ord` on [`Value`].
    fn cmp_value(self, v: &Value) -> Ordering {
        match (v, self) {
            (Value::Atom(a), Tv::Atom(b)) => a.as_str().cmp(b),
            (Value::Atom(_), Tv::Pair(..)) => Ordering::Less,
            (Value::Pair(..), Tv::Atom(_)) => Ordering::Greater,
            (Value::Pair(a, b), Tv::Pair(c, d)) => (a.as_str(), b.as_str()).cmp(&(c, d)),
        }
    }
}

struct Env<'x> {
    name: &'x str,
    val: Tv<'x>,
    up: Option<&'x Env<'x>>,
}

fn lookup<'x>(mut env: Option<&Env<'x>>, name: &str) -> Result<Tv<'x>> {
    while let Some(e) = env {
        if e.name == name {
            return Ok(e.val);
        }
        env = e.up;
    }
    Err(Error::Bind(name.into()))
}

fn bind<R>(binder: &Binder, v: &Value, env: Option<&Env<'_>>, f: impl FnOnce(&Env<'_>) -> R) -> Result<R> {
    match binder {
        Binder::One(x) => Ok(f(&Env {
            name: x,
            val: Tv::of(v),
            up: env,
        })),
        Binder::Pair(a, b) => {
            let (va, vb) = v
                .as_pair()
                .ok_or_else(|| Error::Type(format!("cannot destructure `{v}` into ({a} {b})")))?;
            let first = Env {
                name: a,
                val: Tv::Atom(va),
                up: env,
            };
            Ok(f(&Env {
                name: b,
                val: Tv::Atom(vb),
                up: Some(&first),
            }))
        }
    }
}

fn with_bindings<R>(binds: &[(&str, Value)], env: Option<&Env<'_>>, f: &mut dyn FnMut(Option<&Env<'_>>) -> R) -> R {
    match binds.split_first() {
        None => f(env),
        Some(((name, v), rest)) => {
            let e = Env {
                name,
                val: Tv::of(v),
                up: env,
            };
            with_bindings(rest, Some(&e), f)
        }
    }
}

enum Dom<'x> {
    Sorted(&'x [Value]),
    Set(&'x BTreeSet<Value>),
    Owned(Vec<Value>),
}

impl Dom<'_> {
    fn iter(&self) -> Box<dyn Iterator<Item = &Value> + '_> {
        match self {
            Dom::Sorted(s) => Box::new(s.iter()),
            Dom::Set(s) => Box::new(s.iter()),
            Dom::Owned(v) => Box::new(v.iter()),
        }
    }

    fn contains(&self, t: Tv<'_>) -> bool {
        match self {
            Dom::Sorted(s) => s.binary_search_by(|v| t.cmp_value(v)).is_ok(),
            Dom::Set(s) => s.iter().any(|v| t.cmp_value(v) == Ordering::Equal),
            Dom::Owned(v) => v.iter().any(|v| t.cmp_value(v) == Ordering::Equal),
        }
    }
}

struct Ev<'i> {
    inst: &'i ArraInstance,
    hyp: RefCell<HashMap<(usize, usize), Rc<Reachability>>>,
}

impl<'i> Ev<'i> {
    fn new(inst: &'i ArraInstance) -> Self {
        Ev {
            inst,
            hyp: RefCell::new(HashMap::new()),
        }
    }

    fn role(&self, name: &str) -> Result<usize> {
        self.inst
            .roles()
            .closure()
            .index_of(name)
            .ok_or_else(|| Error::unknown("role", name))
    }

    fn term<'x>(&self, t: &'x Term, env: Option<&Env<'x>>) -> Result<Tv<'x>>
    where
        'i: 'x,
    {
        match t {
            Term::Var(v) => lookup(env, v),
            Term::Lit(s) => Ok(Tv::Atom(s)),
            Term::Attr(a, inner) => {
                let entity = self.term(inner, env)?.atom()?;
                if !self.inst.has_entity(a.target, entity) {
                    return Err(Error::unknown(target_kind(a.target), entity));
                }
                let v = self.inst.attributes().value_atomic(a.target, &a.name, entity)?;
                Ok(Tv::of(v))
            }
        }
    }

    fn domain<'x>(&self, d: &'x Domain, env: Option<&Env<'x>>) -> Result<Dom<'x>>
    where
        'i: 'x,
    {
        Ok(match d {
            Domain::Roles => Dom::Sorted(self.inst.role_values()),
            Domain::AdminRoles => Dom::Sorted(self.inst.admin_role_values()),
            Domain::Aua => Dom::Sorted(self.inst.aua_values()),
            Domain::AdminRolesOf(t) => {
                let u = self.term(t, env)?.atom()?;
                Dom::Owned(self.inst.aroles(u)?)
            }
            Domain::Attr(a, t) => {
                let entity = self.term(t, env)?.atom()?;
                if !self.inst.has_entity(a.target, entity) {
                    return Err(Error::unknown(target_kind(a.target), entity));
                }
                let attrs = self.inst.attributes();
                match attrs.schema(a.target, &a.name).map(|s| s.value_kind) {
                    Some(crate::attributes::ValueKind::Atomic) => {
                        Dom::Owned(vec![attrs.value_atomic(a.target, &a.name, entity)?.clone()])
                    }
                    _ => Dom::Set(attrs.value_set(a.target, &a.name, entity)?),
                }
            }
            Domain::Scope(a) => Dom::Set(self.inst.attributes().scope(a.target, &a.name)?),
            Domain::Range(x, y) => {
                let x = self.term(x, env)?.atom()?;
                let y = self.term(y, env)?.atom()?;
                let roles = self.inst.roles().open_range(x, y)?;
                Dom::Owned(roles.into_iter().map(|r| Value::Atom(r.to_string())).collect())
            }
            Domain::Lit(vs) => Dom::Owned(vs.iter().map(Value::atom).collect()),
        })
    }

    fn hypothetical(&self, c: &str, d: &str) -> Result<Rc<Reachability>> {
        let key = (self.role(c)?, self.role(d)?);
        let mut cache = self.hyp.borrow_mut();
        Ok(cache
            .entry(key)
            .or_insert_with(|| Rc::new(self.inst.roles().closure_with(c, d)))
            .clone())
    }

    fn quant<'x>(&self, q: &'x Quantifier, env: Option<&Env<'x>>, exists: bool) -> Result<bool>
    where
        'i: 'x,
    {
        let dom = self.domain(&q.domain, env)?;
        for v in dom.iter() {
            if bind(&q.binder, v, env, |e| self.eval(&q.body, Some(e)))?? == exists {
                return Ok(exists);
            }
        }
        Ok(!exists)
    }

    fn eval<'x>(&self, e: &'x Expr, env: Option<&Env<'x>>) -> Result<bool>
    where
        'i: 'x,
    {
        let roles = self.inst.roles();
        Ok(match e {
            Expr::Bool(b) => *b,
            Expr::And(es) => {
                for c in es {
                    if !self.eval(c, env)? {
                        return Ok(false);
                    }
                }
                true
            }
            Expr::Or(es) => {
                for c in es {
                    if self.eval(c, env)? {
                        return Ok(true);
                    }
                }
                false
            }
            Expr::Not(a) => !self.eval(a, env)?,
            Expr::Implies(a, b) => !self.eval(a, env)? || self.eval(b, env)?,
            Expr::Iff(a, b) => self.eval(a, env)? == self.eval(b, env)?,
            Expr::Exists(q) => self.quant(q, env, true)?,
            Expr::ForAll(q) => self.quant(q, env, false)?,
            Expr::MemberOf(t, d) => {
                let t = self.term(t, env)?;
                self.domain(d, env)?.contains(t)
            }
            Expr::Eq(a, b) => self.term(a, env)? == self.term(b, env)?,
            Expr::Senior(a, b) => roles.is_senior(self.term(a, env)?.atom()?, self.term(b, env)?.atom()?)?,
            Expr::Junior(a, b) => roles.is_junior(self.term(a, env)?.atom()?, self.term(b, env)?.atom()?)?,
            Expr::Incomparable(a, b) => roles.incomparable(self.term(a, env)?.atom()?, self.term(b, env)?.atom()?)?,
            Expr::InRange(t, x, y) => roles.in_open_range(
                self.term(t, env)?.atom()?,
                self.term(x, env)?.atom()?,
                self.term(y, env)?.atom()?,
            )?,
            Expr::EdgeIn(a, b, rel) => {
                let a = self.term(a, env)?.atom()?;
                let b = self.term(b, env)?.atom()?;
                match rel {
                    Relation::Direct => roles.has_edge(a, b),
                    Relation::Transitive => roles.closure().contains_strict(a, b),
                    Relation::Reflexive => roles.closure().contains(a, b),
                    Relation::ReflexiveWith(c, d) => {
                        let c = self.term(c, env)?.atom()?;
                        let d = self.term(d, env)?.atom()?;
                        self.hypothetical(c, d)?.contains(a, b)
                    }
                }
            }
            Expr::Dominates(attr, x, y) => {
                let xs = self.domain(x, env)?;
                let ys = self.domain(y, env)?;
                self.inst
                    .attributes()
                    .set_dominates(attr.target, &attr.name, xs.iter(), ys.iter())?
            }
        })
    }

    /// Evaluates `e` and, when it holds, collects witnesses for the
    /// existential quantifiers on its positive spine.
    fn prove<'x>(&self, e: &'x Expr, id: usize, env: Option<&Env<'x>>) -> Result<Option<Vec<Witness>>>
    where
        'i: 'x,
    {
        match e {
            Expr::And(es) => {
                let mut out = Vec::new();
                let mut cid = id + 1;
                for c in es {
                    match self.prove(c, cid, env)? {
                        Some(ws) => out.extend(ws),
                        None => return Ok(None),
                    }
                    cid += c.size();
                }
                Ok(Some(out))
            }
            Expr::Or(es) => {
                let mut cid = id + 1;
                for c in es {
                    if let Some(ws) = self.prove(c, cid, env)? {
                        return Ok(Some(ws));
                    }
                    cid += c.size();
                }
                Ok(None)
            }
            Expr::Exists(q) => {
                let dom = self.domain(&q.domain, env)?;
                for v in dom.iter() {
                    if let Some(ws) = bind(&q.binder, v, env, |e| self.prove(&q.body, id + 1, Some(e)))?? {
                        let mut out = vec![Witness {
                            node: Some(id),
                            binder: q.binder.to_string(),
                            value: v.clone(),
                        }];
                        out.extend(ws);
                        return Ok(Some(out));
                    }
                }
                Ok(None)
            }
            _ => Ok(self.eval(e, env)?.then(Vec::new)),
        }
    }

    fn replay<'x>(&self, e: &'x Expr, id: usize, env: Option<&Env<'x>>, w: &HashMap<usize, &Value>) -> Result<bool>
    where
        'i: 'x,
    {
        match e {
            Expr::And(es) | Expr::Or(es) => {
                let all = matches!(e, Expr::And(_));
                let mut cid = id + 1;
                for c in es {
                    if self.replay(c, cid, env, w)? != all {
                        return Ok(!all);
                    }
                    cid += c.size();
                }
                Ok(all)
            }
            Expr::Exists(q) => match w.get(&id) {
                Some(v) => {
                    let dom = self.domain(&q.domain, env)?;
                    if !dom.contains(Tv::of(v)) {
                        return Ok(false);
                    }
                    bind(&q.binder, v, env, |e| self.replay(&q.body, id + 1, Some(e), w))?
                }
                None => self.eval(e, env),
            },
            _ => self.eval(e, env),
        }
    }
}

/// Evaluates `rule` with its free variables bound by `bindings`.
///
/// When the rule holds the trace has one step naming the top-level disjunct
/// that fired and the witnesses chosen for its existential quantifiers.
pub fn evaluate(rule: &RuleAst, inst: &ArraInstance, bindings: &[(&str, Value)]) -> Result<Decision> {
    let ev = Ev::new(inst);
    with_bindings(bindings, None, &mut |env| {
        if !ev.eval(&rule.root, env)? {
            return Ok(Decision::deny());
        }
        let (disjunct, witnesses) = match &rule.root {
            Expr::Or(es) => {
                let mut cid = 1;
                let mut found = None;
                for (i, c) in es.iter().enumerate() {
                    if let Some(ws) = ev.prove(c, cid, env)? {
                        found = Some((i, ws));
                        break;
                    }
                    cid += c.size();
                }
                found
            }
            root => ev.prove(root, 0, env)?.map(|ws| (0, ws)),
        }
        .expect("a true formula has a proof");
        Ok(Decision::allow(TraceStep {
            disjunct,
            subject: None,
            witnesses,
        }))
    })
}

/// Re-evaluates `rule` with every witnessed quantifier pinned to its witness.
pub fn replay(rule: &RuleAst, inst: &ArraInstance, bindings: &[(&str, Value)], step: &TraceStep) -> Result<bool> {
    let ev = Ev::new(inst);
    let pins: HashMap<usize, &Value> = step
        .witnesses
        .iter()
        .filter_map(|w| w.node.map(|n| (n, &w.value)))
        .collect();
    with_bindings(bindings, None, &mut |env| match &rule.root {
        Expr::Or(es) => {
            let mut cid = 1;
            for c in es.iter().take(step.disjunct) {
                cid += c.size();
            }
            match es.get(step.disjunct) {
                Some(c) => ev.replay(c, cid, env, &pins),
                None => Ok(false),
            }
        }
        root => ev.replay(root, 0, env, &pins),
    })
}

/// `{ v ∈ ROLES | predicate(v) }`.
pub fn select_roles(builder: &SetBuilder, inst: &ArraInstance) -> Result<BTreeSet<RoleId>> {
    let ev = Ev::new(inst);
    let mut out = BTreeSet::new();
    for v in inst.role_values() {
        let env = Env {
            name: &builder.var,
            val: Tv::of(v),
            up: None,
        };
        if ev.eval(&builder.predicate, Some(&env))? {
            out.insert(RoleId::from(v.as_atom().expect("roles are atoms")));
        }
    }
    Ok(out)
}

/// All-or-nothing set form: allowed iff χ is non-empty and every `r1 ∈ χ`
/// satisfies `rule` with `(au, r1, r)`, where `r` is bound to `target_param`.
pub fn evaluate_set_form(
    rule: &RuleAst,
    target_param: &str,
    inst: &ArraInstance,
    au: &str,
    chi: &BTreeSet<RoleId>,
    r: &str,
) -> Result<Decision> {
    if chi.is_empty() {
        return Ok(Decision::deny());
    }
    let mut trace = Vec::with_capacity(chi.len());
    for member in chi {
        let binds = [
            ("au", Value::atom(au)),
            ("r1", Value::atom(member.as_str())),
            (target_param, Value::atom(r)),
        ];
        let d = evaluate(rule, inst, &binds)?;
        if !d.allowed {
            return Ok(Decision::deny());
        }
        for mut step in d.trace {
            step.subject = Some(member.to_string());
            trace.push(step);
        }
    }
    Ok(Decision { allowed: true, trace })
}
