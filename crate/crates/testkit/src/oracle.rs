//! Deliberately naive re-implementations used as test oracles.
//!
//! Nothing here reuses the engine's closure, range or evaluation code: the
//! closure is Warshall's algorithm over the raw edge list, the interpreter
//! keeps a `HashMap` environment and evaluates every operand (no short
//! circuit), and domains are rebuilt from the instance parts.

use std::collections::{BTreeSet, HashMap, HashSet};

use arra_core::attributes::{AttrValue, OrderSpec, ScopeSpec, Target, ValueKind};
use arra_core::rule_engine::{AttrRef, Binder, Domain, Expr, Relation, Term};
use arra_core::{ArraInstance, RoleGraph, Value};

/// Reflexive-transitive closure as a boolean matrix over sorted node names.
#[derive(Debug, Clone)]
pub struct Closure {
    names: Vec<String>,
    le: Vec<Vec<bool>>,
}

impl Closure {
    pub fn of(nodes: impl IntoIterator<Item = String>, edges: impl IntoIterator<Item = (String, String)>) -> Self {
        let mut names: Vec<String> = nodes.into_iter().collect();
        names.sort();
        names.dedup();
        let n = names.len();
        let idx: HashMap<&str, usize> = names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut le = vec![vec![false; n]; n];
        for (i, row) in le.iter_mut().enumerate() {
            row[i] = true;
        }
        for (a, b) in edges {
            if let (Some(&i), Some(&j)) = (idx.get(a.as_str()), idx.get(b.as_str())) {
                le[i][j] = true;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if le[i][k] && le[k][j] {
                        le[i][j] = true;
                    }
                }
            }
        }
        Closure { names, le }
    }

    pub fn graph(g: &RoleGraph) -> Self {
        Self::of(
            g.nodes().iter().map(|r| r.to_string()),
            g.edges().iter().map(|(a, b)| (a.to_string(), b.to_string())),
        )
    }

    fn idx(&self, a: &str) -> Option<usize> {
        self.names.iter().position(|n| n == a)
    }

    pub fn knows(&self, a: &str) -> bool {
        self.idx(a).is_some()
    }

    /// `a ≤ b`.
    pub fn le(&self, a: &str, b: &str) -> bool {
        match (self.idx(a), self.idx(b)) {
            (Some(i), Some(j)) => self.le[i][j],
            _ => false,
        }
    }

    /// `a < b`.
    pub fn lt(&self, a: &str, b: &str) -> bool {
        a != b && self.le(a, b)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// The encapsulation formula as a double loop over interior and exterior.
pub fn encapsulated(g: &RoleGraph, x: &str, y: &str) -> bool {
    let c = Closure::graph(g);
    let interior: Vec<&String> = c.names().iter().filter(|r| c.lt(x, r) && c.lt(r, y)).collect();
    for p in &interior {
        for q in c.names() {
            if interior.contains(&q) {
                continue;
            }
            if c.lt(p, q) != c.le(y, q) || c.lt(q, p) != c.le(q, x) {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum V {
    A(String),
    P(String, String),
}

impl V {
    fn of(v: &Value) -> Self {
        match v {
            Value::Atom(a) => V::A(a.clone()),
            Value::Pair(a, b) => V::P(a.clone(), b.clone()),
        }
    }

    fn atom(&self) -> Result<&str, String> {
        match self {
            V::A(a) => Ok(a),
            V::P(..) => Err("pair where an atom is expected".into()),
        }
    }
}

type Env = HashMap<String, V>;
type R<T> = Result<T, String>;

/// Evaluates rules directly from an instance's parts.
pub struct Naive<'i> {
    inst: &'i ArraInstance,
    rh: Closure,
    arh: Closure,
}

impl<'i> Naive<'i> {
    pub fn new(inst: &'i ArraInstance) -> Self {
        Naive {
            inst,
            rh: Closure::graph(inst.roles()),
            arh: Closure::graph(inst.admin_roles()),
        }
    }

    pub fn eval(&self, e: &Expr, bindings: &[(&str, Value)]) -> R<bool> {
        let env: Env = bindings.iter().map(|(n, v)| (n.to_string(), V::of(v))).collect();
        self.expr(e, &env)
    }

    fn entity_exists(&self, target: Target, name: &str) -> bool {
        match target {
            Target::AdminUser => self.inst.admin_users().iter().any(|u| u.as_str() == name),
            Target::AdminRole => self.arh.knows(name),
            Target::Role => self.rh.knows(name),
        }
    }

    fn role<'a>(&self, v: &'a V) -> R<&'a str> {
        let a = v.atom()?;
        if self.rh.knows(a) {
            Ok(a)
        } else {
            Err(format!("unknown role {a}"))
        }
    }

    fn term(&self, t: &Term, env: &Env) -> R<V> {
        match t {
            Term::Var(v) => env.get(v).cloned().ok_or_else(|| format!("unbound {v}")),
            Term::Lit(s) => Ok(V::A(s.clone())),
            Term::Attr(a, inner) => {
                let e = self.term(inner, env)?;
                let e = e.atom()?;
                if !self.entity_exists(a.target, e) {
                    return Err(format!("unknown entity {e}"));
                }
                match self.inst.attributes().get_value(a.target, &a.name, e) {
                    Ok(AttrValue::Atomic(v)) => Ok(V::of(&v)),
                    Ok(AttrValue::Set(_)) => Err("set used as a term".into()),
                    Err(e) => Err(e.to_string()),
                }
            }
        }
    }

    fn scope(&self, a: &AttrRef) -> R<BTreeSet<V>> {
        let schema = self
            .inst
            .attributes()
            .schema(a.target, &a.name)
            .ok_or_else(|| format!("unknown attribute {}", a.name))?;
        Ok(match &schema.scope {
            ScopeSpec::Values(vs) => vs.iter().map(V::of).collect(),
            ScopeSpec::Roles => self.rh.names().iter().map(|r| V::A(r.clone())).collect(),
            ScopeSpec::HierarchyClosure => {
                let mut out = BTreeSet::new();
                for a in self.rh.names() {
                    for b in self.rh.names() {
                        if self.rh.lt(a, b) {
                            out.insert(V::P(a.clone(), b.clone()));
                        }
                    }
                }
                out
            }
        })
    }

    fn domain(&self, d: &Domain, env: &Env) -> R<Vec<V>> {
        let mut out: Vec<V> = match d {
            Domain::Roles => self.rh.names().iter().map(|r| V::A(r.clone())).collect(),
            Domain::AdminRoles => self.arh.names().iter().map(|r| V::A(r.clone())).collect(),
            Domain::Aua => self
                .inst
                .aua()
                .iter()
                .map(|(u, r)| V::P(u.to_string(), r.to_string()))
                .collect(),
            Domain::AdminRolesOf(t) => {
                let u = self.term(t, env)?;
                let u = u.atom()?;
                if !self.entity_exists(Target::AdminUser, u) {
                    return Err(format!("unknown admin user {u}"));
                }
                let direct: Vec<String> = self
                    .inst
                    .aua()
                    .iter()
                    .filter(|(au, _)| au.as_str() == u)
                    .map(|(_, r)| r.to_string())
                    .collect();
                let closure = self.inst.flags().aroles_closure;
                self.arh
                    .names()
                    .iter()
                    .filter(|ar| {
                        direct
                            .iter()
                            .any(|d| if closure { self.arh.le(ar, d) } else { *ar == d })
                    })
                    .map(|ar| V::A(ar.clone()))
                    .collect()
            }
            Domain::Attr(a, t) => {
                let e = self.term(t, env)?;
                let e = e.atom()?;
                if !self.entity_exists(a.target, e) {
                    return Err(format!("unknown entity {e}"));
                }
                match self
                    .inst
                    .attributes()
                    .get_value(a.target, &a.name, e)
                    .map_err(|e| e.to_string())?
                {
                    AttrValue::Atomic(v) => vec![V::of(&v)],
                    AttrValue::Set(s) => s.iter().map(V::of).collect(),
                }
            }
            Domain::Scope(a) => self.scope(a)?.into_iter().collect(),
            Domain::Range(x, y) => {
                let x = self.term(x, env)?;
                let y = self.term(y, env)?;
                let (x, y) = (self.role(&x)?, self.role(&y)?);
                self.rh
                    .names()
                    .iter()
                    .filter(|r| self.rh.lt(x, r) && self.rh.lt(r, y))
                    .map(|r| V::A(r.clone()))
                    .collect()
            }
            Domain::Lit(vs) => vs.iter().map(|v| V::A(v.clone())).collect(),
        };
        out.sort();
        out.dedup();
        Ok(out)
    }

    fn bind(&self, b: &Binder, v: &V, env: &Env) -> R<Env> {
        let mut env = env.clone();
        match (b, v) {
            (Binder::One(x), v) => {
                env.insert(x.clone(), v.clone());
            }
            (Binder::Pair(x, y), V::P(a, c)) => {
                env.insert(x.clone(), V::A(a.clone()));
                env.insert(y.clone(), V::A(c.clone()));
            }
            (Binder::Pair(..), V::A(_)) => return Err("cannot destructure an atom".into()),
        }
        Ok(env)
    }

    fn dominates(&self, a: &AttrRef, xs: &[V], ys: &[V]) -> R<bool> {
        let schema = self
            .inst
            .attributes()
            .schema(a.target, &a.name)
            .ok_or_else(|| format!("unknown attribute {}", a.name))?;
        if !schema.ordered {
            return Err(format!("{} is not ordered", a.name));
        }
        let scope = self.scope(a)?;
        for v in xs.iter().chain(ys) {
            if !scope.contains(v) {
                return Err(format!("{v:?} outside the scope of {}", a.name));
            }
        }
        let key = |v: &V| format!("{v:?}");
        let pairs: Vec<(String, String)> = match &schema.scope_order {
            OrderSpec::Pairs(ps) => ps.iter().map(|(l, h)| (key(&V::of(l)), key(&V::of(h)))).collect(),
            OrderSpec::RoleHierarchy => self
                .inst
                .roles()
                .edges()
                .iter()
                .map(|(l, h)| (key(&V::A(l.to_string())), key(&V::A(h.to_string()))))
                .collect(),
        };
        let order = Closure::of(scope.iter().map(key), pairs);
        let mut all = true;
        for x in xs {
            for y in ys {
                all &= order.le(&key(y), &key(x));
            }
        }
        Ok(all)
    }

    fn expr(&self, e: &Expr, env: &Env) -> R<bool> {
        match e {
            Expr::Bool(b) => Ok(*b),
            Expr::And(es) => {
                let vs: Vec<bool> = es.iter().map(|c| self.expr(c, env)).collect::<R<_>>()?;
                Ok(vs.into_iter().all(|b| b))
            }
            Expr::Or(es) => {
                let vs: Vec<bool> = es.iter().map(|c| self.expr(c, env)).collect::<R<_>>()?;
                Ok(vs.into_iter().any(|b| b))
            }
            Expr::Not(a) => Ok(!self.expr(a, env)?),
            Expr::Implies(a, b) => {
                let (a, b) = (self.expr(a, env)?, self.expr(b, env)?);
                Ok(!a || b)
            }
            Expr::Iff(a, b) => Ok(self.expr(a, env)? == self.expr(b, env)?),
            Expr::Exists(q) | Expr::ForAll(q) => {
                let dom = self.domain(&q.domain, env)?;
                let mut results = Vec::new();
                for v in &dom {
                    let inner = self.bind(&q.binder, v, env)?;
                    results.push(self.expr(&q.body, &inner)?);
                }
                Ok(if matches!(e, Expr::Exists(_)) {
                    results.iter().any(|b| *b)
                } else {
                    results.iter().all(|b| *b)
                })
            }
            Expr::MemberOf(t, d) => {
                let t = self.term(t, env)?;
                Ok(self.domain(d, env)?.contains(&t))
            }
            Expr::Eq(a, b) => Ok(self.term(a, env)? == self.term(b, env)?),
            Expr::Senior(a, b) | Expr::Junior(a, b) | Expr::Incomparable(a, b) => {
                let (a, b) = (self.term(a, env)?, self.term(b, env)?);
                let (a, b) = (self.role(&a)?, self.role(&b)?);
                Ok(match e {
                    Expr::Senior(..) => self.rh.lt(b, a),
                    Expr::Junior(..) => self.rh.lt(a, b),
                    _ => a != b && !self.rh.le(a, b) && !self.rh.le(b, a),
                })
            }
            Expr::InRange(t, x, y) => {
                let (t, x, y) = (self.term(t, env)?, self.term(x, env)?, self.term(y, env)?);
                let (t, x, y) = (self.role(&t)?, self.role(&x)?, self.role(&y)?);
                Ok(self.rh.lt(x, t) && self.rh.lt(t, y))
            }
            Expr::EdgeIn(a, b, rel) => {
                let (a, b) = (self.term(a, env)?, self.term(b, env)?);
                let (a, b) = (self.role(&a)?, self.role(&b)?);
                Ok(match rel {
                    Relation::Direct => self
                        .inst
                        .roles()
                        .edges()
                        .iter()
                        .any(|(j, s)| j.as_str() == a && s.as_str() == b),
                    Relation::Transitive => self.rh.lt(a, b),
                    Relation::Reflexive => self.rh.le(a, b),
                    Relation::ReflexiveWith(c, d) => {
                        let (c, d) = (self.term(c, env)?, self.term(d, env)?);
                        let (c, d) = (self.role(&c)?.to_string(), self.role(&d)?.to_string());
                        let mut edges: HashSet<(String, String)> = self
                            .inst
                            .roles()
                            .edges()
                            .iter()
                            .map(|(j, s)| (j.to_string(), s.to_string()))
                            .collect();
                        edges.insert((c, d));
                        Closure::of(self.rh.names().iter().cloned(), edges).le(a, b)
                    }
                })
            }
            Expr::Dominates(a, x, y) => {
                let (xs, ys) = (self.domain(x, env)?, self.domain(y, env)?);
                self.dominates(a, &xs, &ys)
            }
        }
    }
}

/// Whether `attr` is declared set-valued (used by generators and checks).
pub fn is_set_valued(inst: &ArraInstance, target: Target, attr: &str) -> bool {
    inst.attributes()
        .schema(target, attr)
        .is_some_and(|s| s.value_kind == ValueKind::Set)
}
