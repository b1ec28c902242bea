use std::fmt::{self, Write as _};

use crate::attributes::Target;

/// A reference to a registered attribute, resolved to its namespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AttrRef {
    pub name: String,
    pub target: Target,
}

impl AttrRef {
    pub fn new(name: impl Into<String>, target: Target) -> Self {
        AttrRef {
            name: name.into(),
            target,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(String),
    Lit(String),
    /// Atomic attribute application `att(t)`.
    Attr(AttrRef, Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn lit(value: impl Into<String>) -> Self {
        Term::Lit(value.into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binder {
    One(String),
    /// Destructures a pair-valued domain element.
    Pair(String, String),
}

impl Binder {
    pub fn names(&self) -> Vec<&str> {
        match self {
            Binder::One(a) => vec![a],
            Binder::Pair(a, b) => vec![a, b],
        }
    }
}

/// Quantifier domains and set expressions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Domain {
    Roles,
    AdminRoles,
    /// Pairs `(au, ar)` of the admin-user/admin-role assignment.
    Aua,
    /// `aroles(t)`: admin roles assigned to an admin user.
    AdminRolesOf(Term),
    /// The value set of a set-valued attribute (a singleton for atomic ones).
    Attr(AttrRef, Term),
    /// `Scope(att)`.
    Scope(AttrRef),
    /// `⌈x, y⌉`.
    Range(Term, Term),
    Lit(Vec<String>),
}

/// Relations usable in `(edge a b REL)`; pairs read junior-first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Relation {
    /// RH, the direct edges.
    Direct,
    /// RH⁺.
    Transitive,
    /// RH*.
    Reflexive,
    /// (RH ∪ {(a, b)})*.
    ReflexiveWith(Term, Term),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quantifier {
    pub binder: Binder,
    pub domain: Domain,
    pub body: Box<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Bool(bool),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Not(Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Iff(Box<Expr>, Box<Expr>),
    Exists(Quantifier),
    ForAll(Quantifier),
    MemberOf(Term, Domain),
    Eq(Term, Term),
    Senior(Term, Term),
    Junior(Term, Term),
    Incomparable(Term, Term),
    /// `t ∈ ⌈x, y⌉`.
    InRange(Term, Term, Term),
    EdgeIn(Term, Term, Relation),
    Dominates(AttrRef, Domain, Domain),
}

impl Expr {
    pub fn exists(binder: Binder, domain: Domain, body: Expr) -> Self {
        Expr::Exists(Quantifier {
            binder,
            domain,
            body: Box::new(body),
        })
    }

    pub fn forall(binder: Binder, domain: Domain, body: Expr) -> Self {
        Expr::ForAll(Quantifier {
            binder,
            domain,
            body: Box::new(body),
        })
    }

    pub fn negate(e: Expr) -> Self {
        Expr::Not(Box::new(e))
    }

    /// Direct sub-expressions, in pre-order.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::And(es) | Expr::Or(es) => es.iter().collect(),
            Expr::Not(e) => vec![e],
            Expr::Implies(a, b) | Expr::Iff(a, b) => vec![a, b],
            Expr::Exists(q) | Expr::ForAll(q) => vec![&q.body],
            _ => Vec::new(),
        }
    }

    /// Number of expression nodes in this subtree.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Every attribute referenced anywhere in the subtree.
    pub fn attributes(&self) -> Vec<&AttrRef> {
        fn term<'a>(t: &'a Term, out: &mut Vec<&'a AttrRef>) {
            if let Term::Attr(a, inner) = t {
                out.push(a);
                term(inner, out);
            }
        }
        fn domain<'a>(d: &'a Domain, out: &mut Vec<&'a AttrRef>) {
            match d {
                Domain::AdminRolesOf(t) => term(t, out),
                Domain::Attr(a, t) => {
                    out.push(a);
                    term(t, out);
                }
                Domain::Scope(a) => out.push(a),
                Domain::Range(x, y) => {
                    term(x, out);
                    term(y, out);
                }
                Domain::Roles | Domain::AdminRoles | Domain::Aua | Domain::Lit(_) => {}
            }
        }
        fn walk<'a>(e: &'a Expr, out: &mut Vec<&'a AttrRef>) {
            match e {
                Expr::Exists(q) | Expr::ForAll(q) => domain(&q.domain, out),
                Expr::MemberOf(t, d) => {
                    term(t, out);
                    domain(d, out);
                }
                Expr::Eq(a, b) | Expr::Senior(a, b) | Expr::Junior(a, b) | Expr::Incomparable(a, b) => {
                    term(a, out);
                    term(b, out);
                }
                Expr::InRange(a, b, c) => {
                    term(a, out);
                    term(b, out);
                    term(c, out);
                }
                Expr::EdgeIn(a, b, r) => {
                    term(a, out);
                    term(b, out);
                    if let Relation::ReflexiveWith(c, d) = r {
                        term(c, out);
                        term(d, out);
                    }
                }
                Expr::Dominates(a, x, y) => {
                    out.push(a);
                    domain(x, out);
                    domain(y, out);
                }
                _ => {}
            }
            for c in e.children() {
                walk(c, out);
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }
}

/// A parsed, fully bound authorization formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleAst {
    pub root: Expr,
}

impl RuleAst {
    pub fn new(root: Expr) -> Self {
        RuleAst { root }
    }

    /// Multi-line rendering; parses back to the same AST.
    pub fn pretty(&self) -> String {
        let mut out = String::new();
        pretty(&self.root, 0, &mut out);
        out
    }
}

/// `{ v ∈ ROLES | predicate(v) }`, written `(select v predicate)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetBuilder {
    pub var: String,
    pub predicate: Expr,
}

fn write_str_lit(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('"')
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Lit(s) => write_str_lit(f, s),
            Term::Attr(a, t) => write!(f, "(attr {} {t})", a.name),
        }
    }
}

impl fmt::Display for Binder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Binder::One(a) => f.write_str(a),
            Binder::Pair(a, b) => write!(f, "({a} {b})"),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Roles => f.write_str("roles"),
            Domain::AdminRoles => f.write_str("ar"),
            Domain::Aua => f.write_str("aua"),
            Domain::AdminRolesOf(t) => write!(f, "(aroles {t})"),
            Domain::Attr(a, t) => write!(f, "(attr {} {t})", a.name),
            Domain::Scope(a) => write!(f, "(scope {})", a.name),
            Domain::Range(x, y) => write!(f, "(range {x} {y})"),
            Domain::Lit(vs) => {
                f.write_str("(lit")?;
                for v in vs {
                    f.write_char(' ')?;
                    write_str_lit(f, v)?;
                }
                f.write_char(')')
            }
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::Direct => f.write_str("rh"),
            Relation::Transitive => f.write_str("rh+"),
            Relation::Reflexive => f.write_str("rh*"),
            Relation::ReflexiveWith(a, b) => write!(f, "(rh*-with {a} {b})"),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, head: &str, es: &[&Expr]| {
            f.write_char('(')?;
            f.write_str(head)?;
            for e in es {
                write!(f, " {e}")?;
            }
            f.write_char(')')
        };
        match self {
            Expr::Bool(true) => f.write_str("true"),
            Expr::Bool(false) => f.write_str("false"),
            Expr::And(es) => list(f, "and", &es.iter().collect::<Vec<_>>()),
            Expr::Or(es) => list(f, "or", &es.iter().collect::<Vec<_>>()),
            Expr::Not(e) => list(f, "not", &[e]),
            Expr::Implies(a, b) => list(f, "implies", &[a, b]),
            Expr::Iff(a, b) => list(f, "iff", &[a, b]),
            Expr::Exists(q) => write!(f, "(exists {} {} {})", q.binder, q.domain, q.body),
            Expr::ForAll(q) => write!(f, "(forall {} {} {})", q.binder, q.domain, q.body),
            Expr::MemberOf(t, d) => write!(f, "(in {t} {d})"),
            Expr::Eq(a, b) => write!(f, "(eq {a} {b})"),
            Expr::Senior(a, b) => write!(f, "(senior {a} {b})"),
            Expr::Junior(a, b) => write!(f, "(junior {a} {b})"),
            Expr::Incomparable(a, b) => write!(f, "(incomparable {a} {b})"),
            Expr::InRange(t, x, y) => write!(f, "(in-range {t} {x} {y})"),
            Expr::EdgeIn(a, b, r) => write!(f, "(edge {a} {b} {r})"),
            Expr::Dominates(a, x, y) => write!(f, "(dominates {} {x} {y})", a.name),
        }
    }
}

impl fmt::Display for RuleAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

impl fmt::Display for SetBuilder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(select {} {})", self.var, self.predicate)
    }
}

const WIDTH: usize = 78;

fn pretty(e: &Expr, indent: usize, out: &mut String) {
    let flat = e.to_string();
    if indent + flat.len() <= WIDTH {
        out.push_str(&flat);
        return;
    }
    let (head, children): (String, Vec<&Expr>) = match e {
        Expr::And(es) => ("(and".into(), es.iter().collect()),
        Expr::Or(es) => ("(or".into(), es.iter().collect()),
        Expr::Not(x) => ("(not".into(), vec![x]),
        Expr::Implies(a, b) => ("(implies".into(), vec![a, b]),
        Expr::Iff(a, b) => ("(iff".into(), vec![a, b]),
        Expr::Exists(q) => (format!("(exists {} {}", q.binder, q.domain), vec![&q.body]),
        Expr::ForAll(q) => (format!("(forall {} {}", q.binder, q.domain), vec![&q.body]),
        _ => {
            out.push_str(&flat);
            return;
        }
    };
    out.push_str(&head);
    for c in children {
        out.push('\n');
        out.extend(std::iter::repeat_n(' ', indent + 2));
        pretty(c, indent + 2, out);
    }
    out.push(')');
}
