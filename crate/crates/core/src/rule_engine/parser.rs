//! Concrete syntax: a small s-expression reader followed by a binding and
//! kind checker that resolves every attribute reference to its namespace.

use std::collections::BTreeSet;

use crate::attributes::{AttributeSchema, Attributes, ScopeSpec, Target, ValueKind};
use crate::error::{Error, Result};

use super::ast::{AttrRef, Binder, Domain, Expr, Quantifier, Relation, RuleAst, SetBuilder, Term};

/// Static kind of a term, used to pick the attribute namespace of `(attr A t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    AdminUser,
    AdminRole,
    Role,
    /// A non-role scope element.
    Scalar,
    /// An unsplit pair (e.g. an authority range bound to one variable).
    Pair,
    /// A literal; resolved by attribute name alone.
    Any,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Elem {
    One(Kind),
    Two(Kind, Kind),
}

/// Names and kinds of the free variables a rule may use.
#[derive(Debug, Clone)]
pub struct RuleContext<'a> {
    attrs: &'a Attributes,
    params: Vec<(String, Kind)>,
}

impl<'a> RuleContext<'a> {
    pub fn new(attrs: &'a Attributes, params: &[(&str, Kind)]) -> Self {
        RuleContext {
            attrs,
            params: params.iter().map(|(n, k)| (n.to_string(), *k)).collect(),
        }
    }

    /// Parameters `au`, `r1`, `r2` of `is_authorizedR_op(au, r1, r2)`.
    pub fn single_form(attrs: &'a Attributes) -> Self {
        Self::new(
            attrs,
            &[("au", Kind::AdminUser), ("r1", Kind::Role), ("r2", Kind::Role)],
        )
    }

    /// Parameters of a set-form rule, checked once per member `r1` of χ against `r`.
    pub fn set_form(attrs: &'a Attributes) -> Self {
        Self::new(attrs, &[("au", Kind::AdminUser), ("r1", Kind::Role), ("r", Kind::Role)])
    }
}

pub fn parse_rule(src: &str, ctx: &RuleContext<'_>) -> Result<RuleAst> {
    let sx = read_one(src)?;
    let mut scope = Scope::new(ctx);
    Ok(RuleAst::new(scope.expr(&sx)?))
}

/// Parses `(select VAR predicate)`; the predicate may mention only `VAR`.
pub fn parse_set_builder(src: &str, attrs: &Attributes) -> Result<SetBuilder> {
    let sx = read_one(src)?;
    let items = match &sx {
        Sx::List(items, _) if head(items) == Some("select") => items,
        other => return Err(other.pos().error("expected (select VAR predicate)")),
    };
    if items.len() != 3 {
        return Err(sx.pos().error("select takes a variable and a predicate"));
    }
    let var = symbol(&items[1])?;
    let ctx = RuleContext::new(attrs, &[(var, Kind::Role)]);
    let mut scope = Scope::new(&ctx);
    Ok(SetBuilder {
        var: var.to_string(),
        predicate: scope.expr(&items[2])?,
    })
}

/// Re-checks a programmatically built rule: it must print to text that
/// parses back to the same tree under `ctx`.
pub fn check_rule(rule: &RuleAst, ctx: &RuleContext<'_>) -> Result<()> {
    let reparsed = parse_rule(&rule.to_string(), ctx)?;
    if &reparsed != rule {
        return Err(Error::Type("rule does not survive a print/parse round trip".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

impl Pos {
    fn error(self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }
}

#[derive(Debug)]
enum Sx {
    Sym(String, Pos),
    Str(String, Pos),
    List(Vec<Sx>, Pos),
}

impl Sx {
    fn pos(&self) -> Pos {
        match self {
            Sx::Sym(_, p) | Sx::Str(_, p) | Sx::List(_, p) => *p,
        }
    }
}

fn head(items: &[Sx]) -> Option<&str> {
    match items.first() {
        Some(Sx::Sym(s, _)) => Some(s),
        _ => None,
    }
}

fn symbol(sx: &Sx) -> Result<&str> {
    match sx {
        Sx::Sym(s, _) => Ok(s),
        other => Err(other.pos().error("expected a name")),
    }
}

enum Tok {
    Open,
    Close,
    Sym(String),
    /// A symbol immediately followed by `(`, as in `aroles(au)`.
    Call(String),
    Str(String),
}

fn is_delim(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | ')' | '"' | ';')
}

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut column) = (1, 1);
    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else if c.is_some() {
                column += 1;
            }
            c
        }};
    }
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, column };
        match c {
            c if c.is_whitespace() => {
                bump!();
            }
            ';' => {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    bump!();
                }
            }
            '(' => {
                bump!();
                out.push((Tok::Open, pos));
            }
            ')' => {
                bump!();
                out.push((Tok::Close, pos));
            }
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    match bump!() {
                        None => return Err(pos.error("unterminated string literal")),
                        Some('"') => break,
                        Some('\\') => match bump!() {
                            Some(e @ ('"' | '\\')) => s.push(e),
                            _ => return Err(Pos { line, column }.error("unknown escape in string literal")),
                        },
                        Some(c) => s.push(c),
                    }
                }
                out.push((Tok::Str(s), pos));
            }
            _ => {
                let mut s = String::new();
                while chars.peek().is_some_and(|&c| !is_delim(c)) {
                    s.push(bump!().unwrap());
                }
                if chars.peek() == Some(&'(') {
                    bump!();
                    out.push((Tok::Call(s), pos));
                } else {
                    out.push((Tok::Sym(s), pos));
                }
            }
        }
    }
    Ok(out)
}

fn read_one(src: &str) -> Result<Sx> {
    let toks = lex(src)?;
    let mut it = toks.into_iter().peekable();
    let Some(first) = it.next() else {
        return Err(Pos { line: 1, column: 1 }.error("empty rule"));
    };
    let sx = read(first, &mut it)?;
    if let Some((_, pos)) = it.next() {
        return Err(pos.error("trailing input after rule"));
    }
    Ok(sx)
}

fn read(tok: (Tok, Pos), it: &mut impl Iterator<Item = (Tok, Pos)>) -> Result<Sx> {
    let (tok, pos) = tok;
    let mut list = match tok {
        Tok::Sym(s) => return Ok(Sx::Sym(s, pos)),
        Tok::Str(s) => return Ok(Sx::Str(s, pos)),
        Tok::Close => return Err(pos.error("unexpected `)`")),
        Tok::Open => Vec::new(),
        Tok::Call(s) => vec![Sx::Sym(s, pos)],
    };
    loop {
        match it.next() {
            None => return Err(pos.error("unclosed `(`")),
            Some((Tok::Close, _)) => return Ok(Sx::List(list, pos)),
            Some(t) => list.push(read(t, it)?),
        }
    }
}

struct Scope<'c, 'a> {
    ctx: &'c RuleContext<'a>,
    vars: Vec<(String, Kind)>,
}

fn arity(items: &[Sx], pos: Pos, n: usize) -> Result<()> {
    if items.len() != n + 1 {
        let name = head(items).unwrap_or("form");
        return Err(pos.error(format!("`{name}` takes {n} argument(s), got {}", items.len() - 1)));
    }
    Ok(())
}

fn elem_of(schema: &AttributeSchema) -> Elem {
    match &schema.scope {
        ScopeSpec::Roles => Elem::One(Kind::Role),
        ScopeSpec::HierarchyClosure => Elem::Two(Kind::Role, Kind::Role),
        ScopeSpec::Values(_) if schema.pair_valued() => Elem::Two(Kind::Any, Kind::Any),
        ScopeSpec::Values(_) => Elem::One(Kind::Scalar),
    }
}

fn one_kind(elem: Elem) -> Kind {
    match elem {
        Elem::One(k) => k,
        Elem::Two(..) => Kind::Pair,
    }
}

impl<'c, 'a> Scope<'c, 'a> {
    fn new(ctx: &'c RuleContext<'a>) -> Self {
        Scope {
            ctx,
            vars: ctx.params.clone(),
        }
    }

    fn lookup(&self, name: &str) -> Option<Kind> {
        self.vars.iter().rev().find(|(n, _)| n == name).map(|(_, k)| *k)
    }

    fn attr_by_kind(&self, name: &str, kind: Kind, pos: Pos) -> Result<&'a AttributeSchema> {
        let target = match kind {
            Kind::AdminUser => Some(Target::AdminUser),
            Kind::AdminRole => Some(Target::AdminRole),
            Kind::Role => Some(Target::Role),
            Kind::Any => None,
            Kind::Scalar | Kind::Pair => {
                return Err(Error::Type(format!(
                    "attribute `{name}` applied to a non-entity term at {}:{}",
                    pos.line, pos.column
                )))
            }
        };
        let attrs = self.ctx.attrs;
        match target {
            Some(t) => attrs.schema(t, name).ok_or_else(|| {
                if attrs.by_name(name).next().is_some() {
                    Error::Type(format!("attribute `{name}` is not defined on {t} entities"))
                } else {
                    Error::UnknownAttribute(name.into())
                }
            }),
            None => self.attr_by_name(name),
        }
    }

    fn attr_by_name(&self, name: &str) -> Result<&'a AttributeSchema> {
        let found: Vec<&AttributeSchema> = self.ctx.attrs.by_name(name).collect();
        match found.as_slice() {
            [] => Err(Error::UnknownAttribute(name.into())),
            [one] => Ok(one),
            _ => Err(Error::Type(format!(
                "attribute `{name}` is defined for several targets; apply it to a typed term"
            ))),
        }
    }

    fn term(&self, sx: &Sx) -> Result<(Term, Kind)> {
        match sx {
            Sx::Str(s, _) => Ok((Term::Lit(s.clone()), Kind::Any)),
            Sx::Sym(s, _) => match self.lookup(s) {
                Some(k) => Ok((Term::Var(s.clone()), k)),
                None => Err(Error::Bind(s.clone())),
            },
            Sx::List(items, pos) => {
                if head(items) != Some("attr") {
                    return Err(pos.error("expected a variable, a quoted literal or (attr NAME term)"));
                }
                arity(items, *pos, 2)?;
                let name = symbol(&items[1])?;
                let (inner, kind) = self.term(&items[2])?;
                let schema = self.attr_by_kind(name, kind, *pos)?;
                if schema.value_kind != ValueKind::Atomic {
                    return Err(Error::Type(format!(
                        "set-valued attribute `{name}` used as a term; use it as a set"
                    )));
                }
                Ok((
                    Term::Attr(AttrRef::new(name, schema.target), Box::new(inner)),
                    one_kind(elem_of(schema)),
                ))
            }
        }
    }

    fn role_term(&self, sx: &Sx) -> Result<Term> {
        let (t, k) = self.term(sx)?;
        match k {
            Kind::Role | Kind::Any => Ok(t),
            other => Err(Error::Type(format!(
                "`{t}` has kind {other:?} where a role is expected"
            ))),
        }
    }

    fn domain(&self, sx: &Sx) -> Result<(Domain, Elem)> {
        match sx {
            Sx::Sym(s, pos) => match s.as_str() {
                "roles" => Ok((Domain::Roles, Elem::One(Kind::Role))),
                "ar" => Ok((Domain::AdminRoles, Elem::One(Kind::AdminRole))),
                "aua" => Ok((Domain::Aua, Elem::Two(Kind::AdminUser, Kind::AdminRole))),
                other => Err(pos.error(format!("unknown domain `{other}`"))),
            },
            Sx::Str(_, pos) => Err(pos.error("expected a domain")),
            Sx::List(items, pos) => match head(items) {
                Some("aroles") => {
                    arity(items, *pos, 1)?;
                    let (t, k) = self.term(&items[1])?;
                    if !matches!(k, Kind::AdminUser | Kind::Any) {
                        return Err(Error::Type(format!("aroles expects an admin user, got `{t}`")));
                    }
                    Ok((Domain::AdminRolesOf(t), Elem::One(Kind::AdminRole)))
                }
                Some("attr") => {
                    arity(items, *pos, 2)?;
                    let name = symbol(&items[1])?;
                    let (t, k) = self.term(&items[2])?;
                    let schema = self.attr_by_kind(name, k, *pos)?;
                    Ok((Domain::Attr(AttrRef::new(name, schema.target), t), elem_of(schema)))
                }
                Some("scope") => {
                    arity(items, *pos, 1)?;
                    let name = symbol(&items[1])?;
                    let schema = self.scope_attr(name)?;
                    Ok((Domain::Scope(AttrRef::new(name, schema.target)), elem_of(schema)))
                }
                Some("range") => {
                    arity(items, *pos, 2)?;
                    let x = self.role_term(&items[1])?;
                    let y = self.role_term(&items[2])?;
                    Ok((Domain::Range(x, y), Elem::One(Kind::Role)))
                }
                Some("lit") => {
                    if items.len() < 2 {
                        return Err(pos.error("`lit` needs at least one value"));
                    }
                    let mut vals = BTreeSet::new();
                    for it in &items[1..] {
                        match it {
                            Sx::Sym(s, _) | Sx::Str(s, _) => {
                                vals.insert(s.clone());
                            }
                            Sx::List(_, p) => return Err(p.error("`lit` values must be tokens")),
                        }
                    }
                    Ok((Domain::Lit(vals.into_iter().collect()), Elem::One(Kind::Any)))
                }
                _ => Err(pos.error("expected a domain")),
            },
        }
    }

    /// `(scope A)` has no term to disambiguate the namespace; several
    /// definitions are accepted only when they share one scope.
    fn scope_attr(&self, name: &str) -> Result<&'a AttributeSchema> {
        let found: Vec<&AttributeSchema> = self.ctx.attrs.by_name(name).collect();
        match found.first() {
            None => Err(Error::UnknownAttribute(name.into())),
            Some(first) => {
                let a = self.ctx.attrs.scope(first.target, name)?;
                for other in &found[1..] {
                    if self.ctx.attrs.scope(other.target, name)? != a {
                        return Err(Error::Type(format!(
                            "attribute `{name}` has different scopes per target"
                        )));
                    }
                }
                Ok(first)
            }
        }
    }

    fn binder(&self, sx: &Sx, elem: Elem) -> Result<(Binder, Vec<(String, Kind)>)> {
        match sx {
            Sx::Sym(s, _) => Ok((Binder::One(s.clone()), vec![(s.clone(), one_kind(elem))])),
            Sx::List(items, pos) => {
                let [a, b] = items.as_slice() else {
                    return Err(pos.error("a pair binder has exactly two names"));
                };
                let (a, b) = (symbol(a)?, symbol(b)?);
                let Elem::Two(ka, kb) = elem else {
                    return Err(Error::Type(format!(
                        "pair binder ({a} {b}) over a domain of single values"
                    )));
                };
                Ok((Binder::Pair(a.into(), b.into()), vec![(a.into(), ka), (b.into(), kb)]))
            }
            Sx::Str(_, pos) => Err(pos.error("expected a binder")),
        }
    }

    fn relation(&self, sx: &Sx) -> Result<Relation> {
        match sx {
            Sx::Sym(s, pos) => match s.as_str() {
                "rh" => Ok(Relation::Direct),
                "rh+" => Ok(Relation::Transitive),
                "rh*" => Ok(Relation::Reflexive),
                _ => Err(pos.error(format!("unknown relation `{s}`"))),
            },
            Sx::List(items, pos) if head(items) == Some("rh*-with") => {
                arity(items, *pos, 2)?;
                Ok(Relation::ReflexiveWith(
                    self.role_term(&items[1])?,
                    self.role_term(&items[2])?,
                ))
            }
            other => Err(other.pos().error("expected rh, rh+, rh* or (rh*-with a b)")),
        }
    }

    fn exprs(&mut self, items: &[Sx]) -> Result<Vec<Expr>> {
        items.iter().map(|sx| self.expr(sx)).collect()
    }

    fn expr(&mut self, sx: &Sx) -> Result<Expr> {
        let (items, pos) = match sx {
            Sx::Sym(s, pos) => {
                return match s.as_str() {
                    "true" => Ok(Expr::Bool(true)),
                    "false" => Ok(Expr::Bool(false)),
                    _ => Err(pos.error(format!("expected an expression, found `{s}`"))),
                }
            }
            Sx::Str(_, pos) => return Err(pos.error("expected an expression, found a literal")),
            Sx::List(items, pos) => (items, *pos),
        };
        let Some(op) = head(items) else {
            return Err(pos.error("expected an operator"));
        };
        let args = &items[1..];
        match op {
            "and" | "or" => {
                if args.is_empty() {
                    return Err(pos.error(format!("`{op}` needs at least one operand")));
                }
                let es = self.exprs(args)?;
                Ok(if op == "and" { Expr::And(es) } else { Expr::Or(es) })
            }
            "not" => {
                arity(items, pos, 1)?;
                Ok(Expr::negate(self.expr(&args[0])?))
            }
            "implies" | "iff" => {
                arity(items, pos, 2)?;
                let a = Box::new(self.expr(&args[0])?);
                let b = Box::new(self.expr(&args[1])?);
                Ok(if op == "implies" {
                    Expr::Implies(a, b)
                } else {
                    Expr::Iff(a, b)
                })
            }
            "exists" | "forall" => {
                arity(items, pos, 3)?;
                let (domain, elem) = self.domain(&args[1])?;
                let (binder, bound) = self.binder(&args[0], elem)?;
                let depth = self.vars.len();
                self.vars.extend(bound);
                let body = self.expr(&args[2]);
                self.vars.truncate(depth);
                let q = Quantifier {
                    binder,
                    domain,
                    body: Box::new(body?),
                };
                Ok(if op == "exists" {
                    Expr::Exists(q)
                } else {
                    Expr::ForAll(q)
                })
            }
            "in" => {
                arity(items, pos, 2)?;
                let (t, _) = self.term(&args[0])?;
                let (d, _) = self.domain(&args[1])?;
                Ok(Expr::MemberOf(t, d))
            }
            "eq" => {
                arity(items, pos, 2)?;
                Ok(Expr::Eq(self.term(&args[0])?.0, self.term(&args[1])?.0))
            }
            "senior" | "junior" | "incomparable" => {
                arity(items, pos, 2)?;
                let a = self.role_term(&args[0])?;
                let b = self.role_term(&args[1])?;
                Ok(match op {
                    "senior" => Expr::Senior(a, b),
                    "junior" => Expr::Junior(a, b),
                    _ => Expr::Incomparable(a, b),
                })
            }
            "in-range" => {
                arity(items, pos, 3)?;
                Ok(Expr::InRange(
                    self.role_term(&args[0])?,
                    self.role_term(&args[1])?,
                    self.role_term(&args[2])?,
                ))
            }
            "edge" => {
                arity(items, pos, 3)?;
                Ok(Expr::EdgeIn(
                    self.role_term(&args[0])?,
                    self.role_term(&args[1])?,
                    self.relation(&args[2])?,
                ))
            }
            "dominates" => {
                arity(items, pos, 3)?;
                let name = symbol(&args[0])?;
                let schema = self.ordered_attr(name)?;
                let (x, _) = self.domain(&args[1])?;
                let (y, _) = self.domain(&args[2])?;
                Ok(Expr::Dominates(AttrRef::new(name, schema.target), x, y))
            }
            other => Err(pos.error(format!("unknown operator `{other}`"))),
        }
    }

    fn ordered_attr(&self, name: &str) -> Result<&'a AttributeSchema> {
        let found: Vec<&AttributeSchema> = self.ctx.attrs.by_name(name).collect();
        if found.is_empty() {
            return Err(Error::UnknownAttribute(name.into()));
        }
        let ordered: Vec<&AttributeSchema> = found.into_iter().filter(|s| s.ordered).collect();
        match ordered.as_slice() {
            [] => Err(Error::NotOrdered(name.into())),
            [one] => Ok(one),
            _ => Err(Error::Type(format!(
                "ordered attribute `{name}` is defined for several targets"
            ))),
        }
    }
}
