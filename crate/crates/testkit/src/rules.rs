//! Random well-typed rule ASTs over the schemas of [`crate::gen::schemas`].

use rand::seq::SliceRandom;
use rand::Rng;

use arra_core::attributes::Target;
use arra_core::rule_engine::{AttrRef, Binder, Domain, Expr, Quantifier, Relation, RuleAst, Term};
use arra_core::ArraInstance;

use crate::gen::{LEVELS, TAGS};

/// Kinds the generator tracks for variables and terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum K {
    Role,
    User,
    AdminRole,
    /// A level or tag value.
    Scalar,
    /// An unsplit pair.
    Pair,
}

const KINDS: [K; 5] = [K::Role, K::User, K::AdminRole, K::Scalar, K::Pair];

fn attr(name: &str, target: Target) -> AttrRef {
    AttrRef::new(name, target)
}

pub struct RuleGen {
    roles: Vec<String>,
    users: Vec<String>,
    admin_roles: Vec<String>,
    vars: Vec<(String, K)>,
    fresh: usize,
}

impl RuleGen {
    pub fn new(inst: &ArraInstance, params: &[(&str, K)]) -> Self {
        RuleGen {
            roles: inst.roles().nodes().iter().map(|r| r.to_string()).collect(),
            users: inst.admin_users().iter().map(|u| u.to_string()).collect(),
            admin_roles: inst.admin_roles().nodes().iter().map(|r| r.to_string()).collect(),
            vars: params.iter().map(|(n, k)| (n.to_string(), *k)).collect(),
            fresh: 0,
        }
    }

    /// Parameters `au`, `r1`, `r2`.
    pub fn single_form(inst: &ArraInstance) -> Self {
        Self::new(inst, &[("au", K::User), ("r1", K::Role), ("r2", K::Role)])
    }

    /// Parameters `au`, `r1`, `r`.
    pub fn set_form(inst: &ArraInstance) -> Self {
        Self::new(inst, &[("au", K::User), ("r1", K::Role), ("r", K::Role)])
    }

    /// A set-builder predicate over the one role variable `x`.
    pub fn selector(inst: &ArraInstance) -> Self {
        Self::new(inst, &[("x", K::Role)])
    }

    pub fn rule<R: Rng>(&mut self, rng: &mut R, depth: usize) -> RuleAst {
        RuleAst::new(self.expr(rng, depth))
    }

    fn literal<R: Rng>(&self, rng: &mut R, k: K) -> Option<String> {
        // Unknown names are rare but present, to exercise error paths.
        if rng.gen_bool(0.03) {
            return Some("zz".into());
        }
        let pool: Vec<&str> = match k {
            K::Role => self.roles.iter().map(String::as_str).collect(),
            K::User => self.users.iter().map(String::as_str).collect(),
            K::AdminRole => self.admin_roles.iter().map(String::as_str).collect(),
            K::Scalar => LEVELS.iter().chain(TAGS.iter()).copied().collect(),
            K::Pair => return None,
        };
        pool.choose(rng).map(|s| s.to_string())
    }

    fn var<R: Rng>(&self, rng: &mut R, k: K) -> Option<String> {
        let vs: Vec<&String> = self.vars.iter().filter(|(_, vk)| *vk == k).map(|(n, _)| n).collect();
        vs.choose(rng).map(|s| s.to_string())
    }

    fn term<R: Rng>(&self, rng: &mut R, k: K, depth: usize) -> Option<Term> {
        let roll = rng.gen_range(0..10);
        if k == K::Scalar && roll < 3 && depth > 0 {
            return Some(if rng.gen_bool(0.5) {
                Term::Attr(
                    attr("level", Target::Role),
                    Box::new(self.term(rng, K::Role, depth - 1)?),
                )
            } else {
                Term::Attr(
                    attr("clearance", Target::AdminUser),
                    Box::new(self.term(rng, K::User, depth - 1)?),
                )
            });
        }
        if roll < 7 {
            if let Some(v) = self.var(rng, k) {
                return Some(Term::Var(v));
            }
        }
        self.literal(rng, k)
            .map(Term::Lit)
            .or_else(|| self.var(rng, k).map(Term::Var))
    }

    fn role<R: Rng>(&self, rng: &mut R) -> Term {
        self.term(rng, K::Role, 1).expect("roles are never empty")
    }

    fn lit_domain<R: Rng>(&self, rng: &mut R, k: K) -> Domain {
        let mut vals: Vec<String> = (0..rng.gen_range(1..=3)).filter_map(|_| self.literal(rng, k)).collect();
        if vals.is_empty() {
            vals.push("zz".into());
        }
        vals.sort();
        vals.dedup();
        Domain::Lit(vals)
    }

    /// A domain whose elements have kind `k`, and the pair element kinds when
    /// it yields pairs.
    fn domain<R: Rng>(&self, rng: &mut R, k: K) -> Option<(Domain, Option<(K, K)>)> {
        let d = match k {
            K::Role => match rng.gen_range(0..5) {
                0 => Domain::Roles,
                1 => Domain::Range(self.role(rng), self.role(rng)),
                2 => Domain::Attr(attr("grants", Target::AdminUser), self.term(rng, K::User, 0)?),
                3 => self.lit_domain(rng, K::Role),
                _ => Domain::Roles,
            },
            K::AdminRole => match rng.gen_range(0..3) {
                0 => Domain::AdminRoles,
                1 => Domain::AdminRolesOf(self.term(rng, K::User, 0)?),
                _ => self.lit_domain(rng, K::AdminRole),
            },
            K::User => self.lit_domain(rng, K::User),
            K::Scalar => match rng.gen_range(0..6) {
                0 => Domain::Attr(attr("skills", Target::AdminUser), self.term(rng, K::User, 0)?),
                1 => Domain::Attr(attr("tags", Target::Role), self.role(rng)),
                2 => Domain::Scope(attr(if rng.gen_bool(0.5) { "level" } else { "tags" }, Target::Role)),
                3 => Domain::Attr(attr("level", Target::Role), self.role(rng)),
                4 => Domain::Attr(attr("clearance", Target::AdminUser), self.term(rng, K::User, 0)?),
                _ => self.lit_domain(rng, K::Scalar),
            },
            K::Pair => {
                return Some(match rng.gen_range(0..3) {
                    0 => (Domain::Aua, Some((K::User, K::AdminRole))),
                    1 => (
                        Domain::Attr(attr("span", Target::AdminRole), self.term(rng, K::AdminRole, 0)?),
                        Some((K::Role, K::Role)),
                    ),
                    _ => (Domain::Scope(attr("span", Target::AdminRole)), Some((K::Role, K::Role))),
                })
            }
        };
        Some((d, None))
    }

    fn fresh(&mut self) -> String {
        self.fresh += 1;
        format!("v{}", self.fresh)
    }

    /// A random quantifier; its bound variables are in scope only for the body.
    pub fn quantifier<R: Rng>(&mut self, rng: &mut R, depth: usize) -> Quantifier {
        loop {
            let k = *KINDS.choose(rng).unwrap();
            let Some((domain, pair)) = self.domain(rng, k) else {
                continue;
            };
            let mark = self.vars.len();
            let binder = match pair {
                Some((ka, kb)) if rng.gen_bool(0.75) => {
                    let (a, b) = (self.fresh(), self.fresh());
                    self.vars.push((a.clone(), ka));
                    self.vars.push((b.clone(), kb));
                    Binder::Pair(a, b)
                }
                _ => {
                    let a = self.fresh();
                    self.vars.push((a.clone(), k));
                    Binder::One(a)
                }
            };
            let body = self.expr(rng, depth.saturating_sub(1));
            self.vars.truncate(mark);
            return Quantifier {
                binder,
                domain,
                body: Box::new(body),
            };
        }
    }

    fn atom<R: Rng>(&self, rng: &mut R) -> Expr {
        loop {
            let e = match rng.gen_range(0..12) {
                0 => Expr::Bool(rng.gen_bool(0.5)),
                1 | 2 => {
                    let k = *KINDS.choose(rng).unwrap();
                    match (self.term(rng, k, 1), self.term(rng, k, 1)) {
                        (Some(a), Some(b)) => Expr::Eq(a, b),
                        _ => continue,
                    }
                }
                3 => Expr::Senior(self.role(rng), self.role(rng)),
                4 => Expr::Junior(self.role(rng), self.role(rng)),
                5 => Expr::Incomparable(self.role(rng), self.role(rng)),
                6 => Expr::InRange(self.role(rng), self.role(rng), self.role(rng)),
                7 => {
                    let rel = match rng.gen_range(0..4) {
                        0 => Relation::Direct,
                        1 => Relation::Transitive,
                        2 => Relation::Reflexive,
                        _ => Relation::ReflexiveWith(self.role(rng), self.role(rng)),
                    };
                    Expr::EdgeIn(self.role(rng), self.role(rng), rel)
                }
                8 | 9 => {
                    let k = *KINDS.choose(rng).unwrap();
                    let Some((d, _)) = self.domain(rng, k) else { continue };
                    let t = match k {
                        K::Pair => match self.var(rng, K::Pair) {
                            Some(v) => Term::Var(v),
                            None => continue,
                        },
                        _ => match self.term(rng, k, 1) {
                            Some(t) => t,
                            None => continue,
                        },
                    };
                    Expr::MemberOf(t, d)
                }
                _ => self.dominates(rng),
            };
            return e;
        }
    }

    fn dominates<R: Rng>(&self, rng: &mut R) -> Expr {
        match rng.gen_range(0..3) {
            0 => {
                let side = |g: &Self, rng: &mut R| match rng.gen_range(0..3) {
                    0 => Domain::Attr(attr("level", Target::Role), g.role(rng)),
                    1 => Domain::Scope(attr("level", Target::Role)),
                    _ => g.lit_domain(rng, K::Scalar),
                };
                Expr::Dominates(attr("level", Target::Role), side(self, rng), side(self, rng))
            }
            1 => {
                let u = |g: &Self, rng: &mut R| g.term(rng, K::User, 0).unwrap_or(Term::Lit("zz".into()));
                Expr::Dominates(
                    attr("clearance", Target::AdminUser),
                    Domain::Attr(attr("clearance", Target::AdminUser), u(self, rng)),
                    Domain::Attr(attr("clearance", Target::AdminUser), u(self, rng)),
                )
            }
            _ => {
                let side = |g: &Self, rng: &mut R| match rng.gen_range(0..3) {
                    0 => Domain::Attr(
                        attr("grants", Target::AdminUser),
                        g.term(rng, K::User, 0).unwrap_or(Term::Lit("zz".into())),
                    ),
                    1 => Domain::Range(g.role(rng), g.role(rng)),
                    _ => g.lit_domain(rng, K::Role),
                };
                Expr::Dominates(attr("grants", Target::AdminUser), side(self, rng), side(self, rng))
            }
        }
    }

    pub fn expr<R: Rng>(&mut self, rng: &mut R, depth: usize) -> Expr {
        if depth == 0 || rng.gen_bool(0.25) {
            return self.atom(rng);
        }
        match rng.gen_range(0..8) {
            0 | 1 => {
                let n = rng.gen_range(1..=3);
                let es = (0..n).map(|_| self.expr(rng, depth - 1)).collect();
                if rng.gen_bool(0.5) {
                    Expr::And(es)
                } else {
                    Expr::Or(es)
                }
            }
            2 => Expr::negate(self.expr(rng, depth - 1)),
            3 => Expr::Implies(Box::new(self.expr(rng, depth - 1)), Box::new(self.expr(rng, depth - 1))),
            4 => Expr::Iff(Box::new(self.expr(rng, depth - 1)), Box::new(self.expr(rng, depth - 1))),
            5 | 6 => Expr::Exists(self.quantifier(rng, depth)),
            _ => Expr::ForAll(self.quantifier(rng, depth)),
        }
    }
}
