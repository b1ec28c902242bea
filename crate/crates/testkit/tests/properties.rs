use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use arra_core::rule_engine::{evaluate, parse_rule, replay, Expr, RuleAst, RuleContext};
use arra_core::translator::{diff_decisions, map_rra97, map_uarbac, ReferenceModel};
use arra_core::uarbac::{ADMIN, EMPOWER, GRANT, ROLE_CLASS};
use arra_core::{ArraInstance, Error, Instance, Permission, UarbacInstance, Value};
use arra_testkit::oracle::{self, Naive};
use arra_testkit::{gen, rules::RuleGen};

fn bindings(rng: &mut StdRng, inst: &ArraInstance) -> [(&'static str, Value); 3] {
    let users: Vec<_> = inst.admin_users().iter().collect();
    let roles: Vec<_> = inst.roles().nodes().iter().collect();
    [
        ("au", Value::atom(users.choose(rng).unwrap().as_str())),
        ("r1", Value::atom(roles.choose(rng).unwrap().as_str())),
        ("r2", Value::atom(roles.choose(rng).unwrap().as_str())),
    ]
}

fn allowed(m: &dyn ReferenceModel, op: &str, u: &str, a: &str, b: &str) -> bool {
    m.decide(op, u, a, b).map(|d| d.allowed).unwrap_or(false)
}

/// Every (op, user, r1, r2) decision, with errors read as denials.
fn table(m: &dyn ReferenceModel) -> Vec<bool> {
    let mut out = Vec::new();
    for op in m.ops() {
        for u in m.users() {
            for a in m.roles() {
                for b in m.roles() {
                    out.push(allowed(m, op, u.as_str(), a.as_str(), b.as_str()));
                }
            }
        }
    }
    out
}

fn with_perms(
    src: &UarbacInstance,
    user: &str,
    edit: impl FnOnce(&mut std::collections::BTreeSet<Permission>),
) -> UarbacInstance {
    let mut parts = src.parts().clone();
    let key = parts.users.iter().find(|u| u.as_str() == user).unwrap().clone();
    edit(parts.authorized_perms.entry(key).or_default());
    UarbacInstance::new(parts).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn engine_agrees_with_naive_interpreter(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let inst = gen::arra(&mut rng, 0);
        let rule = RuleGen::single_form(&inst).rule(&mut rng, 4);
        let b = bindings(&mut rng, &inst);
        if let Ok(want) = Naive::new(&inst).eval(&rule.root, &b) {
            let got = evaluate(&rule, &inst, &b).map(|d| d.allowed).map_err(|e| e.to_string());
            prop_assert_eq!(got, Ok(want), "{}", rule);
        }
    }

    #[test]
    fn negated_exists_is_forall_not(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let inst = gen::arra(&mut rng, 0);
        let q = RuleGen::single_form(&inst).quantifier(&mut rng, 3);
        let b = bindings(&mut rng, &inst);
        let lhs = RuleAst::new(Expr::negate(Expr::Exists(q.clone())));
        let rhs = RuleAst::new(Expr::forall(q.binder.clone(), q.domain.clone(), Expr::negate(*q.body)));
        let l = evaluate(&lhs, &inst, &b).map(|d| d.allowed).ok();
        let r = evaluate(&rhs, &inst, &b).map(|d| d.allowed).ok();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn allowed_traces_replay(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let inst = gen::arra(&mut rng, 0);
        let rule = RuleGen::single_form(&inst).rule(&mut rng, 4);
        let b = bindings(&mut rng, &inst);
        if let Ok(d) = evaluate(&rule, &inst, &b) {
            prop_assert_eq!(d.allowed, !d.trace.is_empty());
            if d.allowed {
                prop_assert!(replay(&rule, &inst, &b, &d.trace[0]).unwrap());
            }
        }
    }

    #[test]
    fn evaluation_is_deterministic(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let inst = gen::arra(&mut rng, 0);
        let rule = RuleGen::single_form(&inst).rule(&mut rng, 4);
        let b = bindings(&mut rng, &inst);
        let first = evaluate(&rule, &inst, &b).map_err(|e| e.to_string());
        prop_assert_eq!(first, evaluate(&rule, &inst, &b).map_err(|e| e.to_string()));
    }

    #[test]
    fn printed_rules_parse_back(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let inst = gen::arra(&mut rng, 0);
        let rule = RuleGen::single_form(&inst).rule(&mut rng, 5);
        let ctx = RuleContext::single_form(inst.attributes());
        prop_assert_eq!(&parse_rule(&rule.to_string(), &ctx).unwrap(), &rule);
        prop_assert_eq!(&parse_rule(&rule.pretty(), &ctx).unwrap(), &rule);
    }

    #[test]
    fn rra97_translation_is_equivalent(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let src = gen::rra97(&mut rng, 8);
        let report = diff_decisions(&src, &map_rra97(&src).unwrap()).unwrap();
        prop_assert!(report.is_clean(), "{}", report);
    }

    #[test]
    fn uarbac_translation_is_equivalent(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let src = gen::uarbac(&mut rng, 5);
        let report = diff_decisions(&src, &map_uarbac(&src).unwrap()).unwrap();
        prop_assert!(report.is_clean(), "{}", report);
    }

    /// The deleteEdge formula only protects edges at can-modify endpoints, so an
    /// allowed deletion can still cut a range apart; apply must refuse exactly those.
    #[test]
    fn applied_deletions_keep_ranges_valid(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let src = gen::rra97(&mut rng, 10);
        let inst = Instance::Rra97(src.clone());
        for u in src.users() {
            for (a, b) in src.roles().edges() {
                if !src.can_delete_edge(u.as_str(), a.as_str(), b.as_str()).unwrap().allowed {
                    continue;
                }
                let after = src.roles().delete_edge(a.as_str(), b.as_str()).unwrap();
                let closure = oracle::Closure::graph(&after);
                let intact = src.ranges().iter().all(|(x, y)| {
                    closure.lt(x.as_str(), y.as_str()) && oracle::encapsulated(&after, x.as_str(), y.as_str())
                });
                match inst.apply("deleteEdge", u.as_str(), a.as_str(), b.as_str()) {
                    Ok((d, Some(Instance::Rra97(next)))) => {
                        prop_assert!(d.allowed && intact);
                        prop_assert_eq!(next.roles().edges(), after.edges());
                    }
                    Err(Error::Schema(_)) => prop_assert!(!intact),
                    other => panic!("unexpected apply result {other:?}"),
                }
            }
        }
    }

    #[test]
    fn uarbac_more_permissions_never_deny_more(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let src = gen::uarbac(&mut rng, 5);
        let user = src.users().iter().next().unwrap().to_string();
        let roles: Vec<_> = src.roles().nodes().iter().cloned().collect();
        let mode = *[GRANT, EMPOWER, ADMIN].choose(&mut rng).unwrap();
        let extra = if rng.gen_bool(0.3) {
            Permission::class(ROLE_CLASS, mode)
        } else {
            Permission::object(ROLE_CLASS, roles.choose(&mut rng).unwrap().as_str(), mode)
        };
        let bigger = with_perms(&src, &user, |ps| { ps.insert(extra); });
        for (before, after) in table(&src).into_iter().zip(table(&bigger)) {
            prop_assert!(!before || after);
        }
    }

    #[test]
    fn class_permission_covers_every_object(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let src = gen::uarbac(&mut rng, 5);
        let user = src.users().iter().next().unwrap().to_string();
        let mode = *[GRANT, EMPOWER, ADMIN].choose(&mut rng).unwrap();
        let roles: Vec<_> = src.roles().nodes().iter().cloned().collect();
        let class = with_perms(&src, &user, |ps| { ps.insert(Permission::class(ROLE_CLASS, mode)); });
        let objects = with_perms(&src, &user, |ps| {
            ps.extend(roles.iter().map(|r| Permission::object(ROLE_CLASS, r.as_str(), mode)));
        });
        for a in &roles {
            for b in &roles {
                prop_assert!(allowed(&class, "assign", &user, a.as_str(), b.as_str())
                    == allowed(&objects, "assign", &user, a.as_str(), b.as_str()));
                if mode == ADMIN {
                    prop_assert!(allowed(&class, "revoke", &user, a.as_str(), b.as_str())
                        == allowed(&objects, "revoke", &user, a.as_str(), b.as_str()));
                }
            }
        }
    }

    #[test]
    fn uarbac_assignment_factors(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let src = gen::uarbac(&mut rng, 5);
        let roles: Vec<_> = src.roles().nodes().iter().map(|r| r.to_string()).collect();
        for u in src.users() {
            let ok = |a: &str, b: &str| allowed(&src, "assign", u.as_str(), a, b);
            for a in &roles {
                for b in &roles {
                    for c in &roles {
                        for d in &roles {
                            if ok(a, b) && ok(c, d) {
                                prop_assert!(ok(a, d) && ok(c, b));
                            }
                        }
                    }
                }
            }
        }
    }
}

/// A chain through an unprotected nested block: the formula allows cutting it.
#[test]
fn allowed_deletion_can_disconnect_a_range() {
    let src = r#"{
        "model": "rra97",
        "roles": ["x", "a", "m", "b", "y"],
        "rh": [["x", "a"], ["a", "m"], ["m", "b"], ["b", "y"]],
        "admin_users": ["u"],
        "admin_roles": ["ar"],
        "arh": [],
        "aua": [["u", "ar"]],
        "can_modify": [{"admin_role": "ar", "range": ["x", "y"]}]
    }"#;
    let Instance::Rra97(inst) = arra_core::format::load_str(src).unwrap() else {
        unreachable!()
    };
    assert!(inst.can_delete_edge("u", "a", "m").unwrap().allowed);
    let err = Instance::Rra97(inst).apply("deleteEdge", "u", "a", "m").unwrap_err();
    assert!(matches!(err, Error::Schema(_)), "{err}");
}
