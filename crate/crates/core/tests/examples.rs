use std::collections::BTreeSet;

use arra_core::attributes::{AttrValue, Target};
use arra_core::rra97::is_encapsulated;
use arra_core::rule_engine::{parse_rule, parse_set_builder, select_roles, RuleContext};
use arra_core::translator::{diff_decisions, drop_first_set_element, map_rra97, map_uarbac};
use arra_core::uarbac::{Permission, ADMIN, EMPOWER, GRANT, ROLE_CLASS};
use arra_core::{fixtures, ArraInstance, Error, Instance, RoleGraph, RoleId, Rra97Instance, UarbacInstance, Value};

fn rra97() -> Rra97Instance {
    match fixtures::rra97_example().unwrap() {
        Instance::Rra97(i) => i,
        other => panic!("unexpected {:?}", other.kind()),
    }
}

fn uarbac() -> UarbacInstance {
    match fixtures::uarbac_example().unwrap() {
        Instance::Uarbac(i) => i,
        other => panic!("unexpected {:?}", other.kind()),
    }
}

fn dept() -> ArraInstance {
    match fixtures::dept_example().unwrap() {
        Instance::Arra(i) => i,
        other => panic!("unexpected {:?}", other.kind()),
    }
}

fn roles(names: &[&str]) -> BTreeSet<RoleId> {
    names.iter().map(|n| RoleId::from(*n)).collect()
}

fn pairs(ps: &[(&str, &str)]) -> AttrValue {
    AttrValue::Set(ps.iter().map(|(a, b)| Value::pair(*a, *b)).collect())
}

fn atoms(xs: &[&str]) -> AttrValue {
    AttrValue::Set(xs.iter().map(|x| Value::atom(*x)).collect())
}

#[test]
fn hierarchy_queries() {
    let g = rra97().roles().clone();
    assert!(g.is_senior("DIR", "ED").unwrap());
    assert!(!g.is_senior("PE1", "QE1").unwrap());
    assert!(!g.is_senior("PE1", "PE1").unwrap());
    assert!(g.incomparable("PE1", "QE1").unwrap());
    assert!(!g.incomparable("ED", "DIR").unwrap());
    assert!(!g.incomparable("ED", "ED").unwrap());
    assert_eq!(g.open_range("E1", "PL1").unwrap(), roles(&["PE1", "QE1"]));
    assert_eq!(
        g.open_range("ED", "DIR").unwrap(),
        roles(&["E1", "E2", "PE1", "PE2", "QE1", "QE2", "PL1", "PL2"])
    );
    assert!(g.open_range("PE1", "PE1").unwrap().is_empty());
    assert!(matches!(g.is_senior("nope", "ED"), Err(Error::UnknownEntity { .. })));
}

#[test]
fn hierarchy_mutation() {
    let g = rra97().roles().clone();
    let g2 = g.insert_edge("PE1", "QE1").unwrap();
    assert!(g2.is_senior("QE1", "PE1").unwrap());
    assert!(matches!(g.insert_edge("DIR", "ED"), Err(Error::Cycle { .. })));
    assert!(matches!(g.insert_edge("ED", "E1"), Err(Error::DuplicateEdge { .. })));
    assert!(matches!(g.delete_edge("ED", "DIR"), Err(Error::EdgeNotFound { .. })));
    assert_eq!(g2.delete_edge("PE1", "QE1").unwrap(), g);
    let g3 = g.delete_edge("ED", "E1").unwrap();
    assert!(!g3.has_edge("ED", "E1"));
    assert_eq!(g3.edges().len(), 11);

    let two = RoleGraph::new(["a", "b"], []).unwrap();
    assert_eq!(two.insert_edge("a", "b").unwrap().edges().len(), 1);
}

#[test]
fn hypothetical_closure() {
    let g = rra97().roles().clone();
    let rel = g.closure_with("PE1", "QE1");
    assert!(rel.contains("PE1", "QE1"));
    assert!(rel.contains("E1", "QE1"));
    assert!(!g.closure().contains("PE1", "QE1"));

    let same = g.closure_with("ED", "E1");
    for a in g.nodes() {
        for b in g.nodes() {
            assert_eq!(
                same.contains(a.as_str(), b.as_str()),
                g.closure().contains(a.as_str(), b.as_str())
            );
        }
    }

    let empty = RoleGraph::new(["a", "b"], []).unwrap();
    let rel = empty.closure_with("a", "b");
    assert!(rel.contains("a", "a") && rel.contains("b", "b") && rel.contains("a", "b"));
    assert!(!rel.contains("b", "a"));
}

#[test]
fn encapsulation_and_immediate_ranges() {
    let i = rra97();
    for (x, y) in [("ED", "DIR"), ("E1", "PL1"), ("E2", "PL2"), ("PE1", "PL1")] {
        assert!(i.is_encapsulated(x, y).unwrap(), "({x}, {y})");
    }
    let broken = i.roles().insert_edge("QE1", "E2").unwrap();
    assert!(!is_encapsulated(&broken, "E1", "PL1").unwrap());

    let r = |x: &str, y: &str| Some((RoleId::from(x), RoleId::from(y)));
    assert_eq!(i.immediate_authority_range("PE1").unwrap(), r("E1", "PL1"));
    assert_eq!(i.immediate_authority_range("E1").unwrap(), r("ED", "DIR"));
    assert_eq!(i.immediate_authority_range("ED").unwrap(), None);
}

#[test]
fn rra97_decisions() {
    let i = rra97();
    assert!(i.can_insert_edge("u4", "PE1", "QE1").unwrap().allowed);
    assert!(!i.can_insert_edge("u3", "PE1", "QE2").unwrap().allowed);
    assert!(!i.can_insert_edge("u4", "PE1", "PE2").unwrap().allowed);

    assert!(!i.can_delete_edge("u3", "E1", "QE1").unwrap().allowed);
    assert!(!i.can_delete_edge("u3", "QE1", "PL1").unwrap().allowed);
    assert!(matches!(
        i.can_delete_edge("u4", "PE1", "QE1"),
        Err(Error::EdgeNotFound { .. })
    ));

    let mut parts = i.parts().clone();
    parts.roles = parts.roles.insert_edge("PE1", "QE1").unwrap();
    let after = Rra97Instance::new(parts).unwrap();
    assert!(after.can_delete_edge("u4", "PE1", "QE1").unwrap().allowed);
}

#[test]
fn uarbac_decisions() {
    let i = uarbac();
    assert!(i.has_perm("u1", &Permission::object(ROLE_CLASS, "r1", GRANT)).unwrap());
    assert!(i.has_perm("u3", &Permission::class(ROLE_CLASS, ADMIN)).unwrap());
    assert!(!i.has_perm("u3", &Permission::object(ROLE_CLASS, "r1", GRANT)).unwrap());
    assert!(i.can_grant_role_to_role("u1", "r1", "r2").unwrap().allowed);
    assert!(i.can_grant_role_to_role("u4", "r3", "r1").unwrap().allowed);
    assert!(!i.can_grant_role_to_role("u3", "r1", "r2").unwrap().allowed);
    assert!(i.can_revoke_role_from_role("u1", "r2", "r3").unwrap().allowed);
    assert!(i.can_revoke_role_from_role("u3", "r2", "r3").unwrap().allowed);
    assert!(!i.can_revoke_role_from_role("u2", "r2", "r3").unwrap().allowed);
    assert!(matches!(
        i.has_perm("nobody", &Permission::class(ROLE_CLASS, EMPOWER)),
        Err(Error::UnknownEntity { .. })
    ));
}

#[test]
fn rra97_translation() {
    let src = rra97();
    let t = map_rra97(&src).unwrap();
    let attrs = t.attributes();
    assert_eq!(
        attrs.get_value(Target::AdminRole, "authRange", "DSO").unwrap(),
        pairs(&[("ED", "DIR")])
    );
    assert_eq!(
        attrs.get_value(Target::AdminRole, "authRange", "PSO1").unwrap(),
        pairs(&[("E1", "PL1"), ("E2", "PL2")])
    );
    assert_eq!(
        attrs.get_value(Target::AdminRole, "authRange", "SSO").unwrap(),
        pairs(&[])
    );
    assert_eq!(t.ops().collect::<Vec<_>>(), ["deleteEdge", "insertEdge"]);
    assert!(t.authorize("insertEdge", "u4", "PE1", "QE1").unwrap().allowed);
    assert_eq!(map_rra97(&src).unwrap(), t);

    let report = diff_decisions(&src, &t).unwrap();
    assert_eq!(report.decisions, 720);
    assert!(report.is_clean(), "{report}");

    let broken = drop_first_set_element(&t).unwrap();
    assert!(!diff_decisions(&src, &broken).unwrap().is_clean());
}

#[test]
fn rra97_translation_without_ranges() {
    let mut parts = rra97().parts().clone();
    parts.can_modify.clear();
    let src = Rra97Instance::new(parts).unwrap();
    let t = map_rra97(&src).unwrap();
    for ar in ["SSO", "DSO", "PSO1", "PSO2"] {
        assert_eq!(
            t.attributes().get_value(Target::AdminRole, "authRange", ar).unwrap(),
            pairs(&[])
        );
    }
    let report = diff_decisions(&src, &t).unwrap();
    assert!(report.is_clean());
    for u in ["u1", "u2", "u3", "u4"] {
        for (a, b) in [("PE1", "QE1"), ("ED", "E1"), ("E1", "QE1")] {
            assert!(!t.authorize("insertEdge", u, a, b).unwrap().allowed);
            assert!(!t.authorize("deleteEdge", u, a, b).unwrap().allowed);
        }
    }
}

#[test]
fn uarbac_translation() {
    let src = uarbac();
    let t = map_uarbac(&src).unwrap();
    let a = t.attributes();
    assert_eq!(
        a.get_value(Target::AdminUser, "grantAuth", "u1").unwrap(),
        atoms(&["r1"])
    );
    assert_eq!(
        a.get_value(Target::AdminUser, "empowerAuth", "u2").unwrap(),
        atoms(&["r1", "r2"])
    );
    assert_eq!(
        a.get_value(Target::AdminUser, "adminAuth", "u1").unwrap(),
        atoms(&["r2", "r3"])
    );
    assert_eq!(a.get_value(Target::AdminUser, "grantAuth", "u3").unwrap(), atoms(&[]));
    assert_eq!(
        a.get_value(Target::AdminUser, "roleClassAuth", "u4").unwrap(),
        atoms(&["admin", "empower", "grant"])
    );
    assert!(t.aua().is_empty());
    assert!(t.authorize("assign", "u4", "r3", "r1").unwrap().allowed);

    let report = diff_decisions(&src, &t).unwrap();
    assert_eq!(report.decisions, 48);
    assert!(report.is_clean(), "{report}");
}

#[test]
fn uarbac_user_without_permissions() {
    let mut parts = uarbac().parts().clone();
    parts.users.insert("u5".into());
    let src = UarbacInstance::new(parts).unwrap();
    let t = map_uarbac(&src).unwrap();
    for attr in ["grantAuth", "empowerAuth", "adminAuth", "roleClassAuth"] {
        assert_eq!(
            t.attributes().get_value(Target::AdminUser, attr, "u5").unwrap(),
            atoms(&[])
        );
    }
    assert!(diff_decisions(&src, &t).unwrap().is_clean());
}

#[test]
fn dept_rule() {
    let i = dept();
    assert!(
        i.authorize("assign", "Tom", "Development Mgr.", "IT Director")
            .unwrap()
            .allowed
    );
    assert!(
        !i.authorize("assign", "Tom", "Marketing Mgr.", "IT Director")
            .unwrap()
            .allowed
    );
    assert!(
        !i.authorize("assign", "Sam", "Marketing Mgr.", "Finance Mgr.")
            .unwrap()
            .allowed
    );
    assert!(
        i.authorize("assign", "Sam", "Marketing Mgr.", "Marketing Mgr.")
            .unwrap()
            .allowed
    );
    assert_eq!(
        i.attributes().get_value(Target::Role, "dept", "IT Director").unwrap(),
        AttrValue::Atomic(Value::atom("IT"))
    );
    assert!(matches!(
        i.authorize("assign", "Nobody", "IT Director", "IT Director"),
        Err(Error::UnknownEntity { .. })
    ));
}

#[test]
fn parse_examples() {
    let i = dept();
    let ctx = RuleContext::single_form(i.attributes());
    let rule = parse_rule(
        "(exists d (scope dept) (and (in d (attr dept au)) (eq (attr dept r1) d) (eq (attr dept r2) d)))",
        &ctx,
    )
    .unwrap();
    let exists = std::iter::successors(Some(&rule.root), |e| e.children().first().copied())
        .filter(|e| matches!(e, arra_core::rule_engine::Expr::Exists(_)))
        .count();
    assert_eq!(exists, 1);
    assert!(parse_rule("true", &ctx).is_ok());
    assert!(matches!(parse_rule("(eq z au)", &ctx), Err(Error::Bind(v)) if v == "z"));
    assert!(matches!(
        parse_rule("(in au (attr nope au))", &ctx),
        Err(Error::UnknownAttribute(_))
    ));
    assert!(matches!(parse_rule("(and true", &ctx), Err(Error::Parse { .. })));
}

/// The dept fixture extended with a role-title attribute.
fn titled() -> ArraInstance {
    let mut parts = dept().into_parts();
    parts
        .attributes
        .define(
            arra_core::AttributeSchema::unordered(
                "roleTitle",
                Target::Role,
                arra_core::ScopeSpec::Values([Value::atom("Lead"), Value::atom("Staff")].into()),
                arra_core::ValueKind::Set,
            ),
            &parts.roles,
        )
        .unwrap();
    for (r, t) in [
        ("Development Mgr.", &["Lead"][..]),
        ("Quality Mgr.", &["Lead", "Staff"][..]),
        ("Support Engineer", &["Staff"][..]),
    ] {
        parts
            .attributes
            .set_value(Target::Role, "roleTitle", r, atoms(t))
            .unwrap();
    }
    ArraInstance::new(parts).unwrap()
}

#[test]
fn set_builder_selection() {
    let i = titled();
    let b = parse_set_builder("(select r1 (in \"Lead\" (attr roleTitle r1)))", i.attributes()).unwrap();
    let by_hand: BTreeSet<RoleId> = i
        .roles()
        .nodes()
        .iter()
        .filter(
            |r| match i.attributes().get_value(Target::Role, "roleTitle", r.as_str()).unwrap() {
                AttrValue::Set(s) => s.contains(&Value::atom("Lead")),
                AttrValue::Atomic(_) => false,
            },
        )
        .cloned()
        .collect();
    assert_eq!(by_hand, roles(&["Development Mgr.", "Quality Mgr."]));
    assert_eq!(select_roles(&b, &i).unwrap(), by_hand);

    let none = parse_set_builder("(select r1 false)", i.attributes()).unwrap();
    assert!(select_roles(&none, &i).unwrap().is_empty());
    let all = parse_set_builder("(select r1 true)", i.attributes()).unwrap();
    assert_eq!(&select_roles(&all, &i).unwrap(), i.roles().nodes());
}

#[test]
fn set_form() {
    let i = titled();
    let leads = parse_set_builder("(select x (in \"Lead\" (attr roleTitle x)))", i.attributes()).unwrap();
    assert!(i.authorize_set("assign", "Tom", &leads, "IT Director").unwrap().allowed);
    assert!(
        !i.authorize_set("assign", "Tom", &leads, "Marketing Mgr.")
            .unwrap()
            .allowed
    );
    let empty = parse_set_builder("(select x false)", i.attributes()).unwrap();
    assert!(!i.authorize_set("assign", "Sam", &empty, "IT Director").unwrap().allowed);

    let t = map_rra97(&rra97()).unwrap();
    let one = parse_set_builder("(select x (eq x \"PE1\"))", t.attributes()).unwrap();
    assert_eq!(
        t.authorize_set("insertEdge", "u4", &one, "QE1").unwrap().allowed,
        t.authorize("insertEdge", "u4", "PE1", "QE1").unwrap().allowed
    );
    let interior = parse_set_builder("(select x (in-range x \"E1\" \"PL1\"))", t.attributes()).unwrap();
    assert_eq!(select_roles(&interior, &t).unwrap(), roles(&["PE1", "QE1"]));
    assert!(!t.authorize_set("insertEdge", "u4", &interior, "QE1").unwrap().allowed);
}
