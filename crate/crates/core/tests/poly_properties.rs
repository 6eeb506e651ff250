use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;
use weyl_frobenius::exactalg::{int, Chart, Coord, Monomial, Poly, Rational, VarSpec, WeightedDegree};

fn chart() -> Arc<Chart> {
    Chart::new(
        "test",
        vec![
            VarSpec::new("a", int(1), false),
            VarSpec::new("b", Rational::new(3.into(), 4.into()), false),
            VarSpec::new("s", Rational::new(1.into(), 4.into()), true),
            VarSpec::new("E", int(1), true),
        ],
        vec![Coord::Var(0), Coord::Var(1), Coord::Var(2), Coord::Exp { exp_var: 3, rate: int(1), log_var: None }],
    )
    .unwrap()
}

fn poly_strategy() -> impl Strategy<Value = Poly> {
    prop::collection::vec(((0i32..3, 0i32..3, -2i32..3, -1i32..3), -5i64..6, 1i64..4), 0..5).prop_map(|terms| {
        let c = chart();
        Poly::from_terms(
            &c,
            terms
                .into_iter()
                .map(|((a, b, s, e), n, d)| (Monomial::from_exponents(&[a, b, s, e]), Rational::new(n.into(), d.into()))),
        )
    })
}

fn homogeneous_strategy() -> impl Strategy<Value = Poly> {
    // a and E have weight 1, so a^i E^(2-i) is homogeneous of degree 2
    prop::collection::vec((0i32..3, -3i64..4), 1..4).prop_map(|terms| {
        let c = chart();
        Poly::from_terms(
            &c,
            terms
                .into_iter()
                .map(|(i, n)| (Monomial::from_exponents(&[i, 0, 0, 2 - i]), int(n))),
        )
    })
}

proptest! {
    #[test]
    fn ring_axioms(p in poly_strategy(), q in poly_strategy(), r in poly_strategy()) {
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        prop_assert_eq!(&p * &q, &q * &p);
        prop_assert_eq!(&p + &q, &q + &p);
    }

    #[test]
    fn exact_division_recovers_factor(p in poly_strategy(), q in poly_strategy()) {
        prop_assume!(!q.is_zero());
        prop_assert_eq!((&p * &q).exact_div(&q).unwrap(), p);
    }

    #[test]
    fn leibniz_rule(p in poly_strategy(), q in poly_strategy(), c in 0usize..4) {
        let lhs = (&p * &q).diff_coord(c);
        let rhs = &(&p.diff_coord(c) * &q) + &(&p * &q.diff_coord(c));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn substitution_composes(p in poly_strategy(), f in poly_strategy(), g in poly_strategy()) {
        // a -> f, then b -> g; versus a single substitution with a -> f[b -> g]
        let c = chart();
        let mut first = BTreeMap::new();
        first.insert("a".to_string(), f.clone());
        let mut second = BTreeMap::new();
        second.insert("b".to_string(), g.clone());
        let two_step = p.substitute(&c, &first).unwrap().substitute(&c, &second).unwrap();
        let mut composite = BTreeMap::new();
        composite.insert("a".to_string(), f.substitute(&c, &second).unwrap());
        composite.insert("b".to_string(), g);
        prop_assert_eq!(two_step, p.substitute(&c, &composite).unwrap());
    }

    #[test]
    fn degree_is_additive(p in homogeneous_strategy(), q in poly_strategy()) {
        let dq = match q.weighted_degree() { WeightedDegree::Homogeneous(d) => d, _ => return Ok(()) };
        let dp = match p.weighted_degree() { WeightedDegree::Homogeneous(d) => d, _ => return Ok(()) };
        let pq = &p * &q;
        prop_assert_eq!(pq.weighted_degree(), WeightedDegree::Homogeneous(dp + dq));
    }
}

#[test]
fn exponential_chain_rule() {
    let c = chart();
    let e = Poly::var(&c, "E").unwrap();
    let e2 = &e * &e;
    assert_eq!(e2.diff_coord(3), e2.scale(&int(2)));
    let a = Poly::var(&c, "a").unwrap();
    let four_e_a = (&e * &a).scale(&int(4));
    assert_eq!(four_e_a.diff_coord(0), e.scale(&int(4)));
}

#[test]
fn identity_substitution() {
    let c = chart();
    let p = &Poly::var(&c, "a").unwrap() * &Poly::var(&c, "s").unwrap().pow(-2).unwrap();
    assert_eq!(p.substitute(&c, &BTreeMap::new()).unwrap(), p);
}
