use martinet_core::poly::{
    default_var_names, gcd, parse_poly, rat, Poly, PolyVectorField, Rational,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x5eed),
        failure_persistence: None,
        ..Config::default()
    }
}

fn coeff() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

fn poly(arity: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec((prop::collection::vec(0u32..=3, arity), coeff()), 0..6)
        .prop_map(move |terms| Poly::from_terms(arity, terms))
}

fn field3() -> impl Strategy<Value = PolyVectorField> {
    prop::collection::vec(
        prop::collection::vec((prop::collection::vec(0u32..=2, 3), coeff()), 0..4)
            .prop_map(|t| Poly::from_terms(3, t)),
        3,
    )
    .prop_map(|c| PolyVectorField::new(c).unwrap())
}

fn point(arity: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(coeff(), arity)
}

proptest! {
    #![proptest_config(config(500))]

    #[test]
    fn ring_axioms(p in poly(3), q in poly(3), r in poly(3)) {
        prop_assert_eq!(&p + &q, &q + &p);
        prop_assert_eq!(&p * &q, &q * &p);
        prop_assert_eq!(&(&p + &q) + &r, &p + &(&q + &r));
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        prop_assert!((&p - &p).is_zero());
        prop_assert_eq!(&p * &Poly::one(3), p.clone());
        prop_assert!((&p * &Poly::zero(3)).is_zero());
    }

    #[test]
    fn evaluation_is_a_homomorphism(p in poly(3), q in poly(3), x in point(3)) {
        let (a, b) = (p.eval(&x).unwrap(), q.eval(&x).unwrap());
        prop_assert_eq!((&p * &q).eval(&x).unwrap(), &a * &b);
        prop_assert_eq!((&p + &q).eval(&x).unwrap(), a + b);
    }

    #[test]
    fn derivation_rules(p in poly(3), q in poly(3), i in 0usize..3, j in 0usize..3) {
        prop_assert_eq!(p.d(i).d(j), p.d(j).d(i));
        prop_assert_eq!((&p * &q).d(i), &(&p.d(i) * &q) + &(&p * &q.d(i)));
    }

    #[test]
    fn print_then_parse(p in poly(3)) {
        let names = default_var_names(3);
        let vars: Vec<&str> = names.iter().map(String::as_str).collect();
        let text = p.to_string_with(&vars);
        prop_assert_eq!(parse_poly(&text, &vars).unwrap(), p);
    }

    #[test]
    fn exact_division_of_products(p in poly(2), q in poly(2)) {
        prop_assume!(!q.is_zero());
        prop_assert_eq!((&p * &q).exact_divide(&q).unwrap(), p);
    }
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn jacobi_identity(a in field3(), b in field3(), c in field3()) {
        let ab_c = a.lie_bracket(&b).unwrap().lie_bracket(&c).unwrap();
        let bc_a = b.lie_bracket(&c).unwrap().lie_bracket(&a).unwrap();
        let ca_b = c.lie_bracket(&a).unwrap().lie_bracket(&b).unwrap();
        prop_assert!(ab_c.add(&bc_a).add(&ca_b).is_zero());
    }

    #[test]
    fn bracket_is_antisymmetric(a in field3(), b in field3()) {
        prop_assert!(a.lie_bracket(&b).unwrap().add(&b.lie_bracket(&a).unwrap()).is_zero());
    }

    #[test]
    fn gcd_divides_both(p in poly(2), q in poly(2), g in poly(2)) {
        prop_assume!(!g.is_zero() && !p.is_zero() && !q.is_zero());
        let (a, b) = (&p * &g, &q * &g);
        let d = gcd(&a, &b);
        prop_assert!(a.exact_divide(&d).is_ok());
        prop_assert!(b.exact_divide(&d).is_ok());
        prop_assert!(d.exact_divide(&g).is_ok());
    }
}
