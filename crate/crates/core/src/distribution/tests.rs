use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::fixtures;
use crate::poly::{parse_poly, rat, rat_int};

fn p3(s: &str) -> Poly {
    parse_poly(s, &["x1", "x2", "x3"]).unwrap()
}

fn pt(a: i64, b: i64, c: i64) -> [Rational; 3] {
    [rat_int(a), rat_int(b), rat_int(c)]
}

#[test]
fn martinet_function_examples() {
    let md = martinet_function(&fixtures::martinet()).unwrap();
    assert_eq!(md.h_raw, p3("-2*x1"));
    assert_eq!(md.h, p3("x1"));

    let md = martinet_function(&fixtures::heisenberg()).unwrap();
    assert_eq!(md.h_raw, p3("-1"));
    assert!(md.sigma_is_empty());

    let md = martinet_function(&fixtures::twoplanes()).unwrap();
    assert_eq!(md.h_raw, p3("2*x1*x2"));
    assert_eq!(md.h, p3("x1*x2"));

    let md = martinet_function(&fixtures::tangential()).unwrap();
    assert_eq!(md.h, p3("x2^2 - x3^2"));
}

#[test]
fn integrable_distribution_is_rejected() {
    let spec = DistributionSpec::one_form("flat", [p3("0"), p3("0"), p3("1")]).unwrap();
    assert!(matches!(martinet_function(&spec), Err(Error::Precondition(_))));
}

#[test]
fn frame_from_one_form() {
    let (a, b) = fixtures::martinet().frame().unwrap();
    let (pa, pb) = fixtures::martinet_pair().frame().unwrap();
    assert_eq!((a, b), (pa, pb));
    let spec = DistributionSpec::one_form("no-unit", [p3("x1"), p3("x2"), p3("x3")]).unwrap();
    assert!(spec.frame().is_err());
}

#[test]
fn characteristic_field_examples() {
    let spec = fixtures::martinet();
    let z = characteristic_field(&spec, &martinet_function(&spec).unwrap()).unwrap();
    assert_eq!(z.components(), &[p3("0"), p3("1"), p3("x1^2")]);

    let spec = fixtures::twoplanes();
    let z = characteristic_field(&spec, &martinet_function(&spec).unwrap()).unwrap();
    assert_eq!(z.components(), &[p3("-x1"), p3("x2"), p3("x1^2*x2^2")]);

    let spec = fixtures::tangential();
    let z = characteristic_field(&spec, &martinet_function(&spec).unwrap()).unwrap();
    let expected = -(&p3("2*x2") - &(&p3("2*x3") * &p3("x1*(x2*x2 - x3*x3)")));
    assert_eq!(z.components(), &[expected, p3("0"), p3("0")]);
}

#[test]
fn tangency_locus_examples() {
    let spec = fixtures::martinet();
    let md = martinet_function(&spec).unwrap();
    let loc = tangency_locus(&spec, &md, &[pt(0, 1, 0)]).unwrap();
    assert!(loc.is_empty());
    assert!(loc.tangency_hits.is_empty());

    let spec = fixtures::twoplanes();
    let md = martinet_function(&spec).unwrap();
    let axis = [pt(0, 0, 5), pt(0, 0, -2), pt(1, 0, 0)];
    let loc = tangency_locus(&spec, &md, &axis).unwrap();
    assert_eq!(loc.singular_status, LocusStatus::Undetermined);
    assert_eq!(loc.singular_hits, axis[..2].to_vec());

    let spec = fixtures::tangential();
    let md = martinet_function(&spec).unwrap();
    let line = [pt(3, 0, 0), pt(-1, 0, 0), pt(0, 1, 1)];
    let loc = tangency_locus(&spec, &md, &line).unwrap();
    assert_eq!(loc.singular_hits, line[..2].to_vec());
}

#[test]
fn classify_point_examples() {
    let spec = fixtures::martinet();
    let md = martinet_function(&spec).unwrap();
    let c = classify_point(&spec, &md, &pt(0, 1, 0), None).unwrap();
    assert_eq!(c.class, Stratum::Sigma2);
    let c = classify_point(&spec, &md, &pt(1, 1, 0), None).unwrap();
    assert_eq!(c.class, Stratum::OffSigma);

    let spec = fixtures::twoplanes();
    let md = martinet_function(&spec).unwrap();
    let c = classify_point(&spec, &md, &pt(0, 0, 1), Some(&pt(0, 0, 1))).unwrap();
    assert_eq!(c.class, Stratum::Sigma1Tr);
    let c = classify_point(&spec, &md, &pt(0, 0, 1), None).unwrap();
    assert_eq!(c.class, Stratum::Sigma0Candidate);

    let spec = fixtures::tangential();
    let md = martinet_function(&spec).unwrap();
    let c = classify_point(&spec, &md, &pt(1, 0, 0), Some(&pt(1, 0, 0))).unwrap();
    assert_eq!(c.class, Stratum::Sigma1Tan);
}

#[test]
fn classify_point_ignores_scaling_of_the_form() {
    let spec = fixtures::martinet();
    let scaled =
        DistributionSpec::one_form("scaled", spec.annihilator().map(|c| c.scale(&rat(-3, 7))))
            .unwrap();
    let md = martinet_function(&spec).unwrap();
    let mds = martinet_function(&scaled).unwrap();
    assert_eq!(md.h, mds.h);
    for p in [pt(0, 1, 0), pt(0, -2, 3), pt(2, 1, 1)] {
        for t in [None, Some(pt(0, 1, 0)), Some(pt(0, 0, 1))] {
            let a = classify_point(&spec, &md, &p, t.as_ref()).unwrap();
            let b = classify_point(&scaled, &mds, &p, t.as_ref()).unwrap();
            assert_eq!(a.class, b.class);
        }
    }
}

#[test]
fn hormander_examples() {
    let origin = pt(0, 0, 0);
    let r = hormander_check(&fixtures::martinet(), &origin, 6).unwrap();
    assert_eq!((r.rank, r.achieved_depth), (3, 3));
    let r = hormander_check(&fixtures::heisenberg(), &origin, 6).unwrap();
    assert_eq!((r.rank, r.achieved_depth), (3, 2));
    let r = hormander_check(&fixtures::tangential(), &origin, 6).unwrap();
    assert_eq!((r.rank, r.achieved_depth), (3, 4));
    let r = hormander_check(&fixtures::tangential(), &origin, 3).unwrap();
    assert_eq!(r.rank, 2);
    assert!(hormander_check(&fixtures::martinet(), &origin, 7).is_err());
}

#[test]
fn characteristic_field_is_tangent_to_sigma() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for spec in [fixtures::martinet(), fixtures::twoplanes(), fixtures::tangential()] {
        let md = martinet_function(&spec).unwrap();
        let z = characteristic_field(&spec, &md).unwrap();
        let zh = z.directional(&md.h).unwrap();
        let pts = sample_zero_set(&md.h, 100, &mut rng);
        assert_eq!(pts.len(), 100, "{}", spec.name);
        for p in &pts {
            assert!(md.h.eval(p).unwrap().is_zero());
            assert!(zh.eval(p).unwrap().is_zero(), "{} at {:?}", spec.name, p);
        }
    }
}

#[test]
fn martinet_sigma_is_all_sigma2() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spec = fixtures::martinet();
    let md = martinet_function(&spec).unwrap();
    for p in sample_zero_set(&md.h, 100, &mut rng) {
        let p = [p[0].clone(), p[1].clone(), p[2].clone()];
        assert_eq!(classify_point(&spec, &md, &p, None).unwrap().class, Stratum::Sigma2);
    }
}

#[test]
fn both_modes_agree() {
    let a = martinet_function(&fixtures::martinet()).unwrap();
    let b = martinet_function(&fixtures::martinet_pair()).unwrap();
    assert_eq!(a.h, b.h);
    assert!(agree_up_to_unit(&a.h_raw, &b.h_raw));
}
