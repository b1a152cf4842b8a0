//! Named example distributions and planar fields.

use crate::distribution::DistributionSpec;
use crate::poly::{parse_poly, Poly, PolyVectorField};

const V3: [&str; 3] = ["x1", "x2", "x3"];

fn p3(s: &str) -> Poly {
    parse_poly(s, &V3).expect("fixture polynomial")
}

fn vf3(c: [&str; 3]) -> PolyVectorField {
    PolyVectorField::new(c.iter().map(|s| p3(s)).collect()).expect("fixture field")
}

/// `δ = dx3 − x1² dx2`, frame `∂x1, ∂x2 + x1²∂x3`.
pub fn martinet() -> DistributionSpec {
    DistributionSpec::one_form("MARTINET", [p3("0"), p3("-x1^2"), p3("1")]).unwrap()
}

/// The same distribution as [`martinet`], given by its frame.
pub fn martinet_pair() -> DistributionSpec {
    DistributionSpec::pair("MARTINET", vf3(["1", "0", "0"]), vf3(["0", "1", "x1^2"])).unwrap()
}

/// `δ = dx3 − (x1 dx2 − x2 dx1)/2`.
pub fn heisenberg() -> DistributionSpec {
    DistributionSpec::one_form("HEISENBERG", [p3("1/2*x2"), p3("-1/2*x1"), p3("1")]).unwrap()
}

pub fn twoplanes() -> DistributionSpec {
    DistributionSpec::pair("TWOPLANES", vf3(["1", "0", "0"]), vf3(["0", "1", "x1^2*x2"])).unwrap()
}

pub fn tangential() -> DistributionSpec {
    DistributionSpec::pair(
        "TANGENTIAL",
        vf3(["1", "0", "0"]),
        vf3(["0", "1", "x1*x2^2 - x1*x3^2"]),
    )
    .unwrap()
}

/// Planar monodromic field `(−y + x(x²+y²)) ∂x + (x + y(x²+y²)) ∂y`.
pub fn focus2d() -> PolyVectorField {
    let v = ["x", "y"];
    PolyVectorField::new(vec![
        parse_poly("-y + x^3 + x*y^2", &v).unwrap(),
        parse_poly("x + x^2*y + y^3", &v).unwrap(),
    ])
    .unwrap()
}

pub fn by_name(name: &str) -> Option<DistributionSpec> {
    match name.to_ascii_uppercase().as_str() {
        "MARTINET" => Some(martinet()),
        "HEISENBERG" => Some(heisenberg()),
        "TWOPLANES" => Some(twoplanes()),
        "TANGENTIAL" => Some(tangential()),
        _ => None,
    }
}
