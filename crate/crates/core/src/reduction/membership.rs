use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Zero};
use serde::Serialize;

use super::{jacobian_classify, PlanarField, SingularityClass, SingularityReport};
use crate::distribution::{ser_rat, ser_rats};
use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::{format_rational, rational_to_f64, Monomial, Poly, Rational};

pub const MEMBERSHIP_DEGREE_CAP: u32 = 8;
const BOUND_GRID: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Membership {
    /// `div Z = f·A + g·B` exactly.
    Witness { f: Poly, g: Poly, degree: u32 },
    /// No witness up to the degree cap; least-squares residual of the last
    /// system and `max |div Z| / (|A| + |B|)` over a cell-centred grid on `[-1, 1]²`.
    NumericBound {
        residual: f64,
        k_estimate: f64,
        grid: usize,
        max_degree: u32,
    },
    /// `div Z` is nonzero at a common zero of `A` and `B`.
    Fail {
        #[serde(serialize_with = "ser_rats")]
        point: Vec<Rational>,
        #[serde(serialize_with = "ser_rat")]
        divergence: Rational,
    },
}

impl Membership {
    pub fn witness(&self) -> Option<(&Poly, &Poly)> {
        match self {
            Membership::Witness { f, g, .. } => Some((f, g)),
            _ => None,
        }
    }
}

fn monomials_up_to(d: u32) -> Vec<Monomial> {
    (0..=d)
        .flat_map(|t| (0..=t).map(move |i| Monomial::new(vec![i, t - i])))
        .collect()
}

struct System {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<Monomial>,
}

fn build_system(z: &PlanarField, div: &Poly, d: u32) -> System {
    let basis = monomials_up_to(d);
    let one = Rational::one();
    let mut columns: Vec<Poly> = Vec::with_capacity(2 * basis.len());
    for comp in [&z.a, &z.b] {
        for m in &basis {
            columns.push(comp.mul_monomial(m, &one));
        }
    }
    let mut index: BTreeMap<Monomial, usize> = BTreeMap::new();
    for p in columns.iter().chain(std::iter::once(div)) {
        for (m, _) in p.terms() {
            let n = index.len();
            index.entry(m.clone()).or_insert(n);
        }
    }
    let mut rows = vec![vec![Rational::zero(); columns.len()]; index.len()];
    for (j, p) in columns.iter().enumerate() {
        for (m, c) in p.terms() {
            rows[index[m]][j] = c.clone();
        }
    }
    let mut rhs = vec![Rational::zero(); index.len()];
    for (m, c) in div.terms() {
        rhs[index[m]] = c.clone();
    }
    System { rows, rhs, basis }
}

fn least_squares_residual(sys: &System) -> f64 {
    let (m, n) = (sys.rows.len(), sys.rows.first().map_or(0, Vec::len));
    if m == 0 || n == 0 {
        return sys.rhs.iter().map(|r| rational_to_f64(r).powi(2)).sum::<f64>().sqrt();
    }
    let a = DMatrix::from_fn(m, n, |i, j| rational_to_f64(&sys.rows[i][j]));
    let b = DVector::from_fn(m, |i, _| rational_to_f64(&sys.rhs[i]));
    let svd = a.clone().svd(true, true);
    match svd.solve(&b, 1e-12) {
        Ok(x) => (a * x - b).norm(),
        Err(_) => b.norm(),
    }
}

fn grid_bound(z: &PlanarField, div: &Poly) -> f64 {
    let h = 2.0 / BOUND_GRID as f64;
    let mut k: f64 = 0.0;
    for i in 0..BOUND_GRID {
        for j in 0..BOUND_GRID {
            let p = [-1.0 + (i as f64 + 0.5) * h, -1.0 + (j as f64 + 0.5) * h];
            let den = z.a.eval_f64(&p).abs() + z.b.eval_f64(&p).abs();
            if den > 0.0 {
                k = k.max(div.eval_f64(&p).abs() / den);
            }
        }
    }
    k
}

/// Look for `f, g` of degree `≤ max_deg` with `div Z = f·A + g·B`, lowest
/// degree first.
pub fn divergence_membership(z: &PlanarField, max_deg: u32) -> Result<Membership> {
    if max_deg > MEMBERSHIP_DEGREE_CAP {
        return Err(Error::DegreeCap {
            degree: max_deg,
            cap: MEMBERSHIP_DEGREE_CAP,
        });
    }
    let div = z.divergence();
    for p in z.axis_singularities() {
        let v = div.eval(&p[..])?;
        if !v.is_zero() {
            return Ok(Membership::Fail {
                point: p.to_vec(),
                divergence: v,
            });
        }
    }
    let mut last = None;
    for d in 0..=max_deg {
        let sys = build_system(z, &div, d);
        if let Some(x) = linalg::solve(&sys.rows, &sys.rhs) {
            let nb = sys.basis.len();
            let assemble = |off: usize| {
                Poly::from_terms(
                    2,
                    sys.basis
                        .iter()
                        .enumerate()
                        .map(|(i, m)| (m.exponents().to_vec(), x[off + i].clone())),
                )
            };
            let (f, g) = (assemble(0), assemble(nb));
            debug_assert!((&div - &(&(&f * &z.a) + &(&g * &z.b))).is_zero());
            return Ok(Membership::Witness { f, g, degree: d });
        }
        last = Some(sys);
    }
    let residual = last.as_ref().map_or(0.0, least_squares_residual);
    Ok(Membership::NumericBound {
        residual,
        k_estimate: grid_bound(z, &div),
        grid: BOUND_GRID,
        max_degree: max_deg,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    /// `(α+1) ∂xÃ(0) + (β+1) ∂yB̃(0)`.
    #[serde(serialize_with = "ser_rat")]
    pub value: Rational,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FinalCheck {
    pub alpha: u32,
    pub beta: u32,
    pub reduced: PlanarField,
    /// `x | Ã`, checked only when `α ≠ 0`.
    pub tangency_x: Option<bool>,
    /// `y | B̃`, checked only when `β ≠ 0`.
    pub tangency_y: Option<bool>,
    pub membership: Membership,
    pub origin: SingularityReport,
    pub identity: Option<IdentityCheck>,
    /// Whether the origin is a saddle, reported only when the divergence
    /// hypothesis holds and the origin is an elementary singular point.
    pub saddle: Option<bool>,
    pub findings: Vec<String>,
}

fn divisible_by_var(p: &Poly, var: usize) -> bool {
    p.var_valuation(var).is_none_or(|k| k >= 1)
}

pub fn final_singularity_check(z: &PlanarField, max_deg: u32) -> Result<FinalCheck> {
    let (alpha, beta) = z.monomial_factor();
    let reduced = z.remove_monomial(alpha, beta);
    let membership = divergence_membership(z, max_deg)?;
    let origin_pt = [Rational::zero(), Rational::zero()];
    let origin = jacobian_classify(&reduced, &origin_pt);
    let mut findings = Vec::new();

    let tangency_x = (alpha != 0).then(|| divisible_by_var(&reduced.a, 0));
    let tangency_y = (beta != 0).then(|| divisible_by_var(&reduced.b, 1));
    if tangency_x == Some(false) {
        findings.push("reduced A is not divisible by x although α ≠ 0".to_string());
    }
    if tangency_y == Some(false) {
        findings.push("reduced B is not divisible by y although β ≠ 0".to_string());
    }

    match &membership {
        Membership::Fail { point, divergence } => findings.push(format!(
            "hypothesis (i) violated: div Z = {} at common zero ({}, {})",
            format_rational(divergence),
            format_rational(&point[0]),
            format_rational(&point[1])
        )),
        Membership::NumericBound { max_degree, .. } => findings.push(format!(
            "divergence membership not established up to degree {max_degree}; no saddle claim made"
        )),
        Membership::Witness { .. } => {}
    }

    let singular = origin.class != SingularityClass::Regular;
    let has_witness = membership.witness().is_some();
    let identity = (singular && has_witness).then(|| {
        let at0 = |p: &Poly| p.eval(&origin_pt[..]).expect("arity 2");
        let value = Rational::from_integer((alpha + 1).into()) * at0(&reduced.a.d(0))
            + Rational::from_integer((beta + 1).into()) * at0(&reduced.b.d(1));
        IdentityCheck {
            holds: value.is_zero(),
            value,
        }
    });
    if identity.as_ref().is_some_and(|i| !i.holds) {
        findings.push("trace identity at the origin fails".to_string());
    }

    let saddle = (singular && has_witness && origin.class.is_elementary())
        .then(|| origin.class == SingularityClass::Saddle);
    if saddle == Some(false) {
        findings.push(format!("origin is elementary but {:?}, not a saddle", origin.class));
    }
    if singular && !origin.class.is_elementary() {
        findings.push("origin is non-elementary; blow-up required before a saddle claim".to_string());
    }

    Ok(FinalCheck {
        alpha,
        beta,
        reduced,
        tangency_x,
        tangency_y,
        membership,
        origin,
        identity,
        saddle,
        findings,
    })
}
