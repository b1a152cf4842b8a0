//! Planar vector fields: singularity classification, point blow-ups and
//! their strict transforms, the divergence-ideal criterion for saddles, and
//! the degenerate monomial metric near divisor corners.

mod blowup;
mod hp;
mod membership;
mod resolve;

pub use blowup::{blow_up_point, chart_overlap_residual, BlowUpChart, ChartKind};
pub use hp::{hp_metric_compare, HpGrid, HpInput, HpResult};
pub use membership::{
    divergence_membership, final_singularity_check, FinalCheck, IdentityCheck, Membership,
    MEMBERSHIP_DEGREE_CAP,
};
pub use resolve::{resolve, LeafSummary, ResolutionNode, ResolutionTree, DEFAULT_MAX_DEPTH};

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::distribution::{ser_rat, ser_rats};
use crate::error::{Error, Result};
use crate::poly::{univariate, Poly, PolyVectorField, Rational};

/// The field `A ∂x + B ∂y`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlanarField {
    pub a: Poly,
    pub b: Poly,
}

impl PlanarField {
    pub fn new(a: Poly, b: Poly) -> Result<Self> {
        for p in [&a, &b] {
            if p.arity() != 2 {
                return Err(Error::ArityMismatch {
                    left: 2,
                    right: p.arity(),
                });
            }
        }
        if a.is_zero() && b.is_zero() {
            return Err(Error::ZeroInput("planar field"));
        }
        Ok(PlanarField { a, b })
    }

    pub fn from_field(f: &PolyVectorField) -> Result<Self> {
        if f.arity() != 2 {
            return Err(Error::ArityMismatch {
                left: 2,
                right: f.arity(),
            });
        }
        PlanarField::new(f.component(0).clone(), f.component(1).clone())
    }

    pub fn to_field(&self) -> PolyVectorField {
        PolyVectorField::new(vec![self.a.clone(), self.b.clone()]).expect("planar arity")
    }

    pub fn divergence(&self) -> Poly {
        &self.a.d(0) + &self.b.d(1)
    }

    pub fn eval(&self, p: &[Rational; 2]) -> [Rational; 2] {
        [
            self.a.eval(&p[..]).expect("arity 2"),
            self.b.eval(&p[..]).expect("arity 2"),
        ]
    }

    pub fn vanishes_at(&self, p: &[Rational; 2]) -> bool {
        self.eval(p).iter().all(Zero::is_zero)
    }

    /// Largest `(α, β)` with `x^α y^β` dividing both components.
    pub fn monomial_factor(&self) -> (u32, u32) {
        let vals = |v| {
            [&self.a, &self.b]
                .iter()
                .filter(|p| !p.is_zero())
                .filter_map(|p| p.var_valuation(v))
                .min()
                .unwrap_or(0)
        };
        (vals(0), vals(1))
    }

    /// Divide both components by `x^α y^β`.
    pub fn remove_monomial(&self, alpha: u32, beta: u32) -> PlanarField {
        let shift = |p: &Poly| p.shift_down(0, alpha).shift_down(1, beta);
        PlanarField {
            a: shift(&self.a),
            b: shift(&self.b),
        }
    }

    /// Rational singular points on the coordinate axes, plus the origin.
    pub fn axis_singularities(&self) -> Vec<[Rational; 2]> {
        let mut out = vec![[Rational::zero(), Rational::zero()]];
        for axis in 0..2 {
            // restrict to the line where the other coordinate vanishes
            let other = 1 - axis;
            let a = self.a.substitute_value(other, &Rational::zero());
            let b = self.b.substitute_value(other, &Rational::zero());
            for r in common_rational_roots(&a, &b, axis) {
                let mut p = [Rational::zero(), Rational::zero()];
                p[axis] = r;
                out.push(p);
            }
        }
        out.sort();
        out.dedup();
        out.retain(|p| self.vanishes_at(p));
        out
    }
}

/// Rational roots shared by two polynomials that only involve `var`.
pub(crate) fn common_rational_roots(a: &Poly, b: &Poly, var: usize) -> Vec<Rational> {
    let (ca, cb) = match (
        univariate::dense_coeffs(a, var),
        univariate::dense_coeffs(b, var),
    ) {
        (Some(x), Some(y)) => (x, y),
        _ => return Vec::new(),
    };
    let zero_a = ca.iter().all(Zero::is_zero);
    let zero_b = cb.iter().all(Zero::is_zero);
    let (src, other) = match (zero_a, zero_b) {
        (true, true) => return Vec::new(),
        (true, false) => (&cb, None),
        (false, true) => (&ca, None),
        (false, false) => (&ca, Some(b)),
    };
    let (roots, _) = univariate::rational_roots(src);
    roots
        .into_iter()
        .map(|(r, _)| r)
        .filter(|r| {
            other.is_none_or(|q| {
                let mut pt = vec![Rational::zero(); 2];
                pt[var] = r.clone();
                q.eval(&pt).map(|v| v.is_zero()).unwrap_or(false)
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SingularityClass {
    Regular,
    Saddle,
    Node,
    FocusOrCenterLinear,
    /// One zero and one nonzero eigenvalue: elementary but degenerate.
    SaddleNode,
    NonElementary,
}

impl SingularityClass {
    /// Classification from the Jacobian invariants of a singular point.
    pub fn from_invariants(det: &Rational, trace: &Rational) -> Self {
        let disc = trace * trace - det * Rational::from_integer(4.into());
        if det.is_negative() {
            SingularityClass::Saddle
        } else if det.is_zero() {
            if trace.is_zero() {
                SingularityClass::NonElementary
            } else {
                SingularityClass::SaddleNode
            }
        } else if trace.is_zero() {
            SingularityClass::NonElementary
        } else if !disc.is_negative() {
            SingularityClass::Node
        } else {
            SingularityClass::FocusOrCenterLinear
        }
    }

    pub fn is_elementary(self) -> bool {
        !matches!(self, SingularityClass::NonElementary)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SingularityReport {
    #[serde(serialize_with = "ser_rats")]
    pub point: Vec<Rational>,
    #[serde(serialize_with = "ser_rat")]
    pub det: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub trace: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub discriminant: Rational,
    pub class: SingularityClass,
}

impl SingularityReport {
    pub fn point2(&self) -> [Rational; 2] {
        [self.point[0].clone(), self.point[1].clone()]
    }
}

pub fn jacobian_classify(z: &PlanarField, p: &[Rational; 2]) -> SingularityReport {
    let at = |q: &Poly| q.eval(&p[..]).expect("arity 2");
    let (ax, ay, bx, by) = (at(&z.a.d(0)), at(&z.a.d(1)), at(&z.b.d(0)), at(&z.b.d(1)));
    let det = &ax * &by - &ay * &bx;
    let trace = &ax + &by;
    let discriminant = &trace * &trace - &det * Rational::from_integer(4.into());
    let class = if z.vanishes_at(p) {
        SingularityClass::from_invariants(&det, &trace)
    } else {
        SingularityClass::Regular
    };
    SingularityReport {
        point: p.to_vec(),
        det,
        trace,
        discriminant,
        class,
    }
}
