use num_traits::Zero;
use serde::Serialize;

use super::{jacobian_classify, PlanarField, SingularityReport};
use crate::distribution::ser_rats;
use crate::error::{Error, Result};
use crate::poly::{format_rational, gcd, univariate, Poly, PolyMap, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    /// `(u, v) ↦ (a + u, b + uv)`, divisor `{u = 0}`.
    One,
    /// `(u, v) ↦ (a + uv, b + v)`, divisor `{v = 0}`.
    Two,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlowUpChart {
    pub kind: ChartKind,
    #[serde(serialize_with = "ser_rats")]
    pub center: Vec<Rational>,
    #[serde(serialize_with = "ser_map")]
    pub map: PolyMap,
    /// Pulled-back field before division by the divisor equation.
    pub pullback: PlanarField,
    pub divisor_exponent: u32,
    pub strict: PlanarField,
    pub dicritical: bool,
    /// Rational singular points of the strict transform on the divisor
    /// (chart two only looks at its origin, the point chart one misses).
    pub singularities: Vec<SingularityReport>,
    /// Real singular points on the divisor that are not rational.
    pub irrational_points: usize,
}

fn ser_map<S: serde::Serializer>(m: &PolyMap, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(m.components().iter().map(|c| c.to_string_with(&["u", "v"])))
}

impl BlowUpChart {
    /// Index of the coordinate whose vanishing defines the divisor.
    pub fn divisor_var(&self) -> usize {
        match self.kind {
            ChartKind::One => 0,
            ChartKind::Two => 1,
        }
    }
}

fn divide(p: &Poly, q: &Poly) -> Result<Poly> {
    p.exact_divide(q)
        .map_err(|e| Error::Precondition(format!("strict transform not polynomial: {e:?}")))
}

fn build_chart(z: &PlanarField, center: &[Rational; 2], kind: ChartKind) -> Result<BlowUpChart> {
    let u = Poly::var(2, 0);
    let v = Poly::var(2, 1);
    let a = Poly::constant(2, center[0].clone());
    let b = Poly::constant(2, center[1].clone());
    let (map, e) = match kind {
        ChartKind::One => (PolyMap::new(2, vec![&a + &u, &b + &(&u * &v)])?, 0),
        ChartKind::Two => (PolyMap::new(2, vec![&a + &(&u * &v), &b + &v])?, 1),
    };
    let pa = map.pullback(&z.a)?;
    let pb = map.pullback(&z.b)?;
    let pullback = match kind {
        ChartKind::One => PlanarField {
            b: divide(&(&pb - &(&v * &pa)), &u)?,
            a: pa,
        },
        ChartKind::Two => PlanarField {
            a: divide(&(&pa - &(&u * &pb)), &v)?,
            b: pb,
        },
    };
    let r = [&pullback.a, &pullback.b]
        .iter()
        .filter_map(|p| p.var_valuation(e))
        .min()
        .unwrap_or(0);
    let strict = PlanarField {
        a: pullback.a.shift_down(e, r),
        b: pullback.b.shift_down(e, r),
    };
    // component transverse to the divisor, restricted to it
    let transverse = if e == 0 { &strict.a } else { &strict.b };
    let dicritical = !transverse.substitute_value(e, &Rational::zero()).is_zero();

    let mut singularities = Vec::new();
    let mut irrational_points = 0;
    match kind {
        ChartKind::One => {
            let a0 = strict.a.substitute_value(0, &Rational::zero());
            let b0 = strict.b.substitute_value(0, &Rational::zero());
            let g = gcd(&a0, &b0);
            if let Some(coeffs) = univariate::dense_coeffs(&g, 1) {
                let (roots, rest) = univariate::rational_roots(&coeffs);
                irrational_points = univariate::count_real_roots(&rest);
                for (r, _) in roots {
                    singularities.push(jacobian_classify(&strict, &[Rational::zero(), r]));
                }
            }
        }
        ChartKind::Two => {
            let origin = [Rational::zero(), Rational::zero()];
            if strict.vanishes_at(&origin) {
                singularities.push(jacobian_classify(&strict, &origin));
            }
        }
    }
    Ok(BlowUpChart {
        kind,
        center: center.to_vec(),
        map,
        pullback,
        divisor_exponent: r,
        strict,
        dicritical,
        singularities,
        irrational_points,
    })
}

/// Blow up `z` at the singular point `p`, returning both charts.
pub fn blow_up_point(z: &PlanarField, p: &[Rational; 2]) -> Result<(BlowUpChart, BlowUpChart)> {
    if !z.vanishes_at(p) {
        return Err(Error::Precondition(format!(
            "blow-up center ({}, {}) is not a singular point",
            format_rational(&p[0]),
            format_rational(&p[1])
        )));
    }
    Ok((
        build_chart(z, p, ChartKind::One)?,
        build_chart(z, p, ChartKind::Two)?,
    ))
}

/// Mismatch between the two strict transforms of one blow-up at a point
/// `(u, v)` of chart one with `u, v ≠ 0`. The charts are related by
/// `(u, v) ↦ (1/v, uv)`, and the strict transforms by the divisor factors:
/// `Dφ · S₁ · u^{r₁} = S₂∘φ · (uv)^{r₂}`. Returns the largest component
/// difference relative to the size of the two sides.
pub fn chart_overlap_residual(c1: &BlowUpChart, c2: &BlowUpChart, q: [f64; 2]) -> f64 {
    let [u, v] = q;
    let s1 = [c1.strict.a.eval_f64(&q), c1.strict.b.eval_f64(&q)];
    let f1 = u.powi(c1.divisor_exponent as i32);
    // Dφ = [[0, -1/v²], [v, u]]
    let lhs = [-s1[1] / (v * v) * f1, (v * s1[0] + u * s1[1]) * f1];
    let p = [1.0 / v, u * v];
    let s2 = [c2.strict.a.eval_f64(&p), c2.strict.b.eval_f64(&p)];
    let f2 = (u * v).powi(c2.divisor_exponent as i32);
    let rhs = [s2[0] * f2, s2[1] * f2];
    let scale = lhs
        .iter()
        .chain(rhs.iter())
        .fold(1e-300_f64, |m, x| m.max(x.abs()));
    (0..2)
        .map(|i| (lhs[i] - rhs[i]).abs())
        .fold(0.0, f64::max)
        / scale
}
