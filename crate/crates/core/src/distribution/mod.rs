//! Martinet surface, characteristic line field and point strata of a rank-2
//! distribution on R³.
//!
//! A distribution is given either by a polynomial 1-form `δ = c1 dx1 + c2 dx2
//! + c3 dx3` or by a frame `(X¹, X²)`. The Martinet surface Σ is the zero set
//! of `h`, where `δ ∧ dδ = h_raw dx1∧dx2∧dx3` (or `h_raw = det[X¹|X²|[X¹,X²]]`)
//! and `h` is the squarefree part of `h_raw`.

use num_traits::Zero;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::{self, univariate, Poly, PolyVectorField, Rational};

pub const HORMANDER_DEPTH_CAP: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DistributionForm {
    /// Coefficients `(c1, c2, c3)` of `δ`.
    OneForm([Poly; 3]),
    Pair(PolyVectorField, PolyVectorField),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistributionSpec {
    pub name: String,
    pub form: DistributionForm,
}

impl DistributionSpec {
    pub fn one_form(name: impl Into<String>, coeffs: [Poly; 3]) -> Result<Self> {
        if let Some(bad) = coeffs.iter().find(|c| c.arity() != 3) {
            return Err(Error::ArityMismatch {
                left: 3,
                right: bad.arity(),
            });
        }
        if coeffs.iter().all(Poly::is_zero) {
            return Err(Error::Precondition("1-form is identically zero".into()));
        }
        Ok(DistributionSpec {
            name: name.into(),
            form: DistributionForm::OneForm(coeffs),
        })
    }

    pub fn pair(name: impl Into<String>, x1: PolyVectorField, x2: PolyVectorField) -> Result<Self> {
        for f in [&x1, &x2] {
            if f.arity() != 3 {
                return Err(Error::ArityMismatch {
                    left: 3,
                    right: f.arity(),
                });
            }
        }
        Ok(DistributionSpec {
            name: name.into(),
            form: DistributionForm::Pair(x1, x2),
        })
    }

    /// A generating frame `(X¹, X²)`. A 1-form is converted by solving `δ(X) = 0`
    /// on coordinate fields, which needs one coefficient to be a nonzero constant.
    pub fn frame(&self) -> Result<(PolyVectorField, PolyVectorField)> {
        match &self.form {
            DistributionForm::Pair(a, b) => Ok((a.clone(), b.clone())),
            DistributionForm::OneForm(c) => {
                let k = [2usize, 1, 0]
                    .into_iter()
                    .find(|&k| c[k].constant_value().is_some_and(|v| !v.is_zero()))
                    .ok_or_else(|| {
                        Error::Precondition(
                            "1-form has no nonzero constant coefficient; cannot build a frame"
                                .into(),
                        )
                    })?;
                let ck = c[k].constant_value().unwrap();
                let inv = ck.recip();
                let mut fields = (0..3).filter(|&i| i != k).map(|i| {
                    let mut comps = vec![Poly::zero(3); 3];
                    comps[i] = Poly::one(3);
                    comps[k] = -&c[i].scale(&inv);
                    PolyVectorField::new(comps).expect("arity 3")
                });
                Ok((fields.next().unwrap(), fields.next().unwrap()))
            }
        }
    }

    /// Coefficients of a 1-form annihilating the distribution (`X¹ × X²` for a frame).
    pub fn annihilator(&self) -> [Poly; 3] {
        match &self.form {
            DistributionForm::OneForm(c) => c.clone(),
            DistributionForm::Pair(a, b) => {
                let (a, b) = (a.components(), b.components());
                [
                    &(&a[1] * &b[2]) - &(&a[2] * &b[1]),
                    &(&a[2] * &b[0]) - &(&a[0] * &b[2]),
                    &(&a[0] * &b[1]) - &(&a[1] * &b[0]),
                ]
            }
        }
    }

    /// Points among `samples` where the spec degenerates (δ vanishes, or the
    /// frame is linearly dependent).
    pub fn degenerate_points(&self, samples: &[[Rational; 3]]) -> Vec<[Rational; 3]> {
        let ann = self.annihilator();
        samples
            .iter()
            .filter(|p| {
                ann.iter()
                    .all(|c| c.eval(&p[..]).map(|v| v.is_zero()).unwrap_or(true))
            })
            .cloned()
            .collect()
    }
}

/// `h_raw`, its squarefree part `h` and `∇h`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MartinetData {
    pub h_raw: Poly,
    pub h: Poly,
    pub gradient: [Poly; 3],
}

impl MartinetData {
    /// Σ is empty exactly when `h` is a nonzero constant.
    pub fn sigma_is_empty(&self) -> bool {
        self.h.is_constant()
    }
}

fn curl(c: &[Poly; 3]) -> [Poly; 3] {
    [
        &c[2].d(1) - &c[1].d(2),
        &c[0].d(2) - &c[2].d(0),
        &c[1].d(0) - &c[0].d(1),
    ]
}

fn det3(cols: [&[Poly]; 3]) -> Poly {
    let m = |r: usize, c: usize| &cols[c][r];
    let t1 = m(0, 0) * &(&(m(1, 1) * m(2, 2)) - &(m(1, 2) * m(2, 1)));
    let t2 = m(0, 1) * &(&(m(1, 0) * m(2, 2)) - &(m(1, 2) * m(2, 0)));
    let t3 = m(0, 2) * &(&(m(1, 0) * m(2, 1)) - &(m(1, 1) * m(2, 0)));
    &(&t1 - &t2) + &t3
}

pub fn martinet_function(spec: &DistributionSpec) -> Result<MartinetData> {
    let h_raw = match &spec.form {
        DistributionForm::OneForm(c) => {
            let k = curl(c);
            (0..3).fold(Poly::zero(3), |acc, i| &acc + &(&c[i] * &k[i]))
        }
        DistributionForm::Pair(a, b) => {
            let br = a.lie_bracket(b)?;
            det3([a.components(), b.components(), br.components()])
        }
    };
    if h_raw.is_zero() {
        return Err(Error::Precondition(format!(
            "distribution `{}` is integrable (δ∧dδ ≡ 0)",
            spec.name
        )));
    }
    let h = poly::squarefree(&h_raw)?;
    let gradient = [h.d(0), h.d(1), h.d(2)];
    Ok(MartinetData { h_raw, h, gradient })
}

/// `Z = X¹(h) X² − X²(h) X¹`.
pub fn characteristic_field(spec: &DistributionSpec, md: &MartinetData) -> Result<PolyVectorField> {
    let (x1, x2) = spec.frame()?;
    let a = x1.directional(&md.h)?;
    let b = x2.directional(&md.h)?;
    Ok(x2.scale(&a).sub(&x1.scale(&b)))
}

/// Whether a generator system provably has no common zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LocusStatus {
    /// Some generator is a nonzero constant.
    Empty,
    Undetermined,
}

#[derive(Clone, Debug, Serialize)]
pub struct TangencyLocus {
    /// `{h, X¹(h), X²(h)}`: points of Σ where `TΣ ⊂ Δ`.
    pub tangency_system: Vec<Poly>,
    /// `{h, ∂1h, ∂2h, ∂3h}`: singular points of Σ.
    pub singular_system: Vec<Poly>,
    pub tangency_status: LocusStatus,
    pub singular_status: LocusStatus,
    #[serde(serialize_with = "ser_points")]
    pub tangency_hits: Vec<[Rational; 3]>,
    #[serde(serialize_with = "ser_points")]
    pub singular_hits: Vec<[Rational; 3]>,
}

impl TangencyLocus {
    pub fn is_empty(&self) -> bool {
        self.tangency_status == LocusStatus::Empty && self.singular_status == LocusStatus::Empty
    }
}

pub(crate) fn ser_points<S: serde::Serializer>(
    pts: &[[Rational; 3]],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(pts.len()))?;
    for p in pts {
        let v: Vec<String> = p.iter().map(poly::format_rational).collect();
        seq.serialize_element(&v)?;
    }
    seq.end()
}

fn system_status(system: &[Poly]) -> LocusStatus {
    if system
        .iter()
        .any(|g| g.constant_value().is_some_and(|v| !v.is_zero()))
    {
        LocusStatus::Empty
    } else {
        LocusStatus::Undetermined
    }
}

fn common_zero(system: &[Poly], p: &[Rational; 3]) -> bool {
    system
        .iter()
        .all(|g| g.eval(&p[..]).map(|v| v.is_zero()).unwrap_or(false))
}

pub fn tangency_locus(
    spec: &DistributionSpec,
    md: &MartinetData,
    candidates: &[[Rational; 3]],
) -> Result<TangencyLocus> {
    let (x1, x2) = spec.frame()?;
    let tangency_system = vec![md.h.clone(), x1.directional(&md.h)?, x2.directional(&md.h)?];
    let mut singular_system = vec![md.h.clone()];
    singular_system.extend(md.gradient.iter().cloned());
    let tangency_hits = candidates
        .iter()
        .filter(|p| common_zero(&tangency_system, p))
        .cloned()
        .collect();
    let singular_hits = candidates
        .iter()
        .filter(|p| common_zero(&singular_system, p))
        .cloned()
        .collect();
    Ok(TangencyLocus {
        tangency_status: system_status(&tangency_system),
        singular_status: system_status(&singular_system),
        tangency_system,
        singular_system,
        tangency_hits,
        singular_hits,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Stratum {
    OffSigma,
    Sigma2,
    #[serde(rename = "Sigma1_tr")]
    Sigma1Tr,
    #[serde(rename = "Sigma1_tan")]
    Sigma1Tan,
    #[serde(rename = "Sigma0_candidate")]
    Sigma0Candidate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PointDiagnostics {
    #[serde(serialize_with = "ser_rat")]
    pub h: Rational,
    #[serde(serialize_with = "ser_rats")]
    pub grad_h: Vec<Rational>,
    #[serde(serialize_with = "ser_rat")]
    pub x1_h: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub x2_h: Rational,
    #[serde(serialize_with = "ser_rats")]
    pub z: Vec<Rational>,
    /// `δ(T)` when a stratum tangent was supplied.
    #[serde(serialize_with = "ser_opt_rat")]
    pub delta_t: Option<Rational>,
}

pub(crate) fn ser_rat<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&poly::format_rational(r))
}

pub(crate) fn ser_rats<S: serde::Serializer>(
    r: &[Rational],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(r.iter().map(poly::format_rational))
}

pub(crate) fn ser_opt_rat<S: serde::Serializer>(
    r: &Option<Rational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_some(&poly::format_rational(r)),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PointClass {
    pub class: Stratum,
    pub diagnostics: PointDiagnostics,
}

pub fn classify_point(
    spec: &DistributionSpec,
    md: &MartinetData,
    p: &[Rational; 3],
    stratum_tangent: Option<&[Rational; 3]>,
) -> Result<PointClass> {
    let (x1, x2) = spec.frame()?;
    let z = characteristic_field(spec, md)?;
    let at = |f: &Poly| f.eval(&p[..]);
    let h = at(&md.h)?;
    let grad_h = md.gradient.iter().map(at).collect::<Result<Vec<_>>>()?;
    let x1_h = at(&x1.directional(&md.h)?)?;
    let x2_h = at(&x2.directional(&md.h)?)?;
    let zv = z.eval(&p[..])?;
    let ann = spec
        .annihilator()
        .iter()
        .map(at)
        .collect::<Result<Vec<_>>>()?;
    let delta_t = stratum_tangent.map(|t| {
        ann.iter()
            .zip(t.iter())
            .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
    });
    let class = if !h.is_zero() {
        Stratum::OffSigma
    } else if grad_h.iter().any(|g| !g.is_zero()) && !(x1_h.is_zero() && x2_h.is_zero()) {
        Stratum::Sigma2
    } else {
        match (&delta_t, stratum_tangent) {
            (Some(dt), Some(t))
                if t.iter().any(|c| !c.is_zero()) && ann.iter().any(|a| !a.is_zero()) =>
            {
                if dt.is_zero() {
                    Stratum::Sigma1Tan
                } else {
                    Stratum::Sigma1Tr
                }
            }
            _ => Stratum::Sigma0Candidate,
        }
    };
    Ok(PointClass {
        class,
        diagnostics: PointDiagnostics {
            h,
            grad_h,
            x1_h,
            x2_h,
            z: zv,
            delta_t,
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HormanderRank {
    pub rank: usize,
    /// Bracket length at which `rank` was first reached.
    pub achieved_depth: usize,
}

/// Rank of all right-normed brackets of `X¹, X²` of length `≤ depth` at `p`.
pub fn hormander_check(spec: &DistributionSpec, p: &[Rational; 3], depth: usize) -> Result<HormanderRank> {
    if depth > HORMANDER_DEPTH_CAP {
        return Err(Error::Precondition(format!(
            "bracket depth {depth} exceeds cap {HORMANDER_DEPTH_CAP}"
        )));
    }
    let (x1, x2) = spec.frame()?;
    let generators = [x1, x2];
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut rank = 0;
    let mut achieved = 0;
    let mut layer: Vec<PolyVectorField> = generators.to_vec();
    for d in 1..=depth {
        if d > 1 {
            let mut next = Vec::with_capacity(layer.len() * 2);
            for g in &generators {
                for w in &layer {
                    let b = g.lie_bracket(w)?;
                    if !b.is_zero() {
                        next.push(b);
                    }
                }
            }
            layer = next;
        }
        for f in &layer {
            rows.push(f.eval(&p[..])?);
        }
        let r = linalg::rank(&rows);
        if r > rank {
            rank = r;
            achieved = d;
        }
        if rank == 3 || layer.is_empty() {
            break;
        }
    }
    Ok(HormanderRank {
        rank,
        achieved_depth: achieved,
    })
}

/// Random rational points on `{h = 0}`: fix all coordinates but one to small
/// random rationals and keep the rational roots of the remaining univariate
/// polynomial.
pub fn sample_zero_set<R: Rng>(h: &Poly, count: usize, rng: &mut R) -> Vec<Vec<Rational>> {
    let n = h.arity();
    let involved: Vec<usize> = (0..n).filter(|&v| h.involves(v)).collect();
    let mut out = Vec::with_capacity(count);
    if involved.is_empty() {
        return out;
    }
    let mut attempts = 0;
    while out.len() < count && attempts < 200 * count {
        attempts += 1;
        let k = involved[rng.random_range(0..involved.len())];
        let mut point: Vec<Rational> = (0..n)
            .map(|_| poly::rat(rng.random_range(-20..=20), rng.random_range(1..=7)))
            .collect();
        let mut restricted = h.clone();
        for (v, c) in point.iter().enumerate() {
            if v != k {
                restricted = restricted.substitute_value(v, c);
            }
        }
        let Some(coeffs) = univariate::dense_coeffs(&restricted, k) else {
            continue;
        };
        if coeffs.iter().all(Zero::is_zero) {
            out.push(point);
            continue;
        }
        let (roots, _) = univariate::rational_roots(&coeffs);
        if roots.is_empty() {
            continue;
        }
        let (r, _) = &roots[rng.random_range(0..roots.len())];
        point[k] = r.clone();
        out.push(point);
    }
    out
}

/// Sign-insensitive comparison helper: is `a = c·b` for a nonzero rational `c`?
pub fn agree_up_to_unit(a: &Poly, b: &Poly) -> bool {
    match (a.signed_content(), b.signed_content()) {
        (Some(_), Some(_)) => a.normalized() == b.normalized(),
        (None, None) => true,
        _ => false,
    }
}

#[cfg(test)]
mod tests;
