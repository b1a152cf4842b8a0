//! Multivariate gcd by recursive subresultant pseudo-remainder sequences,
//! and the squarefree part built on it.

use super::{Monomial, Poly, Rational};
use crate::error::{Error, Result};
use num_traits::One;

/// Largest total degree accepted by [`squarefree`].
pub const SQUAREFREE_DEGREE_CAP: u32 = 12;

/// Greatest common divisor, normalized to a primitive integer polynomial
/// with positive leading coefficient. `gcd(0, 0) = 0`.
pub fn gcd(p: &Poly, q: &Poly) -> Poly {
    assert_eq!(p.arity(), q.arity(), "arity mismatch in gcd");
    if p.is_zero() {
        return q.normalized();
    }
    if q.is_zero() {
        return p.normalized();
    }
    let n = p.arity();
    let main = (0..n).rev().find(|&v| p.involves(v) || q.involves(v));
    let Some(v) = main else {
        return Poly::one(n);
    };
    if !p.involves(v) {
        return gcd(p, &content_in(q, v));
    }
    if !q.involves(v) {
        return gcd(&content_in(p, v), q);
    }
    let cp = content_in(p, v);
    let cq = content_in(q, v);
    let pp = divide(p, &cp);
    let qq = divide(q, &cq);
    let c = gcd(&cp, &cq);
    let g = subresultant_gcd(pp, qq, v);
    (&c * &g).normalized()
}

/// Squarefree part: `p / gcd(p, ∂1 p, …, ∂n p)`, normalized.
pub fn squarefree(p: &Poly) -> Result<Poly> {
    let deg = p.total_degree().ok_or(Error::ZeroInput("squarefree"))?;
    if deg > SQUAREFREE_DEGREE_CAP {
        return Err(Error::DegreeCap {
            degree: deg,
            cap: SQUAREFREE_DEGREE_CAP,
        });
    }
    let mut g = p.clone();
    for i in 0..p.arity() {
        let d = p.d(i);
        if !d.is_zero() {
            g = gcd(&g, &d);
        }
    }
    if g.is_constant() {
        return Ok(p.normalized());
    }
    Ok(divide(p, &g).normalized())
}

fn divide(p: &Poly, q: &Poly) -> Poly {
    p.exact_divide(q)
        .expect("divisibility guaranteed by gcd construction")
}

/// Coefficients of `p` as a polynomial in `v`, indexed by power of `v`.
fn coeffs_in(p: &Poly, v: usize) -> Vec<Poly> {
    let deg = p.degree_in(v).unwrap_or(0) as usize;
    let mut out = vec![Poly::zero(p.arity()); deg + 1];
    for (m, c) in p.terms() {
        let mut e = m.exponents().to_vec();
        let k = e[v] as usize;
        e[v] = 0;
        out[k] = &out[k] + &Poly::monomial(p.arity(), e, c.clone());
    }
    out
}

fn content_in(p: &Poly, v: usize) -> Poly {
    coeffs_in(p, v)
        .iter()
        .filter(|c| !c.is_zero())
        .fold(Poly::zero(p.arity()), |acc, c| gcd(&acc, c))
}

fn deg_in(p: &Poly, v: usize) -> u32 {
    p.degree_in(v).unwrap_or(0)
}

fn lc_in(p: &Poly, v: usize) -> Poly {
    coeffs_in(p, v).pop().unwrap_or_else(|| Poly::zero(p.arity()))
}

fn var_pow(arity: usize, v: usize, k: u32) -> Monomial {
    let mut e = vec![0; arity];
    e[v] = k;
    Monomial::new(e)
}

/// Pseudo-remainder `lc(b)^(deg a - deg b + 1) · a mod b` with respect to `v`.
fn prem(a: &Poly, b: &Poly, v: usize) -> Poly {
    let n = deg_in(b, v);
    let m = deg_in(a, v);
    let l = lc_in(b, v);
    let mut r = a.clone();
    let mut e = (m + 1).saturating_sub(n);
    while !r.is_zero() && deg_in(&r, v) >= n {
        let lr = lc_in(&r, v);
        let shift = var_pow(a.arity(), v, deg_in(&r, v) - n);
        let sub = (&lr * b).mul_monomial(&shift, &Rational::one());
        r = &(&l * &r) - &sub;
        e = e.saturating_sub(1);
    }
    &r * &l.pow(e)
}

/// Gcd of two polynomials primitive in `v`, both of positive degree in `v`.
fn subresultant_gcd(a: Poly, b: Poly, v: usize) -> Poly {
    let n = a.arity();
    let (mut a, mut b) = if deg_in(&a, v) >= deg_in(&b, v) {
        (a, b)
    } else {
        (b, a)
    };
    let mut g = Poly::one(n);
    let mut h = Poly::one(n);
    loop {
        let delta = deg_in(&a, v) - deg_in(&b, v);
        let r = prem(&a, &b, v);
        if r.is_zero() {
            let c = content_in(&b, v);
            return divide(&b, &c);
        }
        if !r.involves(v) {
            return Poly::one(n);
        }
        a = b;
        let denom = &g * &h.pow(delta);
        b = divide(&r, &denom);
        g = lc_in(&a, v);
        if delta > 0 {
            let num = g.pow(delta);
            h = divide(&num, &h.pow(delta - 1));
        }
    }
}
