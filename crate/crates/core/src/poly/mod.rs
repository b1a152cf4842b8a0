//! Exact multivariate polynomials over the rationals.
//!
//! A [`Poly`] is a sparse map from exponent vectors to nonzero rational
//! coefficients. Terms are kept in graded lexicographic order: total degree
//! first, ties broken by the exponent of `x1`, then `x2`, and so on. The
//! canonical printer walks the terms from the largest monomial down.

mod eval;
mod field;
mod gcd;
mod parse;
pub mod univariate;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub use eval::{CompiledField, CompiledPoly};
pub use field::{PolyMap, PolyVectorField};
pub use gcd::{gcd, squarefree, SQUAREFREE_DEGREE_CAP};
pub use parse::{parse_poly, ParseError};

/// Exact rational coefficient. Always reduced with a positive denominator.
pub type Rational = BigRational;

/// Shorthand for building a rational from small integers.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        // numerator/denominator too large for a direct conversion
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exponent vector of a single monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn one(arity: usize) -> Self {
        Monomial(vec![0; arity])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other` when `other` divides `self`.
    pub fn checked_div(&self, other: &Monomial) -> Option<Monomial> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Monomial)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial with exact rational coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    arity: usize,
    terms: BTreeMap<Monomial, Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl Poly {
    pub fn zero(arity: usize) -> Self {
        Poly {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(arity: usize) -> Self {
        Self::constant(arity, Rational::one())
    }

    pub fn constant(arity: usize, c: Rational) -> Self {
        Self::monomial(arity, vec![0; arity], c)
    }

    pub fn from_int(arity: usize, c: i64) -> Self {
        Self::constant(arity, rat_int(c))
    }

    /// The coordinate function `x_{index+1}`.
    pub fn var(arity: usize, index: usize) -> Self {
        assert!(index < arity, "variable index {index} out of range for arity {arity}");
        let mut e = vec![0; arity];
        e[index] = 1;
        Self::monomial(arity, e, Rational::one())
    }

    pub fn monomial(arity: usize, exps: Vec<u32>, c: Rational) -> Self {
        assert_eq!(exps.len(), arity, "exponent vector length must equal arity");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial(exps), c);
        }
        Poly { arity, terms }
    }

    /// Builds a polynomial from possibly repeated or zero terms.
    pub fn from_terms<I>(arity: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut p = Poly::zero(arity);
        for (e, c) in terms {
            assert_eq!(e.len(), arity, "exponent vector length must equal arity");
            p.add_term(Monomial(e), c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exps: &[u32]) -> Rational {
        self.terms
            .get(&Monomial(exps.to_vec()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    /// Value of a constant polynomial (zero for the zero polynomial).
    pub fn constant_value(&self) -> Option<Rational> {
        if self.is_constant() {
            Some(self.coefficient(&vec![0; self.arity]))
        } else {
            None
        }
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&vec![0; self.arity])
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn degree_in(&self, var: usize) -> Option<u32> {
        self.terms.keys().map(|m| m.0[var]).max()
    }

    pub fn involves(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m.0[var] > 0)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coefficient(&self) -> Option<&Rational> {
        self.leading_term().map(|(_, c)| c)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.arity);
        }
        Poly {
            arity: self.arity,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.arity);
        }
        Poly {
            arity: self.arity,
            terms: self.terms.iter().map(|(k, a)| (k.mul(m), a * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one(self.arity);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Ring operation with an explicit arity check.
    pub fn arith(&self, other: &Poly, op: ArithOp) -> Result<Poly> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                left: self.arity,
                right: other.arity,
            });
        }
        Ok(match op {
            ArithOp::Add => self + other,
            ArithOp::Sub => self - other,
            ArithOp::Mul => self * other,
        })
    }

    /// Formal partial derivative with respect to variable `var` (0-based).
    pub fn partial(&self, var: usize) -> Result<Poly> {
        if var >= self.arity {
            return Err(Error::IndexOutOfRange {
                index: var,
                arity: self.arity,
            });
        }
        let mut out = Poly::zero(self.arity);
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[var] -= 1;
            out.add_term(Monomial(exps), c * rat_int(e as i64));
        }
        Ok(out)
    }

    /// Same as [`Poly::partial`] for indices already known to be valid.
    pub fn d(&self, var: usize) -> Poly {
        self.partial(var).expect("variable index within arity")
    }

    pub fn gradient(&self) -> Vec<Poly> {
        (0..self.arity).map(|i| self.d(i)).collect()
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, point: &[Rational]) -> Result<Rational> {
        if point.len() != self.arity {
            return Err(Error::ArityMismatch {
                left: self.arity,
                right: point.len(),
            });
        }
        let mut powers: Vec<Vec<Rational>> = Vec::with_capacity(self.arity);
        for (i, x) in point.iter().enumerate() {
            let maxe = self.degree_in(i).unwrap_or(0) as usize;
            let mut row = Vec::with_capacity(maxe + 1);
            row.push(Rational::one());
            for k in 1..=maxe {
                let next = &row[k - 1] * x;
                row.push(next);
            }
            powers.push(row);
        }
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t *= &powers[i][e as usize];
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Floating-point evaluation.
    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.arity);
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut t = rational_to_f64(c);
                for (i, &e) in m.0.iter().enumerate() {
                    if e > 0 {
                        t *= point[i].powi(e as i32);
                    }
                }
                t
            })
            .sum()
    }

    /// Substitutes `value` for variable `var`, keeping the arity.
    pub fn substitute_value(&self, var: usize, value: &Rational) -> Poly {
        let mut out = Poly::zero(self.arity);
        for (m, c) in &self.terms {
            let mut exps = m.0.clone();
            let e = exps[var];
            exps[var] = 0;
            let factor = num_traits::pow::pow(value.clone(), e as usize);
            out.add_term(Monomial(exps), c * factor);
        }
        out
    }

    /// Exact division. Succeeds iff `q` divides `self` in the polynomial ring.
    pub fn exact_divide(&self, q: &Poly) -> std::result::Result<Poly, DivisionError> {
        if q.is_zero() {
            return Err(DivisionError::DivisionByZero);
        }
        if q.arity != self.arity {
            return Err(DivisionError::ArityMismatch);
        }
        let (lm_q, lc_q) = q.leading_term().map(|(m, c)| (m.clone(), c.clone())).unwrap();
        let mut rem = self.clone();
        let mut quot = Poly::zero(self.arity);
        let mut leftover = Poly::zero(self.arity);
        while let Some((m, c)) = rem.leading_term().map(|(m, c)| (m.clone(), c.clone())) {
            match m.checked_div(&lm_q) {
                Some(shift) => {
                    let coeff = &c / &lc_q;
                    rem = &rem - &q.mul_monomial(&shift, &coeff);
                    quot.add_term(shift, coeff);
                }
                None => {
                    rem.terms.remove(&m);
                    leftover.add_term(m, c);
                }
            }
        }
        if leftover.is_zero() {
            Ok(quot)
        } else {
            Err(DivisionError::NotDivisible {
                remainder: leftover,
            })
        }
    }

    /// Largest `k` with `x_var^k` dividing `self` (zero polynomial gives `None`).
    pub fn var_valuation(&self, var: usize) -> Option<u32> {
        self.terms.keys().map(|m| m.0[var]).min()
    }

    /// Divides every exponent of `var` by shifting down `k` (caller guarantees divisibility).
    pub fn shift_down(&self, var: usize, k: u32) -> Poly {
        Poly {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut e = m.0.clone();
                    e[var] -= k;
                    (Monomial(e), c.clone())
                })
                .collect(),
        }
    }

    /// Rational content with the sign of the leading coefficient: dividing by it
    /// yields integer coefficients with gcd 1 and a positive leading coefficient.
    pub fn signed_content(&self) -> Option<Rational> {
        let lc = self.leading_coefficient()?;
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num_gcd.gcd(c.numer());
            den_lcm = den_lcm.lcm(c.denom());
        }
        let content = Rational::new(num_gcd, den_lcm);
        Some(if lc.is_negative() { -content } else { content })
    }

    /// Primitive integer form with a positive leading coefficient.
    pub fn normalized(&self) -> Poly {
        match self.signed_content() {
            Some(c) => self.scale(&c.recip()),
            None => self.clone(),
        }
    }

    /// Same polynomial read in a larger variable set, with the old variables
    /// placed at `positions`.
    pub fn embed(&self, arity: usize, positions: &[usize]) -> Poly {
        assert_eq!(positions.len(), self.arity);
        let mut out = Poly::zero(arity);
        for (m, c) in &self.terms {
            let mut e = vec![0; arity];
            for (k, &pos) in positions.iter().enumerate() {
                e[pos] += m.0[k];
            }
            out.add_term(Monomial(e), c.clone());
        }
        out
    }

    /// Canonical text with the given variable names.
    pub fn to_string_with(&self, vars: &[&str]) -> String {
        assert_eq!(vars.len(), self.arity);
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || m.degree() == 0 {
                factors.push(format_rational(&abs));
            }
            for (k, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(vars[k].to_string()),
                    _ => factors.push(format!("{}^{}", vars[k], e)),
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

/// Default variable names: `x, y` for planar data and `x1, x2, x3` otherwise.
pub fn default_var_names(arity: usize) -> Vec<String> {
    match arity {
        2 => vec!["x".into(), "y".into()],
        1 => vec!["s".into()],
        n => (1..=n).map(|i| format!("x{i}")).collect(),
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = default_var_names(self.arity);
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        f.write_str(&self.to_string_with(&refs))
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[{}]({})", self.arity, self)
    }
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DivisionError {
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("arity mismatch in division")]
    ArityMismatch,
    #[error("not divisible; remainder {remainder}")]
    NotDivisible { remainder: Poly },
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        assert_eq!(self.arity, rhs.arity, "arity mismatch in addition");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        assert_eq!(self.arity, rhs.arity, "arity mismatch in subtraction");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.arity, rhs.arity, "arity mismatch in multiplication");
        let mut out = Poly::zero(self.arity);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            arity: self.arity,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: &'a Poly) -> Poly {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3(s: &str) -> Poly {
        parse_poly(s, &["x1", "x2", "x3"]).unwrap()
    }

    fn p2(s: &str) -> Poly {
        parse_poly(s, &["x", "y"]).unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        let x = Poly::var(3, 0);
        assert_eq!(&x * &x, p3("x1^2"));
        let p = p3("x1^2*x2 - 3/2*x3");
        assert_eq!(&p + &Poly::zero(3), p);
        assert_eq!(&(&p2("x - y") * &p2("x + y")), &p2("x^2 - y^2"));
        assert!(matches!(
            Poly::zero(2).arith(&Poly::zero(3), ArithOp::Add),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn partial_examples() {
        let p = p3("x1^2*x2");
        assert_eq!(p.partial(0).unwrap(), p3("2*x1*x2"));
        assert_eq!(p.partial(2).unwrap(), Poly::zero(3));
        assert_eq!(p3("x2^2 - x3^2").partial(1).unwrap(), p3("2*x2"));
        assert!(matches!(p.partial(3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn exact_divide_examples() {
        assert_eq!(p2("x^2*y").exact_divide(&p2("x")).unwrap(), p2("x*y"));
        match p2("x^2 + y").exact_divide(&p2("x")) {
            Err(DivisionError::NotDivisible { remainder }) => assert_eq!(remainder, p2("y")),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(Poly::zero(2).exact_divide(&p2("x + 1")).unwrap(), Poly::zero(2));
        assert_eq!(p2("x").exact_divide(&Poly::zero(2)), Err(DivisionError::DivisionByZero));
    }

    #[test]
    fn eval_examples() {
        let p = p3("x1*x2");
        assert_eq!(p.eval(&[rat_int(1), rat_int(2), rat_int(0)]).unwrap(), rat_int(2));
        let q = p3("x1^3 - 7/3*x2 + 5");
        assert_eq!(q.eval(&[rat_int(0), rat_int(0), rat_int(0)]).unwrap(), rat_int(5));
        assert_eq!(p2("x^2 + y^2").eval(&[rat_int(3), rat_int(4)]).unwrap(), rat_int(25));
        assert_eq!(p2("x^2 + y^2").eval_f64(&[3.0, 4.0]), 25.0);
    }

    #[test]
    fn printer_is_graded_lex_descending() {
        assert_eq!(p3("-3/2*x3 + x2*x1^2").to_string(), "x1^2*x2 - 3/2*x3");
        assert_eq!(p2("y^2 - x^2 + 1").to_string(), "-x^2 + y^2 + 1");
        assert_eq!(Poly::zero(2).to_string(), "0");
        assert_eq!(p2("-1").to_string(), "-1");
    }

    #[test]
    fn normalization() {
        assert_eq!(p3("-2*x1").normalized(), p3("x1"));
        assert_eq!(p2("1/2*x - 3/4*y").normalized(), p2("2*x - 3*y"));
    }
}
