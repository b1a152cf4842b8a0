//! Dense univariate helpers: exact rational roots and Sturm real-root counts.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{Poly, Rational};

/// Dense coefficients (index = power) of `p` viewed as a polynomial in `var`,
/// or `None` if `p` involves any other variable.
pub fn dense_coeffs(p: &Poly, var: usize) -> Option<Vec<Rational>> {
    if (0..p.arity()).any(|v| v != var && p.involves(v)) {
        return None;
    }
    let deg = p.degree_in(var).unwrap_or(0) as usize;
    let mut out = vec![Rational::zero(); deg + 1];
    for (m, c) in p.terms() {
        out[m.exponents()[var] as usize] = c.clone();
    }
    Some(out)
}

fn trim(mut c: Vec<Rational>) -> Vec<Rational> {
    while c.len() > 1 && c.last().is_some_and(Zero::is_zero) {
        c.pop();
    }
    c
}

fn is_zero_poly(c: &[Rational]) -> bool {
    c.iter().all(Zero::is_zero)
}

fn horner(c: &[Rational], x: &Rational) -> Rational {
    c.iter().rev().fold(Rational::zero(), |acc, a| acc * x + a)
}

/// Synthetic division by `(x - r)`; caller guarantees `r` is a root.
fn deflate(c: &[Rational], r: &Rational) -> Vec<Rational> {
    let n = c.len() - 1;
    let mut q = vec![Rational::zero(); n];
    let mut carry = Rational::zero();
    for k in (1..=n).rev() {
        carry = &c[k] + &carry * r;
        q[k - 1] = carry.clone();
    }
    q
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = BigInt::one();
    while &d * &d <= n {
        if (&n % &d).is_zero() {
            small.push(d.clone());
            let other = &n / &d;
            if other != d {
                large.push(other);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Distinct rational roots with multiplicities, in increasing order, plus the
/// deflated cofactor that has no rational roots.
pub fn rational_roots(coeffs: &[Rational]) -> (Vec<(Rational, u32)>, Vec<Rational>) {
    let mut c = trim(coeffs.to_vec());
    if is_zero_poly(&c) {
        return (Vec::new(), c);
    }
    let mut roots: Vec<(Rational, u32)> = Vec::new();
    let mut zero_mult = 0;
    while c.len() > 1 && c[0].is_zero() {
        c.remove(0);
        zero_mult += 1;
    }
    if zero_mult > 0 {
        roots.push((Rational::zero(), zero_mult));
    }
    if c.len() > 1 {
        // scale to integer coefficients
        let lcm = c
            .iter()
            .fold(BigInt::one(), |acc, a| acc.lcm(a.denom()));
        let ints: Vec<BigInt> = c
            .iter()
            .map(|a| (a * Rational::from_integer(lcm.clone())).to_integer())
            .collect();
        let ps = divisors(&ints[0]);
        let qs = divisors(ints.last().unwrap());
        let mut candidates: Vec<Rational> = Vec::new();
        for p in &ps {
            for q in &qs {
                let r = Rational::new(p.clone(), q.clone());
                candidates.push(r.clone());
                candidates.push(-r);
            }
        }
        candidates.sort();
        candidates.dedup();
        for r in candidates {
            let mut mult = 0;
            while c.len() > 1 && horner(&c, &r).is_zero() {
                c = deflate(&c, &r);
                mult += 1;
            }
            if mult > 0 {
                roots.push((r, mult));
            }
        }
    }
    roots.sort_by(|a, b| a.0.cmp(&b.0));
    (roots, c)
}

fn poly_rem(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut r = trim(a.to_vec());
    let b = trim(b.to_vec());
    let lb = b.last().unwrap().clone();
    while r.len() >= b.len() && !is_zero_poly(&r) {
        let shift = r.len() - b.len();
        let f = r.last().unwrap() / &lb;
        for (i, bi) in b.iter().enumerate() {
            r[i + shift] -= &f * bi;
        }
        r.pop();
        r = trim(r);
        if r.len() < b.len() {
            break;
        }
    }
    r
}

fn derivative(c: &[Rational]) -> Vec<Rational> {
    if c.len() <= 1 {
        return vec![Rational::zero()];
    }
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, a)| a * Rational::from_integer(BigInt::from(k)))
        .collect()
}

fn sign_changes_at_infinity(seq: &[Vec<Rational>], positive: bool) -> usize {
    let signs: Vec<i8> = seq
        .iter()
        .filter(|p| !is_zero_poly(p))
        .map(|p| {
            let deg = p.len() - 1;
            let lead = p.last().unwrap();
            let mut s = if lead.is_positive() { 1 } else { -1 };
            if !positive && deg % 2 == 1 {
                s = -s;
            }
            s
        })
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Number of distinct real roots via a Sturm sequence.
pub fn count_real_roots(coeffs: &[Rational]) -> usize {
    let p = trim(coeffs.to_vec());
    if p.len() <= 1 {
        return 0;
    }
    let mut seq = vec![p.clone(), trim(derivative(&p))];
    loop {
        let n = seq.len();
        if seq[n - 1].len() <= 1 {
            break;
        }
        let r = poly_rem(&seq[n - 2], &seq[n - 1]);
        if is_zero_poly(&r) {
            break;
        }
        seq.push(r.into_iter().map(|a| -a).collect());
    }
    sign_changes_at_infinity(&seq, false) - sign_changes_at_infinity(&seq, true)
}
