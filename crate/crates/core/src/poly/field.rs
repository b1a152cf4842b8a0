use serde::Serialize;

use super::{Poly, Rational};
use crate::error::{Error, Result};

/// Polynomial vector field `Σ X_i ∂_i` on `R^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PolyVectorField {
    components: Vec<Poly>,
}

impl PolyVectorField {
    pub fn new(components: Vec<Poly>) -> Result<Self> {
        let n = components.len();
        if n == 0 {
            return Err(Error::Precondition("vector field needs at least one component".into()));
        }
        if let Some(bad) = components.iter().find(|c| c.arity() != n) {
            return Err(Error::ArityMismatch {
                left: n,
                right: bad.arity(),
            });
        }
        Ok(PolyVectorField { components })
    }

    pub fn zero(n: usize) -> Self {
        PolyVectorField {
            components: vec![Poly::zero(n); n],
        }
    }

    /// Coordinate field `∂_i`.
    pub fn coordinate(n: usize, i: usize) -> Self {
        let mut components = vec![Poly::zero(n); n];
        components[i] = Poly::one(n);
        PolyVectorField { components }
    }

    pub fn arity(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Poly {
        &self.components[i]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Poly::is_zero)
    }

    /// `X(f) = Σ X_i ∂_i f`.
    pub fn directional(&self, f: &Poly) -> Result<Poly> {
        if f.arity() != self.arity() {
            return Err(Error::ArityMismatch {
                left: self.arity(),
                right: f.arity(),
            });
        }
        Ok(self
            .components
            .iter()
            .enumerate()
            .fold(Poly::zero(f.arity()), |acc, (i, xi)| &acc + &(xi * &f.d(i))))
    }

    /// `[X, Y]_j = X(Y_j) - Y(X_j)`.
    pub fn lie_bracket(&self, other: &PolyVectorField) -> Result<PolyVectorField> {
        if other.arity() != self.arity() {
            return Err(Error::ArityMismatch {
                left: self.arity(),
                right: other.arity(),
            });
        }
        let components = (0..self.arity())
            .map(|j| {
                let a = self.directional(&other.components[j])?;
                let b = other.directional(&self.components[j])?;
                Ok(&a - &b)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PolyVectorField { components })
    }

    /// Divergence with respect to the standard volume form.
    pub fn divergence(&self) -> Poly {
        self.components
            .iter()
            .enumerate()
            .fold(Poly::zero(self.arity()), |acc, (i, c)| &acc + &c.d(i))
    }

    pub fn scale(&self, f: &Poly) -> PolyVectorField {
        PolyVectorField {
            components: self.components.iter().map(|c| c * f).collect(),
        }
    }

    pub fn add(&self, other: &PolyVectorField) -> PolyVectorField {
        PolyVectorField {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &PolyVectorField) -> PolyVectorField {
        PolyVectorField {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn eval(&self, point: &[Rational]) -> Result<Vec<Rational>> {
        self.components.iter().map(|c| c.eval(point)).collect()
    }

    pub fn eval_f64(&self, point: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.eval_f64(point)).collect()
    }
}

/// Polynomial map `R^domain → R^codomain`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PolyMap {
    domain: usize,
    components: Vec<Poly>,
}

impl PolyMap {
    pub fn new(domain: usize, components: Vec<Poly>) -> Result<Self> {
        if let Some(bad) = components.iter().find(|c| c.arity() != domain) {
            return Err(Error::ArityMismatch {
                left: domain,
                right: bad.arity(),
            });
        }
        Ok(PolyMap { domain, components })
    }

    pub fn identity(n: usize) -> Self {
        PolyMap {
            domain: n,
            components: (0..n).map(|i| Poly::var(n, i)).collect(),
        }
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn codomain(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    /// `p ∘ self`.
    pub fn pullback(&self, p: &Poly) -> Result<Poly> {
        if p.arity() != self.codomain() {
            return Err(Error::ArityMismatch {
                left: self.codomain(),
                right: p.arity(),
            });
        }
        // cache powers of each component as they are requested
        let mut powers: Vec<Vec<Poly>> = self
            .components
            .iter()
            .map(|c| vec![Poly::one(self.domain), c.clone()])
            .collect();
        let mut out = Poly::zero(self.domain);
        for (m, coef) in p.terms() {
            let mut t = Poly::constant(self.domain, coef.clone());
            for (i, &e) in m.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = &powers[i][powers[i].len() - 1] * &self.components[i];
                    powers[i].push(next);
                }
                t = &t * &powers[i][e as usize];
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// Jacobian entries `∂_j σ_i`.
    pub fn jacobian(&self) -> Vec<Vec<Poly>> {
        self.components
            .iter()
            .map(|c| (0..self.domain).map(|j| c.d(j)).collect())
            .collect()
    }

    pub fn eval_f64(&self, point: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.eval_f64(point)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    const V3: [&str; 3] = ["x1", "x2", "x3"];

    fn p3(s: &str) -> Poly {
        parse_poly(s, &V3).unwrap()
    }
    fn p2(s: &str) -> Poly {
        parse_poly(s, &["x", "y"]).unwrap()
    }
    fn vf3(c: [&str; 3]) -> PolyVectorField {
        PolyVectorField::new(c.iter().map(|s| p3(s)).collect()).unwrap()
    }
    fn vf2(c: [&str; 2]) -> PolyVectorField {
        PolyVectorField::new(c.iter().map(|s| p2(s)).collect()).unwrap()
    }

    #[test]
    fn directional_examples() {
        assert_eq!(vf3(["1", "0", "0"]).directional(&p3("x1*x2")).unwrap(), p3("x2"));
        assert!(vf3(["0", "1", "x1^2"]).directional(&p3("x1")).unwrap().is_zero());
        assert!(vf2(["x", "-y"]).directional(&p2("x*y")).unwrap().is_zero());
    }

    #[test]
    fn bracket_examples() {
        let x = vf3(["1", "0", "0"]);
        let y = vf3(["0", "1", "x1^2"]);
        assert_eq!(x.lie_bracket(&y).unwrap(), vf3(["0", "0", "2*x1"]));
        assert!(y.lie_bracket(&y).unwrap().is_zero());
        assert_eq!(
            x.lie_bracket(&vf3(["0", "0", "2*x1"])).unwrap(),
            vf3(["0", "0", "2"])
        );
    }

    #[test]
    fn divergence_examples() {
        assert_eq!(vf2(["x", "y"]).divergence(), p2("2"));
        let focus = vf2(["-y + x*(x^2 + y^2)", "x + y*(x^2 + y^2)"]);
        assert_eq!(focus.divergence(), p2("4*x^2 + 4*y^2"));
        let h = p2("x^3*y - y^4 + 2*x*y^2");
        let ham = PolyVectorField::new(vec![h.d(1), -h.d(0)]).unwrap();
        assert!(ham.divergence().is_zero());
    }

    #[test]
    fn pullback_examples() {
        let chart1 = PolyMap::new(2, vec![p2("x"), p2("x*y")]).unwrap();
        assert_eq!(chart1.pullback(&p2("x*y")).unwrap(), p2("x^2*y"));
        assert_eq!(PolyMap::identity(2).pullback(&p2("x")).unwrap(), p2("x"));
        let chart2 = PolyMap::new(2, vec![p2("x*y"), p2("y")]).unwrap();
        assert_eq!(
            chart2.pullback(&p2("x^2 - y^2")).unwrap(),
            p2("x^2*y^2 - y^2")
        );
        assert!(chart2.pullback(&p3("x1")).is_err());
    }
}
