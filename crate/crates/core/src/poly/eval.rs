use super::{rational_to_f64, Poly, PolyVectorField};

/// A polynomial flattened to `f64` coefficients for fast repeated evaluation.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    arity: usize,
    max_exp: Vec<usize>,
    terms: Vec<(f64, Vec<u32>)>,
}

impl CompiledPoly {
    pub fn new(p: &Poly) -> Self {
        let arity = p.arity();
        let max_exp = (0..arity)
            .map(|i| p.degree_in(i).unwrap_or(0) as usize)
            .collect();
        let terms = p
            .terms()
            .map(|(m, c)| (rational_to_f64(c), m.exponents().to_vec()))
            .collect();
        CompiledPoly {
            arity,
            max_exp,
            terms,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.arity);
        // powers[i][k] = x_i^k
        let mut powers: [[f64; 16]; 3] = [[1.0; 16]; 3];
        if self.arity <= 3 && self.max_exp.iter().all(|&e| e < 16) {
            for i in 0..self.arity {
                for k in 1..=self.max_exp[i] {
                    powers[i][k] = powers[i][k - 1] * x[i];
                }
            }
            return self
                .terms
                .iter()
                .map(|(c, e)| {
                    let mut t = *c;
                    for (i, &k) in e.iter().enumerate() {
                        t *= powers[i][k as usize];
                    }
                    t
                })
                .sum();
        }
        self.terms
            .iter()
            .map(|(c, e)| {
                let mut t = *c;
                for (i, &k) in e.iter().enumerate() {
                    t *= x[i].powi(k as i32);
                }
                t
            })
            .sum()
    }
}

/// Vector field with its Jacobian, both flattened to `f64`.
#[derive(Clone, Debug)]
pub struct CompiledField {
    components: Vec<CompiledPoly>,
    // jacobian[i][j] = ∂_j X_i
    jacobian: Vec<Vec<CompiledPoly>>,
}

impl CompiledField {
    pub fn new(field: &PolyVectorField) -> Self {
        let components = field.components().iter().map(CompiledPoly::new).collect();
        let jacobian = field
            .components()
            .iter()
            .map(|c| (0..field.arity()).map(|j| CompiledPoly::new(&c.d(j))).collect())
            .collect();
        CompiledField {
            components,
            jacobian,
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.eval(x);
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.eval(x)).collect()
    }

    /// Row-major Jacobian `J[i][j] = ∂_j X_i` at `x`.
    pub fn jacobian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.jacobian
            .iter()
            .map(|row| row.iter().map(|p| p.eval(x)).collect())
            .collect()
    }
}
