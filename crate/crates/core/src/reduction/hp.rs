//! Comparison of the pulled-back Euclidean metric with the monomial model
//! metric `(du^α)² + (du^β)²` near a corner of the divisor.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{rat_int, CompiledPoly, Poly};

#[derive(Clone, Debug)]
pub struct HpInput {
    pub alpha: [u32; 2],
    pub beta: [u32; 2],
    pub g2: Poly,
    pub g3: Poly,
    pub h2: Poly,
    pub h3: Poly,
}

/// Cell centres of an `n × n` grid on `[lo, hi]²`; keep `lo ≥ 0` so the
/// points stay off the divisor `{u1 u2 = 0}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HpGrid {
    pub n: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Default for HpGrid {
    fn default() -> Self {
        HpGrid {
            n: 64,
            lo: 0.0,
            hi: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HpResult {
    /// Infimum over the grid of the smallest generalized eigenvalue.
    pub k: f64,
    /// Supremum over the grid of the largest generalized eigenvalue.
    pub big_k: f64,
    pub grid: HpGrid,
    /// Grid points where `du^α, du^β` are dependent and no ratio is defined.
    pub skipped: usize,
}

fn monomial(e: [u32; 2]) -> Poly {
    Poly::monomial(2, e.to_vec(), rat_int(1))
}

fn require_divisible(p: &Poly, q: &Poly, what: &str) -> Result<()> {
    if p.exact_divide(q).is_err() {
        return Err(Error::Precondition(format!("{what} is not divisible as required")));
    }
    Ok(())
}

fn grad(p: &Poly) -> [CompiledPoly; 2] {
    [CompiledPoly::new(&p.d(0)), CompiledPoly::new(&p.d(1))]
}

/// Eigenvalue bounds of `π*Euc` against `(du^α)² + (du^β)²`, where
/// `π = (u^α, g2 + u^β + h2, g3 + u^β + h3)`.
pub fn hp_metric_compare(input: &HpInput, grid: HpGrid) -> Result<HpResult> {
    let HpInput {
        alpha,
        beta,
        g2,
        g3,
        h2,
        h3,
    } = input;
    if alpha[0] > beta[0] || alpha[1] > beta[1] {
        return Err(Error::Precondition("u^α does not divide u^β".into()));
    }
    for p in [g2, g3, h2, h3] {
        if p.arity() != 2 {
            return Err(Error::ArityMismatch {
                left: 2,
                right: p.arity(),
            });
        }
    }
    let ua = monomial(*alpha);
    let ub = monomial(*beta);
    require_divisible(g2, &ua, "g2 by u^α")?;
    require_divisible(g3, &ua, "g3 by u^α")?;
    require_divisible(h2, &ub, "h2 by u^β")?;
    require_divisible(h3, &ub, "h3 by u^β")?;
    for g in [g2, g3] {
        let wedge = &(&g.d(0) * &ua.d(1)) - &(&g.d(1) * &ua.d(0));
        if !wedge.is_zero() {
            return Err(Error::Precondition("dg ∧ du^α is not identically zero".into()));
        }
    }
    if grid.n == 0 || grid.lo < 0.0 || grid.hi <= grid.lo {
        return Err(Error::Precondition("invalid grid".into()));
    }

    let pis = [ua.clone(), g2 + &(&ub + h2), g3 + &(&ub + h3)];
    let ga = grad(&ua);
    let gb = grad(&ub);
    let gpis: Vec<[CompiledPoly; 2]> = pis.iter().map(grad).collect();

    let step = (grid.hi - grid.lo) / grid.n as f64;
    let mut k = f64::INFINITY;
    let mut big_k: f64 = 0.0;
    let mut skipped = 0;
    for i in 0..grid.n {
        for j in 0..grid.n {
            let u = [
                grid.lo + (i as f64 + 0.5) * step,
                grid.lo + (j as f64 + 0.5) * step,
            ];
            let a = [ga[0].eval(&u), ga[1].eval(&u)];
            let b = [gb[0].eval(&u), gb[1].eval(&u)];
            let det = a[0] * b[1] - a[1] * b[0];
            if det.abs() < 1e-300 {
                skipped += 1;
                continue;
            }
            // write each dπ_i = c_i du^α + d_i du^β and accumulate Σ (c, d)ᵀ(c, d)
            let mut m = [[0.0; 2]; 2];
            for gp in &gpis {
                let w = [gp[0].eval(&u), gp[1].eval(&u)];
                let c = (w[0] * b[1] - w[1] * b[0]) / det;
                let d = (a[0] * w[1] - a[1] * w[0]) / det;
                m[0][0] += c * c;
                m[0][1] += c * d;
                m[1][1] += d * d;
            }
            let half_tr = 0.5 * (m[0][0] + m[1][1]);
            let r = (0.25 * (m[0][0] - m[1][1]).powi(2) + m[0][1] * m[0][1]).sqrt();
            k = k.min(half_tr - r);
            big_k = big_k.max(half_tr + r);
        }
    }
    Ok(HpResult {
        k,
        big_k,
        grid,
        skipped,
    })
}
