//! Cotangent lifts `(γ, p)` of horizontal curves, the Stokes action of a
//! family of lifted arcs, and the rank of the end-point map.

use std::cell::Cell;

use nalgebra::DMatrix;
use serde::Serialize;

use super::ode::{locate, Rk45, StepOutcome};
use super::section::Section;
use super::check_tol;
use crate::distribution::{DistributionSpec, MartinetData};
use crate::error::{Error, Result};
use crate::poly::{CompiledField, CompiledPoly, PolyMap};

pub const MAX_CONTROL_PIECES: usize = 64;
const SINGULAR_RATIO: f64 = 1e-8;

struct Frame {
    x: [CompiledField; 2],
}

impl Frame {
    fn new(spec: &DistributionSpec) -> Result<Self> {
        let (a, b) = spec.frame()?;
        Ok(Frame {
            x: [CompiledField::new(&a), CompiledField::new(&b)],
        })
    }

    /// `γ' = Σ uᵢ Xⁱ(γ)`, `p' = −Σ uᵢ p·DXⁱ(γ)` on the state `(γ, p)`.
    fn lift_rhs(&self, u: [f64; 2], y: &[f64], dy: &mut [f64]) {
        let (g, p) = y.split_at(3);
        dy.iter_mut().for_each(|v| *v = 0.0);
        for (i, xi) in self.x.iter().enumerate() {
            if u[i] == 0.0 {
                continue;
            }
            let v = xi.eval(g);
            let j = xi.jacobian(g);
            for k in 0..3 {
                dy[k] += u[i] * v[k];
                // (p·DX)_k = Σ_m p_m ∂_k X_m
                let pj: f64 = (0..3).map(|m| p[m] * j[m][k]).sum();
                dy[3 + k] -= u[i] * pj;
            }
        }
    }

    fn annihilation(&self, y: &[f64]) -> f64 {
        let (g, p) = y.split_at(3);
        self.x
            .iter()
            .map(|xi| {
                xi.eval(g)
                    .iter()
                    .zip(p)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    .abs()
            })
            .fold(0.0, f64::max)
    }

    /// `sqrt(Σᵢ ‖DXⁱ(γ)‖²_F)`, a local Lipschitz constant for the covector equation.
    fn differential_norm(&self, g: &[f64]) -> f64 {
        self.x
            .iter()
            .map(|xi| xi.jacobian(g).iter().flatten().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lift {
    pub times: Vec<f64>,
    pub gamma: Vec<[f64; 3]>,
    pub p: Vec<[f64; 3]>,
    pub p_norm: Vec<f64>,
    /// `max_t maxᵢ |p·Xⁱ(γ)|`.
    pub max_annihilation: f64,
    pub max_p: f64,
    /// Largest `sqrt(Σᵢ ‖DXⁱ‖²)` seen along γ.
    pub lipschitz: f64,
    /// `∫ |u| dt`.
    pub control_length: f64,
    /// `2 e^{Cℓ}`.
    pub gronwall_bound: f64,
    pub bound_respected: bool,
    /// The covector stays orthogonal to both frame fields.
    pub singular: bool,
}

/// Lift a horizontal curve driven by piecewise-constant controls on `[0, 1]`
/// (`controls[j]` acts on `[j/N, (j+1)/N)`). `p0` is normalized; it must
/// annihilate the distribution at `x0`.
pub fn abnormal_lift(
    spec: &DistributionSpec,
    controls: &[[f64; 2]],
    x0: [f64; 3],
    p0: [f64; 3],
    tol: f64,
) -> Result<Lift> {
    check_tol(tol)?;
    if controls.is_empty() {
        return Err(Error::Precondition("empty control".into()));
    }
    let frame = Frame::new(spec)?;
    let pn = norm(&p0);
    if pn == 0.0 {
        return Err(Error::ZeroInput("initial covector"));
    }
    let p0 = p0.map(|c| c / pn);
    for xi in &frame.x {
        let v = xi.eval(&x0);
        let dot: f64 = v.iter().zip(&p0).map(|(a, b)| a * b).sum();
        if dot.abs() > 1e-9 * (1.0 + norm(&v)) {
            return Err(Error::Precondition(format!(
                "initial covector is not orthogonal to the distribution (p·X = {dot:e})"
            )));
        }
    }

    let u = Cell::new(controls[0]);
    let y0: Vec<f64> = x0.iter().chain(p0.iter()).copied().collect();
    let mut rk = Rk45::new(|y: &[f64], dy: &mut [f64]| frame.lift_rhs(u.get(), y, dy), y0.clone(), tol);
    let mut samples: Vec<(f64, Vec<f64>)> = vec![(0.0, y0)];
    let dt = 1.0 / controls.len() as f64;
    for c in controls {
        u.set(*c);
        rk.refresh();
        if !rk.advance(dt, |t, y| samples.push((t, y.to_vec()))) {
            return Err(Error::Integration("lift integration failed".into()));
        }
    }

    let control_length: f64 = controls.iter().map(|c| norm(c) * dt).sum();
    let mut lift = Lift {
        times: Vec::with_capacity(samples.len()),
        gamma: Vec::with_capacity(samples.len()),
        p: Vec::with_capacity(samples.len()),
        p_norm: Vec::with_capacity(samples.len()),
        max_annihilation: 0.0,
        max_p: 0.0,
        lipschitz: 0.0,
        control_length,
        gronwall_bound: 0.0,
        bound_respected: true,
        singular: false,
    };
    for (t, y) in &samples {
        let g = [y[0], y[1], y[2]];
        let p = [y[3], y[4], y[5]];
        let np = norm(&p);
        lift.max_annihilation = lift.max_annihilation.max(frame.annihilation(y));
        lift.max_p = lift.max_p.max(np);
        lift.lipschitz = lift.lipschitz.max(frame.differential_norm(&g));
        lift.times.push(*t);
        lift.gamma.push(g);
        lift.p.push(p);
        lift.p_norm.push(np);
    }
    lift.gronwall_bound = 2.0 * (lift.lipschitz * control_length).exp();
    lift.bound_respected = lift.max_p <= lift.gronwall_bound;
    lift.singular = lift.max_annihilation <= SINGULAR_RATIO * lift.max_p;
    Ok(lift)
}

/// A transversal arc `s ↦ α(s)`, `s ∈ [0, 1]`, with the covector
/// `β(s) = scale · δ(α(s)) / |δ(α(s))|`.
#[derive(Clone, Debug)]
pub struct StokesFamily {
    pub arc: PolyMap,
    pub scale: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StokesResult {
    /// `I_0, I_1, …`: `∫ β·α' ds` on the initial arc and on each image arc.
    pub actions: Vec<f64>,
    pub mean: f64,
    pub rel_stdev: f64,
}

fn trapezoid_action(states: &[Vec<f64>]) -> f64 {
    states
        .windows(2)
        .map(|w| {
            (0..3)
                .map(|k| 0.5 * (w[0][3 + k] + w[1][3 + k]) * (w[1][k] - w[0][k]))
                .sum::<f64>()
        })
        .sum()
}

/// Carry the lifted arc along the characteristic field `Z` through each
/// section in turn and record the action on every image arc.
pub fn stokes_action(
    spec: &DistributionSpec,
    md: &MartinetData,
    family: &StokesFamily,
    sections: &[Section],
    tol: f64,
) -> Result<StokesResult> {
    check_tol(tol)?;
    if family.arc.domain() != 1 || family.arc.codomain() != 3 {
        return Err(Error::Precondition("family arc must map R → R³".into()));
    }
    if family.samples < 2 {
        return Err(Error::Precondition("need at least two arc samples".into()));
    }
    let frame = Frame::new(spec)?;
    let (x1, x2) = spec.frame()?;
    // Z = X¹(h) X² − X²(h) X¹ as the controls (−X²(h), X¹(h))
    let c1 = CompiledPoly::new(&-&x2.directional(&md.h)?);
    let c2 = CompiledPoly::new(&x1.directional(&md.h)?);
    let ann: Vec<CompiledPoly> = spec.annihilator().iter().map(CompiledPoly::new).collect();

    let m = family.samples;
    let mut states: Vec<Vec<f64>> = (0..m)
        .map(|j| {
            let s = j as f64 / (m - 1) as f64;
            let a = family.arc.eval_f64(&[s]);
            let d: Vec<f64> = ann.iter().map(|c| c.eval(&a)).collect();
            let dn = norm(&d);
            let mut y = a.clone();
            y.extend(d.iter().map(|v| family.scale * v / dn));
            y
        })
        .collect();
    let mut actions = vec![trapezoid_action(&states)];
    if actions[0] <= 0.0 {
        return Err(Error::Precondition(format!(
            "initial action {} is not positive",
            actions[0]
        )));
    }

    let rhs = |y: &[f64], dy: &mut [f64]| {
        let g = &y[..3];
        frame.lift_rhs([c1.eval(g), c2.eval(g)], y, dy)
    };
    for sec in sections {
        for y in states.iter_mut() {
            let mut rk = Rk45::new(rhs, y.clone(), tol);
            let mut reached = None;
            while rk.t < 1e3 && rk.steps < 2_000_000 {
                let (y0, dy0) = (rk.y.clone(), rk.dy.clone());
                let h = match rk.step(None) {
                    StepOutcome::Accepted(h) => h,
                    StepOutcome::Underflow => break,
                };
                let (g0, g1) = (sec.value(&y0[..3]), sec.value(&rk.y[..3]));
                if g0 * g1 < 0.0 || g1 == 0.0 {
                    let y1 = rk.y.clone();
                    let (_, yc) = locate(h, &y0, &y1, |y| sec.value(&y[..3]), |tau| {
                        rk.restep(&y0, &dy0, tau)
                    });
                    reached = Some(yc);
                    break;
                }
            }
            *y = reached.ok_or_else(|| {
                Error::Integration("family member does not reach the next section".into())
            })?;
        }
        actions.push(trapezoid_action(&states));
    }
    let mean = actions.iter().sum::<f64>() / actions.len() as f64;
    let var = actions.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / actions.len() as f64;
    Ok(StokesResult {
        rel_stdev: var.sqrt() / mean.abs(),
        mean,
        actions,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EndpointRank {
    /// Singular values of the end-point differential, largest first.
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// `σ_min / σ_max`.
    pub ratio: f64,
    pub endpoint: [f64; 3],
}

fn endpoint(frame: &Frame, x0: [f64; 3], controls: &[[f64; 2]], tol: f64) -> Result<[f64; 3]> {
    let u = Cell::new(controls[0]);
    let rhs = |y: &[f64], dy: &mut [f64]| {
        let c = u.get();
        dy.iter_mut().for_each(|v| *v = 0.0);
        for (i, xi) in frame.x.iter().enumerate() {
            if c[i] != 0.0 {
                for (d, v) in dy.iter_mut().zip(xi.eval(y)) {
                    *d += c[i] * v;
                }
            }
        }
    };
    let mut rk = Rk45::new(rhs, x0.to_vec(), tol);
    let dt = 1.0 / controls.len() as f64;
    for c in controls {
        u.set(*c);
        rk.refresh();
        if !rk.advance(dt, |_, _| {}) {
            return Err(Error::Integration("end-point flow blew up on [0, 1]".into()));
        }
    }
    Ok([rk.y[0], rk.y[1], rk.y[2]])
}

/// Singular values of the central finite-difference differential of the
/// end-point map at a piecewise-constant control.
pub fn endpoint_rank(
    spec: &DistributionSpec,
    x0: [f64; 3],
    controls: &[[f64; 2]],
    h_fd: f64,
    tol_rank: f64,
) -> Result<EndpointRank> {
    let n = controls.len();
    if n == 0 || n > MAX_CONTROL_PIECES {
        return Err(Error::Precondition(format!(
            "number of control pieces must be in 1..={MAX_CONTROL_PIECES}"
        )));
    }
    if h_fd <= 0.0 {
        return Err(Error::Precondition("finite-difference step must be positive".into()));
    }
    let frame = Frame::new(spec)?;
    let tol = 1e-12;
    let base = endpoint(&frame, x0, controls, tol)?;
    let mut jac = DMatrix::<f64>::zeros(3, 2 * n);
    for j in 0..n {
        for i in 0..2 {
            let mut plus = controls.to_vec();
            let mut minus = controls.to_vec();
            plus[j][i] += h_fd;
            minus[j][i] -= h_fd;
            let ep = endpoint(&frame, x0, &plus, tol)?;
            let em = endpoint(&frame, x0, &minus, tol)?;
            for k in 0..3 {
                jac[(k, 2 * j + i)] = (ep[k] - em[k]) / (2.0 * h_fd);
            }
        }
    }
    let mut sv: Vec<f64> = jac.svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let s1 = sv[0];
    let rank = if s1 == 0.0 {
        0
    } else {
        sv.iter().filter(|s| **s / s1 > tol_rank).count()
    };
    Ok(EndpointRank {
        ratio: if s1 == 0.0 { 0.0 } else { sv[sv.len() - 1] / s1 },
        singular_values: sv,
        rank,
        endpoint: base,
    })
}
