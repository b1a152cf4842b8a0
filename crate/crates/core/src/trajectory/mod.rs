//! Numerical side: integral curves with lengths, sections and return maps,
//! cotangent lifts, the end-point map and reachable-set trees.

mod lift;
mod ode;
mod reach;
mod returns;
mod section;

pub use lift::{
    abnormal_lift, endpoint_rank, stokes_action, EndpointRank, Lift, StokesFamily, StokesResult,
};
pub use reach::{reachable_set, EdgeEnd, ReachEdge, ReachOptions, ReachTree, ReachVertex, VertexKind};
pub use returns::{
    fit_power_law, follow_returns, monodromic_length_experiment, poincare_map,
    transition_monotonicity_check, MonodromicResult, Transition, ReturnCrossing, ReturnOptions, Returns,
    TransitionReport, TransitionSample,
};
pub use section::{section_crossings, Crossing, Section};

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{rat_int, CompiledField, CompiledPoly, Poly, PolyVectorField};
use ode::{locate, Rk45, StepOutcome};

pub const TOL_RANGE: (f64, f64) = (1e-12, 1e-3);

/// How speed along a curve is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Metric {
    Euclidean,
    /// Planar degenerate metric `(du^α)² + (du^β)²`.
    Hp { alpha: [u32; 2], beta: [u32; 2] },
}

pub(crate) enum SpeedFn {
    Euclidean,
    Hp(Box<[[CompiledPoly; 2]; 2]>),
}

impl SpeedFn {
    pub(crate) fn new(metric: Metric, dim: usize) -> Result<Self> {
        match metric {
            Metric::Euclidean => Ok(SpeedFn::Euclidean),
            Metric::Hp { alpha, beta } => {
                if dim != 2 {
                    return Err(Error::Precondition(
                        "monomial metric is only defined for planar fields".into(),
                    ));
                }
                let grad = |e: [u32; 2]| {
                    let m = Poly::monomial(2, e.to_vec(), rat_int(1));
                    [CompiledPoly::new(&m.d(0)), CompiledPoly::new(&m.d(1))]
                };
                Ok(SpeedFn::Hp(Box::new([grad(alpha), grad(beta)])))
            }
        }
    }

    pub(crate) fn speed(&self, x: &[f64], v: &[f64]) -> f64 {
        match self {
            SpeedFn::Euclidean => v.iter().map(|c| c * c).sum::<f64>().sqrt(),
            SpeedFn::Hp(g) => {
                let [ga, gb] = g.as_ref();
                let da = ga[0].eval(x) * v[0] + ga[1].eval(x) * v[1];
                let db = gb[0].eval(x) * v[0] + gb[1].eval(x) * v[1];
                (da * da + db * db).sqrt()
            }
        }
    }
}

/// Axis-aligned box; infinite bounds are allowed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Region {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Region {
    /// Positive outside the box, negative inside.
    pub fn excess(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (lo, hi))| (v - hi).max(lo - v))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Stop {
    Time { t: f64 },
    Length { l: f64 },
    /// Leave `region`, giving up after time `t_max`.
    RegionExit { region: Region, t_max: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegrateOptions {
    /// `+1` follows the field, `-1` runs it backwards.
    pub direction: f64,
    pub stop: Stop,
    pub tol: f64,
    pub metric: Metric,
    pub max_steps: usize,
    /// Speeds below this end the curve as stalled at a zero of the field.
    pub stall_speed: f64,
}

impl IntegrateOptions {
    pub fn new(stop: Stop, tol: f64) -> Self {
        IntegrateOptions {
            direction: 1.0,
            stop,
            tol,
            metric: Metric::Euclidean,
            max_steps: 2_000_000,
            stall_speed: 0.0,
        }
    }

    pub fn backward(mut self) -> Self {
        self.direction = -self.direction;
        self
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajStatus {
    Completed,
    StepUnderflow,
    MaxSteps,
    Stalled,
    TimeCap,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    /// Velocity at each sample, kept for dense output.
    pub derivs: Vec<Vec<f64>>,
    pub cum_length: Vec<f64>,
    pub metric: Metric,
    pub status: TrajStatus,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn end(&self) -> &[f64] {
        self.points.last().expect("trajectory has a start point")
    }

    pub fn length(&self) -> f64 {
        *self.cum_length.last().unwrap_or(&0.0)
    }

    pub fn duration(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    /// CSV with columns `t, <coordinates>, cum_length`.
    pub fn to_csv(&self, coords: &[&str]) -> String {
        let mut out = String::from("t");
        for c in coords {
            out.push(',');
            out.push_str(c);
        }
        out.push_str(",cum_length\n");
        for i in 0..self.len() {
            write!(out, "{:.17e}", self.times[i]).unwrap();
            for v in &self.points[i] {
                write!(out, ",{v:.17e}").unwrap();
            }
            writeln!(out, ",{:.17e}", self.cum_length[i]).unwrap();
        }
        out
    }
}

type Event = Box<dyn Fn(&[f64]) -> f64>;

pub(crate) fn check_tol(tol: f64) -> Result<()> {
    if !(TOL_RANGE.0..=TOL_RANGE.1).contains(&tol) {
        return Err(Error::Precondition(format!(
            "tolerance {tol:e} outside [{:e}, {:e}]",
            TOL_RANGE.0, TOL_RANGE.1
        )));
    }
    Ok(())
}

/// Right-hand side of the length-augmented system `(x, ℓ)`.
pub(crate) fn augmented_rhs<'a>(
    field: &'a CompiledField,
    speed: &'a SpeedFn,
    direction: f64,
) -> impl FnMut(&[f64], &mut [f64]) + 'a {
    let n = field.dim();
    move |y: &[f64], dy: &mut [f64]| {
        field.eval_into(&y[..n], &mut dy[..n]);
        for v in dy[..n].iter_mut() {
            *v *= direction;
        }
        dy[n] = speed.speed(&y[..n], &dy[..n]);
    }
}

pub fn integrate(field: &PolyVectorField, x0: &[f64], opts: &IntegrateOptions) -> Result<Trajectory> {
    check_tol(opts.tol)?;
    let n = field.arity();
    if x0.len() != n {
        return Err(Error::ArityMismatch {
            left: n,
            right: x0.len(),
        });
    }
    let compiled = CompiledField::new(field);
    let speed = SpeedFn::new(opts.metric, n)?;
    let mut y0 = x0.to_vec();
    y0.push(0.0);
    let mut rk = Rk45::new(augmented_rhs(&compiled, &speed, opts.direction), y0, opts.tol);

    let mut traj = Trajectory {
        times: vec![0.0],
        points: vec![x0.to_vec()],
        derivs: vec![rk.dy[..n].to_vec()],
        cum_length: vec![0.0],
        metric: opts.metric,
        status: TrajStatus::Completed,
    };
    let push = |traj: &mut Trajectory, t: f64, y: &[f64], dy: &[f64]| {
        traj.times.push(t);
        traj.points.push(y[..n].to_vec());
        traj.derivs.push(dy[..n].to_vec());
        traj.cum_length.push(y[n]);
    };

    match &opts.stop {
        Stop::Time { t } if *t <= 0.0 => return Ok(traj),
        Stop::Length { l } if *l <= 0.0 => return Ok(traj),
        _ => {}
    }
    loop {
        if rk.steps >= opts.max_steps {
            traj.status = TrajStatus::MaxSteps;
            return Ok(traj);
        }
        let cap = match &opts.stop {
            Stop::Time { t } => Some(t - rk.t),
            Stop::RegionExit { t_max, .. } => Some(t_max - rk.t),
            Stop::Length { .. } => None,
        };
        let (t0, y0, dy0) = (rk.t, rk.y.clone(), rk.dy.clone());
        let h = match rk.step(cap) {
            StepOutcome::Accepted(h) => h,
            StepOutcome::Underflow => {
                traj.status = TrajStatus::StepUnderflow;
                return Ok(traj);
            }
        };
        let hit_cap = cap == Some(h);
        let event: Option<Event> = match &opts.stop {
            Stop::Length { l } if rk.y[n] >= *l => {
                let l = *l;
                Some(Box::new(move |y: &[f64]| y[n] - l))
            }
            Stop::RegionExit { region, .. } if region.excess(&rk.y[..n]) > 0.0 => {
                let region = region.clone();
                Some(Box::new(move |y: &[f64]| region.excess(&y[..n])))
            }
            _ => None,
        };
        if let Some(g) = event {
            let y1 = rk.y.clone();
            let (tau, y) = locate(h, &y0, &y1, &g, |tau| rk.restep(&y0, &dy0, tau));
            let mut dy = vec![0.0; n + 1];
            rk.eval(&y, &mut dy);
            push(&mut traj, t0 + tau, &y, &dy);
            return Ok(traj);
        }
        if hit_cap {
            if let Stop::Time { t } | Stop::RegionExit { t_max: t, .. } = &opts.stop {
                rk.t = *t;
            }
        }
        push(&mut traj, rk.t, &rk.y, &rk.dy);
        match &opts.stop {
            Stop::Time { .. } if hit_cap => return Ok(traj),
            Stop::RegionExit { .. } if hit_cap => {
                traj.status = TrajStatus::TimeCap;
                return Ok(traj);
            }
            _ => {}
        }
        if opts.stall_speed > 0.0 {
            let v: f64 = rk.dy[..n].iter().map(|c| c * c).sum::<f64>().sqrt();
            if v < opts.stall_speed {
                traj.status = TrajStatus::Stalled;
                return Ok(traj);
            }
        }
    }
}

#[cfg(test)]
mod tests;
