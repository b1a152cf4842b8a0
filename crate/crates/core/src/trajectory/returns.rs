use rand::Rng;
use serde::Serialize;

use super::ode::{locate, Rk45, StepOutcome};
use super::section::{Section, TANGENCY_THRESHOLD};
use super::{augmented_rhs, check_tol, Metric, SpeedFn, TrajStatus};
use crate::error::{Error, Result};
use crate::poly::{CompiledField, PolyVectorField};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReturnOptions {
    pub tol: f64,
    pub direction: f64,
    pub metric: Metric,
    pub max_steps: usize,
    /// Give up when no crossing happens within this much time.
    pub t_max: f64,
}

impl ReturnOptions {
    pub fn new(tol: f64) -> Self {
        ReturnOptions {
            tol,
            direction: 1.0,
            metric: Metric::Euclidean,
            max_steps: 5_000_000,
            t_max: 1e4,
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

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReturnCrossing {
    pub t: f64,
    pub s: f64,
    /// Cumulative length from the start point.
    pub length: f64,
    pub point: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Returns {
    pub start: Vec<f64>,
    pub crossings: Vec<ReturnCrossing>,
    pub status: TrajStatus,
}

/// Follow the flow from `x0` and collect the first `count` crossings of
/// `target` (optionally only those in direction `want`).
fn collect_crossings(
    field: &PolyVectorField,
    x0: Vec<f64>,
    target: &Section,
    want: Option<i8>,
    count: usize,
    opts: &ReturnOptions,
) -> Result<Returns> {
    check_tol(opts.tol)?;
    let n = field.arity();
    let compiled = CompiledField::new(field);
    let speed = SpeedFn::new(opts.metric, n)?;
    let mut y0 = x0.clone();
    y0.push(0.0);
    let mut rk = Rk45::new(augmented_rhs(&compiled, &speed, opts.direction), y0, opts.tol);
    let mut out = Returns {
        start: x0,
        crossings: Vec::new(),
        status: TrajStatus::Completed,
    };
    let mut last_t = 0.0;
    while out.crossings.len() < count {
        if rk.steps >= opts.max_steps {
            out.status = TrajStatus::MaxSteps;
            break;
        }
        if rk.t - last_t > opts.t_max {
            out.status = TrajStatus::TimeCap;
            break;
        }
        let (t0, y0, dy0) = (rk.t, rk.y.clone(), rk.dy.clone());
        let h = match rk.step(None) {
            StepOutcome::Accepted(h) => h,
            StepOutcome::Underflow => {
                out.status = TrajStatus::StepUnderflow;
                break;
            }
        };
        let g0 = target.value(&y0[..n]);
        let g1 = target.value(&rk.y[..n]);
        if g0 * g1 >= 0.0 {
            continue;
        }
        let dir = if g1 > g0 { 1 } else { -1 };
        if want.is_some_and(|w| w != dir) {
            continue;
        }
        let y1 = rk.y.clone();
        let (tau, y) = locate(
            h,
            &y0,
            &y1,
            |y| target.value(&y[..n]),
            |tau| rk.restep(&y0, &dy0, tau),
        );
        let s = target.param(&y[..n]);
        if target.contains_param(s) {
            last_t = t0 + tau;
            out.crossings.push(ReturnCrossing {
                t: t0 + tau,
                s,
                length: y[n],
                point: y[..n].to_vec(),
            });
        }
    }
    Ok(out)
}

/// Successive returns to `sec` starting from `sec.point(s0)`.
pub fn follow_returns(
    field: &PolyVectorField,
    sec: &Section,
    s0: f64,
    count: usize,
    opts: &ReturnOptions,
) -> Result<Returns> {
    if sec.bounded && !(s0 > 0.0 && s0 <= 1.0) {
        return Err(Error::Precondition(format!(
            "start parameter {s0} is not in the open section (0, 1]"
        )));
    }
    let x0 = sec.point(s0);
    let v: Vec<f64> = field
        .eval_f64(&x0)
        .into_iter()
        .map(|c| c * opts.direction)
        .collect();
    let tr = sec.transversality(&v);
    if tr.abs() < TANGENCY_THRESHOLD {
        return Err(Error::Precondition(format!(
            "field is not transverse to the section at s = {s0}"
        )));
    }
    let want = if tr > 0.0 { 1 } else { -1 };
    collect_crossings(field, x0, sec, Some(want), count, opts)
}

/// First return parameter.
pub fn poincare_map(field: &PolyVectorField, sec: &Section, s0: f64, opts: &ReturnOptions) -> Result<f64> {
    let r = follow_returns(field, sec, s0, 1, opts)?;
    r.crossings.first().map(|c| c.s).ok_or_else(|| {
        Error::Integration(format!("no return to the section from s = {s0} ({:?})", r.status))
    })
}

/// Least-squares fit of `y ≈ c·x^e` on log-log scale; returns `(e, c)`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let e = sxy / sxx;
    Some((e, (my - e * mx).exp()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonodromicResult {
    pub s0: f64,
    pub returns: Vec<ReturnCrossing>,
    /// `L_k`, the cumulative length at the k-th return.
    pub lengths: Vec<f64>,
    pub strictly_increasing: bool,
    /// Exponent and prefactor of `L_k ≈ c·k^e` over `k ∈ [K/10, K]`.
    pub fit_exponent: Option<f64>,
    pub fit_coefficient: Option<f64>,
    /// `L_K / L_{K/2}`.
    pub half_ratio: Option<f64>,
    pub status: TrajStatus,
    pub partial: bool,
}

pub fn monodromic_length_experiment(
    field: &PolyVectorField,
    sec: &Section,
    s0: f64,
    returns: usize,
    opts: &ReturnOptions,
) -> Result<MonodromicResult> {
    if returns == 0 {
        return Err(Error::Precondition("need at least one return".into()));
    }
    let r = follow_returns(field, sec, s0, returns, opts)?;
    let lengths: Vec<f64> = r.crossings.iter().map(|c| c.length).collect();
    let k = lengths.len();
    let lo = k.div_ceil(10).max(1);
    let pts: Vec<(f64, f64)> = (lo..=k).map(|i| (i as f64, lengths[i - 1])).collect();
    let fit = if k >= 2 { fit_power_law(&pts) } else { None };
    let half_ratio = (k >= 2).then(|| lengths[k - 1] / lengths[k / 2 - 1]);
    Ok(MonodromicResult {
        s0,
        strictly_increasing: lengths.windows(2).all(|w| w[1] > w[0]) && lengths.first().is_some_and(|l| *l > 0.0),
        lengths,
        returns: r.crossings,
        fit_exponent: fit.map(|f| f.0),
        fit_coefficient: fit.map(|f| f.1),
        half_ratio,
        partial: k < returns,
        status: r.status,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionSample {
    pub s: f64,
    pub length: f64,
    pub s_image: f64,
    /// `u^α(p) − u^α(φ(p))` under a monomial metric.
    pub u_alpha_drop: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionReport {
    pub pairs: usize,
    pub k_bound: f64,
    /// Largest `length(L(p)) / length(L(q))` over the sampled pairs.
    pub k_empirical: f64,
    pub violations: usize,
    pub monotone_violations: usize,
    pub samples: Vec<TransitionSample>,
}

fn transit(
    field: &PolyVectorField,
    from: &Section,
    to: &Section,
    s: f64,
    opts: &ReturnOptions,
) -> Result<TransitionSample> {
    let x0 = from.point(s);
    let r = collect_crossings(field, x0.clone(), to, None, 1, opts)?;
    let c = r.crossings.first().ok_or_else(|| {
        Error::Integration(format!("transition undefined from s = {s} ({:?})", r.status))
    })?;
    let u_alpha_drop = match opts.metric {
        Metric::Hp { alpha, .. } => {
            let ua = |p: &[f64]| p[0].powi(alpha[0] as i32) * p[1].powi(alpha[1] as i32);
            Some(ua(&x0) - ua(&c.point))
        }
        Metric::Euclidean => None,
    };
    Ok(TransitionSample {
        s,
        length: c.length,
        s_image: c.s,
        u_alpha_drop,
    })
}

/// A pair of sections and the part of the first one to sample from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Transition {
    pub from: Section,
    pub to: Section,
    pub s_range: (f64, f64),
    /// Claimed constant in `length(p) ≤ K·length(q)`.
    pub k_bound: f64,
}

/// Sample `pairs` random `p < q` on `from`, map them to `to` along the flow
/// and check `length(p) ≤ K·length(q)` and monotonicity of
/// `u^α(p) − u^α(φ(p))` along the section.
pub fn transition_monotonicity_check<R: Rng>(
    field: &PolyVectorField,
    tr: &Transition,
    pairs: usize,
    opts: &ReturnOptions,
    rng: &mut R,
) -> Result<TransitionReport> {
    let (from, to, s_range, k_bound) = (&tr.from, &tr.to, tr.s_range, tr.k_bound);
    if s_range.0.partial_cmp(&s_range.1) != Some(std::cmp::Ordering::Less) {
        return Err(Error::Precondition("empty parameter range".into()));
    }
    let mut samples = Vec::with_capacity(2 * pairs);
    let mut k_empirical: f64 = 0.0;
    let mut violations = 0;
    for _ in 0..pairs {
        let a = rng.random_range(s_range.0..s_range.1);
        let b = rng.random_range(s_range.0..s_range.1);
        let (sp, sq) = if a <= b { (a, b) } else { (b, a) };
        let p = transit(field, from, to, sp, opts)?;
        let q = transit(field, from, to, sq, opts)?;
        if q.length > 0.0 {
            k_empirical = k_empirical.max(p.length / q.length);
        }
        if p.length > k_bound * q.length * (1.0 + 1e-9) + 1e-12 {
            violations += 1;
        }
        samples.push(p);
        samples.push(q);
    }
    samples.sort_by(|x, y| x.s.total_cmp(&y.s));
    let drops: Vec<f64> = samples.iter().filter_map(|s| s.u_alpha_drop).collect();
    let diffs: Vec<f64> = drops.windows(2).map(|w| w[1] - w[0]).collect();
    let trend = diffs.iter().sum::<f64>().signum();
    let scale = drops.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    let monotone_violations = diffs
        .iter()
        .filter(|d| d.signum() != trend && d.abs() > 1e-9 * scale.max(1e-300))
        .count();
    Ok(TransitionReport {
        pairs,
        k_bound,
        k_empirical,
        violations,
        monotone_violations,
        samples,
    })
}
