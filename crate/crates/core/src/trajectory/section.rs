use serde::Serialize;

use super::ode::{hermite, hermite_derivative, locate};
use super::Trajectory;

/// A transversal: the set `{x : n·(x − base) = 0}`, parametrized by
/// `s ↦ base + s·span`. A bounded section only keeps `s ∈ [0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Section {
    pub base: Vec<f64>,
    pub span: Vec<f64>,
    pub normal: Vec<f64>,
    pub bounded: bool,
}

impl Section {
    /// Planar segment from `base` to `end`, normal rotated +90° from the segment.
    pub fn segment(base: [f64; 2], end: [f64; 2]) -> Self {
        let d = [end[0] - base[0], end[1] - base[1]];
        Section {
            base: base.to_vec(),
            span: d.to_vec(),
            normal: vec![-d[1], d[0]],
            bounded: true,
        }
    }

    /// Unbounded hyperplane `{x_axis = value}` in dimension `dim`.
    pub fn coordinate_plane(dim: usize, axis: usize, value: f64) -> Self {
        let mut base = vec![0.0; dim];
        base[axis] = value;
        let mut normal = vec![0.0; dim];
        normal[axis] = 1.0;
        Section {
            base,
            span: vec![0.0; dim],
            normal,
            bounded: false,
        }
    }

    /// Signed distance-like value; its sign tells the side.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.normal
            .iter()
            .zip(x.iter().zip(&self.base))
            .map(|(n, (a, b))| n * (a - b))
            .sum()
    }

    pub fn param(&self, x: &[f64]) -> f64 {
        let len2: f64 = self.span.iter().map(|c| c * c).sum();
        if len2 == 0.0 {
            return 0.0;
        }
        self.span
            .iter()
            .zip(x.iter().zip(&self.base))
            .map(|(d, (a, b))| d * (a - b))
            .sum::<f64>()
            / len2
    }

    pub fn point(&self, s: f64) -> Vec<f64> {
        self.base
            .iter()
            .zip(&self.span)
            .map(|(b, d)| b + s * d)
            .collect()
    }

    /// Arc length from the base endpoint.
    pub fn distance(&self, s: f64) -> f64 {
        s * self.span.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn contains_param(&self, s: f64) -> bool {
        !self.bounded || (0.0..=1.0).contains(&s)
    }

    /// `n·v / (|n| |v|)`; near zero means the velocity is tangent to the section.
    pub fn transversality(&self, v: &[f64]) -> f64 {
        let nv: f64 = self.normal.iter().zip(v).map(|(a, b)| a * b).sum();
        let nn: f64 = self.normal.iter().map(|c| c * c).sum::<f64>().sqrt();
        let vv: f64 = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if nn == 0.0 || vv == 0.0 {
            0.0
        } else {
            nv / (nn * vv)
        }
    }
}

pub(crate) const TANGENCY_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Crossing {
    pub t: f64,
    pub s: f64,
    pub point: Vec<f64>,
    /// `+1` when crossing in the direction of the normal.
    pub direction: i8,
    pub tangential: bool,
}

/// Crossings of a stored trajectory with a section, located on the cubic
/// Hermite interpolant between samples.
pub fn section_crossings(traj: &Trajectory, sec: &Section) -> Vec<Crossing> {
    let mut out = Vec::new();
    let g: Vec<f64> = traj.points.iter().map(|p| sec.value(p)).collect();
    for i in 1..traj.len() {
        let (g0, g1) = (g[i - 1], g[i]);
        let sign_change = g0 * g1 < 0.0 || (g1 == 0.0 && i + 1 < traj.len() && g0 * g[i + 1] < 0.0);
        if !sign_change {
            continue;
        }
        let (y0, d0) = (&traj.points[i - 1], &traj.derivs[i - 1]);
        let (y1, d1) = (&traj.points[i], &traj.derivs[i]);
        let h = traj.times[i] - traj.times[i - 1];
        let (tau, point) = if g1 == 0.0 {
            (h, y1.clone())
        } else {
            locate(h, y0, y1, |y| sec.value(y), |tau| hermite(y0, d0, y1, d1, h, tau))
        };
        let s = sec.param(&point);
        if !sec.contains_param(s) {
            continue;
        }
        let v = hermite_derivative(y0, d0, y1, d1, h, tau);
        out.push(Crossing {
            t: traj.times[i - 1] + tau,
            s,
            point,
            direction: if g1 > g0 { 1 } else { -1 },
            tangential: sec.transversality(&v).abs() < TANGENCY_THRESHOLD,
        });
    }
    out
}
