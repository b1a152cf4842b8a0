//! Tree of characteristic trajectories starting from a point of `Σ`.

use std::collections::VecDeque;

use nalgebra::Matrix3;
use serde::Serialize;

use super::{integrate, IntegrateOptions, Stop, TrajStatus};
use crate::distribution::{characteristic_field, DistributionSpec, MartinetData};
use crate::error::{Error, Result};
use crate::poly::{rational_to_f64, CompiledField, CompiledPoly, PolyVectorField, Rational};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReachOptions {
    pub tol: f64,
    /// Speed of `Z` below which a branch is taken to have reached a zero.
    pub stall_speed: f64,
    /// Offset from a zero of `Z` along each outgoing direction.
    pub branch_eps: f64,
    /// Extra directions to branch along at every vertex, e.g. the sheets of
    /// `Σ` meeting along a curve of zeros.
    pub sheet_directions: Vec<[f64; 3]>,
    pub max_vertices: usize,
}

impl Default for ReachOptions {
    fn default() -> Self {
        ReachOptions {
            tol: 1e-10,
            stall_speed: 1e-8,
            branch_eps: 1e-6,
            sheet_directions: Vec::new(),
            max_vertices: 64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexKind {
    Root,
    ZeroOfZ,
    /// A zero reached after the vertex budget ran out; not expanded.
    Unresolved,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReachVertex {
    pub id: usize,
    pub point: [f64; 3],
    pub kind: VertexKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeEnd {
    Budget,
    Stall,
    Underflow,
    MaxSteps,
    TimeCap,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReachEdge {
    pub from: usize,
    pub to: Option<usize>,
    pub polyline: Vec<[f64; 3]>,
    pub length: f64,
    pub end: EdgeEnd,
    /// `+1` along `Z`, `-1` against it.
    pub direction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReachTree {
    pub root: [f64; 3],
    pub budget: f64,
    pub vertices: Vec<ReachVertex>,
    pub edges: Vec<ReachEdge>,
    pub unresolved: Vec<usize>,
    pub total_length: f64,
}

struct Branch {
    from: usize,
    start: [f64; 3],
    direction: f64,
    budget: f64,
}

fn unit(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    (n > 0.0).then(|| v.map(|c| c / n))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Outgoing `(direction, sign)` pairs at a zero of `Z`: real eigenvectors
/// of `DZ` tangent to `Σ`, then declared sheet directions not yet covered.
fn outgoing(
    z: &CompiledField,
    grad: &[CompiledPoly; 3],
    p: [f64; 3],
    incoming: Option<[f64; 3]>,
    opts: &ReachOptions,
) -> Vec<([f64; 3], f64)> {
    let jac = z.jacobian(&p);
    let m = Matrix3::from_fn(|i, j| jac[i][j]);
    let scale = m.norm().max(1e-300);
    let g = grad.clone().map(|c| c.eval(&p));
    let gn = dot(&g, &g).sqrt();
    let mut out: Vec<([f64; 3], f64)> = Vec::new();
    let covered = |out: &[([f64; 3], f64)], w: &[f64; 3]| {
        out.iter().any(|(d, _)| dot(d, w) > 0.9)
            || incoming.is_some_and(|d| dot(&d, w) < -0.9)
    };
    let mut lambdas: Vec<f64> = m
        .complex_eigenvalues()
        .iter()
        .filter(|c| c.im.abs() <= 1e-9 * scale && c.re.abs() > 1e-9 * scale)
        .map(|c| c.re)
        .collect();
    lambdas.sort_by(|a, b| a.total_cmp(b));
    lambdas.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * scale);
    for lambda in lambdas {
        let shifted = m - Matrix3::identity() * lambda;
        let svd = shifted.svd(false, true);
        let Some(vt) = svd.v_t else { continue };
        let k = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(2);
        let Some(v) = unit([vt[(k, 0)], vt[(k, 1)], vt[(k, 2)]]) else { continue };
        // where ∇h nearly vanishes Σ is singular and every direction may be tangent
        if dot(&g, &v).abs() > 1e-6 * gn.max(1.0) {
            continue;
        }
        for w in [v, v.map(|c| -c)] {
            if !covered(&out, &w) {
                out.push((w, lambda.signum()));
            }
        }
    }
    for d in &opts.sheet_directions {
        let Some(d) = unit(*d) else { continue };
        for w in [d, d.map(|c| -c)] {
            if covered(&out, &w) {
                continue;
            }
            let q: Vec<f64> = p.iter().zip(&w).map(|(a, b)| a + opts.branch_eps * b).collect();
            let along = dot(&z.eval(&q), &w);
            if along != 0.0 {
                out.push((w, along.signum()));
            }
        }
    }
    out
}

/// Follow `Z` from `x0 ∈ Σ` in both directions, branching at zeros of `Z`,
/// until each branch has used up the length budget.
pub fn reachable_set(
    spec: &DistributionSpec,
    md: &MartinetData,
    x0: &[Rational; 3],
    budget: f64,
    opts: &ReachOptions,
) -> Result<ReachTree> {
    if !md.h.eval(x0)?.eq(&Rational::from_integer(0.into())) {
        return Err(Error::Precondition("start point is not on the Martinet surface".into()));
    }
    if budget.is_nan() || budget < 0.0 || !budget.is_finite() {
        return Err(Error::Precondition(format!("invalid length budget {budget}")));
    }
    let zf: PolyVectorField = characteristic_field(spec, md)?;
    let z = CompiledField::new(&zf);
    let grad = md.gradient.clone().map(|g| CompiledPoly::new(&g));
    let root = x0.clone().map(|c| rational_to_f64(&c));
    let mut tree = ReachTree {
        root,
        budget,
        vertices: vec![ReachVertex {
            id: 0,
            point: root,
            kind: VertexKind::Root,
        }],
        edges: Vec::new(),
        unresolved: Vec::new(),
        total_length: 0.0,
    };
    if budget == 0.0 {
        return Ok(tree);
    }

    let mut queue = VecDeque::new();
    let speed0 = z.eval(&root).iter().map(|c| c * c).sum::<f64>().sqrt();
    if speed0 < opts.stall_speed {
        for (w, s) in outgoing(&z, &grad, root, None, opts) {
            queue.push_back(Branch {
                from: 0,
                start: [0, 1, 2].map(|i| root[i] + opts.branch_eps * w[i]),
                direction: s,
                budget: budget - opts.branch_eps,
            });
        }
    } else {
        for s in [1.0, -1.0] {
            queue.push_back(Branch {
                from: 0,
                start: root,
                direction: s,
                budget,
            });
        }
    }

    while let Some(b) = queue.pop_front() {
        if b.budget <= 0.0 {
            continue;
        }
        let mut io = IntegrateOptions::new(Stop::Length { l: b.budget }, opts.tol);
        io.direction = b.direction;
        io.stall_speed = opts.stall_speed;
        let traj = integrate(&zf, &b.start, &io)?;
        let polyline: Vec<[f64; 3]> = traj.points.iter().map(|p| [p[0], p[1], p[2]]).collect();
        let length = traj.length();
        let end = match traj.status {
            TrajStatus::Completed => EdgeEnd::Budget,
            TrajStatus::Stalled => EdgeEnd::Stall,
            TrajStatus::StepUnderflow => EdgeEnd::Underflow,
            TrajStatus::MaxSteps => EdgeEnd::MaxSteps,
            TrajStatus::TimeCap => EdgeEnd::TimeCap,
        };
        let last = *polyline.last().expect("trajectory has a start point");
        let mut to = None;
        if end == EdgeEnd::Stall {
            let id = tree.vertices.len();
            let remaining = b.budget - length - opts.branch_eps;
            let kind = if id >= opts.max_vertices {
                VertexKind::Unresolved
            } else {
                VertexKind::ZeroOfZ
            };
            tree.vertices.push(ReachVertex { id, point: last, kind });
            to = Some(id);
            if kind == VertexKind::Unresolved {
                tree.unresolved.push(id);
            } else if remaining > 0.0 {
                let n = traj.derivs.len();
                let incoming = (n >= 2)
                    .then(|| {
                        let d = &traj.points[n - 1];
                        let c = &traj.points[n - 2];
                        unit([d[0] - c[0], d[1] - c[1], d[2] - c[2]])
                    })
                    .flatten();
                for (w, s) in outgoing(&z, &grad, last, incoming, opts) {
                    queue.push_back(Branch {
                        from: id,
                        start: [0, 1, 2].map(|i| last[i] + opts.branch_eps * w[i]),
                        direction: s,
                        budget: remaining,
                    });
                }
            }
        }
        tree.total_length += length;
        tree.edges.push(ReachEdge {
            from: b.from,
            to,
            polyline,
            length,
            end,
            direction: b.direction,
        });
    }
    Ok(tree)
}
