use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::distribution::martinet_function;
use crate::fixtures;
use crate::poly::{parse_poly, rat_int, PolyMap};

fn field(comps: &[&str], vars: &[&str]) -> PolyVectorField {
    PolyVectorField::new(comps.iter().map(|c| parse_poly(c, vars).unwrap()).collect()).unwrap()
}

fn xy(comps: [&str; 2]) -> PolyVectorField {
    field(&comps, &["x", "y"])
}

fn focus_section() -> Section {
    Section::segment([0.0, 0.0], [1.0, 0.0])
}

fn focus_opts() -> ReturnOptions {
    ReturnOptions::new(1e-10).backward()
}

/// Leading-order length after k turns, ignoring the `√(1+r⁴)` speed factor.
fn focus_length(r0: f64, k: f64) -> f64 {
    ((1.0 + 4.0 * PI * r0 * r0 * k).sqrt() - 1.0) / r0
}

/// Exact length after k turns: `∫ √(1 + w⁻⁴) dw` over `w = 1/r` from `1/r0`
/// to `1/r_k`, by composite Simpson.
fn focus_length_exact(r0: f64, k: f64) -> f64 {
    let (a, b) = (1.0 / r0, (1.0 + 4.0 * PI * r0 * r0 * k).sqrt() / r0);
    let n = 4000;
    let h = (b - a) / n as f64;
    let f = |w: f64| (1.0 + w.powi(-4)).sqrt();
    let inner: f64 = (1..n)
        .map(|i| if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h))
        .sum();
    h / 3.0 * (f(a) + f(b) + inner)
}

#[test]
fn unit_translation() {
    let f = field(&["0", "1", "0"], &["x1", "x2", "x3"]);
    let t = integrate(&f, &[0.0; 3], &IntegrateOptions::new(Stop::Time { t: 1.0 }, 1e-10)).unwrap();
    assert_eq!(t.status, TrajStatus::Completed);
    assert!((t.end()[1] - 1.0).abs() < 1e-12);
    assert_eq!(t.end()[0], 0.0);
    assert!((t.length() - 1.0).abs() < 1e-9);
    assert_eq!(t.duration(), 1.0);
}

#[test]
fn focus_radius_closed_form() {
    let opts = IntegrateOptions::new(Stop::Time { t: 20.0 }, 1e-10).backward();
    let t = integrate(&fixtures::focus2d(), &[0.5, 0.0], &opts).unwrap();
    assert!(t.len() > 10);
    for (s, p) in t.times.iter().zip(&t.points) {
        let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
        let exact = 0.5 / (1.0 + 0.5 * s).sqrt();
        assert!((r - exact).abs() < 1e-7, "t={s}: {r} vs {exact}");
    }
}

#[test]
fn saddle_region_exit() {
    let f = xy(["x", "-y"]);
    let region = Region {
        lower: vec![-1.0, f64::NEG_INFINITY],
        upper: vec![1.0, f64::INFINITY],
    };
    let opts = IntegrateOptions::new(Stop::RegionExit { region, t_max: 100.0 }, 1e-10);
    let t = integrate(&f, &[1e-3, 1.0], &opts).unwrap();
    assert_eq!(t.status, TrajStatus::Completed);
    let e = t.end();
    assert!((e[0] - 1.0).abs() < 1e-9);
    assert!((e[1] - 1e-3).abs() < 1e-9);
    assert!((t.duration() - 1000f64.ln()).abs() < 1e-8);
}

#[test]
fn length_stop_and_stall() {
    let f = xy(["1", "0"]);
    let t = integrate(&f, &[0.0, 0.0], &IntegrateOptions::new(Stop::Length { l: 2.5 }, 1e-10)).unwrap();
    assert!((t.length() - 2.5).abs() < 1e-12);
    assert!((t.end()[0] - 2.5).abs() < 1e-12);

    let mut opts = IntegrateOptions::new(Stop::Length { l: 10.0 }, 1e-10);
    opts.stall_speed = 1e-8;
    let t = integrate(&xy(["-x", "-y"]), &[1.0, 0.0], &opts).unwrap();
    assert_eq!(t.status, TrajStatus::Stalled);
    assert!((t.length() - 1.0).abs() < 1e-7);
}

#[test]
fn tolerance_range_enforced() {
    let f = xy(["1", "0"]);
    for tol in [1e-13, 1e-2] {
        let r = integrate(&f, &[0.0, 0.0], &IntegrateOptions::new(Stop::Time { t: 1.0 }, tol));
        assert!(matches!(r, Err(Error::Precondition(_))));
    }
}

#[test]
fn circle_crossings() {
    let f = xy(["-y", "x"]);
    let opts = IntegrateOptions::new(Stop::Time { t: 6.0 * PI + 0.5 }, 1e-10);
    let t = integrate(&f, &[1.0, 0.0], &opts).unwrap();
    let sec = Section::coordinate_plane(2, 1, 0.0);
    let pos: Vec<Crossing> = section_crossings(&t, &sec)
        .into_iter()
        .filter(|c| c.point[0] > 0.0)
        .collect();
    assert_eq!(pos.len(), 3);
    for (k, c) in pos.iter().enumerate() {
        assert!((c.t - 2.0 * PI * (k + 1) as f64).abs() < 1e-8, "{}", c.t);
        assert_eq!(c.direction, 1);
        assert!(!c.tangential);
    }
    assert!(pos.windows(2).all(|w| w[0].t < w[1].t));
}

#[test]
fn single_and_missing_crossings() {
    let f = field(&["0", "1", "0"], &["x1", "x2", "x3"]);
    let t = integrate(&f, &[0.0; 3], &IntegrateOptions::new(Stop::Time { t: 2.0 }, 1e-10)).unwrap();
    let c = section_crossings(&t, &Section::coordinate_plane(3, 1, 0.75));
    assert_eq!(c.len(), 1);
    assert!((c[0].t - 0.75).abs() < 1e-10);
    assert!(section_crossings(&t, &Section::coordinate_plane(3, 1, 5.0)).is_empty());
}

#[test]
fn focus_return_map_closed_form() {
    let sec = focus_section();
    for r0 in [0.1, 0.3, 0.5, 0.9] {
        let r1 = poincare_map(&fixtures::focus2d(), &sec, r0, &focus_opts()).unwrap();
        let exact = r0 / (1.0 + 4.0 * PI * r0 * r0).sqrt();
        assert!((r1 - exact).abs() / exact < 1e-6, "{r1} vs {exact}");
    }
}

#[test]
fn return_map_recursion() {
    let r = follow_returns(&fixtures::focus2d(), &focus_section(), 0.5, 50, &focus_opts()).unwrap();
    assert_eq!(r.crossings.len(), 50);
    let mut prev = 0.5;
    for c in &r.crossings {
        let exact = prev / (1.0 + 4.0 * PI * prev * prev).sqrt();
        assert!((c.s - exact).abs() / exact < 1e-6);
        prev = c.s;
    }
}

#[test]
fn return_map_preconditions() {
    let sec = focus_section();
    let f = fixtures::focus2d();
    assert!(matches!(poincare_map(&f, &sec, 0.0, &focus_opts()), Err(Error::Precondition(_))));
    assert!(matches!(poincare_map(&f, &sec, 1.5, &focus_opts()), Err(Error::Precondition(_))));
    let rot = xy(["-y", "x"]);
    for s in [0.2, 0.5, 1.0] {
        let s1 = poincare_map(&rot, &sec, s, &ReturnOptions::new(1e-10)).unwrap();
        assert!((s1 - s).abs() < 1e-9);
    }
    // a flow leaving the section for good never returns
    let escape = xy(["0", "1"]);
    let r = follow_returns(&escape, &sec, 0.5, 1, &ReturnOptions::new(1e-8)).unwrap();
    assert!(r.crossings.is_empty());
}

#[test]
fn poincare_monotone_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sec = focus_section();
    let f = fixtures::focus2d();
    let opts = ReturnOptions::new(1e-9).backward();
    for _ in 0..100 {
        let a: f64 = rng.random_range(0.01..1.0);
        let b: f64 = rng.random_range(0.01..1.0);
        if a == b {
            continue;
        }
        let (pa, pb) = (poincare_map(&f, &sec, a, &opts).unwrap(), poincare_map(&f, &sec, b, &opts).unwrap());
        assert_eq!(a < b, pa < pb);
    }
}

#[test]
fn monodromic_lengths_diverge() {
    let f = fixtures::focus2d();
    let m = monodromic_length_experiment(&f, &focus_section(), 0.5, 200, &focus_opts()).unwrap();
    assert!(!m.partial);
    assert!(m.strictly_increasing);
    for (k, l) in m.lengths.iter().enumerate() {
        let exact = focus_length_exact(0.5, (k + 1) as f64);
        assert!((l - exact).abs() / exact < 1e-6, "k={k}: {l} vs {exact}");
        let approx = focus_length(0.5, (k + 1) as f64);
        assert!((l - approx).abs() / l < 0.01);
    }
    let e = m.fit_exponent.unwrap();
    assert!((0.45..=0.55).contains(&e), "{e}");
    assert!(m.half_ratio.unwrap() > 1.3);

    let one = monodromic_length_experiment(&f, &focus_section(), 0.5, 1, &focus_opts()).unwrap();
    assert_eq!(one.lengths.len(), 1);
    assert!(one.lengths[0] > 0.0);
}

#[test]
fn comparison_constant() {
    let f = fixtures::focus2d();
    let a = monodromic_length_experiment(&f, &focus_section(), 0.5, 200, &focus_opts()).unwrap();
    let b = monodromic_length_experiment(&f, &focus_section(), 0.25, 200, &focus_opts()).unwrap();
    let c = a
        .lengths
        .iter()
        .zip(&b.lengths)
        .map(|(l, lp)| lp / l)
        .fold(0.0, f64::max);
    let oracle = (1..=200)
        .map(|k| focus_length_exact(0.25, k as f64) / focus_length_exact(0.5, k as f64))
        .fold(0.0, f64::max);
    assert!((c - oracle).abs() < 1e-5);
    assert!(c <= 1.0 + 1e-3);
}

#[test]
fn power_law_fit_recovers_exponent() {
    let pts: Vec<(f64, f64)> = (1..50).map(|k| (k as f64, 3.0 * (k as f64).powf(0.7))).collect();
    let (e, c) = fit_power_law(&pts).unwrap();
    assert!((e - 0.7).abs() < 1e-12);
    assert!((c - 3.0).abs() < 1e-10);
    assert!(fit_power_law(&[(1.0, 1.0)]).is_none());
}

#[test]
fn regular_transition_has_unit_constant() {
    let f = xy(["1", "0"]);
    let tr = Transition {
        from: Section::segment([0.0, 0.0], [0.0, 1.0]),
        to: Section::segment([1.0, 0.0], [1.0, 1.0]),
        s_range: (0.0, 1.0),
        k_bound: 1.0,
    };
    let opts = ReturnOptions::new(1e-10).with_metric(Metric::Hp {
        alpha: [1, 0],
        beta: [1, 1],
    });
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let r = transition_monotonicity_check(&f, &tr, 50, &opts, &mut rng).unwrap();
    assert_eq!(r.violations, 0);
    assert_eq!(r.monotone_violations, 0);
    for s in &r.samples {
        let exact = (1.0 + s.s * s.s).sqrt();
        assert!((s.length - exact).abs() < 1e-8);
        assert!((s.s_image - s.s).abs() < 1e-10);
    }
}

#[test]
fn saddle_transition_lengths() {
    let f = xy(["x", "-y"]);
    let tr = Transition {
        from: Section::segment([0.0, 1.0], [0.4, 1.0]),
        to: Section::segment([1.0, 0.0], [1.0, 0.4]),
        s_range: (0.01, 0.4),
        k_bound: 1.0,
    };
    let opts = ReturnOptions::new(1e-10).with_metric(Metric::Hp {
        alpha: [1, 2],
        beta: [2, 3],
    });
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let r = transition_monotonicity_check(&f, &tr, 50, &opts, &mut rng).unwrap();
    assert_eq!(r.violations, 0);
    assert_eq!(r.monotone_violations, 0);
    assert!(r.k_empirical.is_finite() && r.k_empirical <= 1.0);
    for s in &r.samples {
        let u = 0.4 * s.s;
        // u^α = u v², u^β = u² v³ along (u e^t, e^{−t}) drop by a factor e^{-t}
        let exact = (1.0 + u * u).sqrt() * (u - u * u);
        assert!((s.length - exact).abs() < 1e-8 * exact.max(1.0), "{} vs {exact}", s.length);
        assert!((s.u_alpha_drop.unwrap() - (u - u * u)).abs() < 1e-9);
        assert!((s.s_image - u / 0.4).abs() < 1e-8);
    }
}

#[test]
fn length_additivity() {
    let f = fixtures::focus2d();
    let opts = IntegrateOptions::new(Stop::Time { t: 10.0 }, 1e-11).backward();
    let whole = integrate(&f, &[0.5, 0.0], &opts).unwrap();
    let first = integrate(&f, &[0.5, 0.0], &IntegrateOptions::new(Stop::Time { t: 4.0 }, 1e-11).backward()).unwrap();
    let second = integrate(&f, first.end(), &IntegrateOptions::new(Stop::Time { t: 6.0 }, 1e-11).backward()).unwrap();
    let sum = first.length() + second.length();
    assert!((sum - whole.length()).abs() / whole.length() < 1e-9);
}

#[test]
fn reversibility() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fields = [fixtures::focus2d(), xy(["x - y^2", "x*y + 1"])];
    let tol = 1e-10;
    for f in &fields {
        for _ in 0..5 {
            let x0 = [rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)];
            let fwd = integrate(f, &x0, &IntegrateOptions::new(Stop::Time { t: 1.0 }, tol)).unwrap();
            let back = integrate(f, fwd.end(), &IntegrateOptions::new(Stop::Time { t: 1.0 }, tol).backward()).unwrap();
            let err = ((back.end()[0] - x0[0]).powi(2) + (back.end()[1] - x0[1]).powi(2)).sqrt();
            assert!(err < 10.0 * tol, "{err}");
        }
    }
}

#[test]
fn trajectory_invariants_and_csv() {
    let t = integrate(&fixtures::focus2d(), &[0.5, 0.0], &IntegrateOptions::new(Stop::Time { t: 3.0 }, 1e-9)).unwrap();
    assert_eq!(t.cum_length[0], 0.0);
    assert!(t.cum_length.windows(2).all(|w| w[1] >= w[0]));
    assert!(t.times.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(t.points.len(), t.times.len());
    let csv = t.to_csv(&["u", "v"]);
    assert!(csv.starts_with("t,u,v,cum_length\n"));
    assert_eq!(csv.lines().count(), t.len() + 1);
    let again = integrate(&fixtures::focus2d(), &[0.5, 0.0], &IntegrateOptions::new(Stop::Time { t: 3.0 }, 1e-9)).unwrap();
    assert_eq!(t, again);
}

#[test]
fn martinet_abnormal_line_lift() {
    let spec = fixtures::martinet();
    let lift = abnormal_lift(&spec, &[[0.0, 1.0]], [0.0; 3], [0.0, 0.0, 1.0], 1e-10).unwrap();
    assert!(lift.singular);
    assert!(lift.max_annihilation < 1e-10);
    for p in &lift.p {
        assert!((p[0]).abs() < 1e-12 && (p[1]).abs() < 1e-12 && (p[2] - 1.0).abs() < 1e-12);
    }
    assert!((lift.gamma.last().unwrap()[1] - 1.0).abs() < 1e-10);
    assert!(lift.bound_respected);
}

#[test]
fn martinet_transverse_lift_is_not_singular() {
    let spec = fixtures::martinet();
    let lift = abnormal_lift(&spec, &[[1.0, 0.0]], [0.0; 3], [0.0, 0.0, 1.0], 1e-10).unwrap();
    assert!(!lift.singular);
    // p stays dx3 and p·X² = x1² reaches 1 at the end
    assert!((lift.max_annihilation - 1.0).abs() < 1e-8);

    let still = abnormal_lift(&spec, &[[0.0, 0.0]; 4], [0.3, 0.0, 0.0], [0.0, -0.09, 1.0], 1e-10).unwrap();
    assert!(still.gamma.iter().all(|g| *g == [0.3, 0.0, 0.0]));
    assert!(still.bound_respected);
}

#[test]
fn lift_rejects_non_annihilating_covector() {
    let spec = fixtures::martinet();
    let r = abnormal_lift(&spec, &[[0.0, 1.0]], [0.0; 3], [1.0, 0.0, 0.0], 1e-10);
    assert!(matches!(r, Err(Error::Precondition(_))));
}

#[test]
fn gronwall_bound_on_random_controls() {
    let spec = fixtures::martinet();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let controls: Vec<[f64; 2]> = (0..8)
            .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let x1: f64 = rng.random_range(-0.5..0.5);
        let p0 = [0.0, -x1 * x1, 1.0];
        let lift = abnormal_lift(&spec, &controls, [x1, 0.0, 0.0], p0, 1e-10).unwrap();
        assert!(lift.bound_respected, "{} > {}", lift.max_p, lift.gronwall_bound);
    }
}

fn martinet_family(scale: f64) -> StokesFamily {
    let s = parse_poly("s", &["s"]).unwrap();
    let z = parse_poly("0", &["s"]).unwrap();
    StokesFamily {
        arc: PolyMap::new(1, vec![z.clone(), z, s]).unwrap(),
        scale,
        samples: 33,
    }
}

#[test]
fn stokes_action_is_invariant() {
    let spec = fixtures::martinet();
    let md = martinet_function(&spec).unwrap();
    let sections: Vec<Section> = (1..=3).map(|k| Section::coordinate_plane(3, 1, k as f64)).collect();
    let r = stokes_action(&spec, &md, &martinet_family(1.0), &sections, 1e-10).unwrap();
    assert_eq!(r.actions.len(), 4);
    for a in &r.actions {
        assert!((a - 1.0).abs() < 1e-8);
    }
    assert!(r.rel_stdev < 1e-6);

    let scaled = stokes_action(&spec, &md, &martinet_family(2.5), &sections, 1e-10).unwrap();
    for (a, b) in r.actions.iter().zip(&scaled.actions) {
        assert!((b - 2.5 * a).abs() < 1e-8);
    }
    let back = stokes_action(&spec, &md, &martinet_family(1.0), &[Section::coordinate_plane(3, 1, -1.0)], 1e-9);
    assert!(matches!(back, Err(Error::Integration(_))));
}

#[test]
fn endpoint_ranks() {
    let spec = fixtures::martinet();
    let abn = endpoint_rank(&spec, [0.0; 3], &[[0.0, 1.0]; 16], 1e-4, 1e-6).unwrap();
    assert_eq!(abn.rank, 2);
    assert!(abn.ratio < 1e-6);
    let gen = endpoint_rank(&spec, [0.0; 3], &[[1.0, 1.0]; 16], 1e-4, 1e-6).unwrap();
    assert_eq!(gen.rank, 3);
    assert!(gen.ratio > 1e-3);
    let zero = endpoint_rank(&spec, [0.0; 3], &[[0.0, 0.0]; 4], 1e-4, 1e-6).unwrap();
    assert_eq!(zero.rank, 2);
    assert!(endpoint_rank(&spec, [0.0; 3], &[[0.0, 0.0]; 65], 1e-4, 1e-6).is_err());
}

#[test]
fn martinet_reach_tree() {
    let spec = fixtures::martinet();
    let md = martinet_function(&spec).unwrap();
    let zero = [rat_int(0), rat_int(0), rat_int(0)];
    let tree = reachable_set(&spec, &md, &zero, 1.0, &ReachOptions::default()).unwrap();
    assert_eq!(tree.vertices.len(), 1);
    assert_eq!(tree.edges.len(), 2);
    let mut ends: Vec<f64> = tree.edges.iter().map(|e| e.polyline.last().unwrap()[1]).collect();
    ends.sort_by(|a, b| a.total_cmp(b));
    for (e, want) in ends.iter().zip([-1.0, 1.0]) {
        assert!((e - want).abs() < 1e-6);
    }
    for e in &tree.edges {
        let p = e.polyline.last().unwrap();
        assert!(p[0].abs() < 1e-12 && p[2].abs() < 1e-12);
        assert_eq!(e.end, EdgeEnd::Budget);
    }
    assert!((tree.total_length - 2.0).abs() < 1e-6);

    let empty = reachable_set(&spec, &md, &zero, 0.0, &ReachOptions::default()).unwrap();
    assert_eq!(empty.vertices.len(), 1);
    assert!(empty.edges.is_empty());

    let off = [rat_int(1), rat_int(0), rat_int(0)];
    assert!(matches!(
        reachable_set(&spec, &md, &off, 1.0, &ReachOptions::default()),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn twoplanes_reach_tree_branches_at_the_axis() {
    let spec = fixtures::twoplanes();
    let md = martinet_function(&spec).unwrap();
    let x0 = [rat_int(1), rat_int(0), rat_int(0)];
    let tree = reachable_set(&spec, &md, &x0, 3.0, &ReachOptions::default()).unwrap();
    let zeros: Vec<&ReachVertex> = tree.vertices.iter().filter(|v| v.kind == VertexKind::ZeroOfZ).collect();
    assert_eq!(zeros.len(), 1);
    let z = zeros[0].point;
    assert!(z[0].abs() < 1e-6 && z[1].abs() < 1e-12);
    let from_zero: Vec<&ReachEdge> = tree.edges.iter().filter(|e| e.from == zeros[0].id).collect();
    // the far side of the same sheet and both halves of the other sheet
    assert_eq!(from_zero.len(), 3);
    for e in &tree.edges {
        let last = e.polyline.last().unwrap();
        assert!(last[0].abs() < 1e-9 || last[1].abs() < 1e-9);
    }
    assert!(tree.edges.iter().all(|e| e.length <= 3.0 + 1e-9));
}
