use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use martinet_core::distribution::{
    characteristic_field, classify_point, martinet_function, sample_zero_set, tangency_locus,
    DistributionSpec, MartinetData,
};
use martinet_core::poly::{format_rational, Poly, PolyVectorField, Rational};
use martinet_core::reduction::{
    final_singularity_check, jacobian_classify, resolve, PlanarField, SingularityClass,
    DEFAULT_MAX_DEPTH, MEMBERSHIP_DEGREE_CAP,
};
use martinet_core::trajectory::{
    endpoint_rank, integrate, monodromic_length_experiment, reachable_set, IntegrateOptions,
    ReachOptions, ReturnOptions, Section, Stop, TOL_RANGE,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::report::Report;
use crate::specfile::{self, SpecFile, VARS2, VARS3};
use crate::{CliError, Command, Flags};

pub const SIGMA_SAMPLES: usize = 100;
const MAX_RETURNS: usize = 100_000;
const DEFAULT_DIVCHECK_DEGREE: u32 = 4;

/// Report plus auxiliary files `(name, contents)` for one run.
pub struct Output {
    pub report: Report,
    pub files: Vec<(String, String)>,
}

/// Run `command` on the spec at `path` and write the results into
/// `flags.out`; returns the path of `report.json`.
pub fn execute(command: Command, path: &Path, flags: &Flags) -> Result<PathBuf, CliError> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::Input(format!("{} is not UTF-8", path.display())))?;
    let out = build(command, &text, flags)?;
    fs::create_dir_all(&flags.out)
        .with_context(|| format!("creating {}", flags.out.display()))?;
    for (name, contents) in &out.files {
        let p = flags.out.join(name);
        fs::write(&p, contents).with_context(|| format!("writing {}", p.display()))?;
    }
    let report_path = flags.out.join("report.json");
    fs::write(&report_path, out.report.to_canonical())
        .with_context(|| format!("writing {}", report_path.display()))?;
    Ok(report_path)
}

/// Everything except the file system: parse, check ranges, compute.
pub fn build(command: Command, text: &str, flags: &Flags) -> Result<Output, CliError> {
    if !(TOL_RANGE.0..=TOL_RANGE.1).contains(&flags.tol) {
        return Err(CliError::Input(format!(
            "--tol {} outside [{:e}, {:e}]",
            flags.tol, TOL_RANGE.0, TOL_RANGE.1
        )));
    }
    let spec = specfile::parse_spec(text)?;
    let flag_value = serde_json::to_value(flags).expect("flags serialize");
    let mut out = Output {
        report: Report::new(command.name(), text.as_bytes(), flag_value),
        files: Vec::new(),
    };
    let results = match command {
        Command::Analyze => analyze(&spec, flags, &mut out)?,
        Command::Classify => classify(&spec)?,
        Command::Resolve => resolve_cmd(&spec, flags)?,
        Command::Divcheck => divcheck(&spec)?,
        Command::Trace => trace(&spec, flags, &mut out)?,
        Command::Reach => reach(&spec, flags, &mut out)?,
        Command::Endpoint => endpoint(&spec)?,
    };
    out.report.results = results;
    Ok(out)
}

fn strs(p: &[Poly], vars: &[&str]) -> Vec<String> {
    p.iter().map(|q| q.to_string_with(vars)).collect()
}

fn rats(r: &[Rational]) -> Vec<String> {
    r.iter().map(format_rational).collect()
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes")
}

fn exact_points(spec: &SpecFile) -> Result<Vec<[Rational; 3]>, CliError> {
    spec.points.iter().map(|p| specfile::rational3(&p.at)).collect()
}

fn analyze_distribution(
    spec: &SpecFile,
    ds: &DistributionSpec,
    flags: &Flags,
    warnings: &mut Vec<String>,
) -> Result<Value, CliError> {
    let md = martinet_function(ds)?;
    let z = characteristic_field(ds, &md)?;
    let candidates = exact_points(spec)?;
    let degenerate = ds.degenerate_points(&candidates);
    for p in &degenerate {
        warnings.push(format!("distribution degenerates at listed point {:?}", rats(p)));
    }
    let locus = tangency_locus(ds, &md, &candidates)?;
    let mut rng = ChaCha8Rng::seed_from_u64(flags.seed);
    let samples = if md.sigma_is_empty() {
        Vec::new()
    } else {
        sample_zero_set(&md.h, SIGMA_SAMPLES, &mut rng)
    };
    if !md.sigma_is_empty() && samples.len() < SIGMA_SAMPLES {
        warnings.push(format!(
            "only {} of {SIGMA_SAMPLES} rational points of Σ found",
            samples.len()
        ));
    }
    let sample_values: Vec<Value> = samples
        .iter()
        .map(|p| {
            let zv = z.eval(p).expect("arity 3");
            json!({"point": rats(p), "z": rats(&zv)})
        })
        .collect();
    Ok(json!({
        "name": ds.name,
        "annihilator": strs(&ds.annihilator(), &VARS3),
        "h_raw": md.h_raw.to_string_with(&VARS3),
        "h": md.h.to_string_with(&VARS3),
        "sigma_empty": md.sigma_is_empty(),
        "tangency": {
            "S_empty": locus.is_empty(),
            "tangency_status": to_json(&locus.tangency_status),
            "singular_status": to_json(&locus.singular_status),
            "tangency_system": strs(&locus.tangency_system, &VARS3),
            "singular_system": strs(&locus.singular_system, &VARS3),
            "tangency_hits": to_json(&locus.tangency_hits.iter().map(|p| rats(p)).collect::<Vec<_>>()),
            "singular_hits": to_json(&locus.singular_hits.iter().map(|p| rats(p)).collect::<Vec<_>>()),
        },
        "characteristic_field": strs(z.components(), &VARS3),
        "sigma_samples": sample_values,
    }))
}

fn analyze_planar(z: &PlanarField) -> Value {
    let points = z.axis_singularities();
    let singular: Vec<Value> = points
        .iter()
        .map(|p| to_json(&jacobian_classify(z, p)))
        .collect();
    json!({
        "a": z.a.to_string_with(&VARS2),
        "b": z.b.to_string_with(&VARS2),
        "divergence": z.divergence().to_string_with(&VARS2),
        "monomial_factor": z.monomial_factor(),
        "axis_singularities": singular,
    })
}

fn analyze(spec: &SpecFile, flags: &Flags, out: &mut Output) -> Result<Value, CliError> {
    let ds = spec.distribution()?;
    let planar = spec.planar()?;
    if ds.is_none() && planar.is_none() {
        return Err(CliError::Input("nothing to analyze: no [distribution] or [planar] block".into()));
    }
    let mut res = serde_json::Map::new();
    if let Some(ds) = ds {
        let v = analyze_distribution(spec, &ds, flags, &mut out.report.warnings)?;
        res.insert("distribution".into(), v);
    }
    if let Some(z) = planar {
        res.insert("planar".into(), analyze_planar(&z));
    }
    Ok(Value::Object(res))
}

fn classify(spec: &SpecFile) -> Result<Value, CliError> {
    let ds = spec.require_distribution()?;
    let md = martinet_function(&ds)?;
    if spec.points.is_empty() {
        return Err(CliError::Input("classify needs at least one [[points]] entry".into()));
    }
    let mut classes = Vec::new();
    for p in &spec.points {
        let at = specfile::rational3(&p.at)?;
        let tangent = p.tangent.as_ref().map(|t| specfile::rational3(t)).transpose()?;
        let c = classify_point(&ds, &md, &at, tangent.as_ref())?;
        classes.push(json!({"point": rats(&at), "class": to_json(&c.class), "diagnostics": to_json(&c.diagnostics)}));
    }
    Ok(json!({"h": md.h.to_string_with(&VARS3), "points": classes}))
}

fn resolve_cmd(spec: &SpecFile, flags: &Flags) -> Result<Value, CliError> {
    let z = spec.require_planar()?;
    let max_depth = flags
        .max_depth
        .or(spec.resolve.as_ref().and_then(|r| r.max_depth))
        .unwrap_or(DEFAULT_MAX_DEPTH);
    if max_depth > DEFAULT_MAX_DEPTH {
        return Err(CliError::Input(format!(
            "--max-depth {max_depth} exceeds {DEFAULT_MAX_DEPTH}"
        )));
    }
    let candidates = spec
        .points
        .iter()
        .map(|p| specfile::rational2(&p.at))
        .collect::<Result<Vec<_>, _>>()?;
    let tree = resolve(&z, &candidates, max_depth)?;
    let root_classes: Vec<SingularityClass> = tree.root.singularities.iter().map(|s| s.class).collect();
    Ok(json!({
        "depth": tree.depth,
        "cap_hit": tree.cap_hit,
        "all_leaves_elementary": tree.all_leaves_elementary(),
        "root_classes": to_json(&root_classes),
        "tree": to_json(&tree),
    }))
}

fn divcheck(spec: &SpecFile) -> Result<Value, CliError> {
    let z = spec.require_planar()?;
    let deg = spec
        .divcheck
        .as_ref()
        .and_then(|d| d.max_degree)
        .unwrap_or(DEFAULT_DIVCHECK_DEGREE);
    if deg > MEMBERSHIP_DEGREE_CAP {
        return Err(CliError::Input(format!(
            "max_degree {deg} exceeds {MEMBERSHIP_DEGREE_CAP}"
        )));
    }
    Ok(to_json(&final_singularity_check(&z, deg)?))
}

fn trace_field(spec: &SpecFile) -> Result<(PolyVectorField, Vec<&'static str>), CliError> {
    if let Some(z) = spec.planar()? {
        return Ok((z.to_field(), VARS2.to_vec()));
    }
    let ds = spec.require_distribution()?;
    let md = martinet_function(&ds)?;
    Ok((characteristic_field(&ds, &md)?, VARS3.to_vec()))
}

fn trace(spec: &SpecFile, flags: &Flags, out: &mut Output) -> Result<Value, CliError> {
    let block = spec
        .trace
        .clone()
        .ok_or_else(|| CliError::Input("spec file has no [trace] block".into()))?;
    let (field, vars) = trace_field(spec)?;
    let direction = block.direction.unwrap_or(1.0);
    if direction != 1.0 && direction != -1.0 {
        return Err(CliError::Input("trace direction must be 1 or -1".into()));
    }

    if let Some(sec) = &block.section {
        if field.arity() != 2 {
            return Err(CliError::Input("return experiments need a [planar] field".into()));
        }
        let returns = flags.returns.or(block.returns).unwrap_or(1);
        if returns == 0 || returns > MAX_RETURNS {
            return Err(CliError::Input(format!("returns must be in 1..={MAX_RETURNS}")));
        }
        let s0 = block
            .s0
            .ok_or_else(|| CliError::Input("return experiment needs `s0`".into()))?;
        let section = Section::segment(sec.base, sec.end);
        let mut opts = ReturnOptions::new(flags.tol);
        opts.direction = direction;
        let m = monodromic_length_experiment(&field, &section, s0, returns, &opts)?;
        if m.partial {
            out.report.warnings.push(format!(
                "only {} of {returns} returns completed ({:?})",
                m.lengths.len(),
                m.status
            ));
        }
        let t_end = m.returns.last().map_or(0.0, |c| c.t);
        let mut io = IntegrateOptions::new(Stop::Time { t: t_end }, flags.tol);
        io.direction = direction;
        let traj = integrate(&field, &section.point(s0), &io)?;
        out.files.push(("trace.csv".into(), traj.to_csv(&vars)));
        let table: Vec<Value> = m
            .returns
            .iter()
            .enumerate()
            .map(|(k, c)| json!({"k": k + 1, "t": c.t, "s": c.s, "length": c.length}))
            .collect();
        return Ok(json!({
            "mode": "returns",
            "s0": s0,
            "returns": table,
            "strictly_increasing": m.strictly_increasing,
            "fit_exponent": m.fit_exponent,
            "fit_coefficient": m.fit_coefficient,
            "half_ratio": m.half_ratio,
            "status": to_json(&m.status),
            "partial": m.partial,
            "csv": "trace.csv",
        }));
    }

    let start = block
        .start
        .ok_or_else(|| CliError::Input("trace needs `start` or `section`".into()))?;
    let stop = match (block.time, block.length) {
        (Some(t), None) if t >= 0.0 => Stop::Time { t },
        (None, Some(l)) if l >= 0.0 => Stop::Length { l },
        _ => {
            return Err(CliError::Input(
                "trace needs exactly one nonnegative `time` or `length`".into(),
            ))
        }
    };
    let mut io = IntegrateOptions::new(stop, flags.tol);
    io.direction = direction;
    let traj = integrate(&field, &start, &io)?;
    out.files.push(("trace.csv".into(), traj.to_csv(&vars)));
    Ok(json!({
        "mode": "trajectory",
        "end": traj.end(),
        "length": traj.length(),
        "duration": traj.duration(),
        "samples": traj.len(),
        "status": to_json(&traj.status),
        "csv": "trace.csv",
    }))
}

fn reach(spec: &SpecFile, flags: &Flags, out: &mut Output) -> Result<Value, CliError> {
    let block = spec
        .reach
        .clone()
        .ok_or_else(|| CliError::Input("spec file has no [reach] block".into()))?;
    let ds = spec.require_distribution()?;
    let md: MartinetData = martinet_function(&ds)?;
    let x0 = specfile::rational3(&block.start)?;
    let opts = ReachOptions {
        tol: flags.tol,
        sheet_directions: block.sheet_directions.clone(),
        ..ReachOptions::default()
    };
    let tree = reachable_set(&ds, &md, &x0, block.budget, &opts)?;
    let mut edges = Vec::new();
    for (i, e) in tree.edges.iter().enumerate() {
        let name = format!("reach_edge_{i}.csv");
        let mut csv = String::from("x1,x2,x3\n");
        for p in &e.polyline {
            csv.push_str(&format!("{:.17e},{:.17e},{:.17e}\n", p[0], p[1], p[2]));
        }
        out.files.push((name.clone(), csv));
        edges.push(json!({
            "from": e.from,
            "to": e.to,
            "length": e.length,
            "end": to_json(&e.end),
            "direction": e.direction,
            "endpoint": e.polyline.last(),
            "polyline": name,
        }));
    }
    if !tree.unresolved.is_empty() {
        out.report.warnings.push(format!(
            "{} branch vertices left unresolved",
            tree.unresolved.len()
        ));
    }
    Ok(json!({
        "root": tree.root,
        "budget": tree.budget,
        "vertices": to_json(&tree.vertices),
        "edges": edges,
        "total_length": tree.total_length,
        "unresolved": tree.unresolved,
    }))
}

fn endpoint(spec: &SpecFile) -> Result<Value, CliError> {
    let block = spec
        .endpoint
        .clone()
        .ok_or_else(|| CliError::Input("spec file has no [endpoint] block".into()))?;
    let ds = spec.require_distribution()?;
    let controls = match (block.controls.len(), block.pieces) {
        (1, Some(n)) => vec![block.controls[0]; n],
        (_, None) => block.controls.clone(),
        (k, Some(n)) if k == n => block.controls.clone(),
        (k, Some(n)) => {
            return Err(CliError::Input(format!("{k} control values for {n} pieces")))
        }
    };
    let h_fd = block.h_fd.unwrap_or(1e-4);
    let tol_rank = block.tol_rank.unwrap_or(1e-6);
    let r = endpoint_rank(&ds, block.start, &controls, h_fd, tol_rank)?;
    Ok(json!({
        "pieces": controls.len(),
        "h_fd": h_fd,
        "tol_rank": tol_rank,
        "singular_values": r.singular_values,
        "rank": r.rank,
        "ratio": r.ratio,
        "endpoint": r.endpoint,
    }))
}
