//! TOML input files.
//!
//! ```toml
//! [distribution]
//! name = "MARTINET"
//! mode = "one_form"            # or "pair" with x1 = [...], x2 = [...]
//! c = ["0", "-x1^2", "1"]
//!
//! [planar]
//! a = "-y + x^3 + x*y^2"
//! b = "x + x^2*y + y^3"
//!
//! [[points]]
//! at = ["0", "0", "0"]
//! tangent = ["0", "1", "0"]
//! ```
//!
//! Polynomials are quoted strings over `x1, x2, x3` (distributions) or
//! `x, y` (planar fields). Exact points are strings such as `"-3/2"`.

use martinet_core::distribution::DistributionSpec;
use martinet_core::poly::{parse_poly, Poly, PolyVectorField, Rational};
use martinet_core::reduction::PlanarField;
use serde::Deserialize;

use crate::CliError;

pub const VARS3: [&str; 3] = ["x1", "x2", "x3"];
pub const VARS2: [&str; 2] = ["x", "y"];

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub distribution: Option<DistributionBlock>,
    pub planar: Option<PlanarBlock>,
    #[serde(default)]
    pub points: Vec<PointBlock>,
    pub resolve: Option<ResolveBlock>,
    pub divcheck: Option<DivcheckBlock>,
    pub trace: Option<TraceBlock>,
    pub reach: Option<ReachBlock>,
    pub endpoint: Option<EndpointBlock>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    OneForm,
    Pair,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionBlock {
    pub name: Option<String>,
    pub mode: Mode,
    pub c: Option<[String; 3]>,
    pub x1: Option<[String; 3]>,
    pub x2: Option<[String; 3]>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanarBlock {
    pub name: Option<String>,
    pub a: String,
    pub b: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointBlock {
    pub at: Vec<String>,
    pub tangent: Option<[String; 3]>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolveBlock {
    pub max_depth: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivcheckBlock {
    pub max_degree: Option<u32>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionBlock {
    pub base: [f64; 2],
    pub end: [f64; 2],
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceBlock {
    /// Start point for a plain trajectory.
    pub start: Option<Vec<f64>>,
    /// Section for the return experiment; the start is `section(s0)`.
    pub section: Option<SectionBlock>,
    pub s0: Option<f64>,
    pub returns: Option<usize>,
    /// `1` follows the field, `-1` runs it backwards.
    pub direction: Option<f64>,
    pub time: Option<f64>,
    pub length: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReachBlock {
    pub start: [String; 3],
    pub budget: f64,
    #[serde(default)]
    pub sheet_directions: Vec<[f64; 3]>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointBlock {
    pub start: [f64; 3],
    /// One control value per piece; a single value is repeated `pieces` times.
    pub controls: Vec<[f64; 2]>,
    pub pieces: Option<usize>,
    pub h_fd: Option<f64>,
    pub tol_rank: Option<f64>,
}

pub fn parse_spec(text: &str) -> Result<SpecFile, CliError> {
    toml::from_str(text).map_err(|e| CliError::Input(format!("spec file: {e}")))
}

fn poly(text: &str, vars: &[&str], what: &str) -> Result<Poly, CliError> {
    parse_poly(text, vars).map_err(|e| CliError::Input(format!("{what}: {e}")))
}

pub fn rational(text: &str) -> Result<Rational, CliError> {
    let p = poly(text, &[], "point coordinate")?;
    p.constant_value()
        .ok_or_else(|| CliError::Input(format!("`{text}` is not a number")))
}

pub fn rational3(v: &[String]) -> Result<[Rational; 3], CliError> {
    match v {
        [a, b, c] => Ok([rational(a)?, rational(b)?, rational(c)?]),
        _ => Err(CliError::Input(format!("expected 3 coordinates, got {}", v.len()))),
    }
}

pub fn rational2(v: &[String]) -> Result<[Rational; 2], CliError> {
    match v {
        [a, b] => Ok([rational(a)?, rational(b)?]),
        _ => Err(CliError::Input(format!("expected 2 coordinates, got {}", v.len()))),
    }
}

fn field3(c: &[String; 3], what: &str) -> Result<PolyVectorField, CliError> {
    let comps = c
        .iter()
        .map(|s| poly(s, &VARS3, what))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PolyVectorField::new(comps)?)
}

impl SpecFile {
    pub fn distribution(&self) -> Result<Option<DistributionSpec>, CliError> {
        let Some(d) = &self.distribution else {
            return Ok(None);
        };
        let name = d.name.clone().unwrap_or_else(|| "distribution".into());
        let spec = match d.mode {
            Mode::OneForm => {
                let c = d
                    .c
                    .as_ref()
                    .ok_or_else(|| CliError::Input("one_form mode needs `c`".into()))?;
                let [a, b, e] = [0, 1, 2].map(|i| poly(&c[i], &VARS3, "one-form coefficient"));
                DistributionSpec::one_form(name, [a?, b?, e?])?
            }
            Mode::Pair => {
                let (Some(x1), Some(x2)) = (&d.x1, &d.x2) else {
                    return Err(CliError::Input("pair mode needs `x1` and `x2`".into()));
                };
                DistributionSpec::pair(name, field3(x1, "frame field")?, field3(x2, "frame field")?)?
            }
        };
        Ok(Some(spec))
    }

    pub fn require_distribution(&self) -> Result<DistributionSpec, CliError> {
        self.distribution()?
            .ok_or_else(|| CliError::Input("spec file has no [distribution] block".into()))
    }

    pub fn planar(&self) -> Result<Option<PlanarField>, CliError> {
        let Some(p) = &self.planar else {
            return Ok(None);
        };
        let a = poly(&p.a, &VARS2, "planar component a")?;
        let b = poly(&p.b, &VARS2, "planar component b")?;
        Ok(Some(PlanarField::new(a, b)?))
    }

    pub fn require_planar(&self) -> Result<PlanarField, CliError> {
        self.planar()?
            .ok_or_else(|| CliError::Input("spec file has no [planar] block".into()))
    }
}
