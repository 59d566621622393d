//! Input parsing and result documents shared by the CLI and the HTTP API.

use gsign_core::dynamics::{orbit_json, run_orbit, OrbitJson, Params};
use gsign_core::exprparse::{parse_complex, parse_real};
use gsign_core::grid::{Rect, Resolution};
use gsign_core::mapper::{FieldSpec, Transform};
use gsign_core::periodicity::{
    certify_auto, circle_structure, detect_sign_period, CircleTolerances, PeriodHypothesis,
    DEFAULT_MIN_REPEATS,
};
use gsign_core::regions::{constant_sign_disks, Ball};
use gsign_core::{Certificate64, Orbit64, Params64, Scalar};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::ShellError;

pub fn parse_alpha(text: &str) -> Result<f64, ShellError> {
    parse_real(text).map_err(|source| ShellError::Expr {
        field: "alpha",
        input: text.to_string(),
        source,
    })
}

pub fn parse_z(text: &str) -> Result<Complex64, ShellError> {
    parse_complex(text).map_err(|source| ShellError::Expr {
        field: "z",
        input: text.to_string(),
        source,
    })
}

pub fn params(alpha: &str, z: &str, n: usize) -> Result<Params64, ShellError> {
    Params::new(parse_alpha(alpha)?, parse_z(z)?, n).map_err(ShellError::domain)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitOptions {
    pub min_repeats: usize,
    pub p_max: Option<usize>,
    pub certify: bool,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        OrbitOptions {
            min_repeats: DEFAULT_MIN_REPEATS,
            p_max: None,
            certify: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleSummary {
    pub center: [f64; 2],
    pub radii: Vec<f64>,
    pub distinct_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitReport {
    #[serde(flatten)]
    pub orbit: OrbitJson<f64>,
    pub period: Option<PeriodHypothesis>,
    pub circles: Option<CircleSummary>,
    pub certificate: Option<Certificate64>,
}

pub fn detect(orbit: &Orbit64, opts: &OrbitOptions) -> Option<PeriodHypothesis> {
    if orbit.tie().is_some() {
        return None;
    }
    let p_max = opts.p_max.unwrap_or(orbit.len() / opts.min_repeats.max(2));
    detect_sign_period(orbit.signs(), opts.min_repeats, p_max)
}

pub fn orbit_report(params: &Params64, opts: &OrbitOptions) -> (Orbit64, OrbitReport) {
    let orbit = run_orbit(params);
    let period = detect(&orbit, opts);
    let circles = period
        .and_then(|h| circle_structure(&orbit, &h, &CircleTolerances::default()).ok())
        .map(|c| CircleSummary {
            center: [c.center.re, c.center.im],
            radii: c.radii,
            distinct_count: c.distinct_count,
        });
    let certificate = match (period, opts.certify) {
        (Some(h), true) => certify_auto(&orbit, &h).ok(),
        _ => None,
    };
    let report = OrbitReport {
        orbit: orbit_json(&orbit),
        period,
        circles,
        certificate,
    };
    (orbit, report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisksReport {
    pub alpha: f64,
    pub alpha_hex: String,
    pub minus_disk: Ball<f64>,
    pub plus_disk: Ball<f64>,
}

pub fn disks_report(alpha: f64) -> Result<DisksReport, ShellError> {
    let (minus, plus) = constant_sign_disks(alpha).map_err(ShellError::domain)?;
    let alpha = gsign_core::dynamics::reduce_alpha(alpha);
    Ok(DisksReport {
        alpha,
        alpha_hex: alpha.to_hex_bits(),
        minus_disk: minus,
        plus_disk: plus,
    })
}

pub fn parse_rect(text: &str) -> Result<Rect, ShellError> {
    text.parse()
        .map_err(|e: gsign_core::grid::GridError| ShellError::Usage(e.to_string()))
}

pub fn parse_resolution(text: &str) -> Result<Resolution, ShellError> {
    text.parse()
        .map_err(|e: gsign_core::grid::GridError| ShellError::Usage(e.to_string()))
}

pub fn field_spec(
    rect: &str,
    res: &str,
    alpha: &str,
    steps: usize,
    transform: Transform,
) -> Result<FieldSpec<f64>, ShellError> {
    let spec = FieldSpec::new(
        parse_rect(rect)?,
        parse_resolution(res)?,
        parse_alpha(alpha)?,
        steps,
    )
    .map_err(ShellError::domain)?;
    Ok(spec.with_transform(transform))
}
