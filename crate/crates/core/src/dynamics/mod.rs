//! The greedy sign recurrence `z_n = z_{n-1} ± e^{2πiαn}`.
//!
//! At every step both candidates are formed and the one with the smaller
//! modulus is kept. Exactly equal moduli are a tie and end the orbit. The
//! ambiguity `a_n` is the absolute difference of the two candidate moduli.

mod export;
mod symmetry;

pub use export::{orbit_csv, orbit_json, OrbitJson, CSV_HEADER};
pub use symmetry::{apply_symmetry, Symmetry};

use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{cis_turns, modulus, Scalar};

/// Default near-tie warning threshold.
pub const DEFAULT_WARN_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error("alpha must be finite, got {0}")]
    NonFiniteAlpha(f64),
    #[error("alpha reduces to 0 modulo 1")]
    IntegerAlpha,
    #[error("initial value must be finite")]
    NonFiniteInit,
    #[error("horizon must be at least 1")]
    EmptyHorizon,
    #[error("warn threshold must be positive, got {0}")]
    BadWarnThreshold(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrbitError {
    #[error("index {from} is past the recorded orbit (length {len})")]
    EmptyRange { from: usize, len: usize },
}

/// One of the two signs the greedy rule can pick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(i8)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus = 1,
    #[serde(rename = "-")]
    Minus = -1,
}

impl Sign {
    pub fn value(self) -> i8 {
        self as i8
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    /// `self · (-1)^n`.
    pub fn alternate(self, n: usize) -> Sign {
        if n % 2 == 0 {
            self
        } else {
            self.flip()
        }
    }

    pub fn apply<T: Scalar>(self, w: Complex<T>) -> Complex<T> {
        match self {
            Sign::Plus => w,
            Sign::Minus => -w,
        }
    }

    pub fn from_i8(v: i8) -> Option<Sign> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// Near-tie handling. Exact ties always stop the orbit; steps whose
/// ambiguity falls below `warn_threshold` are recorded but not stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiePolicy<T> {
    pub warn_threshold: T,
}

impl<T: Scalar> Default for TiePolicy<T> {
    fn default() -> Self {
        TiePolicy {
            warn_threshold: T::cst(DEFAULT_WARN_THRESHOLD),
        }
    }
}

/// Rotation number, initial value `z_{-1}` and horizon of one orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params<T> {
    alpha: T,
    z_init: Complex<T>,
    horizon: usize,
    tie_policy: TiePolicy<T>,
}

impl<T: Scalar> Params<T> {
    /// Validates and reduces `alpha` modulo 1.
    pub fn new(alpha: T, z_init: Complex<T>, horizon: usize) -> Result<Self, ParamsError> {
        if !alpha.is_finite() {
            return Err(ParamsError::NonFiniteAlpha(alpha.to_f64_lossy()));
        }
        if !(z_init.re.is_finite() && z_init.im.is_finite()) {
            return Err(ParamsError::NonFiniteInit);
        }
        if horizon == 0 {
            return Err(ParamsError::EmptyHorizon);
        }
        let reduced = reduce_alpha(alpha);
        if reduced == T::zero() {
            return Err(ParamsError::IntegerAlpha);
        }
        if reduced == T::cst(0.5) {
            log::warn!("alpha = 1/2: the rotation is periodic with period 2");
        }
        Ok(Params {
            alpha: reduced,
            z_init,
            horizon,
            tie_policy: TiePolicy::default(),
        })
    }

    pub fn with_warn_threshold(mut self, threshold: T) -> Result<Self, ParamsError> {
        if !(threshold > T::zero()) {
            return Err(ParamsError::BadWarnThreshold(threshold.to_f64_lossy()));
        }
        self.tie_policy.warn_threshold = threshold;
        Ok(self)
    }

    pub fn with_horizon(mut self, horizon: usize) -> Result<Self, ParamsError> {
        if horizon == 0 {
            return Err(ParamsError::EmptyHorizon);
        }
        self.horizon = horizon;
        Ok(self)
    }

    pub fn with_z_init(mut self, z_init: Complex<T>) -> Self {
        self.z_init = z_init;
        self
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn z_init(&self) -> Complex<T> {
        self.z_init
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn tie_policy(&self) -> TiePolicy<T> {
        self.tie_policy
    }

    pub fn stepper(&self) -> Stepper<T> {
        Stepper::new(self.alpha, self.z_init)
    }
}

/// `alpha mod 1` in `[0, 1)`.
pub fn reduce_alpha<T: Scalar>(alpha: T) -> T {
    let r = alpha - alpha.floor();
    if r >= T::one() {
        T::zero()
    } else {
        r
    }
}

/// `e^{2πiαn}` with the phase `frac(αn)` reduced exactly.
pub fn unit_rotation<T: Scalar>(alpha: T, n: u64) -> Complex<T> {
    cis_turns(T::fract_of_multiple(alpha, n))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult<T> {
    pub z_next: Complex<T>,
    pub sign: Sign,
    pub ambiguity: T,
    pub is_tie: bool,
}

/// One greedy step from `z_prev` with increment `w`.
#[inline]
pub fn step_with<T: Scalar>(z_prev: Complex<T>, w: Complex<T>) -> StepResult<T> {
    let plus = z_prev + w;
    let minus = z_prev - w;
    let a = modulus(plus);
    let b = modulus(minus);
    let ambiguity = (a - b).abs();
    if a < b {
        StepResult {
            z_next: plus,
            sign: Sign::Plus,
            ambiguity,
            is_tie: false,
        }
    } else if b < a {
        StepResult {
            z_next: minus,
            sign: Sign::Minus,
            ambiguity,
            is_tie: false,
        }
    } else {
        StepResult {
            z_next: z_prev,
            sign: Sign::Plus,
            ambiguity: T::zero(),
            is_tie: true,
        }
    }
}

/// One greedy step at index `n`.
pub fn step<T: Scalar>(z_prev: Complex<T>, alpha: T, n: u64) -> StepResult<T> {
    step_with(z_prev, unit_rotation(alpha, n))
}

/// A recorded step of a running orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord<T> {
    pub n: usize,
    pub z: Complex<T>,
    pub sign: Sign,
    pub ambiguity: T,
}

/// Unbounded iterator over the orbit; ends at the first tie.
#[derive(Debug, Clone)]
pub struct Stepper<T> {
    alpha: T,
    z: Complex<T>,
    n: usize,
    tie: Option<usize>,
}

impl<T: Scalar> Stepper<T> {
    pub fn new(alpha: T, z_init: Complex<T>) -> Self {
        Stepper {
            alpha,
            z: z_init,
            n: 0,
            tie: None,
        }
    }

    /// Index at which the orbit tied, once reached.
    pub fn tie(&self) -> Option<usize> {
        self.tie
    }

    /// Current point (`z_{n-1}` before step `n`).
    pub fn current(&self) -> Complex<T> {
        self.z
    }
}

impl<T: Scalar> Iterator for Stepper<T> {
    type Item = StepRecord<T>;

    fn next(&mut self) -> Option<StepRecord<T>> {
        if self.tie.is_some() {
            return None;
        }
        let n = self.n;
        let r = step(self.z, self.alpha, n as u64);
        if r.is_tie {
            self.tie = Some(n);
            return None;
        }
        self.z = r.z_next;
        self.n += 1;
        Some(StepRecord {
            n,
            z: r.z_next,
            sign: r.sign,
            ambiguity: r.ambiguity,
        })
    }
}

/// How an orbit ended.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitStatus {
    Completed,
    Tie(usize),
    Warned(Vec<usize>),
}

impl fmt::Display for OrbitStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrbitStatus::Completed => f.write_str("completed"),
            OrbitStatus::Tie(n) => write!(f, "tie at n = {n}"),
            OrbitStatus::Warned(ns) => write!(f, "completed with {} near-tie warnings", ns.len()),
        }
    }
}

/// A recorded trajectory `z_0..z_M` with its signs and ambiguities.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit<T> {
    params: Params<T>,
    points: Vec<Complex<T>>,
    signs: Vec<Sign>,
    ambiguities: Vec<T>,
    tie: Option<usize>,
    warnings: Vec<usize>,
}

pub fn run_orbit<T: Scalar>(params: &Params<T>) -> Orbit<T> {
    let horizon = params.horizon;
    let warn = params.tie_policy.warn_threshold;
    let mut points = Vec::with_capacity(horizon);
    let mut signs = Vec::with_capacity(horizon);
    let mut ambiguities = Vec::with_capacity(horizon);
    let mut warnings = Vec::new();
    let mut stepper = params.stepper();
    for rec in stepper.by_ref().take(horizon) {
        if rec.ambiguity < warn {
            warnings.push(rec.n);
        }
        points.push(rec.z);
        signs.push(rec.sign);
        ambiguities.push(rec.ambiguity);
    }
    Orbit {
        params: *params,
        points,
        signs,
        ambiguities,
        tie: stepper.tie(),
        warnings,
    }
}

impl<T: Scalar> Orbit<T> {
    pub fn params(&self) -> &Params<T> {
        &self.params
    }

    pub fn alpha(&self) -> T {
        self.params.alpha
    }

    pub fn z_init(&self) -> Complex<T> {
        self.params.z_init
    }

    pub fn points(&self) -> &[Complex<T>] {
        &self.points
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    pub fn ambiguities(&self) -> &[T] {
        &self.ambiguities
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn tie(&self) -> Option<usize> {
        self.tie
    }

    pub fn warnings(&self) -> &[usize] {
        &self.warnings
    }

    pub fn status(&self) -> OrbitStatus {
        match (self.tie, self.warnings.is_empty()) {
            (Some(n), _) => OrbitStatus::Tie(n),
            (None, true) => OrbitStatus::Completed,
            (None, false) => OrbitStatus::Warned(self.warnings.clone()),
        }
    }

    /// `z_{n-1}`, with `z_{-1}` the initial value.
    pub fn point_before(&self, n: usize) -> Complex<T> {
        if n == 0 {
            self.params.z_init
        } else {
            self.points[n - 1]
        }
    }

    /// Minimum ambiguity over recorded indices `>= from`.
    ///
    /// A tie counts as ambiguity zero, so tied orbits report 0 for every
    /// `from` up to the tie index.
    pub fn min_ambiguity(&self, from: usize) -> Result<T, OrbitError> {
        if let Some(n) = self.tie {
            if from <= n {
                return Ok(T::zero());
            }
        }
        if from >= self.len() {
            return Err(OrbitError::EmptyRange {
                from,
                len: self.len(),
            });
        }
        Ok(self.ambiguities[from..]
            .iter()
            .copied()
            .fold(T::infinity(), T::min))
    }

    /// Shifts of `z_{-1}` strictly smaller than this leave every sign unchanged.
    pub fn stability_radius(&self) -> T {
        if self.tie.is_some() {
            return T::zero();
        }
        self.min_ambiguity(0).map_or(T::zero(), |m| m / T::cst(2.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unit_rotation_basics() {
        assert_eq!(unit_rotation(0.3141f64, 0), c(1.0, 0.0));
        assert_eq!(unit_rotation(0.25f64, 1), c(0.0, 1.0));
        assert_eq!(unit_rotation(0.5f64, 3), c(-1.0, 0.0));
    }

    #[test]
    fn unit_rotation_matches_high_precision_phase() {
        // double nearest 1/sqrt(6) by double evaluation, n = 10^6; reference from
        // a 128-bit evaluation of the exact product
        let alpha = f64::from_bits(0x3fda20bd700c2c3f);
        let want = c(-0.251_511_799_000_824_43, 0.967_854_232_290_880_1);
        let got = unit_rotation(alpha, 1_000_000);
        assert!((got.re - want.re).abs() <= 1e-12, "{got} vs {want}");
        assert!((got.im - want.im).abs() <= 1e-12, "{got} vs {want}");
        assert!((got.norm() - 1.0).abs() <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn step_examples() {
        let r = step(c(0.0, 0.0), 0.37, 5);
        assert!(r.is_tie);
        assert_eq!(r.ambiguity, 0.0);

        let r = step(c(3.0, 4.0), 0.5, 0);
        assert_eq!(r.sign, Sign::Minus);
        assert_eq!(r.z_next, c(2.0, 4.0));
        assert!((r.ambiguity - (32f64.sqrt() - 20f64.sqrt())).abs() < 1e-15);
        assert!(!r.is_tie);
    }

    #[test]
    fn tie_at_origin_stops_immediately() {
        let p = Params::new(0.3, c(0.0, 0.0), 100).unwrap();
        let o = run_orbit(&p);
        assert_eq!(o.status(), OrbitStatus::Tie(0));
        assert!(o.signs().is_empty());
        assert_eq!(o.min_ambiguity(0).unwrap(), 0.0);
        assert_eq!(o.stability_radius(), 0.0);
    }

    #[test]
    fn params_validation() {
        assert_eq!(
            Params::new(2.0, c(1.0, 0.0), 10),
            Err(ParamsError::IntegerAlpha)
        );
        assert_eq!(
            Params::new(0.3, c(1.0, 0.0), 0),
            Err(ParamsError::EmptyHorizon)
        );
        assert!(matches!(
            Params::new(f64::NAN, c(1.0, 0.0), 3),
            Err(ParamsError::NonFiniteAlpha(_))
        ));
        assert!(Params::new(0.3, c(1.0, 0.0), 3)
            .unwrap()
            .with_warn_threshold(0.0)
            .is_err());
        let p = Params::new(1.25, c(1.0, 0.0), 3).unwrap();
        assert_eq!(p.alpha(), 0.25);
        let p = Params::new(-0.25, c(1.0, 0.0), 3).unwrap();
        assert_eq!(p.alpha(), 0.75);
    }

    #[test]
    fn min_ambiguity_ranges() {
        let p = Params::new(0.3, c(1.0, 2.0), 3).unwrap();
        let mut o = run_orbit(&p);
        o.ambiguities = vec![3.0, 1.0, 2.0];
        assert_eq!(o.min_ambiguity(0).unwrap(), 1.0);
        assert_eq!(o.min_ambiguity(2).unwrap(), 2.0);
        assert_eq!(
            o.min_ambiguity(3),
            Err(OrbitError::EmptyRange { from: 3, len: 3 })
        );
    }

    #[test]
    fn warnings_are_recorded_without_stopping() {
        let p = Params::new(0.3, c(1.0, 2.0), 50)
            .unwrap()
            .with_warn_threshold(1e9)
            .unwrap();
        let o = run_orbit(&p);
        assert_eq!(o.len(), 50);
        assert_eq!(o.warnings().len(), 50);
        assert!(matches!(o.status(), OrbitStatus::Warned(ref ns) if ns.len() == 50));
    }

    #[test]
    fn f32_engine_runs() {
        let p = Params::new(0.471_404_5f32, Complex::new(1.0f32, -1.0), 2000).unwrap();
        let o = run_orbit(&p);
        assert_eq!(o.len(), 2000);
        assert!(o.min_ambiguity(0).unwrap() > 0.0);
    }
}
