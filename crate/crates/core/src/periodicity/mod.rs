//! Eventual periodicity of sign sequences: detection, the concentric
//! circle structure of periodic orbits, and certification that a finite
//! observation extends to all later times.

mod certify;
mod circles;
mod detect;

pub use certify::{
    certify_auto, certify_auto_streaming, certify_constant, certify_periodic,
    certify_periodic_streaming, detect_and_certify, lipschitz_bound_constant,
    lipschitz_bound_periodic, pattern_violations, sampling_check, sampling_threshold, Certificate,
    CertificateKind, ConvergentChoice, ConvergentRef, ResidueCheck, Verdict, AUTO_ETA_FRACTION,
    MIN_BETA, WINDOW_CONVENTION,
};
pub use circles::{
    block_sum, circle_structure, period_rotation_gap, period_sum, residue_circles, CircleStructure,
    CircleTolerances, ResidueCircle,
};
pub use detect::{detect_sign_period, holds_from, PeriodHypothesis, DEFAULT_MIN_REPEATS};

use thiserror::Error;

use crate::diophantine::DiophantineError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PeriodicityError {
    #[error("window needs {needed} recorded steps, orbit has {len}")]
    WindowOutOfRange { needed: usize, len: usize },
    #[error("rotation per period beta = {beta} is too close to an integer")]
    DegenerateRotation { beta: f64 },
    #[error("residue circle centers spread by {spread:e}, tolerance {tolerance:e}")]
    CentersDisagree { spread: f64, tolerance: f64 },
    #[error("z_{n} is {deviation:e} away from its circle")]
    MembershipViolated { n: usize, deviation: f64 },
    #[error("no such convergent")]
    NoSuchConvergent,
    #[error("sampling needs {expected} values, got {got}")]
    WrongSampleCount { expected: usize, got: usize },
    #[error("Lipschitz constant must be positive")]
    NonPositiveLipschitz,
    #[error("alpha is an integer")]
    IntegerAlpha,
    #[error("eta must lie in (0, 1), got {0}")]
    BadEta(f64),
    #[error(transparent)]
    Diophantine(#[from] DiophantineError),
}
