//! Regions of initial values: balls from the universal circle inequality,
//! constant-sign disks, the forward balls of a periodic pattern and the
//! backward pre-image construction over half-planes.
//!
//! All sets are open.

mod predicate;
mod raster;

pub use predicate::{pattern_region, preimage_predicate, PatternRegion, RegionPredicate};
pub use raster::{rasterize_region, Mask};

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{reduce_alpha, unit_rotation, Orbit, Sign};
use crate::grid::GridError;
use crate::periodicity::{period_rotation_gap, PeriodHypothesis};
use crate::scalar::{modulus, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegionError {
    #[error("coefficient C must be nonzero")]
    ZeroC,
    #[error("alpha is an integer")]
    IntegerAlpha,
    #[error("the rotation over one period is the identity")]
    DegenerateRotation,
    #[error("half-plane normal must be nonzero")]
    ZeroNormal,
    #[error("pattern needs {needed} recorded steps, orbit has {len}")]
    WindowOutOfRange { needed: usize, len: usize },
    #[error(
        "z_{index} lies at distance {distance:e} from the center of its ball of radius {radius:e}"
    )]
    NotContained {
        index: usize,
        distance: f64,
        radius: f64,
    },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Open ball; a radius `<= 0` is the empty set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball<T> {
    pub center: Complex<T>,
    pub radius: T,
}

impl<T: Scalar> Ball<T> {
    pub fn new(center: Complex<T>, radius: T) -> Self {
        Ball { center, radius }
    }

    pub fn contains(&self, z: Complex<T>) -> bool {
        modulus(z - self.center) < self.radius
    }

    pub fn is_empty(&self) -> bool {
        !(self.radius > T::zero())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `|z + w| < |z - w|`: the step would add `w`.
    Plus,
    /// `|z + w| > |z - w|`: the step would subtract `w`.
    Minus,
}

impl From<Sign> for Side {
    fn from(s: Sign) -> Side {
        match s {
            Sign::Plus => Side::Plus,
            Sign::Minus => Side::Minus,
        }
    }
}

/// Open half-plane bounded by the line through `origin` perpendicular to `w`.
///
/// Membership compares the two candidate moduli exactly as the greedy step
/// does, so the boundary line matches the engine's tie set bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane<T> {
    pub w: Complex<T>,
    pub side: Side,
    pub origin: Complex<T>,
}

fn zero_complex<T: num_traits::Zero>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

impl<T: Scalar> HalfPlane<T> {
    pub fn new(w: Complex<T>, side: Side) -> Result<Self, RegionError> {
        if w.re == T::zero() && w.im == T::zero() {
            return Err(RegionError::ZeroNormal);
        }
        Ok(HalfPlane {
            w,
            side,
            origin: zero_complex(),
        })
    }

    pub fn contains(&self, z: Complex<T>) -> bool {
        let u = z - self.origin;
        let plus = modulus(u + self.w);
        let minus = modulus(u - self.w);
        match self.side {
            Side::Plus => plus < minus,
            Side::Minus => minus < plus,
        }
    }
}

/// Initial values `x` with `|x + A - zB - Cz| < |x + A - zB|` for every `|z| = 1`.
///
/// This is the open ball centered at `-A` with radius
/// `-|C|/2 - Re(B·conj C)/|C|`.
pub fn unit_circle_ball<T: Scalar>(
    a: Complex<T>,
    b: Complex<T>,
    c: Complex<T>,
) -> Result<Ball<T>, RegionError> {
    let c_abs = c.norm();
    if c_abs == T::zero() {
        return Err(RegionError::ZeroC);
    }
    let radius = -c_abs / T::cst(2.0) - (b * c.conj()).re / c_abs;
    Ok(Ball::new(-a, radius))
}

/// Initial values whose orbit takes sign −1 forever, and those taking +1
/// forever: radius 1/2 around `±1/(1 - e^{2πiα})`.
///
/// The centers have real part exactly `±1/2`; the imaginary part is
/// `cot(πα)/2`.
pub fn constant_sign_disks<T: Scalar>(alpha: T) -> Result<(Ball<T>, Ball<T>), RegionError> {
    let alpha = reduce_alpha(alpha);
    if alpha == T::zero() {
        return Err(RegionError::IntegerAlpha);
    }
    let half = T::cst(0.5);
    let im = if alpha == half {
        T::zero()
    } else {
        half / (T::PI() * alpha).tan()
    };
    let minus = Ball::new(Complex::new(half, im), half);
    let plus = Ball::new(-minus.center, half);
    Ok((minus, plus))
}

/// One forward ball per residue of a periodic pattern.
///
/// For residue `r`, `u = z_{k+r}` must satisfy the universal inequality
/// with `A = -q_r/D`, `B = E_r - q_r/D`, `C = -2E_r`, where `q_r` is the
/// period sum starting after `k + r`, `D = e^{2πiαp} - 1` and
/// `E_r = ε_{k+r+1} e^{2πi(k+r+1)α}`. The ball is centered at `q_r/D`
/// with radius `-Re(q_r conj(E_r)/D)`. Fails if an observed `z_{k+r}`
/// falls outside its ball.
pub fn periodic_forward_balls<T: Scalar>(
    orbit: &Orbit<T>,
    hyp: &PeriodHypothesis,
) -> Result<Vec<Ball<T>>, RegionError> {
    let (k, p) = (hyp.k, hyp.p);
    let needed = k + 2 * p;
    if p == 0 || needed > orbit.len() {
        return Err(RegionError::WindowOutOfRange {
            needed,
            len: orbit.len(),
        });
    }
    let alpha = orbit.alpha();
    let d = period_rotation_gap(alpha, p);
    if d.re == T::zero() && d.im == T::zero() {
        return Err(RegionError::DegenerateRotation);
    }
    let signs = orbit.signs();
    let terms: Vec<Complex<T>> = (k + 1..k + 2 * p)
        .map(|j| signs[j].apply(unit_rotation(alpha, j as u64)))
        .collect();
    let mut balls = Vec::with_capacity(p);
    for r in 0..p {
        let q = terms[r..r + p]
            .iter()
            .fold(zero_complex::<T>(), |acc, &t| acc + t);
        let e = terms[r];
        let ball = unit_circle_ball(-q / d, e - q / d, e * T::cst(-2.0))?;
        let u = orbit.points()[k + r];
        if !ball.contains(u) {
            return Err(RegionError::NotContained {
                index: k + r,
                distance: (u - ball.center).norm().to_f64_lossy(),
                radius: ball.radius.to_f64_lossy(),
            });
        }
        balls.push(ball);
    }
    Ok(balls)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unit_circle_ball_trivial_case() {
        let b = unit_circle_ball(c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)).unwrap();
        assert_eq!(b.center, c(0.0, 0.0));
        assert_eq!(b.radius, -1.0);
        assert!(b.is_empty());
        assert_eq!(
            unit_circle_ball(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)),
            Err(RegionError::ZeroC)
        );
    }

    #[test]
    fn unit_circle_ball_reproduces_constant_sign_disk() {
        for alpha in [0.1, 0.37, 2f64.sqrt().fract(), 0.5, 0.93] {
            let inv = unit_rotation(alpha, 1) - c(1.0, 0.0);
            let a = inv.inv();
            let ball = unit_circle_ball(a, a - c(1.0, 0.0), c(2.0, 0.0)).unwrap();
            let (minus, _) = constant_sign_disks(alpha).unwrap();
            assert!((ball.radius - 0.5).abs() < 1e-12);
            assert!((ball.center - minus.center).norm() < 1e-12);
            let direct = (c(1.0, 0.0) - unit_rotation(alpha, 1)).inv();
            assert!((direct.re - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn half_alpha_disks_are_tangent_at_zero() {
        let (minus, plus) = constant_sign_disks(0.5f64).unwrap();
        assert_eq!(minus.center, c(0.5, 0.0));
        assert_eq!(plus.center, c(-0.5, 0.0));
        assert_eq!((minus.radius, plus.radius), (0.5, 0.5));
        assert!(!minus.contains(c(0.0, 0.0)) && !plus.contains(c(0.0, 0.0)));
        assert_eq!(
            constant_sign_disks(3.0f64).unwrap_err(),
            RegionError::IntegerAlpha
        );
    }

    #[test]
    fn half_plane_sides() {
        let h = HalfPlane::new(c(1.0, 0.0), Side::Plus).unwrap();
        assert!(h.contains(c(-0.5, 3.0)));
        assert!(!h.contains(c(0.5, 3.0)));
        assert!(!h.contains(c(0.0, 3.0)));
        let h = HalfPlane {
            side: Side::Minus,
            ..h
        };
        assert!(h.contains(c(0.5, 3.0)));
        assert!(!h.contains(c(0.0, -1.0)));
        assert_eq!(
            HalfPlane::new(c(0.0, 0.0), Side::Plus),
            Err(RegionError::ZeroNormal)
        );
    }

    #[test]
    fn ball_is_open() {
        let b = Ball::new(c(0.0, 0.0), 1.0);
        assert!(b.contains(c(0.0, 0.0)));
        assert!(!b.contains(c(1.0, 0.0)));
        assert!(!b.contains(c(0.0, -1.0)));
    }
}
