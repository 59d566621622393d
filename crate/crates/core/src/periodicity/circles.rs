use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{PeriodHypothesis, PeriodicityError};
use crate::dynamics::{unit_rotation, Orbit};
use crate::scalar::Scalar;

/// `Σ_{j=k+1}^{k+p} ε_j e^{2πijα}` over a recorded orbit.
pub fn period_sum<T: Scalar>(
    orbit: &Orbit<T>,
    k: usize,
    p: usize,
) -> Result<Complex<T>, PeriodicityError> {
    block_sum(orbit, k, p, 0)
}

/// Sum over the `block`-th period after `k`: indices `k+block·p+1 ..= k+(block+1)·p`.
pub fn block_sum<T: Scalar>(
    orbit: &Orbit<T>,
    k: usize,
    p: usize,
    block: usize,
) -> Result<Complex<T>, PeriodicityError> {
    let first = k + block * p + 1;
    let last = k + (block + 1) * p;
    if p == 0 || last >= orbit.len() {
        return Err(PeriodicityError::WindowOutOfRange {
            needed: last + 1,
            len: orbit.len(),
        });
    }
    let alpha = orbit.alpha();
    let signs = orbit.signs();
    Ok(
        (first..=last).fold(Complex::new(T::zero(), T::zero()), |acc, j| {
            acc + signs[j].apply(unit_rotation(alpha, j as u64))
        }),
    )
}

/// `e^{2πiαp} - 1`.
pub fn period_rotation_gap<T: Scalar>(alpha: T, p: usize) -> Complex<T> {
    unit_rotation(alpha, p as u64) - Complex::new(T::one(), T::zero())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleTolerances<T> {
    /// Absolute bound on the spread of the per-residue centers.
    pub center: T,
    /// Relative tolerance for merging radii.
    pub radius_rel: T,
    /// Absolute bound on the distance of an orbit point from its circle.
    pub circle: T,
}

impl<T: Scalar> Default for CircleTolerances<T> {
    fn default() -> Self {
        let tol = T::cst(1e-6);
        CircleTolerances {
            center: tol,
            radius_rel: tol,
            circle: tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidueCircle<T> {
    /// Orbit index `k + r`.
    pub index: usize,
    pub period_sum: Complex<T>,
    pub center: Complex<T>,
    pub radius: T,
}

/// The concentric circles carrying an eventually periodic orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleStructure<T> {
    pub center: Complex<T>,
    /// Distinct radii, ascending.
    pub radii: Vec<T>,
    pub distinct_count: usize,
    pub per_residue: Vec<ResidueCircle<T>>,
    /// Largest pairwise distance between per-residue centers.
    pub center_spread: T,
    /// Largest distance of a recorded `z_n` (`n >= k`) from its circle.
    pub max_deviation: T,
}

/// Per-residue centers and radii from `z_{k+r} = c + q_{k+r} e^{2πiαpℓ}/(e^{2πiαp}-1)`.
pub fn residue_circles<T: Scalar>(
    orbit: &Orbit<T>,
    hyp: &PeriodHypothesis,
) -> Result<Vec<ResidueCircle<T>>, PeriodicityError> {
    let (k, p) = (hyp.k, hyp.p);
    let needed = k + 2 * p;
    if p == 0 || needed > orbit.len() {
        return Err(PeriodicityError::WindowOutOfRange {
            needed,
            len: orbit.len(),
        });
    }
    let alpha = orbit.alpha();
    let gap = period_rotation_gap(alpha, p);
    if gap.norm() == T::zero() {
        return Err(PeriodicityError::DegenerateRotation { beta: 0.0 });
    }
    let signs = orbit.signs();
    let terms: Vec<Complex<T>> = (k + 1..=k + 2 * p - 1)
        .map(|j| signs[j].apply(unit_rotation(alpha, j as u64)))
        .collect();
    Ok((0..p)
        .map(|r| {
            let q = terms[r..r + p]
                .iter()
                .fold(Complex::new(T::zero(), T::zero()), |a, &t| a + t);
            let z = orbit.points()[k + r];
            ResidueCircle {
                index: k + r,
                period_sum: q,
                center: z - q / gap,
                radius: q.norm() / gap.norm(),
            }
        })
        .collect())
}

pub fn circle_structure<T: Scalar>(
    orbit: &Orbit<T>,
    hyp: &PeriodHypothesis,
    tol: &CircleTolerances<T>,
) -> Result<CircleStructure<T>, PeriodicityError> {
    let per_residue = residue_circles(orbit, hyp)?;
    let mut spread = T::zero();
    for (i, a) in per_residue.iter().enumerate() {
        for b in &per_residue[i + 1..] {
            spread = spread.max((a.center - b.center).norm());
        }
    }
    if !(spread < tol.center) {
        return Err(PeriodicityError::CentersDisagree {
            spread: spread.to_f64_lossy(),
            tolerance: tol.center.to_f64_lossy(),
        });
    }
    let center = per_residue[0].center;

    let mut sorted: Vec<T> = per_residue.iter().map(|c| c.radius).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("radii are finite"));
    let mut radii: Vec<T> = Vec::new();
    for r in sorted {
        match radii.last() {
            Some(&rep) if r - rep <= tol.radius_rel * rep.max(T::min_positive_value()) => {}
            _ => radii.push(r),
        }
    }

    let p = hyp.p;
    let mut max_deviation = T::zero();
    for (n, z) in orbit.points().iter().enumerate().skip(hyp.k) {
        let circle = &per_residue[(n - hyp.k) % p];
        let deviation = ((*z - center).norm() - circle.radius).abs();
        if !(deviation < tol.circle) {
            return Err(PeriodicityError::MembershipViolated {
                n,
                deviation: deviation.to_f64_lossy(),
            });
        }
        max_deviation = max_deviation.max(deviation);
    }

    Ok(CircleStructure {
        center,
        distinct_count: radii.len(),
        radii,
        per_residue,
        center_spread: spread,
        max_deviation,
    })
}
