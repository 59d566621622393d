//! Certification that an observed sign pattern persists forever.
//!
//! Both certificates rest on the same sampling argument. A Lipschitz
//! function on the circle that exceeds `20 L / q` at the `q + 1` points
//! `e^{2πinθ}`, `k <= n <= k + q`, for a convergent denominator `q` of `θ`
//! is positive on the whole circle. For constant signs `θ = α` and the
//! sampled function is the ambiguity itself. For period `p` the orbit is
//! read along each residue class `k + r + ℓp`, where it rotates by
//! `β = frac(pα)`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::circles::period_rotation_gap;
use super::{detect_sign_period, PeriodHypothesis, PeriodicityError};
use crate::diophantine::{convergents, Convergent};
use crate::dynamics::{reduce_alpha, unit_rotation, Orbit, Params, Sign};
use crate::scalar::Scalar;

/// Rotation numbers closer than this to an integer are refused.
pub const MIN_BETA: f64 = 1e-12;

const SAMPLING_FACTOR: f64 = 20.0;

/// `η` as a fraction of the observed minimum ambiguity in [`certify_auto`].
pub const AUTO_ETA_FRACTION: f64 = 0.9;

/// Position conventions recorded in every certificate.
pub const WINDOW_CONVENTION: &str = "inclusive: q+1 ambiguities per sampled class, indices k..=k+q (constant) or k+r+1+l*p for l in 0..=q (periodic)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    ConstantSign,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Certified,
    Insufficient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergentRef {
    pub index: usize,
    pub p: u128,
    pub q: u128,
}

impl From<&Convergent> for ConvergentRef {
    fn from(c: &Convergent) -> Self {
        ConvergentRef {
            index: c.index,
            p: c.p,
            q: c.q,
        }
    }
}

/// Sampling check for one residue class of a periodic pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueCheck<T> {
    pub residue: usize,
    pub period_sum: [T; 2],
    #[serde(rename = "L")]
    pub lipschitz: T,
    pub threshold: T,
    pub observed_min: T,
    pub sign: i8,
    pub signs_constant: bool,
}

/// Machine-checkable record of a certification attempt.
///
/// `L`, `threshold` and `observed_min` describe the binding sample class
/// (smallest margin); per-class values for periodic patterns are in
/// `residues`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate<T> {
    pub kind: CertificateKind,
    pub alpha: T,
    pub alpha_hex: String,
    pub z_init: [T; 2],
    pub k: usize,
    pub p: usize,
    pub beta: T,
    pub convergent: Option<ConvergentRef>,
    #[serde(rename = "L")]
    pub lipschitz: T,
    pub threshold: T,
    pub observed_min: T,
    pub window: [usize; 2],
    pub verdict: Verdict,
    pub reason: Option<String>,
    pub eta: Option<T>,
    pub required_horizon: Option<usize>,
    pub window_convention: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub residues: Vec<ResidueCheck<T>>,
}

impl<T: Scalar> Certificate<T> {
    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }

    pub fn hypothesis(&self) -> PeriodHypothesis {
        PeriodHypothesis {
            k: self.k,
            p: self.p,
            repeats_observed: 0,
        }
    }

    fn blank(kind: CertificateKind, params: &Params<T>, k: usize, p: usize, beta: T) -> Self {
        let z = params.z_init();
        Certificate {
            kind,
            alpha: params.alpha(),
            alpha_hex: params.alpha().to_hex_bits(),
            z_init: [z.re, z.im],
            k,
            p,
            beta,
            convergent: None,
            lipschitz: T::nan(),
            threshold: T::nan(),
            observed_min: T::nan(),
            window: [k, k],
            verdict: Verdict::Insufficient,
            reason: None,
            eta: None,
            required_horizon: None,
            window_convention: WINDOW_CONVENTION.to_string(),
            residues: Vec::new(),
        }
    }

    fn insufficient(mut self, reason: impl Into<String>) -> Self {
        self.verdict = Verdict::Insufficient;
        self.reason = Some(reason.into());
        self
    }
}

/// The sampling criterion: `min(samples) > 20 L / q` over `q + 1` samples.
pub fn sampling_check<T: Scalar>(
    samples: &[T],
    lipschitz: T,
    q: usize,
) -> Result<bool, PeriodicityError> {
    if q == 0 || samples.len() != q + 1 {
        return Err(PeriodicityError::WrongSampleCount {
            expected: q + 1,
            got: samples.len(),
        });
    }
    if !(lipschitz > T::zero()) {
        return Err(PeriodicityError::NonPositiveLipschitz);
    }
    let min = samples.iter().copied().fold(T::infinity(), T::min);
    Ok(min > sampling_threshold(lipschitz, q as u128))
}

/// `20 L / q`.
pub fn sampling_threshold<T: Scalar>(lipschitz: T, q: u128) -> T {
    T::cst(SAMPLING_FACTOR) * lipschitz / T::cst(q as f64)
}

/// `4π + 4π / |e^{2πiα} - 1|`, the Lipschitz bound for constant signs.
pub fn lipschitz_bound_constant<T: Scalar>(alpha: T) -> Result<T, PeriodicityError> {
    let gap = period_rotation_gap(reduce_alpha(alpha), 1).norm();
    if reduce_alpha(alpha) == T::zero() || gap == T::zero() {
        return Err(PeriodicityError::IntegerAlpha);
    }
    let four_pi = T::cst(4.0) * T::PI();
    Ok(four_pi + four_pi / gap)
}

/// `4π (1 + |q| / |e^{2πiβ} - 1|)` for one residue class of period sum `q`.
pub fn lipschitz_bound_periodic<T: Scalar>(period_sum: Complex<T>, gap: Complex<T>) -> T {
    T::cst(4.0) * T::PI() * (T::one() + period_sum.norm() / gap.norm())
}

/// How the convergent is chosen for a constant-sign certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergentChoice {
    /// 1-based position in the expansion of `α`.
    Index(usize),
    /// A specific convergent denominator.
    Denominator(u128),
}

/// Certifies that the sign stays constant for all `n >= k`.
///
/// Requires the signs on `k..=k+q` to agree and the minimum ambiguity on
/// that window to exceed `(4π + 4π/|e^{2πiα} - 1|)·20/q`. A minimum equal
/// to the threshold is not enough.
pub fn certify_constant<T: Scalar>(
    orbit: &Orbit<T>,
    k: usize,
    choice: ConvergentChoice,
) -> Result<Certificate<T>, PeriodicityError> {
    let alpha = orbit.alpha();
    let list = convergents(alpha, u128::MAX)?;
    let conv = match choice {
        ConvergentChoice::Index(i) => list.get(i),
        ConvergentChoice::Denominator(q) => list.find_denominator(q),
    }
    .copied()
    .ok_or(PeriodicityError::NoSuchConvergent)?;
    let lipschitz = lipschitz_bound_constant(alpha)?;
    let threshold = sampling_threshold(lipschitz, conv.q);

    let mut cert = Certificate::blank(CertificateKind::ConstantSign, orbit.params(), k, 1, alpha);
    cert.convergent = Some(ConvergentRef::from(&conv));
    cert.lipschitz = lipschitz;
    cert.threshold = threshold;

    let Some(end) = usize::try_from(conv.q).ok().and_then(|q| k.checked_add(q)) else {
        return Ok(cert.insufficient("convergent denominator does not fit the index range"));
    };
    cert.window = [k, end];
    cert.required_horizon = Some(end + 1);
    if end >= orbit.len() {
        let reason = match orbit.tie() {
            Some(n) if n <= end => format!("orbit tied at n = {n} inside the window"),
            _ => format!(
                "window [{k}, {end}] exceeds the recorded orbit of length {}",
                orbit.len()
            ),
        };
        return Ok(cert.insufficient(reason));
    }
    let signs = &orbit.signs()[k..=end];
    let observed = orbit.ambiguities()[k..=end]
        .iter()
        .copied()
        .fold(T::infinity(), T::min);
    cert.observed_min = observed;
    if let Some(off) = signs.iter().position(|&s| s != signs[0]) {
        return Ok(cert.insufficient(format!("sign changes at n = {} inside the window", k + off)));
    }
    if !(observed > threshold) {
        return Ok(cert.insufficient(format!(
            "minimum ambiguity {observed:e} does not exceed the threshold {threshold:e}"
        )));
    }
    cert.verdict = Verdict::Certified;
    Ok(cert)
}

/// What the periodic certification needs from the start of the pattern.
struct PeriodicSetup<T> {
    beta: T,
    gap: Complex<T>,
    /// Per residue: period sum, class sign `ε_{k+r+1}`.
    residues: Vec<(Complex<T>, Sign)>,
}

impl<T: Scalar> PeriodicSetup<T> {
    /// `signs[j]` must hold `ε_{k+1+j}` for `j < 2p - 1`.
    fn new(alpha: T, k: usize, p: usize, signs: &[Sign]) -> Result<Self, PeriodicityError> {
        let beta = T::fract_of_multiple(alpha, p as u64);
        let min_beta = T::cst(MIN_BETA);
        if beta < min_beta || T::one() - beta < min_beta {
            return Err(PeriodicityError::DegenerateRotation {
                beta: beta.to_f64_lossy(),
            });
        }
        let gap = period_rotation_gap(alpha, p);
        let terms: Vec<Complex<T>> = (0..2 * p - 1)
            .map(|j| signs[j].apply(unit_rotation(alpha, (k + 1 + j) as u64)))
            .collect();
        let residues = (0..p)
            .map(|r| {
                let q = terms[r..r + p]
                    .iter()
                    .fold(Complex::new(T::zero(), T::zero()), |a, &t| a + t);
                (q, signs[r])
            })
            .collect();
        Ok(PeriodicSetup {
            beta,
            gap,
            residues,
        })
    }
}

/// Running minimum and sign agreement per residue class.
struct ClassScan<T> {
    mins: Vec<T>,
    constant: Vec<bool>,
}

impl<T: Scalar> ClassScan<T> {
    fn run(
        setup: &PeriodicSetup<T>,
        k: usize,
        end: usize,
        steps: impl Iterator<Item = (usize, Sign, T)>,
    ) -> Self {
        let p = setup.residues.len();
        let mut mins = vec![T::infinity(); p];
        let mut constant = vec![true; p];
        for (n, sign, amb) in steps {
            if n <= k {
                continue;
            }
            if n > end {
                break;
            }
            let r = (n - k - 1) % p;
            if sign != setup.residues[r].1 {
                constant[r] = false;
            }
            mins[r] = mins[r].min(amb);
        }
        ClassScan { mins, constant }
    }
}

/// The admissible convergent and resulting window for a periodic pattern.
struct PeriodicPlan<T> {
    cert: Certificate<T>,
    lipschitz: Vec<T>,
    q: u128,
    end: Option<usize>,
}

fn plan_periodic<T: Scalar>(
    params: &Params<T>,
    hyp: &PeriodHypothesis,
    eta: T,
    setup: &PeriodicSetup<T>,
) -> Result<PeriodicPlan<T>, PeriodicityError> {
    let (k, p) = (hyp.k, hyp.p);
    let mut cert = Certificate::blank(CertificateKind::Periodic, params, k, p, setup.beta);
    cert.eta = Some(eta);
    let lipschitz: Vec<T> = setup
        .residues
        .iter()
        .map(|(q, _)| lipschitz_bound_periodic(*q, setup.gap))
        .collect();
    let l_max = lipschitz.iter().copied().fold(T::zero(), T::max);
    let list = convergents(setup.beta, u128::MAX)?;
    let Some(conv) = list
        .first_where(|c| sampling_threshold(l_max, c.q) < eta)
        .copied()
    else {
        cert.lipschitz = l_max;
        let cert = cert.insufficient(format!(
            "no convergent of beta brings 20 L / q below eta = {eta:e} (L = {l_max:e})"
        ));
        return Ok(PeriodicPlan {
            cert,
            lipschitz,
            q: 0,
            end: None,
        });
    };
    cert.convergent = Some(ConvergentRef::from(&conv));
    let end = usize::try_from(conv.q)
        .ok()
        .and_then(|q| q.checked_mul(p))
        .and_then(|span| span.checked_add(k + p));
    if let Some(end) = end {
        cert.window = [k, end];
        cert.required_horizon = Some(end + 1);
    }
    Ok(PeriodicPlan {
        cert,
        lipschitz,
        q: conv.q,
        end,
    })
}

fn finish_periodic<T: Scalar>(
    plan: PeriodicPlan<T>,
    setup: &PeriodicSetup<T>,
    scan: &ClassScan<T>,
) -> Certificate<T> {
    let mut cert = plan.cert;
    let residues: Vec<ResidueCheck<T>> = setup
        .residues
        .iter()
        .enumerate()
        .map(|(r, (q, sign))| ResidueCheck {
            residue: r,
            period_sum: [q.re, q.im],
            lipschitz: plan.lipschitz[r],
            threshold: sampling_threshold(plan.lipschitz[r], plan.q),
            observed_min: scan.mins[r],
            sign: sign.value(),
            signs_constant: scan.constant[r],
        })
        .collect();
    let binding = residues
        .iter()
        .min_by(|a, b| {
            let ma = a.observed_min - a.threshold;
            let mb = b.observed_min - b.threshold;
            ma.partial_cmp(&mb).unwrap_or(std::cmp::Ordering::Equal)
        })
        .expect("period is positive");
    cert.lipschitz = binding.lipschitz;
    cert.threshold = binding.threshold;
    cert.observed_min = binding.observed_min;
    let broken = residues
        .iter()
        .find(|c| !c.signs_constant)
        .map(|c| c.residue);
    let weak = residues
        .iter()
        .find(|c| !(c.observed_min > c.threshold))
        .map(|c| c.residue);
    cert.residues = residues;
    match (broken, weak) {
        (Some(r), _) => cert.insufficient(format!(
            "signs in residue class {r} are not constant on the window"
        )),
        (None, Some(r)) => cert.insufficient(format!(
            "minimum ambiguity in residue class {r} does not exceed its threshold"
        )),
        (None, None) => {
            cert.verdict = Verdict::Certified;
            cert
        }
    }
}

fn check_eta<T: Scalar>(eta: T) -> Result<(), PeriodicityError> {
    if eta > T::zero() && eta < T::one() {
        Ok(())
    } else {
        Err(PeriodicityError::BadEta(eta.to_f64_lossy()))
    }
}

/// Certifies that the signs stay `p`-periodic for all `n >= k`.
///
/// Picks the smallest convergent denominator `Q` of `β = frac(pα)` with
/// `20·max_r L_r / Q < eta` and checks each residue class on `Q + 1`
/// samples. The orbit must reach index `k + pQ + p`.
pub fn certify_periodic<T: Scalar>(
    orbit: &Orbit<T>,
    hyp: &PeriodHypothesis,
    eta: T,
) -> Result<Certificate<T>, PeriodicityError> {
    check_eta(eta)?;
    let (k, p) = (hyp.k, hyp.p);
    if p == 0 || k + 2 * p > orbit.len() {
        return Err(PeriodicityError::WindowOutOfRange {
            needed: k + 2 * p,
            len: orbit.len(),
        });
    }
    let setup = PeriodicSetup::new(orbit.alpha(), k, p, &orbit.signs()[k + 1..k + 2 * p])?;
    let plan = plan_periodic(orbit.params(), hyp, eta, &setup)?;
    let end = match plan.end {
        Some(end) if end < orbit.len() => end,
        Some(end) => {
            let len = orbit.len();
            return Ok(plan.cert.insufficient(format!(
                "window [{k}, {end}] exceeds the recorded orbit of length {len}"
            )));
        }
        None if plan.cert.reason.is_some() => return Ok(plan.cert),
        None => {
            return Ok(plan
                .cert
                .insufficient("window length overflows the index range"))
        }
    };
    let steps = (k + 1..=end).map(|n| (n, orbit.signs()[n], orbit.ambiguities()[n]));
    let scan = ClassScan::run(&setup, k, end, steps);
    Ok(finish_periodic(plan, &setup, &scan))
}

/// [`certify_periodic`] without storing the orbit: the dynamics are rerun
/// from `params` for as long as the window needs, up to `params.horizon()`.
pub fn certify_periodic_streaming<T: Scalar>(
    params: &Params<T>,
    hyp: &PeriodHypothesis,
    eta: T,
) -> Result<Certificate<T>, PeriodicityError> {
    check_eta(eta)?;
    let (k, p) = (hyp.k, hyp.p);
    if p == 0 {
        return Err(PeriodicityError::WindowOutOfRange { needed: k, len: 0 });
    }
    let prefix: Vec<Sign> = params
        .stepper()
        .skip(k + 1)
        .take(2 * p - 1)
        .map(|r| r.sign)
        .collect();
    if prefix.len() < 2 * p - 1 {
        return Err(PeriodicityError::WindowOutOfRange {
            needed: k + 2 * p,
            len: k + 1 + prefix.len(),
        });
    }
    let setup = PeriodicSetup::new(params.alpha(), k, p, &prefix)?;
    let plan = plan_periodic(params, hyp, eta, &setup)?;
    let horizon = params.horizon();
    let end = match plan.end {
        Some(end) if end < horizon => end,
        Some(end) => {
            return Ok(plan
                .cert
                .insufficient(format!("window [{k}, {end}] exceeds the horizon {horizon}")));
        }
        None if plan.cert.reason.is_some() => return Ok(plan.cert),
        None => {
            return Ok(plan
                .cert
                .insufficient("window length overflows the index range"))
        }
    };
    let mut stepper = params.stepper();
    let steps = stepper
        .by_ref()
        .skip(k + 1)
        .map(|r| (r.n, r.sign, r.ambiguity));
    let scan = ClassScan::run(&setup, k, end, steps.take(end - k));
    if let Some(n) = stepper.tie() {
        if n <= end {
            return Ok(plan
                .cert
                .insufficient(format!("orbit tied at n = {n} inside the window")));
        }
    }
    Ok(finish_periodic(plan, &setup, &scan))
}

/// Certificate attempt with parameters chosen from the orbit itself.
///
/// Constant patterns use the smallest convergent of `α` whose threshold
/// is below the observed minimum ambiguity after `k` and whose window fits.
/// Longer periods use `η` equal to [`AUTO_ETA_FRACTION`] of that minimum,
/// which selects the shortest window that can still succeed.
pub fn certify_auto<T: Scalar>(
    orbit: &Orbit<T>,
    hyp: &PeriodHypothesis,
) -> Result<Certificate<T>, PeriodicityError> {
    let observed = orbit
        .min_ambiguity(hyp.k)
        .map_err(|_| PeriodicityError::WindowOutOfRange {
            needed: hyp.k + 1,
            len: orbit.len(),
        })?;
    if hyp.p == 1 {
        let lipschitz = lipschitz_bound_constant(orbit.alpha())?;
        let list = convergents(orbit.alpha(), u128::MAX)?;
        let fits = |c: &Convergent| (hyp.k as u128) + c.q < orbit.len() as u128;
        let pick = list
            .first_where(|c| fits(c) && sampling_threshold(lipschitz, c.q) < observed)
            .or_else(|| list.first_where(|c| sampling_threshold(lipschitz, c.q) < observed))
            .or_else(|| list.entries().last())
            .ok_or(PeriodicityError::NoSuchConvergent)?;
        return certify_constant(orbit, hyp.k, ConvergentChoice::Index(pick.index));
    }
    let eta = (observed * T::cst(AUTO_ETA_FRACTION)).min(T::cst(0.5));
    if !(eta > T::zero()) {
        return Err(PeriodicityError::BadEta(eta.to_f64_lossy()));
    }
    certify_periodic(orbit, hyp, eta)
}

/// [`certify_auto`] for windows longer than any stored orbit: `observed`
/// is the minimum ambiguity seen after `k`, and the dynamics are rerun up
/// to `params.horizon()`. Constant patterns go through the periodic
/// certificate with `p = 1`, whose Lipschitz bound coincides with the
/// constant-sign one.
pub fn certify_auto_streaming<T: Scalar>(
    params: &Params<T>,
    hyp: &PeriodHypothesis,
    observed: T,
) -> Result<Certificate<T>, PeriodicityError> {
    let eta = (observed * T::cst(AUTO_ETA_FRACTION)).min(T::cst(0.5));
    if !(eta > T::zero()) {
        return Err(PeriodicityError::BadEta(eta.to_f64_lossy()));
    }
    certify_periodic_streaming(params, hyp, eta)
}

/// Reruns the dynamics to `horizon` and lists indices `n >= k + p` with
/// `ε_n != ε_{n-p}`, plus the tie index if the orbit ties first.
pub fn pattern_violations<T: Scalar>(
    params: &Params<T>,
    hyp: &PeriodHypothesis,
    horizon: usize,
) -> Vec<usize> {
    let (k, p) = (hyp.k, hyp.p);
    let mut ring: Vec<Sign> = Vec::with_capacity(p);
    let mut violations = Vec::new();
    let mut stepper = params.stepper();
    for rec in stepper.by_ref().take(horizon) {
        if rec.n < k {
            continue;
        }
        let slot = (rec.n - k) % p;
        if rec.n < k + p {
            ring.push(rec.sign);
        } else if ring[slot] != rec.sign {
            violations.push(rec.n);
        }
    }
    if let Some(n) = stepper.tie() {
        if n < horizon {
            violations.push(n);
        }
    }
    violations
}

/// Detects the period on a stored orbit and runs [`certify_auto`].
pub fn detect_and_certify<T: Scalar>(
    orbit: &Orbit<T>,
    min_repeats: usize,
    p_max: usize,
) -> Option<(PeriodHypothesis, Result<Certificate<T>, PeriodicityError>)> {
    let hyp = detect_sign_period(orbit.signs(), min_repeats, p_max)?;
    Some((hyp, certify_auto(orbit, &hyp)))
}
