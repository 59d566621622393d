//! Shared cases and property checks for the integration tests and the
//! acceptance harness. Each check returns a one-line summary on success.

#![allow(dead_code)]

use std::sync::Arc;

use gsign_core::dynamics::{run_orbit, step, unit_rotation, Params, Symmetry};
use gsign_core::exprparse::{parse_complex, parse_real};
use gsign_core::periodicity::{
    detect_sign_period, period_rotation_gap, period_sum, PeriodHypothesis,
};
use gsign_core::regions::{
    preimage_predicate, unit_circle_ball, Ball, HalfPlane, RegionPredicate, Side,
};
use gsign_core::search::{verify_period_doubling, DoublingError};
use gsign_core::{Orbit64, Params64};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MIN_REPEATS: usize = 5;
/// Mismatches at steps whose ambiguity is below this are float near-ties,
/// not counterexamples.
pub const NEAR_TIE: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct Case {
    pub name: &'static str,
    pub alpha: &'static str,
    pub z: &'static str,
    pub horizon: usize,
    pub period: usize,
}

impl Case {
    pub fn params(&self) -> Params64 {
        params(self.alpha, self.z, self.horizon)
    }
}

pub fn params(alpha: &str, z: &str, horizon: usize) -> Params64 {
    Params::new(
        parse_real(alpha).unwrap(),
        parse_complex(z).unwrap(),
        horizon,
    )
    .unwrap()
}

pub const PERIOD_222: Case = Case {
    name: "period 222",
    alpha: "1.0415/sqrt(2*pi^2)",
    z: "0.0001+5i",
    horizon: 10_000,
    period: 222,
};
pub const PERIOD_51: Case = Case {
    name: "period 51",
    alpha: "0.00702367",
    z: "2.0176+4.8585i",
    horizon: 10_000,
    period: 51,
};
pub const PERIOD_14: Case = Case {
    name: "period 14",
    alpha: "sqrt(2)/3",
    z: "1-i",
    horizon: 10_000,
    period: 14,
};
pub const PERIOD_874: Case = Case {
    name: "period 874",
    alpha: "0.5010866",
    z: "0.747467+0.445271i",
    horizon: 100_000,
    period: 874,
};
pub const PERIOD_2258: Case = Case {
    name: "period 2258",
    alpha: "0.50015827",
    z: "0.5761982862055985+0.9356408428886818i",
    horizon: 100_000,
    period: 2258,
};
pub const SHOWCASE_CASES: [Case; 3] = [PERIOD_222, PERIOD_51, PERIOD_14];

pub fn detect(orbit: &Orbit64) -> Option<PeriodHypothesis> {
    if orbit.tie().is_some() {
        return None;
    }
    detect_sign_period(orbit.signs(), MIN_REPEATS, orbit.len() / MIN_REPEATS)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform_alpha(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let a: f64 = rng.random();
        if a != 0.0 && a != 0.5 {
            return a;
        }
    }
}

fn in_disk(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    Complex64::from_polar(
        radius * rng.random::<f64>().sqrt(),
        std::f64::consts::TAU * rng.random::<f64>(),
    )
}

fn in_square(rng: &mut ChaCha8Rng, half: f64) -> Complex64 {
    Complex64::new(rng.random_range(-half..half), rng.random_range(-half..half))
}

/// A random orbit with its detected period, if any.
pub struct Instance {
    pub params: Params64,
    pub orbit: Orbit64,
    pub hyp: Option<PeriodHypothesis>,
}

/// `count` orbits with `α` uniform and `z_{-1}` uniform in the disk of
/// radius 2. Doubles drawn by `rand` are multiples of 2^-53, so `1 - α` and
/// `α ± 1/2` are exact.
pub fn random_instances(seed: u64, count: usize, horizon: usize) -> Vec<Instance> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let params =
                Params::new(uniform_alpha(&mut rng), in_disk(&mut rng, 2.0), horizon).unwrap();
            let orbit = run_orbit(&params);
            let hyp = detect(&orbit);
            Instance { params, orbit, hyp }
        })
        .collect()
}

/// Periodic instances whose pattern is observed at least twice past `k`.
pub fn periodic_instances(seed: u64, want: usize, horizon: usize) -> Vec<Instance> {
    let mut out = Vec::new();
    let mut round = 0;
    while out.len() < want && round < 20 {
        out.extend(
            random_instances(seed + round, want, horizon)
                .into_iter()
                .filter(|i| i.hyp.is_some_and(|h| h.k + 2 * h.p <= i.orbit.len())),
        );
        round += 1;
    }
    out.truncate(want);
    out
}

/// Shifting `z_{-1}` by less than half the minimum ambiguity shifts the
/// whole orbit and keeps every sign.
pub fn check_shift_stability() -> Result<String, String> {
    let mut rng = rng(11);
    let mut checked = 0;
    let mut worst = 0.0f64;
    for inst in random_instances(1, 200, 2000) {
        if inst.orbit.tie().is_some() {
            continue;
        }
        let radius = inst.orbit.stability_radius();
        if !(radius > 0.0) {
            continue;
        }
        let w = Complex64::from_polar(
            0.9 * radius * rng.random::<f64>(),
            std::f64::consts::TAU * rng.random::<f64>(),
        );
        let shifted = run_orbit(&inst.params.with_z_init(inst.params.z_init() + w));
        if shifted.len() != inst.orbit.len() || shifted.signs() != inst.orbit.signs() {
            return Err(format!("shift {w} of {:?} changed the signs", inst.params));
        }
        for (a, b) in inst.orbit.points().iter().zip(shifted.points()) {
            worst = worst.max((a + w - b).norm());
        }
        if worst > 1e-9 {
            return Err(format!(
                "shift {w} of {:?}: points off by {worst:e}",
                inst.params
            ));
        }
        checked += 1;
    }
    if checked < 100 {
        return Err(format!("only {checked} usable instances"));
    }
    Ok(format!(
        "{checked} instances, max point deviation {worst:.1e}"
    ))
}

/// Compares an orbit with the prediction of a symmetry. `Ok(false)` means
/// the orbits first part at a float near-tie of the original.
fn symmetry_holds(orbit: &Orbit64, image: &Orbit64, sym: Symmetry) -> Result<bool, String> {
    let len = orbit.len().min(image.len());
    for n in 0..len {
        let sign_ok = image.signs()[n] == sym.predict_sign(orbit.signs()[n], n);
        let dev = (image.points()[n] - sym.predict_point(orbit.points()[n])).norm();
        if !sign_ok || dev > 1e-9 {
            if orbit.ambiguities()[n] < NEAR_TIE {
                return Ok(false);
            }
            return Err(format!(
                "{sym:?} fails at n = {n} (deviation {dev:e}) for {:?}",
                orbit.params()
            ));
        }
    }
    if orbit.len() != image.len() {
        return Err(format!(
            "{sym:?}: lengths {} vs {} for {:?}",
            orbit.len(),
            image.len(),
            orbit.params()
        ));
    }
    Ok(true)
}

pub fn check_symmetries() -> Result<String, String> {
    let mut conclusive = [0usize; 3];
    let syms = [
        Symmetry::ConjugateAlpha,
        Symmetry::HalfShift,
        Symmetry::Negate,
    ];
    for inst in random_instances(2, 200, 2000) {
        for (i, sym) in syms.iter().enumerate() {
            let image = run_orbit(&sym.apply(&inst.params));
            if symmetry_holds(&inst.orbit, &image, *sym)? {
                conclusive[i] += 1;
            }
        }
    }
    if conclusive.iter().any(|&c| c < 100) {
        return Err(format!("too few conclusive instances: {conclusive:?}"));
    }
    Ok(format!(
        "conjugate/half-shift/negate conclusive on {conclusive:?} of 200"
    ))
}

/// Every odd period found turns into twice that period under `α + 1/2`.
pub fn check_period_doubling() -> Result<String, String> {
    let mut rng = rng(3);
    let (mut odd, mut draws) = (0, 0);
    let mut biggest = 0;
    while odd < 100 && draws < 5000 {
        draws += 1;
        let alpha = uniform_alpha(&mut rng);
        let z = in_disk(&mut rng, 2.0);
        match verify_period_doubling(alpha, z, 4000, MIN_REPEATS) {
            Ok(rep) if rep.verified => {
                odd += 1;
                biggest = biggest.max(rep.base.p);
            }
            Ok(rep) => return Err(format!("alpha {alpha:e}, z {z}: {rep:?}")),
            Err(DoublingError::NotApplicable(_)) => {}
            Err(e) => return Err(e.to_string()),
        }
    }
    if odd < 100 {
        return Err(format!("only {odd} odd-period instances in {draws} draws"));
    }
    Ok(format!(
        "{odd} odd-period instances in {draws} draws all double (largest base period {biggest})"
    ))
}

/// `c_r = z_{k+r} - q_r/(e^{2πiαp}-1)` agrees for consecutive residues.
pub fn check_common_center() -> Result<String, String> {
    let mut worst = 0.0f64;
    let insts = periodic_instances(4, 100, 4000);
    for inst in &insts {
        let h = inst.hyp.unwrap();
        let d = period_rotation_gap(inst.params.alpha(), h.p);
        let center = |r: usize| -> Complex64 {
            let q = period_sum(&inst.orbit, h.k + r, h.p).unwrap();
            inst.orbit.points()[h.k + r] - q / d
        };
        let mut prev = center(0);
        for r in 1..=h.p.min(inst.orbit.len() - 1 - h.k - h.p) {
            let c = center(r);
            worst = worst.max((c - prev).norm());
            prev = c;
        }
        if worst > 1e-9 {
            return Err(format!("centers differ by {worst:e} for {:?}", inst.params));
        }
    }
    if insts.len() < 100 {
        return Err(format!("only {} periodic instances", insts.len()));
    }
    Ok(format!(
        "{} periodic instances, max |c_(k+1) - c_k| = {worst:.1e}",
        insts.len()
    ))
}

/// `z_{k+ℓp} = z_k + q (e^{2πiαpℓ} - 1)/(e^{2πiαp} - 1)`.
pub fn check_circle_law() -> Result<String, String> {
    let mut worst = 0.0f64;
    let mut longest = 0;
    let insts = periodic_instances(5, 100, 6000);
    for inst in &insts {
        let h = inst.hyp.unwrap();
        let alpha = inst.params.alpha();
        let d = period_rotation_gap(alpha, h.p);
        let q = period_sum(&inst.orbit, h.k, h.p).unwrap();
        let zk = inst.orbit.points()[h.k];
        let ells = ((inst.orbit.len() - 1 - h.k) / h.p).min(1000);
        longest = longest.max(ells);
        for l in 0..=ells {
            let rot = unit_rotation(alpha, (h.p * l) as u64) - 1.0;
            let predicted = zk + q * rot / d;
            worst = worst.max((inst.orbit.points()[h.k + l * h.p] - predicted).norm());
        }
        if worst > 1e-8 {
            return Err(format!("circle law off by {worst:e} for {:?}", inst.params));
        }
    }
    if insts.len() < 100 {
        return Err(format!("only {} periodic instances", insts.len()));
    }
    Ok(format!(
        "{} periodic instances, up to l = {longest}, max deviation {worst:.1e}",
        insts.len()
    ))
}

pub const CIRCLE_GRID: usize = 10_000;

/// Whether `|u + A - zB - Cz| < |u + A - zB|` at every grid point of `|z| = 1`.
pub fn unit_circle_oracle(
    u: Complex64,
    a: Complex64,
    b: Complex64,
    c: Complex64,
    grid: &[Complex64],
) -> bool {
    grid.iter().all(|&z| {
        let x = u + a - z * b;
        (x - c * z).norm() < x.norm()
    })
}

pub fn check_unit_circle_ball() -> Result<String, String> {
    let mut rng = rng(6);
    let grid: Vec<Complex64> = (0..CIRCLE_GRID)
        .map(|j| unit_rotation(1.0 / CIRCLE_GRID as f64, j as u64))
        .collect();
    let (mut inside, mut outside, mut banded, mut nonempty) = (0, 0, 0, 0);
    for _ in 0..100 {
        let a = in_square(&mut rng, 2.0);
        let c = in_square(&mut rng, 2.0);
        // B biased against C so that about half the balls are nonempty
        let b = -c * rng.random_range(0.0..1.5) + in_square(&mut rng, 0.5);
        let ball = unit_circle_ball(a, b, c).map_err(|e| e.to_string())?;
        if ball.radius > 0.0 {
            nonempty += 1;
        }
        let spread = 2.0 * ball.radius.max(0.5);
        for _ in 0..100 {
            let u = -a + in_disk(&mut rng, spread);
            if ((u - ball.center).norm() - ball.radius).abs() < 1e-9 {
                banded += 1;
                continue;
            }
            let oracle = unit_circle_oracle(u, a, b, c, &grid);
            if oracle != ball.contains(u) {
                return Err(format!(
                    "A={a} B={b} C={c} u={u}: ball says {}, grid says {oracle}",
                    ball.contains(u)
                ));
            }
            if oracle {
                inside += 1;
            } else {
                outside += 1;
            }
        }
    }
    Ok(format!(
        "100 triples ({nonempty} nonempty), {inside} inside + {outside} outside agree, {banded} in boundary band"
    ))
}

fn random_tree(rng: &mut ChaCha8Rng, depth: usize) -> RegionPredicate<f64> {
    let leaf = depth == 0 || rng.random_bool(0.3);
    if leaf {
        if rng.random_bool(0.6) {
            return RegionPredicate::Ball(Ball::new(
                in_square(rng, 2.0),
                rng.random_range(0.1..1.5),
            ));
        }
        let side = if rng.random_bool(0.5) {
            Side::Plus
        } else {
            Side::Minus
        };
        let mut w = in_square(rng, 1.0);
        if w.norm() == 0.0 {
            w = Complex64::new(1.0, 0.0);
        }
        return RegionPredicate::HalfPlane(HalfPlane::new(w, side).unwrap());
    }
    match rng.random_range(0..3) {
        0 => random_tree(rng, depth - 1).translate(in_square(rng, 1.0)),
        1 => RegionPredicate::and(
            (0..rng.random_range(2..4))
                .map(|_| random_tree(rng, depth - 1))
                .collect(),
        ),
        _ => RegionPredicate::or(
            (0..rng.random_range(2..4))
                .map(|_| random_tree(rng, depth - 1))
                .collect(),
        ),
    }
}

/// Membership in the pre-image equals "one greedy step lands in X".
pub fn check_preimage_one_step() -> Result<String, String> {
    let mut rng = rng(7);
    let mut hits = 0;
    for _ in 0..100 {
        let x = Arc::new(random_tree(&mut rng, 3));
        let alpha = uniform_alpha(&mut rng);
        let n = rng.random_range(0..1_000_000u64);
        let pre = preimage_predicate(x.clone(), n, alpha);
        for _ in 0..100 {
            let z = in_square(&mut rng, 3.0);
            let r = step(z, alpha, n);
            let oracle = !r.is_tie && x.eval(r.z_next);
            if pre.eval(z) != oracle {
                return Err(format!(
                    "alpha {alpha:e}, n {n}, z {z}: pre-image {} vs step {oracle}",
                    pre.eval(z)
                ));
            }
            hits += oracle as usize;
        }
    }
    Ok(format!(
        "10000 points over 100 random trees agree ({hits} inside)"
    ))
}

pub type Check = fn() -> Result<String, String>;

pub const PROPERTY_CHECKS: [(&str, Check); 7] = [
    ("shift stability", check_shift_stability),
    ("three symmetries", check_symmetries),
    ("period doubling", check_period_doubling),
    ("common center", check_common_center),
    ("subsequence circle law", check_circle_law),
    ("unit-circle ball vs grid oracle", check_unit_circle_ball),
    ("pre-image vs one step", check_preimage_one_step),
];
