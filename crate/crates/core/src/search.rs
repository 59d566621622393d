//! Seeded random search over `(α, z_{-1})`, period statistics and the
//! period-doubling check under `α ↦ α + 1/2`.

use std::collections::BTreeMap;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{run_orbit, Orbit, Params, ParamsError, Symmetry};
use crate::periodicity::{certify_auto, detect_sign_period, PeriodHypothesis, DEFAULT_MIN_REPEATS};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("sampler width must be positive, got {0}")]
    BadDelta(f64),
    #[error("disk radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("horizon must be at least 1")]
    EmptyHorizon,
    #[error("unknown sampler {0:?}")]
    UnknownSampler(String),
    #[error(transparent)]
    Params(#[from] ParamsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlphaSampler {
    Uniform,
    /// Uniform on `(1/2 - δ, 1/2 + δ)`.
    NearHalf {
        delta: f64,
    },
    /// Uniform on `(x - δ, x + δ)`, reduced modulo one.
    Near {
        x: f64,
        delta: f64,
    },
}

impl AlphaSampler {
    /// `uniform`, `near_half:δ` or `near:x:δ`.
    pub fn parse(s: &str) -> Result<Self, SearchError> {
        let bad = || SearchError::UnknownSampler(s.to_string());
        let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
        let parts: Vec<&str> = s.split(':').collect();
        match parts[..] {
            ["uniform"] => Ok(AlphaSampler::Uniform),
            ["near_half", d] => Ok(AlphaSampler::NearHalf { delta: num(d)? }),
            ["near", x, d] => Ok(AlphaSampler::Near {
                x: num(x)?,
                delta: num(d)?,
            }),
            _ => Err(bad()),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        loop {
            let u: f64 = rng.random();
            let a = match *self {
                AlphaSampler::Uniform => u,
                AlphaSampler::NearHalf { delta } => 0.5 + delta * (2.0 * u - 1.0),
                AlphaSampler::Near { x, delta } => x + delta * (2.0 * u - 1.0),
            };
            let a = a - a.floor();
            if a != 0.0 && a != 0.5 {
                return a;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub alpha_sampler: AlphaSampler,
    /// `z_{-1}` is uniform in the disk of this radius around 0.
    pub z_radius: f64,
    pub horizon: usize,
    pub min_repeats: usize,
    /// Largest period tried; `None` allows any that fits `min_repeats` times.
    pub p_max: Option<usize>,
    pub count: usize,
    pub seed: u64,
    /// Attempt a certificate for every detected period.
    pub certify: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            alpha_sampler: AlphaSampler::Uniform,
            z_radius: 5.0,
            horizon: 10_000,
            min_repeats: DEFAULT_MIN_REPEATS,
            p_max: None,
            count: 100,
            seed: 0,
            certify: false,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        match self.alpha_sampler {
            AlphaSampler::NearHalf { delta } | AlphaSampler::Near { delta, .. }
                if !(delta > 0.0) =>
            {
                return Err(SearchError::BadDelta(delta));
            }
            _ => {}
        }
        if !(self.z_radius > 0.0) {
            return Err(SearchError::BadRadius(self.z_radius));
        }
        if self.horizon == 0 {
            return Err(SearchError::EmptyHorizon);
        }
        Ok(())
    }

    fn p_max(&self) -> usize {
        self.p_max.unwrap_or(self.horizon / self.min_repeats.max(2))
    }

    /// Parameters of run `index`: ChaCha8 keyed by the seed on stream `index`.
    pub fn sample(&self, index: u64) -> (f64, Complex<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        let alpha = self.alpha_sampler.sample(&mut rng);
        let r = self.z_radius * rng.random::<f64>().sqrt();
        let theta = std::f64::consts::TAU * rng.random::<f64>();
        (alpha, Complex::from_polar(r, theta))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodField {
    pub k: usize,
    pub p: usize,
}

/// One search run; `(alpha_hex, z_init, horizon)` reproduces it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub index: u64,
    pub alpha: f64,
    pub alpha_hex: String,
    pub z_init: [f64; 2],
    pub horizon: usize,
    pub status: String,
    pub period: Option<PeriodField>,
    pub min_ambiguity: f64,
    /// `p·‖2α‖`, the quantity conjectured to stay bounded.
    pub p_norm_2alpha: Option<f64>,
    pub certificate_verdict: Option<String>,
}

fn norm_to_int(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Runs one orbit and summarizes it as a record.
pub fn run_record(
    index: u64,
    alpha: f64,
    z_init: Complex<f64>,
    horizon: usize,
    min_repeats: usize,
    p_max: usize,
    certify: bool,
) -> Result<RunRecord, SearchError> {
    let params = Params::new(alpha, z_init, horizon)?;
    let orbit = run_orbit(&params);
    let hyp = if orbit.tie().is_some() {
        None
    } else {
        detect_sign_period(orbit.signs(), min_repeats, p_max)
    };
    let verdict = match (&hyp, certify) {
        (Some(h), true) => Some(match certify_auto(&orbit, h) {
            Ok(c) => format!("{:?}", c.verdict),
            Err(e) => format!("error: {e}"),
        }),
        _ => None,
    };
    let alpha = orbit.alpha();
    Ok(RunRecord {
        index,
        alpha,
        alpha_hex: alpha.to_hex_bits(),
        z_init: [z_init.re, z_init.im],
        horizon,
        status: orbit.status().to_string(),
        period: hyp.map(|h| PeriodField { k: h.k, p: h.p }),
        min_ambiguity: orbit.min_ambiguity(0).unwrap_or(0.0),
        p_norm_2alpha: hyp.map(|h| h.p as f64 * norm_to_int(2.0 * alpha)),
        certificate_verdict: verdict,
    })
}

/// All records in index order, computed in parallel.
pub fn random_search(config: &SearchConfig) -> Result<Vec<RunRecord>, SearchError> {
    config.validate()?;
    let p_max = config.p_max();
    (0..config.count as u64)
        .into_par_iter()
        .map(|i| {
            let (alpha, z) = config.sample(i);
            let rec = run_record(
                i,
                alpha,
                z,
                config.horizon,
                config.min_repeats,
                p_max,
                config.certify,
            )?;
            if let Some(v) = rec.p_norm_2alpha {
                log::info!(
                    "run {i}: p = {}, p*||2a|| = {v:.4}",
                    rec.period.map_or(0, |p| p.p)
                );
            }
            Ok(rec)
        })
        .collect()
}

/// Records as JSON lines.
pub fn to_jsonl(records: &[RunRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxPeriod {
    pub p: usize,
    pub index: u64,
    pub alpha_hex: String,
    pub z_init: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodStats {
    pub total: usize,
    pub periodic: usize,
    pub fraction_periodic: f64,
    pub histogram: BTreeMap<usize, usize>,
    pub div4_count: usize,
    pub max_period: Option<MaxPeriod>,
}

pub fn period_stats(records: &[RunRecord]) -> PeriodStats {
    let mut histogram = BTreeMap::new();
    let mut max_period: Option<MaxPeriod> = None;
    for r in records {
        let Some(period) = r.period else { continue };
        *histogram.entry(period.p).or_insert(0) += 1;
        if max_period.as_ref().is_none_or(|m| period.p > m.p) {
            max_period = Some(MaxPeriod {
                p: period.p,
                index: r.index,
                alpha_hex: r.alpha_hex.clone(),
                z_init: r.z_init,
            });
        }
    }
    let periodic: usize = histogram.values().sum();
    let total = records.len();
    PeriodStats {
        total,
        periodic,
        fraction_periodic: if total == 0 {
            0.0
        } else {
            periodic as f64 / total as f64
        },
        div4_count: histogram
            .iter()
            .filter(|(p, _)| *p % 4 == 0)
            .map(|(_, n)| n)
            .sum(),
        histogram,
        max_period,
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DoublingError {
    #[error("period doubling needs an odd base period: {0}")]
    NotApplicable(String),
    #[error(transparent)]
    Params(#[from] ParamsError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingReport {
    pub base: PeriodHypothesis,
    pub shifted_alpha: f64,
    pub shifted: Option<PeriodHypothesis>,
    /// Shifted signs equal `ε_n (-1)^n` at every recorded index.
    pub signs_alternate: bool,
    pub verified: bool,
}

fn detect<T: Scalar>(
    orbit: &Orbit<T>,
    min_repeats: usize,
    p_max: usize,
) -> Option<PeriodHypothesis> {
    if orbit.tie().is_some() {
        return None;
    }
    detect_sign_period(orbit.signs(), min_repeats, p_max)
}

/// Checks that `α + 1/2` turns an odd period `p` into `2p`.
///
/// The base period is searched only up to `horizon / (2·min_repeats)` so
/// that the doubled period can still be observed `min_repeats` times.
pub fn verify_period_doubling<T: Scalar>(
    alpha: T,
    z_init: Complex<T>,
    horizon: usize,
    min_repeats: usize,
) -> Result<DoublingReport, DoublingError> {
    let params = Params::new(alpha, z_init, horizon)?;
    let p_max = horizon / (2 * min_repeats.max(2));
    let base_orbit = run_orbit(&params);
    let base = detect(&base_orbit, min_repeats, p_max)
        .ok_or_else(|| DoublingError::NotApplicable("no period detected".into()))?;
    if base.p % 2 == 0 {
        return Err(DoublingError::NotApplicable(format!(
            "base period {} is even",
            base.p
        )));
    }
    let shifted_params = Symmetry::HalfShift.apply(&params);
    let shifted_orbit = run_orbit(&shifted_params);
    let shifted = detect(&shifted_orbit, min_repeats, 2 * p_max);
    let overlap = base_orbit.len().min(shifted_orbit.len());
    let signs_alternate = base_orbit.len() == shifted_orbit.len()
        && (0..overlap).all(|n| shifted_orbit.signs()[n] == base_orbit.signs()[n].alternate(n));
    Ok(DoublingReport {
        base,
        shifted_alpha: shifted_params.alpha().to_f64_lossy(),
        shifted,
        signs_alternate,
        verified: signs_alternate && shifted.is_some_and(|h| h.p == 2 * base.p),
    })
}
