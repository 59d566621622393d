use serde::{Deserialize, Serialize};

use crate::dynamics::Sign;

/// Default number of full periods that must be observed before a period
/// is reported.
pub const DEFAULT_MIN_REPEATS: usize = 5;

/// Claim that `ε_{n+p} = ε_n` for every recorded `n >= k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PeriodHypothesis {
    pub k: usize,
    pub p: usize,
    pub repeats_observed: usize,
}

/// Start of the longest `p`-periodic suffix of `signs`, scanning down no
/// further than is needed to beat `floor`.
fn periodic_suffix_start(signs: &[Sign], p: usize, floor: Option<usize>) -> Option<usize> {
    let limit = signs.len() - p;
    let mut k = match floor {
        Some(0) => return None,
        Some(best) => {
            let from = best - 1;
            if from < limit && signs[from..limit] != signs[from + p..] {
                return None;
            }
            from.min(limit)
        }
        None => limit,
    };
    while k > 0 && signs[k - 1] == signs[k - 1 + p] {
        k -= 1;
    }
    Some(k)
}

/// Finds the eventual period of a sign sequence.
///
/// For each candidate `p <= p_max` the longest `p`-periodic suffix is
/// located; candidates must contain at least `min_repeats` full periods
/// (values below 2 are treated as 2). Among those, the one whose suffix
/// starts earliest wins, ties going to the smaller `p`. So no smaller
/// period is valid from the same or an earlier start.
pub fn detect_sign_period(
    signs: &[Sign],
    min_repeats: usize,
    p_max: usize,
) -> Option<PeriodHypothesis> {
    let min_repeats = min_repeats.max(2);
    let len = signs.len();
    let mut best: Option<PeriodHypothesis> = None;
    for p in 1..=p_max {
        if p.saturating_mul(min_repeats) > len {
            break;
        }
        let Some(k) = periodic_suffix_start(signs, p, best.map(|h| h.k)) else {
            if best.is_some_and(|h| h.k == 0) {
                break;
            }
            continue;
        };
        let repeats = (len - k) / p;
        if repeats >= min_repeats && best.is_none_or(|h| k < h.k) {
            best = Some(PeriodHypothesis {
                k,
                p,
                repeats_observed: repeats,
            });
        }
    }
    best
}

/// Whether `signs[n + p] == signs[n]` for every `n >= k` in range.
pub fn holds_from(signs: &[Sign], k: usize, p: usize) -> bool {
    p > 0 && (k + p >= signs.len() || signs[k..signs.len() - p] == signs[k + p..])
}
