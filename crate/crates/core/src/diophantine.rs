//! Continued-fraction convergents of a floating-point number.
//!
//! The expansion is taken of the exact dyadic rational equal to the input,
//! so it always terminates. Every convergent returned is a true convergent
//! of the value actually simulated.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiophantineError {
    #[error("expansion needs x in (0, 1), got {0}")]
    OutOfRange(f64),
    #[error("denominator cap must be at least 1")]
    ZeroCap,
}

/// One convergent `p/q` with the partial quotient `a` that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convergent {
    /// 1-based position in the list.
    pub index: usize,
    pub a: u128,
    pub p: u128,
    pub q: u128,
}

/// Why the expansion stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    /// The rational's expansion ended.
    Exhausted,
    /// The next denominator would exceed the cap.
    DenominatorCap,
    /// The next convergent does not fit in 128 bits.
    Overflow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergentList<T> {
    entries: Vec<Convergent>,
    source: T,
    stop: StopReason,
}

impl<T: Scalar> ConvergentList<T> {
    pub fn entries(&self) -> &[Convergent] {
        &self.entries
    }

    pub fn source(&self) -> T {
        self.source
    }

    pub fn stop_reason(&self) -> StopReason {
        self.stop
    }

    pub fn denominators(&self) -> Vec<u128> {
        self.entries.iter().map(|c| c.q).collect()
    }

    /// Convergent by 1-based index.
    pub fn get(&self, index: usize) -> Option<&Convergent> {
        index.checked_sub(1).and_then(|i| self.entries.get(i))
    }

    pub fn find_denominator(&self, q: u128) -> Option<&Convergent> {
        self.entries.iter().find(|c| c.q == q)
    }

    /// First convergent satisfying `pred`.
    pub fn first_where(&self, pred: impl Fn(&Convergent) -> bool) -> Option<&Convergent> {
        self.entries.iter().find(|c| pred(c))
    }

    /// `l\ta\tp\tq` table with a header row.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("l\ta\tp\tq\n");
        for c in &self.entries {
            let _ = writeln!(out, "{}\t{}\t{}\t{}", c.index, c.a, c.p, c.q);
        }
        out
    }
}

/// Exact `x = numerator / 2^shift` of a positive finite float below one.
fn dyadic<T: Scalar>(x: T) -> (BigUint, BigUint) {
    let (mantissa, exponent, _) = x.integer_decode();
    debug_assert!(exponent < 0);
    let shift = (-i32::from(exponent)) as usize;
    let num = BigUint::from(mantissa);
    let den = BigUint::from(1u8) << shift;
    let g = num.gcd(&den);
    (num / &g, den / g)
}

/// All convergents of `x` with denominator at most `q_cap`.
pub fn convergents<T: Scalar>(x: T, q_cap: u128) -> Result<ConvergentList<T>, DiophantineError> {
    if !(x > T::zero() && x < T::one()) {
        return Err(DiophantineError::OutOfRange(x.to_f64_lossy()));
    }
    if q_cap == 0 {
        return Err(DiophantineError::ZeroCap);
    }
    let (mut num, mut den) = dyadic(x);
    let (mut p_prev, mut p) = (0u128, 1u128);
    let (mut q_prev, mut q) = (1u128, 0u128);
    let mut entries: Vec<Convergent> = Vec::new();
    let stop = loop {
        if den.is_zero() {
            break StopReason::Exhausted;
        }
        let (a_big, rem) = num.div_rem(&den);
        let Some(a) = a_big.to_u128() else {
            break StopReason::Overflow;
        };
        let next_p = a.checked_mul(p).and_then(|v| v.checked_add(p_prev));
        let next_q = a.checked_mul(q).and_then(|v| v.checked_add(q_prev));
        let (Some(np), Some(nq)) = (next_p, next_q) else {
            break StopReason::Overflow;
        };
        if nq > q_cap {
            break StopReason::DenominatorCap;
        }
        (p_prev, p, q_prev, q) = (p, np, q, nq);
        // [0; 1, ...] yields 0/1 then 1/1; keep the better of equal denominators
        if entries.last().is_some_and(|c| c.q == nq) {
            entries.pop();
        }
        entries.push(Convergent {
            index: entries.len() + 1,
            a,
            p: np,
            q: nq,
        });
        num = std::mem::replace(&mut den, rem);
    };
    Ok(ConvergentList {
        entries,
        source: x,
        stop,
    })
}

/// Distance from `x` to the nearest integer, in `[0, 1/2]`.
pub fn nearest_int_distance<T: Scalar>(x: T) -> T {
    (x - x.round()).abs()
}
