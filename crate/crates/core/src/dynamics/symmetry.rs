use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{Params, Sign};
use crate::scalar::Scalar;

/// The three parameter symmetries of the greedy system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symmetry {
    /// `(1 - α, conj z_{-1})`: orbit conjugated, signs unchanged.
    ConjugateAlpha,
    /// `α ± 1/2 (mod 1)`: same points, signs multiplied by `(-1)^n`.
    HalfShift,
    /// `-z_{-1}`: orbit negated, signs flipped.
    Negate,
}

impl Symmetry {
    pub fn apply<T: Scalar>(self, params: &Params<T>) -> Params<T> {
        let mut out = *params;
        match self {
            Symmetry::ConjugateAlpha => {
                out.alpha = T::one() - params.alpha;
                out.z_init = params.z_init.conj();
            }
            Symmetry::HalfShift => {
                let half = T::cst(0.5);
                // subtracting keeps the result exact when alpha >= 1/2
                out.alpha = if params.alpha >= half {
                    params.alpha - half
                } else {
                    params.alpha + half
                };
            }
            Symmetry::Negate => {
                out.z_init = -params.z_init;
            }
        }
        out
    }

    /// Predicted image of the original `z_n` under the transformed parameters.
    pub fn predict_point<T: Scalar>(self, z: Complex<T>) -> Complex<T> {
        match self {
            Symmetry::ConjugateAlpha => z.conj(),
            Symmetry::HalfShift => z,
            Symmetry::Negate => -z,
        }
    }

    /// Predicted sign at step `n` given the original sign.
    pub fn predict_sign(self, sign: Sign, n: usize) -> Sign {
        match self {
            Symmetry::ConjugateAlpha => sign,
            Symmetry::HalfShift => sign.alternate(n),
            Symmetry::Negate => sign.flip(),
        }
    }
}

pub fn apply_symmetry<T: Scalar>(params: &Params<T>, which: Symmetry) -> Params<T> {
    which.apply(params)
}
