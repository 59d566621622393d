//! Floating-point scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// A binary floating-point type the engine can run on (`f32` or `f64`).
///
/// Beyond the usual `num_traits` float surface this carries the two
/// operations whose exactness the dynamics depend on: reducing `alpha * n`
/// modulo one without losing the low-order bits of the product, and
/// exposing the exact bit pattern for reproducible serialization.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Short type name used in sidecar metadata.
    const NAME: &'static str;

    /// `frac(alpha * n)` in `[0, 1)`, computed from an error-free
    /// product of `alpha` and `n`.
    fn fract_of_multiple(alpha: Self, n: u64) -> Self;

    /// IEEE-754 bit pattern as `0x`-prefixed lowercase hex.
    fn to_hex_bits(self) -> String;

    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("f64 converts to any Scalar")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }

    fn cst(x: f64) -> Self {
        Self::from_f64_lossy(x)
    }
}

impl Scalar for f64 {
    const NAME: &'static str = "f64";

    fn fract_of_multiple(alpha: f64, n: u64) -> f64 {
        debug_assert!(n < (1u64 << 53));
        let n = n as f64;
        let hi = alpha * n;
        let lo = alpha.mul_add(n, -hi);
        // hi - floor(hi) is exact; only the final addition rounds
        let head = hi - hi.floor();
        let sum = head + lo;
        wrap_unit(sum - sum.floor())
    }

    fn to_hex_bits(self) -> String {
        format!("0x{:016x}", self.to_bits())
    }
}

impl Scalar for f32 {
    const NAME: &'static str = "f32";

    fn fract_of_multiple(alpha: f32, n: u64) -> f32 {
        // every f32 widens exactly; reduce in f64 and round once
        let r = f64::fract_of_multiple(f64::from(alpha), n) as f32;
        wrap_unit(r)
    }

    fn to_hex_bits(self) -> String {
        format!("0x{:08x}", self.to_bits())
    }
}

fn wrap_unit<T: Float>(x: T) -> T {
    if x >= T::one() {
        T::zero()
    } else {
        x
    }
}

/// `(cos 2πt, sin 2πt)` for `t` measured in turns.
///
/// Reduces to a quadrant first so quarter turns are exact and the residual
/// angle stays within `[-π/4, π/4]`.
pub fn cis_turns<T: Scalar>(t: T) -> Complex<T> {
    let four = T::cst(4.0);
    let scaled = t * four;
    let quadrant = scaled.round();
    let residual = scaled - quadrant;
    let (s, c) = (residual * T::FRAC_PI_2()).sin_cos();
    let q = quadrant.to_i64().unwrap_or(0).rem_euclid(4);
    match q {
        0 => Complex::new(c, s),
        1 => Complex::new(-s, c),
        2 => Complex::new(-c, -s),
        _ => Complex::new(s, -c),
    }
}

/// Euclidean modulus as `sqrt(re² + im²)`.
///
/// Used for every sign decision so that all code paths compare bitwise
/// identical moduli.
#[inline]
pub fn modulus<T: Scalar>(z: Complex<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}

/// Parses the output of [`Scalar::to_hex_bits`] for `f64`.
pub fn f64_from_hex_bits(text: &str) -> Option<f64> {
    let digits = text
        .strip_prefix("0x")
        .or_else(|| text.strip_prefix("0X"))?;
    if digits.len() != 16 {
        return None;
    }
    u64::from_str_radix(digits, 16).ok().map(f64::from_bits)
}
