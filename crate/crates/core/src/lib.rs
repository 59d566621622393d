//! Greedy sign dynamics `z_n = z_{n-1} ± e^{2πiαn}`, where each sign is
//! chosen to minimize `|z_n|`.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common double-precision instantiations.

pub mod diophantine;
pub mod dynamics;
pub mod exprparse;
pub mod grid;
pub mod mapper;
pub mod periodicity;
pub mod regions;
pub mod scalar;
pub mod search;

pub use scalar::Scalar;

pub type Params64 = dynamics::Params<f64>;
pub type Params32 = dynamics::Params<f32>;
pub type Orbit64 = dynamics::Orbit<f64>;
pub type Orbit32 = dynamics::Orbit<f32>;
pub type Certificate64 = periodicity::Certificate<f64>;
pub type Field64 = mapper::Field<f64>;
pub type Field32 = mapper::Field<f32>;
pub type FieldSpec64 = mapper::FieldSpec<f64>;
pub type Ball64 = regions::Ball<f64>;
pub type Region64 = regions::RegionPredicate<f64>;
