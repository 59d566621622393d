//! The min-ambiguity field: `z_{-1} ↦ min_n a_n` over a pixel grid.

mod encode;

pub use encode::{decode_raw_f32, encode_field, FieldFormat, Sidecar};

use std::str::FromStr;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{reduce_alpha, step_with, unit_rotation};
use crate::grid::{GridError, PixelMap, Rect, Resolution};
use crate::scalar::Scalar;

/// Orbit length per pixel used for coarse overviews.
pub const DEFAULT_STEPS: usize = 1000;
/// Orbit length per pixel for detailed renders.
pub const DETAILED_STEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapperError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("steps must be at least 1")]
    NoSteps,
    #[error("alpha must be finite and not an integer")]
    BadAlpha,
    #[error("could not build worker pool: {0}")]
    Pool(String),
    #[error("raw buffer has {got} bytes, expected {expected}")]
    RawLength { expected: usize, got: usize },
    #[error("unknown {what} {input:?}")]
    Unknown { what: &'static str, input: String },
    #[error("image encoding failed: {0}")]
    Encode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    Sqrt,
    Linear,
}

impl Transform {
    pub fn apply<T: Scalar>(self, v: T) -> T {
        match self {
            Transform::Sqrt => v.sqrt(),
            Transform::Linear => v,
        }
    }
}

impl FromStr for Transform {
    type Err = MapperError;

    fn from_str(s: &str) -> Result<Self, MapperError> {
        match s {
            "sqrt" => Ok(Transform::Sqrt),
            "linear" => Ok(Transform::Linear),
            _ => Err(MapperError::Unknown {
                what: "transform",
                input: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec<T> {
    pub rect: Rect,
    pub resolution: Resolution,
    pub alpha: T,
    pub steps: usize,
    pub transform: Transform,
}

impl<T: Scalar> FieldSpec<T> {
    pub fn new(
        rect: Rect,
        resolution: Resolution,
        alpha: T,
        steps: usize,
    ) -> Result<Self, MapperError> {
        let spec = FieldSpec {
            rect,
            resolution,
            alpha,
            steps,
            transform: Transform::Sqrt,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_transform(mut self, transform: Transform) -> Self {
        self.transform = transform;
        self
    }

    pub fn validate(&self) -> Result<(), MapperError> {
        self.rect.validate()?;
        Resolution::new(self.resolution.width, self.resolution.height)?;
        if self.steps == 0 {
            return Err(MapperError::NoSteps);
        }
        if !self.alpha.is_finite() || reduce_alpha(self.alpha) == T::zero() {
            return Err(MapperError::BadAlpha);
        }
        Ok(())
    }

    pub fn pixel_map(&self) -> Result<PixelMap, MapperError> {
        Ok(PixelMap::new(&self.rect, self.resolution)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldStats<T> {
    pub min: T,
    pub max: T,
    pub tie_count: usize,
}

/// Row-major grid of minimum ambiguities, 0 where the orbit tied.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    spec: FieldSpec<T>,
    values: Vec<T>,
    ties: Vec<bool>,
    stats: FieldStats<T>,
}

impl<T: Scalar> Field<T> {
    pub fn spec(&self) -> &FieldSpec<T> {
        &self.spec
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn stats(&self) -> FieldStats<T> {
        self.stats
    }

    pub fn get(&self, col: usize, row: usize) -> T {
        self.values[row * self.spec.resolution.width + col]
    }

    pub fn is_tie(&self, col: usize, row: usize) -> bool {
        self.ties[row * self.spec.resolution.width + col]
    }
}

/// Precomputed `e^{2πiαn}` for `n < steps`.
fn rotation_table<T: Scalar>(alpha: T, steps: usize) -> Vec<Complex<T>> {
    (0..steps as u64).map(|n| unit_rotation(alpha, n)).collect()
}

/// `(min ambiguity, tied)` of the orbit from `z` over the table.
#[inline]
fn pixel_orbit<T: Scalar>(mut z: Complex<T>, table: &[Complex<T>]) -> (T, bool) {
    let mut min = T::infinity();
    for &w in table {
        let r = step_with(z, w);
        if r.is_tie {
            return (T::zero(), true);
        }
        if r.ambiguity < min {
            min = r.ambiguity;
        }
        z = r.z_next;
    }
    (min, false)
}

/// Value of one pixel, computed on its own.
pub fn pixel_value<T: Scalar>(
    spec: &FieldSpec<T>,
    col: usize,
    row: usize,
) -> Result<T, MapperError> {
    spec.validate()?;
    let map = spec.pixel_map()?;
    let table = rotation_table(reduce_alpha(spec.alpha), spec.steps);
    Ok(pixel_orbit(map.center(col, row), &table).0)
}

/// Renders the field with `workers` threads (`None` for rayon's default).
///
/// Each row is an independent task and rows are stored by index, so the
/// result does not depend on the worker count.
pub fn render_field<T: Scalar>(
    spec: &FieldSpec<T>,
    workers: Option<usize>,
) -> Result<Field<T>, MapperError> {
    spec.validate()?;
    let map = spec.pixel_map()?;
    let table = rotation_table(reduce_alpha(spec.alpha), spec.steps);
    let width = spec.resolution.width;
    let mut cells = vec![(T::zero(), false); spec.resolution.pixels()];
    let fill = |cells: &mut [(T, bool)]| {
        cells
            .par_chunks_mut(width)
            .enumerate()
            .for_each(|(row, line)| {
                for (col, cell) in line.iter_mut().enumerate() {
                    *cell = pixel_orbit(map.center(col, row), &table);
                }
            });
    };
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| MapperError::Pool(e.to_string()))?
            .install(|| fill(&mut cells)),
        None => fill(&mut cells),
    }
    let (values, ties): (Vec<T>, Vec<bool>) = cells.into_iter().unzip();
    let stats = FieldStats {
        min: values.iter().copied().fold(T::infinity(), T::min),
        max: values.iter().copied().fold(T::zero(), T::max),
        tie_count: ties.iter().filter(|&&t| t).count(),
    };
    Ok(Field {
        spec: *spec,
        values,
        ties,
        stats,
    })
}
