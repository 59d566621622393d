use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Field, MapperError, Transform};
use crate::grid::{Rect, Resolution};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldFormat {
    Pgm8,
    RawF32,
    Png,
}

impl FieldFormat {
    pub fn extension(self) -> &'static str {
        match self {
            FieldFormat::Pgm8 => "pgm",
            FieldFormat::RawF32 => "f32",
            FieldFormat::Png => "png",
        }
    }
}

impl FromStr for FieldFormat {
    type Err = MapperError;

    fn from_str(s: &str) -> Result<Self, MapperError> {
        match s {
            "pgm8" | "pgm" => Ok(FieldFormat::Pgm8),
            "raw_f32" | "raw" | "f32" => Ok(FieldFormat::RawF32),
            "png" => Ok(FieldFormat::Png),
            _ => Err(MapperError::Unknown {
                what: "format",
                input: s.to_string(),
            }),
        }
    }
}

/// JSON metadata written next to an encoded field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format: FieldFormat,
    pub rect: Rect,
    pub resolution: Resolution,
    pub alpha: f64,
    pub alpha_hex: String,
    pub scalar: String,
    pub steps: usize,
    pub transform: Transform,
    /// Largest untransformed value.
    pub max: f64,
    /// Transformed value mapped to 255 in 8-bit formats; `null` for raw.
    pub scale: Option<f64>,
    pub tie_count: usize,
    pub row_order: String,
}

fn gray_bytes<T: Scalar>(field: &Field<T>) -> (Vec<u8>, f64) {
    let t = field.spec.transform;
    let scale = t.apply(field.stats.max);
    if !(scale > T::zero()) {
        log::warn!("field maximum is zero; writing an all-black image");
        return (vec![0; field.values.len()], 0.0);
    }
    let full = T::cst(255.0);
    let bytes = field
        .values
        .iter()
        .map(|&v| {
            (t.apply(v) / scale * full)
                .round()
                .to_f64_lossy()
                .clamp(0.0, 255.0) as u8
        })
        .collect();
    (bytes, scale.to_f64_lossy())
}

/// Encodes a field and describes the encoding.
///
/// `pgm8` and `png` apply the requested transform and normalize by the
/// transformed maximum. `raw_f32` stores the untransformed values as
/// little-endian `f32`.
pub fn encode_field<T: Scalar>(
    field: &Field<T>,
    format: FieldFormat,
) -> Result<(Vec<u8>, Sidecar), MapperError> {
    let spec = &field.spec;
    let Resolution { width, height } = spec.resolution;
    let (bytes, scale) = match format {
        FieldFormat::RawF32 => {
            let mut out = Vec::with_capacity(4 * field.values.len());
            for v in &field.values {
                out.extend_from_slice(&(v.to_f64_lossy() as f32).to_le_bytes());
            }
            (out, None)
        }
        FieldFormat::Pgm8 => {
            let (gray, scale) = gray_bytes(field);
            let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
            out.extend_from_slice(&gray);
            (out, Some(scale))
        }
        FieldFormat::Png => {
            let (gray, scale) = gray_bytes(field);
            let mut out = Vec::new();
            let mut enc = png::Encoder::new(&mut out, width as u32, height as u32);
            enc.set_color(png::ColorType::Grayscale);
            enc.set_depth(png::BitDepth::Eight);
            let mut writer = enc
                .write_header()
                .map_err(|e| MapperError::Encode(e.to_string()))?;
            writer
                .write_image_data(&gray)
                .map_err(|e| MapperError::Encode(e.to_string()))?;
            writer
                .finish()
                .map_err(|e| MapperError::Encode(e.to_string()))?;
            (out, Some(scale))
        }
    };
    let sidecar = Sidecar {
        format,
        rect: spec.rect,
        resolution: spec.resolution,
        alpha: spec.alpha.to_f64_lossy(),
        alpha_hex: spec.alpha.to_hex_bits(),
        scalar: T::NAME.to_string(),
        steps: spec.steps,
        transform: spec.transform,
        max: field.stats.max.to_f64_lossy(),
        scale,
        tie_count: field.stats.tie_count,
        row_order: "row-major, first row at im_max".to_string(),
    };
    Ok((bytes, sidecar))
}

/// Inverse of the `raw_f32` encoding.
pub fn decode_raw_f32(bytes: &[u8], resolution: Resolution) -> Result<Vec<f32>, MapperError> {
    let expected = 4 * resolution.pixels();
    if bytes.len() != expected {
        return Err(MapperError::RawLength {
            expected,
            got: bytes.len(),
        });
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}
