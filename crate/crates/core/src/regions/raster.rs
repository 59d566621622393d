use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{RegionError, RegionPredicate};
use crate::grid::{PixelMap, Rect, Resolution};
use crate::scalar::Scalar;

/// Row-major membership bitmap, row 0 at the top.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mask {
    pub resolution: Resolution,
    pub bits: Vec<bool>,
}

impl Mask {
    pub fn get(&self, col: usize, row: usize) -> bool {
        self.bits[row * self.resolution.width + col]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Mean `(col, row)` of the set pixels, in pixel units.
    pub fn centroid(&self) -> Option<(f64, f64)> {
        let w = self.resolution.width;
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        for (i, _) in self.bits.iter().enumerate().filter(|(_, &b)| b) {
            sx += (i % w) as f64;
            sy += (i / w) as f64;
            n += 1;
        }
        (n > 0).then(|| (sx / n as f64, sy / n as f64))
    }

    /// Binary PGM (P5): 255 inside, 0 outside.
    pub fn to_pgm(&self) -> Vec<u8> {
        let Resolution { width, height } = self.resolution;
        let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
        out.extend(self.bits.iter().map(|&b| if b { 255u8 } else { 0 }));
        out
    }
}

/// Evaluates `region` at every pixel center, rows in parallel.
pub fn rasterize_region<T: Scalar>(
    region: &RegionPredicate<T>,
    rect: &Rect,
    resolution: Resolution,
) -> Result<Mask, RegionError> {
    let map = PixelMap::new(rect, resolution)?;
    let width = resolution.width;
    let mut bits = vec![false; resolution.pixels()];
    bits.par_chunks_mut(width)
        .enumerate()
        .for_each(|(row, line)| {
            for (col, b) in line.iter_mut().enumerate() {
                *b = region.eval(map.center(col, row));
            }
        });
    Ok(Mask { resolution, bits })
}
