//! Pixel grids over axis-aligned rectangles of the complex plane.

use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("rectangle must have re_min < re_max and im_min < im_max with finite bounds")]
    EmptyRect,
    #[error("resolution must be at least 1x1")]
    EmptyResolution,
    #[error("cannot parse {what} from {input:?}")]
    Parse { what: &'static str, input: String },
}

/// `[re_min, re_max] × [im_min, im_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self, GridError> {
        let r = Rect {
            re_min,
            re_max,
            im_min,
            im_max,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<(), GridError> {
        let finite = [self.re_min, self.re_max, self.im_min, self.im_max]
            .iter()
            .all(|v| v.is_finite());
        if finite && self.re_min < self.re_max && self.im_min < self.im_max {
            Ok(())
        } else {
            Err(GridError::EmptyRect)
        }
    }

    /// Square `[-h, h]²`.
    pub fn centered(half: f64) -> Result<Self, GridError> {
        Rect::new(-half, half, -half, half)
    }
}

/// `re_min,re_max,im_min,im_max`.
impl FromStr for Rect {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, GridError> {
        let err = || GridError::Parse {
            what: "rectangle",
            input: s.to_string(),
        };
        let v: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| err())?;
        match v[..] {
            [a, b, c, d] => Rect::new(a, b, c, d),
            _ => Err(err()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Resolution {
    pub width: usize,
    pub height: usize,
}

impl Resolution {
    pub fn new(width: usize, height: usize) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::EmptyResolution);
        }
        Ok(Resolution { width, height })
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }
}

/// `WxH`, or a single `N` for a square.
impl FromStr for Resolution {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, GridError> {
        let err = || GridError::Parse {
            what: "resolution",
            input: s.to_string(),
        };
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| err());
        match s.split_once(['x', 'X']) {
            Some((w, h)) => Resolution::new(parse(w)?, parse(h)?),
            None => {
                let n = parse(s)?;
                Resolution::new(n, n)
            }
        }
    }
}

/// Maps pixel indices to pixel centers. Row 0 is the top (`im_max`).
///
/// Coordinates are formed as `mid + offset·step` with `offset` a half
/// integer, so a rectangle symmetric about an axis yields pixel centers
/// that are exact mirror images.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelMap {
    mid_re: f64,
    mid_im: f64,
    dx: f64,
    dy: f64,
    res: Resolution,
}

impl PixelMap {
    pub fn new(rect: &Rect, res: Resolution) -> Result<Self, GridError> {
        rect.validate()?;
        Ok(PixelMap {
            mid_re: 0.5 * rect.re_min + 0.5 * rect.re_max,
            mid_im: 0.5 * rect.im_min + 0.5 * rect.im_max,
            dx: (rect.re_max - rect.re_min) / res.width as f64,
            dy: (rect.im_max - rect.im_min) / res.height as f64,
            res,
        })
    }

    pub fn re(&self, col: usize) -> f64 {
        self.mid_re + (col as f64 + 0.5 - 0.5 * self.res.width as f64) * self.dx
    }

    pub fn im(&self, row: usize) -> f64 {
        self.mid_im - (row as f64 + 0.5 - 0.5 * self.res.height as f64) * self.dy
    }

    pub fn center<T: Scalar>(&self, col: usize, row: usize) -> Complex<T> {
        Complex::new(
            T::from_f64_lossy(self.re(col)),
            T::from_f64_lossy(self.im(row)),
        )
    }

    pub fn pixel_size(&self) -> (f64, f64) {
        (self.dx, self.dy)
    }

    pub fn resolution(&self) -> Resolution {
        self.res
    }
}
