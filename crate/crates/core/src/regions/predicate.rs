use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{Ball, HalfPlane, RegionError, Side};
use crate::dynamics::unit_rotation;
use crate::scalar::Scalar;

/// Membership tree over balls and half-planes.
///
/// Subtrees are shared through `Arc`, so a depth-`d` pre-image chain has
/// `O(d)` distinct nodes. The JSON form writes shared subtrees out in
/// full and grows as `2^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum RegionPredicate<T> {
    Ball(Ball<T>),
    HalfPlane(HalfPlane<T>),
    /// `{z : z - by ∈ inner}`.
    Translate {
        by: Complex<T>,
        inner: Arc<RegionPredicate<T>>,
    },
    /// Empty list is the whole plane.
    Intersection {
        children: Vec<Arc<RegionPredicate<T>>>,
    },
    /// Empty list is the empty set.
    Union {
        children: Vec<Arc<RegionPredicate<T>>>,
    },
}

impl<T: Scalar> RegionPredicate<T> {
    pub fn everything() -> Self {
        RegionPredicate::Intersection {
            children: Vec::new(),
        }
    }

    pub fn nothing() -> Self {
        RegionPredicate::Union {
            children: Vec::new(),
        }
    }

    pub fn translate(self, by: Complex<T>) -> Self {
        RegionPredicate::Translate {
            by,
            inner: Arc::new(self),
        }
    }

    pub fn and(children: Vec<RegionPredicate<T>>) -> Self {
        RegionPredicate::Intersection {
            children: children.into_iter().map(Arc::new).collect(),
        }
    }

    pub fn or(children: Vec<RegionPredicate<T>>) -> Self {
        RegionPredicate::Union {
            children: children.into_iter().map(Arc::new).collect(),
        }
    }

    /// Left-to-right, short-circuiting.
    pub fn eval(&self, z: Complex<T>) -> bool {
        match self {
            RegionPredicate::Ball(b) => b.contains(z),
            RegionPredicate::HalfPlane(h) => h.contains(z),
            RegionPredicate::Translate { by, inner } => inner.eval(z - *by),
            RegionPredicate::Intersection { children } => children.iter().all(|c| c.eval(z)),
            RegionPredicate::Union { children } => children.iter().any(|c| c.eval(z)),
        }
    }

    /// Equivalent tree with every translation folded into its leaves.
    /// Up to rounding in the composed offsets, membership is unchanged.
    pub fn flatten_translations(&self) -> Self {
        self.flatten_with(Complex::new(T::zero(), T::zero()))
    }

    fn flatten_with(&self, shift: Complex<T>) -> Self {
        match self {
            RegionPredicate::Ball(b) => {
                RegionPredicate::Ball(Ball::new(b.center + shift, b.radius))
            }
            RegionPredicate::HalfPlane(h) => RegionPredicate::HalfPlane(HalfPlane {
                origin: h.origin + shift,
                ..*h
            }),
            RegionPredicate::Translate { by, inner } => inner.flatten_with(shift + *by),
            RegionPredicate::Intersection { children } => RegionPredicate::Intersection {
                children: children
                    .iter()
                    .map(|c| Arc::new(c.flatten_with(shift)))
                    .collect(),
            },
            RegionPredicate::Union { children } => RegionPredicate::Union {
                children: children
                    .iter()
                    .map(|c| Arc::new(c.flatten_with(shift)))
                    .collect(),
            },
        }
    }

    /// Number of nodes counting shared subtrees once per reference.
    pub fn expanded_size(&self) -> usize {
        match self {
            RegionPredicate::Ball(_) | RegionPredicate::HalfPlane(_) => 1,
            RegionPredicate::Translate { inner, .. } => 1 + inner.expanded_size(),
            RegionPredicate::Intersection { children } | RegionPredicate::Union { children } => {
                1 + children.iter().map(|c| c.expanded_size()).sum::<usize>()
            }
        }
    }
}

/// Points `z_{n-1}` that the greedy step at index `n` sends into `x`:
/// `(H₊ ∩ (X − w)) ∪ (H₋ ∩ (X + w))` with `w = e^{2πiαn}`. Tie lines
/// belong to neither branch.
pub fn preimage_predicate<T: Scalar>(
    x: Arc<RegionPredicate<T>>,
    n: u64,
    alpha: T,
) -> RegionPredicate<T> {
    let w = unit_rotation(alpha, n);
    let half = |side| {
        RegionPredicate::HalfPlane(HalfPlane {
            w,
            side,
            origin: Complex::new(T::zero(), T::zero()),
        })
    };
    RegionPredicate::Union {
        children: vec![
            Arc::new(RegionPredicate::Intersection {
                children: vec![
                    Arc::new(half(Side::Plus)),
                    Arc::new(RegionPredicate::Translate {
                        by: -w,
                        inner: x.clone(),
                    }),
                ],
            }),
            Arc::new(RegionPredicate::Intersection {
                children: vec![
                    Arc::new(half(Side::Minus)),
                    Arc::new(RegionPredicate::Translate { by: w, inner: x }),
                ],
            }),
        ],
    }
}

/// A region for the point `z_index`; `index = -1` is the initial value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternRegion<T> {
    pub index: i64,
    pub predicate: Arc<RegionPredicate<T>>,
}

impl<T: Scalar> PatternRegion<T> {
    pub fn eval(&self, z: Complex<T>) -> bool {
        self.predicate.eval(z)
    }
}

/// Pulls the forward balls of a periodic pattern back `depth` steps.
///
/// `balls[r]` constrains `z_{k+r}`. Starting from the last ball, each
/// backward step takes a pre-image and, while still inside the pattern
/// window, intersects with that index's ball. The walk stops early at the
/// initial value (`index = -1`). The result contains every point whose
/// orbit can follow the pattern from `k` on.
pub fn pattern_region<T: Scalar>(
    alpha: T,
    k: usize,
    balls: &[Ball<T>],
    depth: usize,
) -> Result<PatternRegion<T>, RegionError> {
    let Some(last) = balls.last() else {
        return Err(RegionError::WindowOutOfRange { needed: 1, len: 0 });
    };
    let mut index = (k + balls.len() - 1) as i64;
    let mut pred = Arc::new(RegionPredicate::Ball(*last));
    for _ in 0..depth {
        if index < 0 {
            break;
        }
        let pre = preimage_predicate(pred, index as u64, alpha);
        index -= 1;
        pred = match usize::try_from(index)
            .ok()
            .and_then(|i| i.checked_sub(k))
            .and_then(|r| balls.get(r))
        {
            Some(ball) => Arc::new(RegionPredicate::Intersection {
                children: vec![Arc::new(RegionPredicate::Ball(*ball)), Arc::new(pre)],
            }),
            None => Arc::new(pre),
        };
    }
    Ok(PatternRegion {
        index,
        predicate: pred,
    })
}
