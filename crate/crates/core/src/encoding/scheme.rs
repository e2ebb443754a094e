use alloc::vec::Vec;

use super::btensor::{btensor, BTensor};
use super::directions::shell_directions;
use crate::error::{Error, Result};

/// Largest b-value (ms/µm²) accepted as a normalization anchor.
pub const ANCHOR_B: f64 = 0.15;

/// Ordered acquisition points; the position in the list is `n_acq`.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AcqScheme {
    points: Vec<BTensor>,
}

impl AcqScheme {
    pub fn new(points: Vec<BTensor>) -> Self {
        Self { points }
    }

    pub fn points(&self) -> &[BTensor] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, BTensor> {
        self.points.iter()
    }

    /// Whether some point has `b ≤ ANCHOR_B`.
    pub fn has_anchor(&self) -> bool {
        self.points.iter().any(|p| p.b <= ANCHOR_B)
    }

    /// Distinct `b_delta` values, ascending.
    pub fn b_deltas(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.points.iter().map(|p| p.b_delta).collect();
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        v
    }

    /// The same scheme with every b-tensor rotated by `r`.
    pub fn rotated(&self, r: &nalgebra::Matrix3<f64>) -> Self {
        Self {
            points: self
                .points
                .iter()
                .map(|p| BTensor { tensor: p.tensor.rotated(r), ..*p })
                .collect(),
        }
    }
}

impl<'a> IntoIterator for &'a AcqScheme {
    type Item = &'a BTensor;
    type IntoIter = core::slice::Iter<'a, BTensor>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

/// One shell: `count` directions for anisotropic encoding, `count`
/// repeats for spherical encoding.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Shell {
    pub b: f64,
    pub b_delta: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SchemeSpec {
    pub shells: Vec<Shell>,
}

impl SchemeSpec {
    pub const DEFAULT_B: [f64; 4] = [0.1, 0.7, 1.4, 2.0];
    pub const DEFAULT_B_DELTA: [f64; 3] = [-0.5, 0.0, 1.0];
    pub const DEFAULT_DIRECTIONS: [usize; 4] = [6, 6, 10, 16];
    pub const SPHERICAL_REPEATS: usize = 6;

    /// Four b-values crossed with planar, spherical and linear encoding,
    /// 100 points in total.
    pub fn default_scheme() -> Self {
        let mut shells = Vec::new();
        for &b_delta in &Self::DEFAULT_B_DELTA {
            for (k, &b) in Self::DEFAULT_B.iter().enumerate() {
                let count = if b_delta == 0.0 {
                    Self::SPHERICAL_REPEATS
                } else {
                    Self::DEFAULT_DIRECTIONS[k]
                };
                shells.push(Shell { b, b_delta, count });
            }
        }
        Self { shells }
    }

    pub fn single(b: f64, b_delta: f64, count: usize) -> Self {
        Self {
            shells: alloc::vec![Shell { b, b_delta, count }],
        }
    }
}

impl Default for SchemeSpec {
    fn default() -> Self {
        Self::default_scheme()
    }
}

/// Expands shells into points ordered by `(b_delta, b, direction index)`.
pub fn generate_scheme(spec: &SchemeSpec) -> Result<AcqScheme> {
    if spec.shells.is_empty() || spec.shells.iter().all(|s| s.count == 0) {
        return Err(Error::InvalidParameter("scheme specification is empty".into()));
    }
    let mut shells = spec.shells.clone();
    shells.sort_by(|a, b| a.b_delta.total_cmp(&b.b_delta).then(a.b.total_cmp(&b.b)));
    let mut points = Vec::new();
    for shell in &shells {
        if shell.b_delta == 0.0 {
            for _ in 0..shell.count {
                points.push(btensor(shell.b, 0.0, 0.0, 0.0)?);
            }
        } else {
            for u in shell_directions(shell.count) {
                points.push(BTensor::along(shell.b, shell.b_delta, &u)?);
            }
        }
    }
    Ok(AcqScheme::new(points))
}
