use alloc::format;

use nalgebra::Vector3;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::tensor::{mandel_vec, SymTensor3, Vec6};

/// Axisymmetric encoding tensor with trace `b` and anisotropy `b_delta`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BTensor {
    pub b: f64,
    pub b_delta: f64,
    pub theta: f64,
    pub phi: f64,
    pub tensor: SymTensor3,
}

/// `b/3·[(1 − b_Δ)I + 3b_Δ uuᵀ]` with `u` at polar angle `theta` and
/// azimuth `phi`.
pub fn btensor(b: f64, b_delta: f64, theta: f64, phi: f64) -> Result<BTensor> {
    if !(b >= 0.0) || !b.is_finite() {
        return Err(Error::Range(format!("b must be non-negative, got {b}")));
    }
    if !(-0.5..=1.0).contains(&b_delta) {
        return Err(Error::Range(format!(
            "b_delta must lie in [-0.5, 1], got {b_delta}"
        )));
    }
    let u = crate::tensor::unit_vector(theta, phi);
    let tensor = SymTensor3::isotropic(b * (1.0 - b_delta) / 3.0)
        + SymTensor3::outer(&u).scaled(b * b_delta);
    Ok(BTensor {
        b,
        b_delta,
        theta,
        phi,
        tensor,
    })
}

impl BTensor {
    /// Encoding along the direction `u` (normalized internally).
    pub fn along(b: f64, b_delta: f64, u: &Vector3<f64>) -> Result<Self> {
        let u = u.normalize();
        let theta = u.z.clamp(-1.0, 1.0).acos();
        let phi = if u.x == 0.0 && u.y == 0.0 { 0.0 } else { u.y.atan2(u.x) };
        btensor(b, b_delta, theta, phi)
    }

    /// Builds the record from explicit tensor components, as read from a
    /// scheme file.
    pub fn from_parts(b: f64, b_delta: f64, theta: f64, phi: f64, tensor: SymTensor3) -> Self {
        Self {
            b,
            b_delta,
            theta,
            phi,
            tensor,
        }
    }

    pub fn mandel(&self) -> Vec6 {
        mandel_vec(&self.tensor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_shapes() {
        let s = btensor(1.0, 0.0, 0.4, 1.3).unwrap();
        assert!((s.tensor - SymTensor3::isotropic(1.0 / 3.0)).max_abs() < 1e-16);
        let l = btensor(1.0, 1.0, 0.0, 0.0).unwrap();
        assert!((l.tensor - SymTensor3::diag(0.0, 0.0, 1.0)).max_abs() < 1e-16);
        let p = btensor(1.0, -0.5, 0.0, 0.0).unwrap();
        assert!((p.tensor - SymTensor3::diag(0.5, 0.5, 0.0)).max_abs() < 1e-16);
    }

    #[test]
    fn trace_and_eigenvalues() {
        let t = btensor(2.0, 0.3, 1.1, -0.6).unwrap();
        assert!((t.tensor.trace() - 2.0).abs() < 1e-12);
        let e = t.tensor.eigenvalues();
        assert!((e[0] - 2.0 * 1.6 / 3.0).abs() < 1e-12);
        assert!((e[1] - 2.0 * 0.7 / 3.0).abs() < 1e-12);
        assert!((e[2] - 2.0 * 0.7 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(btensor(-1.0, 0.0, 0.0, 0.0), Err(Error::Range(_))));
        assert!(matches!(btensor(1.0, 1.5, 0.0, 0.0), Err(Error::Range(_))));
        assert!(matches!(btensor(1.0, -0.6, 0.0, 0.0), Err(Error::Range(_))));
    }
}
