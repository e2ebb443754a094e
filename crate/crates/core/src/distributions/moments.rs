use nalgebra::Matrix3;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Result;
use crate::tensor::{mandel_outer, nearest_psd, SymTensor3, Tensor6};

/// A distribution over symmetric 3×3 tensors known through its
/// moment-generating function `M(Z) = ⟨exp(Z:D)⟩`.
///
/// Implementors provide `ln M` for an arbitrary real 3×3 argument. The
/// closed forms used here are polynomial/rational in the entries of `Z`,
/// so they extend naturally off the symmetric subspace; the
/// finite-difference oracle relies on that extension for the
/// [`DerivativeLayout::Outer`] convention.
pub trait MomentGenerating {
    fn log_mgf(&self, z: &Matrix3<f64>) -> Result<f64>;

    fn mgf(&self, z: &SymTensor3) -> Result<f64> {
        Ok(self.log_mgf(&z.to_matrix())?.exp())
    }
}

impl<F> MomentGenerating for F
where
    F: Fn(&Matrix3<f64>) -> Result<f64>,
{
    fn log_mgf(&self, z: &Matrix3<f64>) -> Result<f64> {
        self(z)
    }
}

/// Index layout used when assembling the second matrix derivative of an
/// MGF into a 6×6 Mandel tensor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DerivativeLayout {
    /// Derivatives with respect to the nine unconstrained entries of `Z`,
    /// arranged so that the product rule `∂(f·F)/∂Z = ∂f/∂Z ⊗ F + f·∂F/∂Z`
    /// yields outer products. In this layout the nc-mv-Gamma covariance is
    /// `κ Ψ⊗Ψ + (ΨΘ)⊗Ψ + Ψ⊗(ΘΨ)` and the mv-Gaussian one is
    /// `½(Σ⊗Ψ + Ψ⊗Σ)`.
    #[default]
    Outer,
    /// Derivatives along the symmetric Mandel basis directions: entry
    /// `(p, q)` is `Cov(d_p, d_q)` for the Mandel components `d` of `D`.
    Symmetric,
}

/// Mean diffusion tensor and covariance tensor of a DTD.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MomentPair {
    pub mean: SymTensor3,
    pub cov: Tensor6,
}

impl MomentPair {
    pub fn new(mean: SymTensor3, cov: Tensor6) -> Self {
        Self { mean, cov }
    }

    /// `⟨D⊗²⟩ = ℂ + ⟨D⟩⊗²`
    pub fn second_moment(&self) -> Tensor6 {
        self.cov + mandel_outer(&self.mean, &self.mean)
    }

    /// Same pair with the covariance replaced by its nearest PSD tensor.
    pub fn psd_repaired(&self) -> Self {
        Self {
            mean: self.mean,
            cov: nearest_psd(&self.cov),
        }
    }
}
