use nalgebra::Matrix3;

use super::moments::{DerivativeLayout, MomentGenerating, MomentPair};
use crate::error::{Error, Result};
use crate::tensor::{mandel_basis, mandel_outer, SymTensor3, Tensor6};

/// Matrix-variate Gaussian DTD with mean `M` and the two positive definite
/// covariance factors `Σ` and `Ψ`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MvGaussian {
    mean: SymTensor3,
    sigma: SymTensor3,
    psi: SymTensor3,
}

impl MvGaussian {
    pub fn new(mean: SymTensor3, sigma: SymTensor3, psi: SymTensor3) -> Result<Self> {
        if !sigma.is_positive_definite() || !psi.is_positive_definite() {
            return Err(Error::InvalidParameter(
                "Σ and Ψ must be positive definite".into(),
            ));
        }
        Ok(Self { mean, sigma, psi })
    }

    pub fn mean(&self) -> &SymTensor3 {
        &self.mean
    }

    pub fn sigma(&self) -> &SymTensor3 {
        &self.sigma
    }

    pub fn psi(&self) -> &SymTensor3 {
        &self.psi
    }

    pub fn cov_in(&self, layout: DerivativeLayout) -> Tensor6 {
        match layout {
            DerivativeLayout::Outer => {
                (mandel_outer(&self.sigma, &self.psi) + mandel_outer(&self.psi, &self.sigma)) * 0.5
            }
            DerivativeLayout::Symmetric => {
                let s = self.sigma.to_matrix();
                let p = self.psi.to_matrix();
                let basis: [Matrix3<f64>; 6] =
                    core::array::from_fn(|k| mandel_basis(k).to_matrix());
                Tensor6::from_fn(|i, j| {
                    let (a, b) = (&basis[i], &basis[j]);
                    0.5 * ((a * s * b * p).trace() + (b * s * a * p).trace())
                })
            }
        }
    }
}

impl MomentGenerating for MvGaussian {
    /// `ln M(Z) = Tr(Z·M) + ½ Tr(Z·Σ·Z·Ψ)`, defined for every `Z`.
    fn log_mgf(&self, z: &Matrix3<f64>) -> Result<f64> {
        let m = self.mean.to_matrix();
        let s = self.sigma.to_matrix();
        let p = self.psi.to_matrix();
        Ok((z * m).trace() + 0.5 * (z * s * z * p).trace())
    }
}

pub fn mgf_gaussian(g: &MvGaussian, z: &SymTensor3) -> Result<f64> {
    g.mgf(z)
}

/// `⟨D⟩ = M`, `ℂ = ½(Σ⊗Ψ + Ψ⊗Σ)`.
pub fn moments_gaussian(g: &MvGaussian) -> MomentPair {
    MomentPair::new(g.mean, g.cov_in(DerivativeLayout::Outer))
}
