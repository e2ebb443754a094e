use alloc::format;

use nalgebra::{Cholesky, Matrix3};
#[allow(unused_imports)]
use num_traits::Float;

use super::moments::{DerivativeLayout, MomentGenerating, MomentPair};
use crate::error::{Error, Result};
use crate::tensor::{mandel_basis, mandel_outer, SymTensor3, Tensor6};

/// Relative tolerance on the asymmetry of `Ψ·Θ`.
pub const COMMUTATION_TOL: f64 = 1e-10;

/// Non-central matrix-variate Gamma distribution with shape `κ > 1`,
/// positive definite scale `Ψ` and noncentrality `Θ` commuting with `Ψ`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NcMvGamma {
    kappa: f64,
    psi: SymTensor3,
    theta: SymTensor3,
}

fn relative_asymmetry(m: &Matrix3<f64>, scale: f64) -> f64 {
    let asym = (m - m.transpose()).norm();
    if scale > 0.0 {
        asym / scale
    } else {
        asym
    }
}

impl NcMvGamma {
    pub fn new(kappa: f64, psi: SymTensor3, theta: SymTensor3) -> Result<Self> {
        if !(kappa > 1.0) || !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "shape κ must lie in ]1, +∞[, got {kappa}"
            )));
        }
        if !psi.is_positive_definite() {
            return Err(Error::InvalidParameter(
                "scale Ψ must be positive definite".into(),
            ));
        }
        let prod = psi.dot(&theta);
        let asymmetry = relative_asymmetry(&prod, psi.frobenius_norm() * theta.frobenius_norm());
        if asymmetry > COMMUTATION_TOL {
            return Err(Error::Commutation {
                asymmetry,
                tolerance: COMMUTATION_TOL,
            });
        }
        Ok(Self { kappa, psi, theta })
    }

    pub fn central(kappa: f64, psi: SymTensor3) -> Result<Self> {
        Self::new(kappa, psi, SymTensor3::ZERO)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn psi(&self) -> &SymTensor3 {
        &self.psi
    }

    pub fn theta(&self) -> &SymTensor3 {
        &self.theta
    }

    /// `Ψ·Θ`, symmetric by commutation.
    pub fn psi_theta(&self) -> SymTensor3 {
        SymTensor3::from_matrix(&self.psi.dot(&self.theta))
    }

    /// `H = (κI + Θ)⁻¹`, when `κI + Θ` is invertible.
    pub fn h(&self) -> Option<SymTensor3> {
        (SymTensor3::isotropic(self.kappa) + self.theta).inverse()
    }

    pub fn mean(&self) -> SymTensor3 {
        mean_gamma(self)
    }

    pub fn cov(&self) -> Tensor6 {
        cov_gamma(self)
    }

    pub fn cov_in(&self, layout: DerivativeLayout) -> Tensor6 {
        match layout {
            DerivativeLayout::Outer => cov_gamma(self),
            DerivativeLayout::Symmetric => cov_gamma_symmetric(self),
        }
    }

    pub fn moments(&self) -> MomentPair {
        MomentPair::new(self.mean(), self.cov())
    }

    /// Whether the symmetric part of `z` lies in the MGF convergence
    /// domain, i.e. `Ψ⁻¹ − Z` is positive definite (equivalently, all
    /// eigenvalues of `I − Ψ^½ Z Ψ^½` are positive).
    pub fn in_domain(&self, z: &Matrix3<f64>) -> bool {
        let Some(psi_inv) = self.psi.to_matrix().try_inverse() else {
            return false;
        };
        let zs = (z + z.transpose()) * 0.5;
        Cholesky::new(psi_inv - zs).is_some()
    }

    /// Signal attenuation `S(b)/S₀ = Det(I + Ψb)^(−κ)·exp(−b:[(I + Ψb)⁻¹ΨΘ])`.
    pub fn attenuation(&self, b: &SymTensor3) -> f64 {
        gamma_attenuation(
            self.kappa,
            &self.psi.to_matrix(),
            &self.psi_theta().to_matrix(),
            &b.to_matrix(),
        )
    }
}

/// Attenuation from `κ`, `Ψ` and `Ω = ΨΘ` given as plain matrices.
pub(crate) fn gamma_attenuation(
    kappa: f64,
    psi: &Matrix3<f64>,
    omega: &Matrix3<f64>,
    b: &Matrix3<f64>,
) -> f64 {
    let a = psi * b;
    let inv = (Matrix3::identity() + a)
        .try_inverse()
        .expect("I + Ψb is invertible for PD Ψ and PSD b");
    let quad = (b * inv * omega).trace();
    (-kappa * ln_det_identity_plus(&a) - quad).exp()
}

/// `ln Det(I + A)`, accurate when `A` is small: the deviation from one is
/// assembled from the characteristic-polynomial invariants of `A` and fed
/// to `ln_1p`.
pub(crate) fn ln_det_identity_plus(a: &Matrix3<f64>) -> f64 {
    let tr = a.trace();
    let c2 = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)] + a[(0, 0)] * a[(2, 2)]
        - a[(0, 2)] * a[(2, 0)]
        + a[(1, 1)] * a[(2, 2)]
        - a[(1, 2)] * a[(2, 1)];
    (tr + c2 + a.determinant()).ln_1p()
}

impl MomentGenerating for NcMvGamma {
    /// `ln M(Z) = −κ ln Det(I − ZΨ) + Tr([(I − ZΨ)⁻¹ − I]·Θ)`
    fn log_mgf(&self, z: &Matrix3<f64>) -> Result<f64> {
        if !self.in_domain(z) {
            return Err(Error::Domain(format!(
                "I - Z·Psi is not positive definite for Z = {:?}",
                z.as_slice()
            )));
        }
        let a = -(z * self.psi.to_matrix());
        let ln_det = ln_det_identity_plus(&a);
        let inv = (Matrix3::identity() + a)
            .try_inverse()
            .ok_or_else(|| Error::Domain("I - Z·Psi is singular".into()))?;
        // (I − ZΨ)⁻¹ − I = (I − ZΨ)⁻¹·ZΨ
        let shifted = inv * (-a);
        Ok(-self.kappa * ln_det + (shifted * self.theta.to_matrix()).trace())
    }
}

pub fn mgf_gamma(p: &NcMvGamma, z: &SymTensor3) -> Result<f64> {
    p.mgf(z)
}

/// `⟨D⟩ = Ψ·[κI + Θ]`
pub fn mean_gamma(p: &NcMvGamma) -> SymTensor3 {
    p.psi.scaled(p.kappa) + p.psi_theta()
}

/// `ℂ = κ Ψ⊗Ψ + (ΨΘ)⊗Ψ + Ψ⊗(ΘΨ)` in Mandel form.
///
/// This is the second MGF derivative assembled in the
/// [`DerivativeLayout::Outer`] convention. In the shared eigenbasis of Ψ
/// and Θ it is non-zero only in the upper-left 3×3 block.
pub fn cov_gamma(p: &NcMvGamma) -> Tensor6 {
    let pt = p.psi_theta();
    mandel_outer(&p.psi, &p.psi) * p.kappa + mandel_outer(&pt, &p.psi) + mandel_outer(&p.psi, &pt)
}

/// Covariance of the Mandel components of `D`:
/// `Cov(A:D, B:D) = κ Tr(AΨBΨ) + Tr(AΨBΩ) + Tr(AΩBΨ)` with `Ω = ΨΘ`.
fn cov_gamma_symmetric(p: &NcMvGamma) -> Tensor6 {
    let psi = p.psi.to_matrix();
    let omega = p.psi_theta().to_matrix();
    let basis: [Matrix3<f64>; 6] = core::array::from_fn(|k| mandel_basis(k).to_matrix());
    Tensor6::from_fn(|i, j| {
        let (a, b) = (&basis[i], &basis[j]);
        p.kappa * (a * psi * b * psi).trace()
            + (a * psi * b * omega).trace()
            + (a * omega * b * psi).trace()
    })
}

/// Converts `(⟨D⟩, H, κ)` into `(κ, Ψ = ⟨D⟩·H, Θ = H⁻¹ − κI)`.
pub fn gamma_from_mean_h(mean: &SymTensor3, h: &SymTensor3, kappa: f64) -> Result<NcMvGamma> {
    if !mean.is_positive_definite() || !h.is_positive_definite() {
        return Err(Error::InvalidParameter(
            "mean tensor and H must be positive definite".into(),
        ));
    }
    let prod = mean.dot(h);
    let asymmetry = relative_asymmetry(&prod, mean.frobenius_norm() * h.frobenius_norm());
    if asymmetry > COMMUTATION_TOL {
        return Err(Error::Commutation {
            asymmetry,
            tolerance: COMMUTATION_TOL,
        });
    }
    let psi = SymTensor3::from_matrix(&prod);
    let h_inv = h
        .inverse()
        .ok_or_else(|| Error::InvalidParameter("H is singular".into()))?;
    NcMvGamma::new(kappa, psi, h_inv - SymTensor3::isotropic(kappa))
}
