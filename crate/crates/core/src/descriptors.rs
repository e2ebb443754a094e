//! Statistical descriptors of a DTD: mean and variance of the isotropic
//! diffusivity, mean squared anisotropy, FA and DEC color of the mean
//! tensor, and the orientational order parameter.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::Vector3;
#[allow(unused_imports)]
use num_traits::Float;

use crate::distributions::MomentPair;
use crate::error::{Error, Result};
use crate::tensor::{contract6, mandel_outer, SymTensor3, Tensor6};

/// Relative tolerance on the fraction sum of a [`DiscreteDtd`].
pub const FRACTION_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Descriptors {
    /// `E[D_iso]`, µm²/ms
    pub e_iso: f64,
    /// `V[D_iso]`, µm⁴/ms²
    pub v_iso: f64,
    /// `E[D_aniso²]`, µm⁴/ms²
    pub e_aniso2: f64,
    /// `E[D_aniso²] / E[D_iso]²`
    pub e_aniso2_norm: f64,
    pub fa: f64,
    pub dec_rgb: [f64; 3],
}

/// Channel modulating the brightness of the DEC color.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DecIntensity {
    #[default]
    Fa,
    /// `Ẽ[D_aniso²]`, clipped to `[0, 1]`.
    NormalizedAnisotropy,
}

/// Fractional anisotropy from three eigenvalues.
pub fn fractional_anisotropy(l: [f64; 3]) -> f64 {
    let norm2 = l.iter().map(|x| x * x).sum::<f64>();
    if norm2 <= 0.0 {
        return 0.0;
    }
    let mean = (l[0] + l[1] + l[2]) / 3.0;
    let dev2 = l.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (1.5 * dev2 / norm2).sqrt().clamp(0.0, 1.0)
}

pub fn descriptors_from_moments(m: &MomentPair) -> Result<Descriptors> {
    descriptors_with_intensity(m, DecIntensity::Fa)
}

pub fn descriptors_with_intensity(m: &MomentPair, intensity: DecIntensity) -> Result<Descriptors> {
    let e_iso = m.mean.trace() / 3.0;
    if !(e_iso > 0.0) {
        return Err(Error::Degenerate(format!(
            "E[D_iso] must be positive to normalize, got {e_iso}"
        )));
    }
    let v_iso = contract6(&m.cov, &Tensor6::e_bulk());
    let e_aniso2 = 0.5 * contract6(&m.second_moment(), &Tensor6::e_shear());
    let e_aniso2_norm = e_aniso2 / (e_iso * e_iso);
    let eig = m.mean.eigen();
    let fa = fractional_anisotropy(eig.values);
    let level = match intensity {
        DecIntensity::Fa => fa,
        DecIntensity::NormalizedAnisotropy => e_aniso2_norm.clamp(0.0, 1.0),
    };
    let u = eig.vector(0);
    let dec_rgb = [u.x.abs() * level, u.y.abs() * level, u.z.abs() * level];
    Ok(Descriptors {
        e_iso,
        v_iso,
        e_aniso2,
        e_aniso2_norm,
        fa,
        dec_rgb,
    })
}

/// Finite mixture of diffusion tensors with signal fractions.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiscreteDtd {
    components: Vec<(f64, SymTensor3)>,
}

impl DiscreteDtd {
    pub fn new(components: Vec<(f64, SymTensor3)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("empty DTD".into()));
        }
        let mut sum = 0.0;
        for (f, d) in &components {
            if !(*f >= 0.0) {
                return Err(Error::InvalidParameter(format!("negative fraction {f}")));
            }
            if !d.is_positive_semidefinite() {
                return Err(Error::InvalidParameter(
                    "component tensor is not positive semidefinite".into(),
                ));
            }
            sum += f;
        }
        if (sum - 1.0).abs() > FRACTION_TOL {
            return Err(Error::InvalidParameter(format!(
                "fractions sum to {sum}, expected 1"
            )));
        }
        Ok(Self { components })
    }

    /// Rescales the weights to sum to one before validating.
    pub fn from_weights(components: Vec<(f64, SymTensor3)>) -> Result<Self> {
        let total: f64 = components.iter().map(|c| c.0).sum();
        if !(total > 0.0) {
            return Err(Error::InvalidParameter("weights sum to zero".into()));
        }
        Self::new(components.into_iter().map(|(w, d)| (w / total, d)).collect())
    }

    pub fn single(d: SymTensor3) -> Result<Self> {
        Self::new(alloc::vec![(1.0, d)])
    }

    pub fn components(&self) -> &[(f64, SymTensor3)] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Joins two DTDs with weights `f` and `1 − f`.
    pub fn mix(&self, other: &Self, f: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::Range(format!("mixing fraction {f} outside [0, 1]")));
        }
        let mut parts = Vec::with_capacity(self.len() + other.len());
        parts.extend(self.components.iter().map(|(w, d)| (w * f, *d)));
        parts.extend(other.components.iter().map(|(w, d)| (w * (1.0 - f), *d)));
        parts.retain(|(w, _)| *w > 0.0);
        Self::new(parts)
    }

    pub fn rotated(&self, r: &nalgebra::Matrix3<f64>) -> Self {
        Self {
            components: self.components.iter().map(|(f, d)| (*f, d.rotated(r))).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            components: self.components.iter().map(|(f, d)| (*f, d.scaled(s))).collect(),
        }
    }
}

/// `⟨D⟩ = Σ fᵢDᵢ`, `ℂ = Σ fᵢ(Dᵢ − ⟨D⟩)⊗²`
pub fn moments_from_components(dtd: &DiscreteDtd) -> MomentPair {
    let mut mean = SymTensor3::ZERO;
    for (f, d) in dtd.components() {
        mean += d.scaled(*f);
    }
    let mut cov = Tensor6::zero();
    for (f, d) in dtd.components() {
        let dev = *d - mean;
        cov += mandel_outer(&dev, &dev) * *f;
    }
    MomentPair::new(mean, cov)
}

/// Symmetry axis of an axisymmetric tensor, `None` when isotropic.
pub fn symmetry_axis(d: &SymTensor3) -> Option<Vector3<f64>> {
    let eig = d.eigen();
    let [l0, l1, l2] = eig.values;
    let scale = l0.abs().max(l2.abs());
    if l0 - l2 <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return None;
    }
    Some(if l0 - l1 > l1 - l2 { eig.vector(0) } else { eig.vector(2) })
}

/// `OP = E[P₂(cos β)]` relative to the director of the Saupe order tensor.
///
/// Isotropic components are skipped and the remaining fractions
/// renormalized. The director is the eigenvector whose eigenvalue has the
/// largest magnitude, so a planar girdle of axes yields `−1/2`.
pub fn order_parameter(dtd: &DiscreteDtd) -> Result<f64> {
    let mut q = SymTensor3::ZERO;
    let mut total = 0.0;
    for (f, d) in dtd.components() {
        if let Some(u) = symmetry_axis(d) {
            q += SymTensor3::outer(&u).scaled(1.5 * f) - SymTensor3::isotropic(0.5 * f);
            total += f;
        }
    }
    if total <= 0.0 {
        return Err(Error::Isotropic);
    }
    let values = q.scaled(1.0 / total).eigenvalues();
    let op = if values[0].abs() >= values[2].abs() {
        values[0]
    } else {
        values[2]
    };
    Ok(op.clamp(-0.5, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::NcMvGamma;
    use crate::tensor::{axisym_tensor, euler_rotation, AxisymSpec};
    use core::f64::consts::FRAC_PI_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn stick_descriptors() {
        let dtd = DiscreteDtd::single(SymTensor3::diag(0.0, 0.0, 2.0)).unwrap();
        let d = descriptors_from_moments(&moments_from_components(&dtd)).unwrap();
        assert!(close(d.e_iso, 2.0 / 3.0, 1e-15));
        assert!(close(d.v_iso, 0.0, 1e-15));
        assert!(close(d.e_aniso2, 4.0 / 9.0, 1e-15));
        assert!(close(d.fa, 1.0, 1e-15));
        assert!(close(d.dec_rgb[2], 1.0, 1e-15));
    }

    #[test]
    fn bimodal_isotropic_pair() {
        let dtd = DiscreteDtd::new(alloc::vec![
            (0.5, SymTensor3::isotropic(3.0)),
            (0.5, SymTensor3::isotropic(0.8)),
        ])
        .unwrap();
        let d = descriptors_from_moments(&moments_from_components(&dtd)).unwrap();
        assert!(close(d.e_iso, 1.9, 1e-15));
        assert!(close(d.v_iso, 1.21, 1e-14));
        assert!(close(d.e_aniso2, 0.0, 1e-14));
    }

    #[test]
    fn isotropic_central_gamma() {
        let (kappa, psi) = (2.5, 0.3);
        let p = NcMvGamma::central(kappa, SymTensor3::isotropic(psi)).unwrap();
        let d = descriptors_from_moments(&p.moments()).unwrap();
        assert!(close(d.e_iso, kappa * psi, 1e-15));
        assert!(close(d.v_iso, kappa * psi * psi, 1e-15));
        assert!(close(d.e_aniso2, 0.0, 1e-15));
    }

    #[test]
    fn degenerate_mean() {
        let m = MomentPair::new(SymTensor3::ZERO, Tensor6::zero());
        assert!(matches!(descriptors_from_moments(&m), Err(Error::Degenerate(_))));
    }

    #[test]
    fn dec_intensity_channels() {
        let dtd = DiscreteDtd::single(SymTensor3::diag(2.0, 0.0, 0.0)).unwrap();
        let m = moments_from_components(&dtd);
        let d = descriptors_with_intensity(&m, DecIntensity::NormalizedAnisotropy).unwrap();
        // Ẽ = (4/9)/(4/9) = 1 for a stick
        assert!(close(d.dec_rgb[0], 1.0, 1e-12));
        assert!(close(d.dec_rgb[1] + d.dec_rgb[2], 0.0, 1e-12));
    }

    #[test]
    fn single_component_has_zero_covariance() {
        let dtd = DiscreteDtd::single(SymTensor3::new(1.0, 0.5, 0.2, 0.1, 0.0, 0.05)).unwrap();
        assert_eq!(moments_from_components(&dtd).cov.max_abs(), 0.0);
    }

    #[test]
    fn fractions_must_sum_to_one() {
        let bad = alloc::vec![(0.5, SymTensor3::identity()), (0.4, SymTensor3::identity())];
        assert!(DiscreteDtd::new(bad.clone()).is_err());
        assert!(DiscreteDtd::from_weights(bad).is_ok());
    }

    fn stick(theta: f64, phi: f64) -> SymTensor3 {
        axisym_tensor(&AxisymSpec::new(2.0, 0.2, theta, phi).unwrap())
    }

    #[test]
    fn order_parameter_limits() {
        let aligned = DiscreteDtd::from_weights(
            (0..5).map(|_| (1.0, stick(0.3, 1.0))).collect(),
        )
        .unwrap();
        assert!(close(order_parameter(&aligned).unwrap(), 1.0, 1e-12));

        let girdle = DiscreteDtd::from_weights(
            (0..12)
                .map(|k| (1.0, stick(FRAC_PI_2, k as f64 * core::f64::consts::PI / 12.0)))
                .collect(),
        )
        .unwrap();
        assert!(close(order_parameter(&girdle).unwrap(), -0.5, 1e-12));

        let iso = DiscreteDtd::single(SymTensor3::isotropic(1.0)).unwrap();
        assert!(matches!(order_parameter(&iso), Err(Error::Isotropic)));
    }

    #[test]
    fn anisotropy_identity_holds_for_dispersed_systems() {
        let parts: Vec<_> = (0..7)
            .map(|k| {
                let s = AxisymSpec::new(1.0 + 0.2 * k as f64, 0.1 * k as f64, 0.4 * k as f64, 0.9 * k as f64)
                    .unwrap();
                (1.0 + k as f64, s)
            })
            .collect();
        let total: f64 = parts.iter().map(|p| p.0).sum();
        let direct: f64 = parts.iter().map(|(w, s)| w / total * s.d_aniso().powi(2)).sum();
        let dtd = DiscreteDtd::from_weights(parts.iter().map(|(w, s)| (*w, axisym_tensor(s))).collect()).unwrap();
        let d = descriptors_from_moments(&moments_from_components(&dtd)).unwrap();
        assert!(close(d.e_aniso2, direct, 1e-13));
    }

    #[test]
    fn rotation_invariance() {
        let dtd = DiscreteDtd::new(alloc::vec![
            (0.3, stick(0.2, 0.1)),
            (0.7, SymTensor3::new(1.0, 0.6, 0.3, 0.1, -0.05, 0.2)),
        ])
        .unwrap();
        let a = descriptors_from_moments(&moments_from_components(&dtd)).unwrap();
        let r = euler_rotation(1.0, -0.7, 2.2);
        let b = descriptors_from_moments(&moments_from_components(&dtd.rotated(&r))).unwrap();
        for (x, y) in [(a.e_iso, b.e_iso), (a.v_iso, b.v_iso), (a.e_aniso2, b.e_aniso2), (a.fa, b.fa)] {
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-3));
        }
    }
}
