use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::scheme::AcqScheme;
use crate::descriptors::DiscreteDtd;
use crate::distributions::{MomentPair, NcMvGamma};
use crate::tensor::{frobenius, mandel_vec};

/// `S_j = Σᵢ fᵢ exp(−b_j:Dᵢ)` with `S₀ = 1`.
pub fn signal_dtd(dtd: &DiscreteDtd, scheme: &AcqScheme) -> Vec<f64> {
    scheme
        .iter()
        .map(|p| {
            dtd.components()
                .iter()
                .map(|(f, d)| f * (-frobenius(&p.tensor, d)).exp())
                .sum()
        })
        .collect()
}

/// Closed-form nc-mv-Gamma signal.
pub fn signal_gamma(p: &NcMvGamma, s0: f64, scheme: &AcqScheme) -> Vec<f64> {
    scheme.iter().map(|pt| s0 * p.attenuation(&pt.tensor)).collect()
}

/// Two-term cumulant signal `ln S = ln S₀ − b:⟨D⟩ + ½ bᵀℂb`.
pub fn signal_cumulant(m: &MomentPair, s0: f64, scheme: &AcqScheme) -> Vec<f64> {
    scheme
        .iter()
        .map(|p| {
            let bm = mandel_vec(&p.tensor);
            s0 * (-frobenius(&p.tensor, &m.mean) + 0.5 * m.cov.quadratic_form(&bm)).exp()
        })
        .collect()
}
