use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use super::{check_lengths, log_signals, weighted_lstsq};
use crate::descriptors::{descriptors_from_moments, Descriptors};
use crate::distributions::MomentPair;
use crate::encoding::AcqScheme;
use crate::error::{Error, Result};
use crate::tensor::{nearest_psd, SymTensor3, Tensor6, Vec6};

const N_PARAMS: usize = 28;

/// Result of the covariance (two-term cumulant) fit.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CovFit {
    pub s0: f64,
    pub mean: SymTensor3,
    /// PSD-repaired covariance.
    pub cov: Tensor6,
    /// Least-squares covariance before repair.
    pub raw_cov: Tensor6,
    /// `None` when the fitted mean has no positive trace.
    pub descriptors: Option<Descriptors>,
    /// Euclidean norm of the signal-domain residual.
    pub residual_norm: f64,
}

impl CovFit {
    pub fn moments(&self) -> MomentPair {
        MomentPair::new(self.mean, self.cov)
    }
}

fn design_row(bm: &Vec6, row: &mut [f64]) {
    row[0] = 1.0;
    for p in 0..6 {
        row[1 + p] = -bm[p];
    }
    let mut k = 7;
    for p in 0..6 {
        for q in p..6 {
            row[k] = if p == q { 0.5 * bm[p] * bm[p] } else { bm[p] * bm[q] };
            k += 1;
        }
    }
}

fn unpack(x: &DVector<f64>) -> (f64, SymTensor3, Tensor6) {
    let mean = Vec6([x[1], x[2], x[3], x[4], x[5], x[6]]).to_tensor();
    let mut cov = Tensor6::zero();
    let mut k = 7;
    for p in 0..6 {
        for q in p..6 {
            cov[(p, q)] = x[k];
            cov[(q, p)] = x[k];
            k += 1;
        }
    }
    (x[0], mean, cov)
}

/// Log-linear fit of `ln S = ln S₀ − b:⟨D⟩ + ½ bᵀℂb` followed by one
/// pass reweighted by the squared predicted signal. The covariance is
/// projected onto the PSD cone before descriptors are computed.
pub fn fit_covariance(signals: &[f64], scheme: &AcqScheme) -> Result<CovFit> {
    check_lengths(signals, scheme)?;
    let m = scheme.len();
    let mut design = DMatrix::zeros(m, N_PARAMS);
    let mut row = [0.0; N_PARAMS];
    for (i, p) in scheme.iter().enumerate() {
        design_row(&p.mandel(), &mut row);
        for (j, v) in row.iter().enumerate() {
            design[(i, j)] = *v;
        }
    }
    let y = log_signals(signals);
    let (x, rank) = weighted_lstsq(&design, &y, None);
    if rank < N_PARAMS {
        return Err(Error::Rank {
            rank,
            required: N_PARAMS,
        });
    }
    let predicted = &design * &x;
    let weights: Vec<f64> = predicted.iter().map(|v| v.exp()).collect();
    let (x, _) = weighted_lstsq(&design, &y, Some(&weights));
    let predicted = &design * &x;
    let residual_norm = predicted
        .iter()
        .zip(signals)
        .map(|(p, s)| (p.exp() - s).powi(2))
        .sum::<f64>()
        .sqrt();
    let (ln_s0, mean, raw_cov) = unpack(&x);
    let cov = nearest_psd(&raw_cov);
    let descriptors = descriptors_from_moments(&MomentPair::new(mean, cov)).ok();
    Ok(CovFit {
        s0: ln_s0.exp(),
        mean,
        cov,
        raw_cov,
        descriptors,
        residual_norm,
    })
}
