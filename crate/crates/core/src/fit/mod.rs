//! Signal-representation fitters: log-linear DTI, the 28-parameter
//! covariance (two-term cumulant) fit, and the 11-parameter nc-mv-Gamma
//! fit, all on normalized or raw signal vectors paired with a scheme.

mod covariance;
mod dti;
mod lm;
mod mv_gamma;

pub use covariance::{fit_covariance, CovFit};
pub use dti::fit_dti;
pub use lm::{levenberg_marquardt, LmOptions, LmReport};
pub use mv_gamma::{fit_mv_gamma, gamma_descriptors, MvGammaFit, MvGammaOptions, MvGammaParams};

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::encoding::AcqScheme;
use crate::error::{Error, Result};

pub(crate) fn check_lengths(signals: &[f64], scheme: &AcqScheme) -> Result<()> {
    if signals.len() != scheme.len() {
        return Err(Error::LengthMismatch {
            what: "signal",
            got: signals.len(),
            expected: scheme.len(),
        });
    }
    Ok(())
}

/// Weighted linear least squares via SVD. Returns the solution and the
/// numerical rank of the (row-weighted) design.
pub(crate) fn weighted_lstsq(
    design: &DMatrix<f64>,
    rhs: &DVector<f64>,
    weights: Option<&[f64]>,
) -> (DVector<f64>, usize) {
    let (mut a, mut y) = (design.clone(), rhs.clone());
    if let Some(w) = weights {
        for (i, wi) in w.iter().enumerate() {
            a.row_mut(i).scale_mut(*wi);
            y[i] *= wi;
        }
    }
    // Column equilibration keeps the rank test meaningful when b² and 1
    // columns differ by orders of magnitude.
    let scales: Vec<f64> = (0..a.ncols())
        .map(|j| {
            let n = a.column(j).norm();
            if n > 0.0 {
                n
            } else {
                1.0
            }
        })
        .collect();
    for (j, s) in scales.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / s);
    }
    let dim = a.nrows().max(a.ncols()) as f64;
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let tol = smax * f64::EPSILON * dim * 10.0;
    let rank = svd.singular_values.iter().filter(|s| **s > tol).count();
    let n = scales.len();
    let mut x = svd.solve(&y, tol).unwrap_or_else(|_| DVector::zeros(n));
    for (j, s) in scales.iter().enumerate() {
        x[j] /= s;
    }
    (x, rank)
}

pub(crate) fn log_signals(signals: &[f64]) -> DVector<f64> {
    #[allow(unused_imports)]
    use num_traits::Float;
    DVector::from_iterator(
        signals.len(),
        signals.iter().map(|s| s.max(f64::MIN_POSITIVE).ln()),
    )
}
