//! Moment-generating functions of matrix-variate DTDs, their analytic
//! matrix moments, and two independent numerical oracles (finite
//! differences of the MGF, Gaussian-construction sampling).

mod finite_diff;
pub(crate) mod gamma;
mod gaussian;
mod moments;
mod sampling;

pub use finite_diff::{fd_cov, fd_mean, fd_moments, FiniteDifference, DEFAULT_STEP};
pub use gamma::{cov_gamma, gamma_from_mean_h, mean_gamma, mgf_gamma, NcMvGamma};
pub use gaussian::{mgf_gaussian, moments_gaussian, MvGaussian};
pub use moments::{DerivativeLayout, MomentGenerating, MomentPair};
pub use sampling::{sample_gamma, GammaSampler};
