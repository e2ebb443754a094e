//! Matrix moments of diffusion tensor distributions (DTDs).
//!
//! The crate computes the mean diffusion tensor and covariance tensor of
//! parametric matrix-variate DTDs from their moment-generating functions,
//! implements the non-central matrix-variate Gamma signal representation
//! with its 11-parameter fitter, a two-term cumulant (covariance tensor)
//! baseline fitter, and the Rician-noise Monte-Carlo protocol used to judge
//! accuracy and precision of both.
//!
//! Everything here is pure computation on value types. The crate is
//! `no_std` and only needs `alloc`; file formats, the CLI and parallel
//! execution live in the companion `dtd-moments` crate.
//!
//! Units are fixed throughout: diffusivities in µm²/ms, b-values and MGF
//! arguments in ms/µm², covariances in µm⁴/ms².
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod descriptors;
pub mod distributions;
pub mod encoding;
mod error;
pub mod experiments;
pub mod fit;
pub mod tensor;

pub use error::{Error, Result};

pub use descriptors::{
    descriptors_from_moments, moments_from_components, order_parameter, DecIntensity,
    Descriptors, DiscreteDtd,
};
pub use distributions::{
    cov_gamma, fd_cov, fd_mean, mean_gamma, mgf_gamma, mgf_gaussian, moments_gaussian,
    DerivativeLayout, MomentGenerating, MomentPair, MvGaussian, NcMvGamma,
};
pub use encoding::{btensor, generate_scheme, AcqScheme, BTensor, SchemeSpec};
pub use tensor::{
    axisym_tensor, contract6, euler_rotation, frobenius, mandel_outer, mandel_vec,
    nearest_psd, AxisymSpec, SymTensor3, Tensor6, Vec6,
};
