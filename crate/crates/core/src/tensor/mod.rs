//! Symmetric second-order tensors, their Mandel 6-vector form and 6×6
//! fourth-order tensors in the Mandel basis.

mod mandel;
mod psd;
mod rotation;
mod sym3;

pub use mandel::{contract6, mandel_basis, mandel_outer, mandel_rotation, mandel_vec, Tensor6, Vec6};
pub use psd::nearest_psd;
pub use rotation::{euler_from_rotation, euler_rotation};
pub use sym3::{axisym_tensor, frobenius, AxisymSpec, Eigen3, SymTensor3};

pub(crate) const SQRT_2: f64 = core::f64::consts::SQRT_2;
pub(crate) use sym3::unit_vector;
