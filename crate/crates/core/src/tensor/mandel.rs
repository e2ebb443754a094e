use core::ops::{Add, AddAssign, Index, IndexMut, Mul, Sub};

use nalgebra::{Matrix3, Matrix6};
#[allow(unused_imports)]
use num_traits::Float;

use super::{SymTensor3, SQRT_2};

/// Mandel 6-vector `(λ11, λ22, λ33, √2·λ23, √2·λ13, √2·λ12)`.
///
/// Dot products of Mandel vectors equal Frobenius products of the
/// corresponding tensors.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Vec6(pub [f64; 6]);

impl Vec6 {
    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn outer(&self, other: &Self) -> Tensor6 {
        let mut t = Tensor6::zero();
        for i in 0..6 {
            for j in 0..6 {
                t.m[i][j] = self.0[i] * other.0[j];
            }
        }
        t
    }

    pub fn to_tensor(&self) -> SymTensor3 {
        let v = self.0;
        SymTensor3::new(v[0], v[1], v[2], v[3] / SQRT_2, v[4] / SQRT_2, v[5] / SQRT_2)
    }
}

impl Index<usize> for Vec6 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub fn mandel_vec(d: &SymTensor3) -> Vec6 {
    let c = d.components();
    Vec6([c[0], c[1], c[2], SQRT_2 * c[3], SQRT_2 * c[4], SQRT_2 * c[5]])
}

/// Orthonormal basis tensor `p` of the Mandel representation, so that
/// `E_p : D` is the `p`-th Mandel component of `D`.
pub fn mandel_basis(p: usize) -> SymTensor3 {
    let mut v = [0.0; 6];
    v[p] = 1.0;
    Vec6(v).to_tensor()
}

/// `A ⊗ B` in Mandel form: `mandel_vec(A)·mandel_vec(B)ᵀ`.
pub fn mandel_outer(a: &SymTensor3, b: &SymTensor3) -> Tensor6 {
    mandel_vec(a).outer(&mandel_vec(b))
}

/// Full double contraction `C :: E = Σᵢⱼ Cᵢⱼ Eᵢⱼ`.
pub fn contract6(c: &Tensor6, e: &Tensor6) -> f64 {
    c.m.iter()
        .flatten()
        .zip(e.m.iter().flatten())
        .map(|(a, b)| a * b)
        .sum()
}

/// The 6×6 matrix `Q` with `mandel(R·X·Rᵀ) = Q·mandel(X)`.
pub fn mandel_rotation(r: &Matrix3<f64>) -> Tensor6 {
    let mut q = Tensor6::zero();
    for j in 0..6 {
        let rotated = mandel_vec(&mandel_basis(j).rotated(r));
        for i in 0..6 {
            q.m[i][j] = rotated.0[i];
        }
    }
    q
}

/// Fourth-order tensor with minor symmetries, stored as a 6×6 matrix in
/// the Mandel basis.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tensor6 {
    pub m: [[f64; 6]; 6],
}

impl Tensor6 {
    pub const fn zero() -> Self {
        Self { m: [[0.0; 6]; 6] }
    }

    pub fn identity() -> Self {
        Self::from_fn(|i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut t = Self::zero();
        for i in 0..6 {
            for j in 0..6 {
                t.m[i][j] = f(i, j);
            }
        }
        t
    }

    /// `𝔼_iso = I₆/3`
    pub fn e_iso() -> Self {
        Self::identity() * (1.0 / 3.0)
    }

    /// `𝔼_bulk = E_iso ⊗ E_iso`: 1/9 in the upper-left 3×3 block.
    pub fn e_bulk() -> Self {
        Self::from_fn(|i, j| if i < 3 && j < 3 { 1.0 / 9.0 } else { 0.0 })
    }

    /// `𝔼_shear = 𝔼_iso − 𝔼_bulk`
    pub fn e_shear() -> Self {
        Self::from_fn(|i, j| match (i < 3, j < 3) {
            (true, true) if i == j => 2.0 / 9.0,
            (true, true) => -1.0 / 9.0,
            (false, false) if i == j => 3.0 / 9.0,
            _ => 0.0,
        })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.m[j][i])
    }

    pub fn symmetrized(&self) -> Self {
        Self::from_fn(|i, j| 0.5 * (self.m[i][j] + self.m[j][i]))
    }

    pub fn frobenius_norm(&self) -> f64 {
        contract6(self, self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().fold(0.0, |a, x| a.max(x.abs()))
    }

    /// Symmetric within `tol`, relative to the Frobenius norm.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let asym = (*self - self.transpose()).frobenius_norm();
        asym <= tol * self.frobenius_norm().max(f64::MIN_POSITIVE)
    }

    pub fn quadratic_form(&self, v: &Vec6) -> f64 {
        self.mul_vec(v).dot(v)
    }

    pub fn mul_vec(&self, v: &Vec6) -> Vec6 {
        let mut out = [0.0; 6];
        for (i, row) in self.m.iter().enumerate() {
            out[i] = row.iter().zip(v.0.iter()).map(|(a, b)| a * b).sum();
        }
        Vec6(out)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        Self::from_fn(|i, j| (0..6).map(|k| self.m[i][k] * other.m[k][j]).sum())
    }

    /// Representation of the same fourth-order tensor after rotating space
    /// by `r`.
    pub fn rotated(&self, r: &Matrix3<f64>) -> Self {
        let q = mandel_rotation(r);
        q.matmul(self).matmul(&q.transpose())
    }

    pub fn to_matrix(&self) -> Matrix6<f64> {
        Matrix6::from_fn(|i, j| self.m[i][j])
    }

    pub fn from_matrix(m: &Matrix6<f64>) -> Self {
        Self::from_fn(|i, j| m[(i, j)])
    }

    /// Eigenvalues of the symmetric part, ascending.
    pub fn eigenvalues(&self) -> [f64; 6] {
        let eig = nalgebra::SymmetricEigen::new(self.symmetrized().to_matrix());
        let mut v = [0.0; 6];
        v.copy_from_slice(eig.eigenvalues.as_slice());
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn is_positive_semidefinite(&self) -> bool {
        let v = self.eigenvalues();
        let scale = v[0].abs().max(v[5].abs());
        v[0] >= -1e-12 * scale
    }
}

impl Index<(usize, usize)> for Tensor6 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.m[i][j]
    }
}

impl IndexMut<(usize, usize)> for Tensor6 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.m[i][j]
    }
}

impl Add for Tensor6 {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl AddAssign for Tensor6 {
    fn add_assign(&mut self, rhs: Self) {
        for (a, b) in self.m.iter_mut().flatten().zip(rhs.m.iter().flatten()) {
            *a += b;
        }
    }
}

impl Sub for Tensor6 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + rhs * -1.0
    }
}

impl Mul<f64> for Tensor6 {
    type Output = Self;
    fn mul(mut self, s: f64) -> Self {
        self.m.iter_mut().flatten().for_each(|x| *x *= s);
        self
    }
}
