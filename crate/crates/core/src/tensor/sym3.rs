use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Real symmetric 3×3 tensor.
///
/// Only the six independent entries are stored, in the order
/// `xx, yy, zz, yz, xz, xy` (the Mandel ordering, without the √2 factors).
/// Used for diffusion tensors, b-tensors, MGF arguments and distribution
/// parameters alike.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SymTensor3 {
    c: [f64; 6],
}

/// Eigen-decomposition of a [`SymTensor3`], eigenvalues sorted in
/// descending order. Column `k` of `vectors` pairs with `values[k]`.
#[derive(Clone, Copy, Debug)]
pub struct Eigen3 {
    pub values: [f64; 3],
    pub vectors: Matrix3<f64>,
}

impl Eigen3 {
    pub fn vector(&self, k: usize) -> Vector3<f64> {
        self.vectors.column(k).into_owned()
    }
}

impl SymTensor3 {
    pub const ZERO: Self = Self { c: [0.0; 6] };

    pub const fn new(xx: f64, yy: f64, zz: f64, yz: f64, xz: f64, xy: f64) -> Self {
        Self {
            c: [xx, yy, zz, yz, xz, xy],
        }
    }

    pub const fn from_components(c: [f64; 6]) -> Self {
        Self { c }
    }

    pub const fn diag(a: f64, b: f64, c: f64) -> Self {
        Self::new(a, b, c, 0.0, 0.0, 0.0)
    }

    pub const fn identity() -> Self {
        Self::diag(1.0, 1.0, 1.0)
    }

    pub const fn isotropic(s: f64) -> Self {
        Self::diag(s, s, s)
    }

    /// `u·uᵀ`
    pub fn outer(u: &Vector3<f64>) -> Self {
        Self::new(
            u.x * u.x,
            u.y * u.y,
            u.z * u.z,
            u.y * u.z,
            u.x * u.z,
            u.x * u.y,
        )
    }

    /// Symmetric part of an arbitrary 3×3 matrix.
    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        Self::new(
            m[(0, 0)],
            m[(1, 1)],
            m[(2, 2)],
            0.5 * (m[(1, 2)] + m[(2, 1)]),
            0.5 * (m[(0, 2)] + m[(2, 0)]),
            0.5 * (m[(0, 1)] + m[(1, 0)]),
        )
    }

    /// Builds `R·diag(values)·Rᵀ`.
    pub fn from_eigen(values: [f64; 3], rotation: &Matrix3<f64>) -> Self {
        let d = Matrix3::from_diagonal(&Vector3::from(values));
        Self::from_matrix(&(rotation * d * rotation.transpose()))
    }

    pub const fn components(&self) -> [f64; 6] {
        self.c
    }

    pub fn xx(&self) -> f64 {
        self.c[0]
    }
    pub fn yy(&self) -> f64 {
        self.c[1]
    }
    pub fn zz(&self) -> f64 {
        self.c[2]
    }
    pub fn yz(&self) -> f64 {
        self.c[3]
    }
    pub fn xz(&self) -> f64 {
        self.c[4]
    }
    pub fn xy(&self) -> f64 {
        self.c[5]
    }

    /// Entry `(i, j)`, zero-based.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i.min(j), i.max(j)) {
            (0, 0) => self.c[0],
            (1, 1) => self.c[1],
            (2, 2) => self.c[2],
            (1, 2) => self.c[3],
            (0, 2) => self.c[4],
            (0, 1) => self.c[5],
            _ => panic!("index ({i}, {j}) out of bounds for a 3x3 tensor"),
        }
    }

    pub fn to_matrix(&self) -> Matrix3<f64> {
        let [xx, yy, zz, yz, xz, xy] = self.c;
        Matrix3::new(xx, xy, xz, xy, yy, yz, xz, yz, zz)
    }

    pub fn trace(&self) -> f64 {
        self.c[0] + self.c[1] + self.c[2]
    }

    pub fn det(&self) -> f64 {
        let [xx, yy, zz, yz, xz, xy] = self.c;
        xx * (yy * zz - yz * yz) - xy * (xy * zz - yz * xz) + xz * (xy * yz - yy * xz)
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(self, self).sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut c = self.c;
        c.iter_mut().for_each(|x| *x *= s);
        Self { c }
    }

    pub fn inverse(&self) -> Option<Self> {
        self.to_matrix()
            .try_inverse()
            .map(|m| Self::from_matrix(&m))
    }

    /// Matrix product `self·other` (generally not symmetric).
    pub fn dot(&self, other: &Self) -> Matrix3<f64> {
        self.to_matrix() * other.to_matrix()
    }

    /// `R·self·Rᵀ`
    pub fn rotated(&self, r: &Matrix3<f64>) -> Self {
        Self::from_matrix(&(r * self.to_matrix() * r.transpose()))
    }

    pub fn eigen(&self) -> Eigen3 {
        let eig = SymmetricEigen::new(self.to_matrix());
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let mut values = [0.0; 3];
        let mut vectors = Matrix3::zeros();
        for (k, &src) in order.iter().enumerate() {
            values[k] = eig.eigenvalues[src];
            vectors.set_column(k, &eig.eigenvectors.column(src));
        }
        // keep a proper rotation so the basis can be fed to Euler extraction
        if vectors.determinant() < 0.0 {
            let flipped = -vectors.column(2);
            vectors.set_column(2, &flipped);
        }
        Eigen3 { values, vectors }
    }

    pub fn eigenvalues(&self) -> [f64; 3] {
        self.eigen().values
    }

    /// All eigenvalues strictly positive.
    pub fn is_positive_definite(&self) -> bool {
        self.eigenvalues()[2] > 0.0
    }

    /// All eigenvalues non-negative, up to round-off relative to the
    /// largest eigenvalue magnitude.
    pub fn is_positive_semidefinite(&self) -> bool {
        let v = self.eigenvalues();
        let scale = v[0].abs().max(v[2].abs());
        v[2] >= -1e-12 * scale
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl Add for SymTensor3 {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl AddAssign for SymTensor3 {
    fn add_assign(&mut self, rhs: Self) {
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a += b;
        }
    }
}

impl Sub for SymTensor3 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for SymTensor3 {
    type Output = Self;
    fn neg(self) -> Self {
        self.scaled(-1.0)
    }
}

impl Mul<f64> for SymTensor3 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.scaled(s)
    }
}

impl Mul<SymTensor3> for f64 {
    type Output = SymTensor3;
    fn mul(self, t: SymTensor3) -> SymTensor3 {
        t.scaled(self)
    }
}

/// Frobenius inner product `A:B = Σᵢⱼ aᵢⱼ bᵢⱼ`.
pub fn frobenius(a: &SymTensor3, b: &SymTensor3) -> f64 {
    let (x, y) = (a.c, b.c);
    x[0] * y[0] + x[1] * y[1] + x[2] * y[2] + 2.0 * (x[3] * y[3] + x[4] * y[4] + x[5] * y[5])
}

/// Axisymmetric diffusion tensor description.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AxisymSpec {
    pub d_par: f64,
    pub d_perp: f64,
    /// Polar angle of the symmetry axis.
    pub theta: f64,
    /// Azimuth of the symmetry axis.
    pub phi: f64,
}

impl AxisymSpec {
    pub fn new(d_par: f64, d_perp: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(d_par >= 0.0 && d_perp >= 0.0) {
            return Err(Error::Range(alloc::format!(
                "axial and radial diffusivities must be non-negative (got {d_par}, {d_perp})"
            )));
        }
        Ok(Self {
            d_par,
            d_perp,
            theta,
            phi,
        })
    }

    pub fn d_iso(&self) -> f64 {
        (self.d_par + 2.0 * self.d_perp) / 3.0
    }

    /// Normalized anisotropy in `[-0.5, 1]`; zero for a vanishing tensor.
    pub fn d_delta(&self) -> f64 {
        let iso = self.d_iso();
        if iso > 0.0 {
            (self.d_par - self.d_perp) / (3.0 * iso)
        } else {
            0.0
        }
    }

    pub fn d_aniso(&self) -> f64 {
        (self.d_par - self.d_perp) / 3.0
    }

    pub fn axis(&self) -> Vector3<f64> {
        unit_vector(self.theta, self.phi)
    }
}

pub(crate) fn unit_vector(theta: f64, phi: f64) -> Vector3<f64> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vector3::new(st * cp, st * sp, ct)
}

/// `D = D⊥·I + (D∥ − D⊥)·u·uᵀ` with `u` the symmetry axis.
pub fn axisym_tensor(spec: &AxisymSpec) -> SymTensor3 {
    let u = spec.axis();
    SymTensor3::isotropic(spec.d_perp) + SymTensor3::outer(&u) * (spec.d_par - spec.d_perp)
}
