use nalgebra::Matrix3;

use super::moments::{DerivativeLayout, MomentGenerating, MomentPair};
use crate::error::Result;
use crate::tensor::{mandel_basis, SymTensor3, Tensor6};

pub const DEFAULT_STEP: f64 = 1e-5;

/// Central finite differences of `ln M` at `Z = 0`.
///
/// Since `M(0) = 1`, the first and second derivatives of `ln M` at the
/// origin are the mean and covariance, and they are far better conditioned
/// than the derivatives of `M` itself. Optional Richardson extrapolation
/// combines steps `h` and `h/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiniteDifference {
    pub step: f64,
    pub richardson: bool,
    pub layout: DerivativeLayout,
}

impl Default for FiniteDifference {
    fn default() -> Self {
        Self {
            step: DEFAULT_STEP,
            richardson: false,
            layout: DerivativeLayout::Outer,
        }
    }
}

fn unit(i: usize, j: usize) -> Matrix3<f64> {
    let mut m = Matrix3::zeros();
    m[(i, j)] = 1.0;
    m
}

impl FiniteDifference {
    pub fn new(step: f64) -> Self {
        Self {
            step,
            ..Self::default()
        }
    }

    pub fn with_richardson(mut self, on: bool) -> Self {
        self.richardson = on;
        self
    }

    pub fn with_layout(mut self, layout: DerivativeLayout) -> Self {
        self.layout = layout;
        self
    }

    pub fn mean<M: MomentGenerating + ?Sized>(&self, mgf: &M) -> Result<SymTensor3> {
        let coarse = mean_at(mgf, self.step)?;
        if !self.richardson {
            return Ok(coarse);
        }
        let fine = mean_at(mgf, 0.5 * self.step)?;
        Ok((fine.scaled(4.0) - coarse).scaled(1.0 / 3.0))
    }

    pub fn cov<M: MomentGenerating + ?Sized>(&self, mgf: &M) -> Result<Tensor6> {
        let at = |h: f64| match self.layout {
            DerivativeLayout::Outer => cov_outer_at(mgf, h),
            DerivativeLayout::Symmetric => cov_symmetric_at(mgf, h),
        };
        let coarse = at(self.step)?;
        if !self.richardson {
            return Ok(coarse);
        }
        let fine = at(0.5 * self.step)?;
        Ok((fine * 4.0 - coarse) * (1.0 / 3.0))
    }

    pub fn moments<M: MomentGenerating + ?Sized>(&self, mgf: &M) -> Result<MomentPair> {
        Ok(MomentPair::new(self.mean(mgf)?, self.cov(mgf)?))
    }
}

/// Off-diagonal entries are perturbed as a pair `(i, j)` and `(j, i)`,
/// which yields twice the mean component.
fn mean_at<M: MomentGenerating + ?Sized>(mgf: &M, h: f64) -> Result<SymTensor3> {
    let mut m = Matrix3::zeros();
    for i in 0..3 {
        for j in i..3 {
            let dir = if i == j { unit(i, i) } else { unit(i, j) + unit(j, i) };
            let d = (mgf.log_mgf(&(dir * h))? - mgf.log_mgf(&(dir * -h))?) / (2.0 * h);
            let v = if i == j { d } else { 0.5 * d };
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(SymTensor3::from_matrix(&m))
}

fn second_derivative<M: MomentGenerating + ?Sized>(
    mgf: &M,
    a: &Matrix3<f64>,
    b: &Matrix3<f64>,
    f0: f64,
    h: f64,
    same: bool,
) -> Result<f64> {
    if same {
        let fp = mgf.log_mgf(&(a * h))?;
        let fm = mgf.log_mgf(&(a * -h))?;
        Ok((fp - 2.0 * f0 + fm) / (h * h))
    } else {
        let fpp = mgf.log_mgf(&((a + b) * h))?;
        let fpm = mgf.log_mgf(&((a - b) * h))?;
        let fmp = mgf.log_mgf(&((b - a) * h))?;
        let fmm = mgf.log_mgf(&((a + b) * -h))?;
        Ok((fpp - fpm - fmp + fmm) / (4.0 * h * h))
    }
}

/// Hessian over the nine unconstrained entries, rearranged as
/// `P[ij,kl] = K[il,kj]` and projected onto the Mandel basis.
fn cov_outer_at<M: MomentGenerating + ?Sized>(mgf: &M, h: f64) -> Result<Tensor6> {
    let f0 = mgf.log_mgf(&Matrix3::zeros())?;
    let mut k = [[0.0; 9]; 9];
    for a in 0..9 {
        for b in a..9 {
            let (ea, eb) = (unit(a / 3, a % 3), unit(b / 3, b % 3));
            let v = second_derivative(mgf, &ea, &eb, f0, h, a == b)?;
            k[a][b] = v;
            k[b][a] = v;
        }
    }
    let basis: [Matrix3<f64>; 6] = core::array::from_fn(|p| mandel_basis(p).to_matrix());
    let mut c = Tensor6::zero();
    for p in 0..6 {
        for q in 0..6 {
            let mut acc = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    let ep = basis[p][(i, j)];
                    if ep == 0.0 {
                        continue;
                    }
                    for kk in 0..3 {
                        for l in 0..3 {
                            let eq = basis[q][(kk, l)];
                            if eq != 0.0 {
                                acc += ep * k[3 * i + l][3 * kk + j] * eq;
                            }
                        }
                    }
                }
            }
            c[(p, q)] = acc;
        }
    }
    Ok(c.symmetrized())
}

fn cov_symmetric_at<M: MomentGenerating + ?Sized>(mgf: &M, h: f64) -> Result<Tensor6> {
    let f0 = mgf.log_mgf(&Matrix3::zeros())?;
    let basis: [Matrix3<f64>; 6] = core::array::from_fn(|p| mandel_basis(p).to_matrix());
    let mut c = Tensor6::zero();
    for p in 0..6 {
        for q in p..6 {
            let v = second_derivative(mgf, &basis[p], &basis[q], f0, h, p == q)?;
            c[(p, q)] = v;
            c[(q, p)] = v;
        }
    }
    Ok(c)
}

/// Numerical mean tensor with step `h`.
pub fn fd_mean<M: MomentGenerating + ?Sized>(mgf: &M, h: f64) -> Result<SymTensor3> {
    FiniteDifference::new(h).mean(mgf)
}

/// Numerical covariance tensor with step `h` in the given layout.
pub fn fd_cov<M: MomentGenerating + ?Sized>(
    mgf: &M,
    h: f64,
    layout: DerivativeLayout,
) -> Result<Tensor6> {
    FiniteDifference::new(h).with_layout(layout).cov(mgf)
}

pub fn fd_moments<M: MomentGenerating + ?Sized>(
    mgf: &M,
    h: f64,
    layout: DerivativeLayout,
) -> Result<MomentPair> {
    FiniteDifference::new(h).with_layout(layout).moments(mgf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{MvGaussian, NcMvGamma};
    use crate::tensor::euler_rotation;

    fn rel_err(a: &Tensor6, b: &Tensor6) -> f64 {
        (*a - *b).frobenius_norm() / b.frobenius_norm()
    }

    fn rotated_gamma() -> NcMvGamma {
        let r = euler_rotation(0.3, 1.1, -0.4);
        let psi = SymTensor3::from_eigen([0.5, 0.2, 0.1], &r);
        let theta = SymTensor3::from_eigen([1.5, -0.4, 0.3], &r);
        NcMvGamma::new(2.7, psi, theta).unwrap()
    }

    #[test]
    fn gamma_outer_layout_matches_closed_form() {
        let p = rotated_gamma();
        let m = fd_mean(&p, DEFAULT_STEP).unwrap();
        assert!((m - p.mean()).max_abs() < 1e-8);
        let c = fd_cov(&p, DEFAULT_STEP, DerivativeLayout::Outer).unwrap();
        assert!(rel_err(&c, &p.cov()) < 1e-5, "{}", rel_err(&c, &p.cov()));
    }

    #[test]
    fn gamma_symmetric_layout_matches_component_covariance() {
        let p = rotated_gamma();
        let exact = p.cov_in(DerivativeLayout::Symmetric);
        let c = fd_cov(&p, DEFAULT_STEP, DerivativeLayout::Symmetric).unwrap();
        assert!(rel_err(&c, &exact) < 1e-5);
    }

    #[test]
    fn gaussian_both_layouts() {
        let r = euler_rotation(-0.2, 0.7, 1.3);
        let g = MvGaussian::new(
            SymTensor3::from_eigen([1.1, 0.6, 0.2], &r),
            SymTensor3::from_eigen([0.3, 0.2, 0.05], &r),
            SymTensor3::diag(0.7, 0.4, 0.9),
        )
        .unwrap();
        for layout in [DerivativeLayout::Outer, DerivativeLayout::Symmetric] {
            let fd = FiniteDifference::new(1e-4).with_layout(layout).with_richardson(true);
            let c = fd.cov(&g).unwrap();
            assert!(rel_err(&c, &g.cov_in(layout)) < 1e-7, "{layout:?}");
        }
        assert!((fd_mean(&g, 1e-5).unwrap() - *g.mean()).max_abs() < 1e-9);
    }

    #[test]
    fn closure_implements_mgf() {
        let f = |z: &Matrix3<f64>| -> Result<f64> { Ok(2.0 * z[(0, 0)] + z[(1, 2)] + z[(2, 1)]) };
        let m = fd_mean(&f, 1e-5).unwrap();
        assert!((m - SymTensor3::new(2.0, 0.0, 0.0, 1.0, 0.0, 0.0)).max_abs() < 1e-9);
    }
}
