use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LmOptions {
    pub max_iter: usize,
    /// Relative step tolerance.
    pub step_tol: f64,
    /// Infinity-norm tolerance on the gradient `Jᵀr`.
    pub grad_tol: f64,
    /// Relative central-difference step for the Jacobian.
    pub jac_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            step_tol: 1e-10,
            grad_tol: 1e-10,
            jac_step: 6e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LmReport {
    pub params: Vec<f64>,
    /// Sum of squared residuals.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

fn jacobian<F>(f: &mut F, x: &[f64], m: usize, rel: f64) -> DMatrix<f64>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = x.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut xp = x.to_vec();
    let (mut rp, mut rm) = (vec![0.0; m], vec![0.0; m]);
    for j in 0..n {
        let h = rel * x[j].abs().max(1.0);
        xp[j] = x[j] + h;
        f(&xp, &mut rp);
        xp[j] = x[j] - h;
        f(&xp, &mut rm);
        xp[j] = x[j];
        for i in 0..m {
            jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
        }
    }
    jac
}

/// Damped Gauss-Newton minimization of `Σ rᵢ(x)²` with Marquardt scaling
/// and a central-difference Jacobian.
///
/// `residual(x, out)` fills `out` (length `m`). Non-finite residuals are
/// treated as an infinitely bad step.
pub fn levenberg_marquardt<F>(mut residual: F, x0: &[f64], m: usize, opts: &LmOptions) -> LmReport
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = vec![0.0; m];
    residual(&x, &mut r);
    let mut cost = sum_sq(&r);
    if !cost.is_finite() {
        return LmReport {
            params: x,
            cost,
            iterations: 0,
            converged: false,
        };
    }
    let mut lambda = 1e-3;
    let mut trial = vec![0.0; m];
    let mut converged = false;
    let mut iterations = 0;
    let mut jac = jacobian(&mut residual, &x, m, opts.jac_step);
    let mut fresh = true;
    while iterations < opts.max_iter {
        iterations += 1;
        if !fresh {
            jac = jacobian(&mut residual, &x, m, opts.jac_step);
        }
        let rv = DVector::from_column_slice(&r);
        let g = jac.tr_mul(&rv);
        if g.amax() < opts.grad_tol {
            converged = true;
            break;
        }
        let jtj = jac.tr_mul(&jac);
        let mut accepted = false;
        loop {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                if lambda > 1e20 {
                    break;
                }
                continue;
            };
            let delta = chol.solve(&(-&g));
            let xnorm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let small = delta.norm() <= opts.step_tol * (xnorm + opts.step_tol);
            let xt: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, d)| a + d).collect();
            residual(&xt, &mut trial);
            let tcost = sum_sq(&trial);
            if tcost.is_finite() && tcost <= cost {
                x = xt;
                core::mem::swap(&mut r, &mut trial);
                cost = tcost;
                lambda = (lambda * 0.3).max(1e-12);
                accepted = true;
                if small {
                    converged = true;
                }
                break;
            }
            if small {
                converged = true;
                break;
            }
            lambda *= 10.0;
            if lambda > 1e20 {
                break;
            }
        }
        fresh = false;
        if converged || !accepted {
            break;
        }
    }
    LmReport {
        params: x,
        cost,
        iterations,
        converged,
    }
}
