use nalgebra::{Matrix6, SymmetricEigen};

use super::Tensor6;

/// Nearest (Frobenius) symmetric positive semidefinite tensor: the
/// symmetric part is eigendecomposed and negative eigenvalues are clipped
/// to zero.
pub fn nearest_psd(c: &Tensor6) -> Tensor6 {
    let sym = c.symmetrized();
    let eig = SymmetricEigen::new(sym.to_matrix());
    if eig.eigenvalues.iter().all(|&l| l >= 0.0) {
        return sym;
    }
    let clipped = eig.eigenvalues.map(|l| l.max(0.0));
    let v = &eig.eigenvectors;
    let out: Matrix6<f64> = v * Matrix6::from_diagonal(&clipped) * v.transpose();
    Tensor6::from_matrix(&out).symmetrized()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psd_input_is_fixed_point() {
        let a = Tensor6::from_fn(|i, j| ((i + 1) * (j + 2)) as f64 * 0.1);
        let psd = a.transpose().matmul(&a);
        let out = nearest_psd(&psd);
        assert!((out - psd).max_abs() <= 1e-12 * psd.max_abs());
    }

    #[test]
    fn clips_negative_diagonal() {
        let mut c = Tensor6::zero();
        for (i, v) in [1.0, 1.0, 1.0, -1.0, 0.0, 0.0].into_iter().enumerate() {
            c[(i, i)] = v;
        }
        let out = nearest_psd(&c);
        let mut expected = Tensor6::zero();
        for i in 0..3 {
            expected[(i, i)] = 1.0;
        }
        assert!((out - expected).max_abs() < 1e-15);
    }

    #[test]
    fn idempotent() {
        let c = Tensor6::from_fn(|i, j| ((i as f64) - (j as f64) * 0.7).sin() + if i == j { -0.5 } else { 0.0 }).symmetrized();
        let once = nearest_psd(&c);
        let twice = nearest_psd(&once);
        assert!(once.is_positive_semidefinite());
        assert!((once - twice).max_abs() < 1e-13);
    }
}
