use alloc::vec::Vec;

use nalgebra::Vector3;
#[allow(unused_imports)]
use num_traits::Float;

use crate::tensor::SymTensor3;

/// Standard-normal nodes on `n` equal cells of `[-4, 4]`, weighted by the
/// density and rescaled so the discrete variance is exactly one.
pub fn normal_nodes(n: usize) -> Vec<(f64, f64)> {
    assert!(n > 0, "at least one node");
    if n == 1 {
        return alloc::vec![(1.0, 0.0)];
    }
    let width = 8.0 / n as f64;
    let raw: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let z = -4.0 + (k as f64 + 0.5) * width;
            ((-0.5 * z * z).exp(), z)
        })
        .collect();
    let total: f64 = raw.iter().map(|r| r.0).sum();
    let var: f64 = raw.iter().map(|(w, z)| w * z * z).sum::<f64>() / total;
    let s = var.sqrt().recip();
    raw.into_iter().map(|(w, z)| (w / total, z * s)).collect()
}

/// Normal `N(mean, sd²)` discretized on `n` equal cells of
/// `[max(lo, mean − 4sd), min(hi, mean + 4sd)]` and renormalized.
pub fn truncated_normal_nodes(mean: f64, sd: f64, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    if sd <= 0.0 || n == 1 {
        return alloc::vec![(1.0, mean.clamp(lo, hi))];
    }
    let a = lo.max(mean - 4.0 * sd);
    let b = hi.min(mean + 4.0 * sd);
    if b <= a {
        return alloc::vec![(1.0, a)];
    }
    let width = (b - a) / n as f64;
    let raw: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let x = a + (k as f64 + 0.5) * width;
            let z = (x - mean) / sd;
            ((-0.5 * z * z).exp(), x)
        })
        .collect();
    let total: f64 = raw.iter().map(|r| r.0).sum();
    raw.into_iter().map(|(w, x)| (w / total, x)).collect()
}

/// Fibonacci lattice of `n` points on the whole sphere.
pub fn fibonacci_sphere(n: usize) -> Vec<Vector3<f64>> {
    let golden = core::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            Vector3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// Normalized Watson weights `∝ exp(k·(u·ẑ)²)`.
pub fn watson_weights(dirs: &[Vector3<f64>], k: f64) -> Vec<f64> {
    let peak = if k > 0.0 { k } else { 0.0 };
    let w: Vec<f64> = dirs.iter().map(|u| (k * u.z * u.z - peak).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// `Σ wᵢ P₂(uᵢ·ẑ)`: order about the Watson axis.
pub fn watson_axis_order(dirs: &[Vector3<f64>], weights: &[f64]) -> f64 {
    dirs.iter().zip(weights).map(|(u, w)| w * (1.5 * u.z * u.z - 0.5)).sum()
}

/// Order parameter of weighted axes, director taken from the order
/// tensor's largest-magnitude eigenvalue.
pub fn watson_op(dirs: &[Vector3<f64>], weights: &[f64]) -> f64 {
    let mut q = SymTensor3::ZERO;
    for (u, w) in dirs.iter().zip(weights) {
        q += SymTensor3::outer(u).scaled(1.5 * w) - SymTensor3::isotropic(0.5 * w);
    }
    let v = q.eigenvalues();
    if v[0].abs() >= v[2].abs() {
        v[0]
    } else {
        v[2]
    }
}
