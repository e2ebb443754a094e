use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::Vector3;
#[allow(unused_imports)]
use num_traits::Float;

use super::quadrature::{fibonacci_sphere, normal_nodes, truncated_normal_nodes, watson_axis_order, watson_weights};
use crate::descriptors::{descriptors_from_moments, moments_from_components, Descriptors, DiscreteDtd};
use crate::error::{Error, Result};
use crate::tensor::SymTensor3;

/// Standard deviation of each isotropic mode of the bimodal phantom, µm²/ms.
pub const BIMODAL_SIGMA: f64 = 0.05;
/// Isotropic diffusivity of the anisotropic phantoms, µm²/ms.
pub const ANISO_D_ISO: f64 = 0.8;
const OP_TOL: f64 = 1e-3;

/// A ground-truth DTD with its exact descriptors.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Phantom {
    pub label: String,
    pub dtd: DiscreteDtd,
    pub ground_truth: Descriptors,
}

impl Phantom {
    pub fn new(label: impl Into<String>, dtd: DiscreteDtd) -> Result<Self> {
        let ground_truth = descriptors_from_moments(&moments_from_components(&dtd))?;
        Ok(Self {
            label: label.into(),
            dtd,
            ground_truth,
        })
    }
}

/// Discretization of the continuous phantom distributions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhantomResolution {
    /// Points per scalar Gaussian (total for the bimodal phantom).
    pub scalar: usize,
    /// Points of the D_Δ distribution.
    pub shape: usize,
    /// Points per axis of the D_par × D_perp grid.
    pub grid: usize,
    pub orientations: usize,
}

impl Default for PhantomResolution {
    fn default() -> Self {
        Self {
            scalar: 64,
            shape: 16,
            grid: 8,
            orientations: 250,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum AnisoShape {
    /// Oblate components, `D_Δ < 0`.
    Planar,
    /// Prolate components, `D_Δ > 0`.
    Linear,
}

/// Two equal-weight Gaussian modes of isotropic diffusivity with
/// `σ = 0.05 µm²/ms`, placed symmetrically about `e_iso` so that the total
/// variance is `v_iso`.
pub fn phantom_bimodal_iso(e_iso: f64, v_iso: f64, n_components: usize) -> Result<Phantom> {
    let sigma2 = BIMODAL_SIGMA * BIMODAL_SIGMA;
    if !(e_iso > 0.0) {
        return Err(Error::Infeasible(format!("E[D_iso] must be positive, got {e_iso}")));
    }
    if !(v_iso >= sigma2) {
        return Err(Error::Infeasible(format!(
            "V[D_iso] = {v_iso} is below the single-mode floor {sigma2}"
        )));
    }
    let per_mode = (n_components / 2).max(1);
    let delta = (v_iso - sigma2).sqrt();
    let nodes = normal_nodes(per_mode);
    let mut parts = Vec::with_capacity(2 * per_mode);
    for centre in [e_iso - delta, e_iso + delta] {
        for (w, z) in &nodes {
            let d = centre + BIMODAL_SIGMA * z;
            if d <= 0.0 {
                return Err(Error::Infeasible(format!(
                    "mode separation {delta:.4} drives diffusivities non-positive"
                )));
            }
            parts.push((0.5 * w, SymTensor3::isotropic(d)));
        }
    }
    Phantom::new(
        format!("bimodal_iso(e_iso={e_iso}, v_iso={v_iso})"),
        DiscreteDtd::from_weights(parts)?,
    )
}

fn axisym_along(d_par: f64, d_perp: f64, u: &Vector3<f64>) -> SymTensor3 {
    SymTensor3::isotropic(d_perp) + SymTensor3::outer(u).scaled(d_par - d_perp)
}

/// Watson orientation set with `OP = target`: axes and weights.
fn watson_orientations(target: f64, n: usize) -> Result<(Vec<Vector3<f64>>, Vec<f64>)> {
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::Range(format!("order parameter {target} outside [0, 1]")));
    }
    if target == 1.0 {
        return Ok((alloc::vec![Vector3::z()], alloc::vec![1.0]));
    }
    let dirs = fibonacci_sphere(n);
    // Order along ẑ is strictly increasing in k, negative k giving girdles.
    let order = |k: f64| watson_axis_order(&dirs, &watson_weights(&dirs, k));
    let unreachable = || Error::Range(format!("order parameter {target} not reachable with {n} orientations"));
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    while order(hi) < target {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(unreachable());
        }
    }
    while order(lo) > target {
        lo *= 2.0;
        if lo < -1e6 {
            return Err(unreachable());
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if order(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * hi.abs().max(1.0) {
            break;
        }
    }
    let k = 0.5 * (lo + hi);
    let w = watson_weights(&dirs, k);
    debug_assert!((watson_axis_order(&dirs, &w) - target).abs() < OP_TOL);
    Ok((dirs, w))
}

fn shape_nodes(mean_delta: f64, n: usize) -> Vec<(f64, f64)> {
    truncated_normal_nodes(mean_delta, 0.1 * mean_delta.abs(), -0.5, 1.0, n)
}

/// `Ẽ[D_aniso²] = E[D_Δ²]` for a constant isotropic diffusivity.
fn shape_e_norm(mean_delta: f64, n: usize) -> f64 {
    shape_nodes(mean_delta, n).iter().map(|(w, d)| w * d * d).sum()
}

/// Anisotropic phantom for an explicit mean `D_Δ`.
pub fn phantom_aniso_from_mean(
    mean_delta: f64,
    op_target: f64,
    res: &PhantomResolution,
) -> Result<Phantom> {
    if !(-0.5..=1.0).contains(&mean_delta) || mean_delta == 0.0 {
        return Err(Error::Range(format!(
            "mean D_Δ must be non-zero within [-0.5, 1], got {mean_delta}"
        )));
    }
    let shapes = shape_nodes(mean_delta, res.shape);
    let (dirs, weights) = watson_orientations(op_target, res.orientations)?;
    let mut parts = Vec::with_capacity(shapes.len() * dirs.len());
    for (ws, dd) in &shapes {
        let d_par = ANISO_D_ISO * (1.0 + 2.0 * dd);
        let d_perp = ANISO_D_ISO * (1.0 - dd);
        for (u, wo) in dirs.iter().zip(&weights) {
            if ws * wo > 0.0 {
                parts.push((ws * wo, axisym_along(d_par, d_perp, u)));
            }
        }
    }
    Phantom::new(
        format!("aniso(mean_d_delta={mean_delta:.6}, op={op_target})"),
        DiscreteDtd::from_weights(parts)?,
    )
}

/// Anisotropic phantom with `D_iso = 0.8 µm²/ms`, a Gaussian `D_Δ`
/// distribution (std/mean = 0.1) whose mean is solved for the requested
/// `Ẽ[D_aniso²]`, and Watson dispersion solved for the requested OP.
pub fn phantom_aniso(
    e_aniso2_norm: f64,
    op_target: f64,
    shape: AnisoShape,
    res: &PhantomResolution,
) -> Result<Phantom> {
    if !(e_aniso2_norm > 0.0) {
        return Err(Error::Range(format!(
            "target Ẽ[D_aniso²] must be positive, got {e_aniso2_norm}"
        )));
    }
    let limit = match shape {
        AnisoShape::Linear => 1.0,
        AnisoShape::Planar => -0.5,
    };
    let reachable = shape_e_norm(limit, res.shape);
    if e_aniso2_norm > reachable {
        return Err(Error::Range(format!(
            "Ẽ[D_aniso²] = {e_aniso2_norm} unreachable for {shape:?} shapes (max {reachable:.4})"
        )));
    }
    let (mut lo, mut hi) = (0.0f64, limit.abs());
    let sign = limit.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if shape_e_norm(sign * mid, res.shape) < e_aniso2_norm {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    phantom_aniso_from_mean(sign * 0.5 * (lo + hi), op_target, res)
}

/// CSF-like isotropic mode (3 ± 0.1 µm²/ms) with fraction `f_iso`, mixed
/// with Watson-dispersed axisymmetric tensors (`D_par` 1.77 ± 0.177,
/// `D_perp` 0.31 ± 0.031 µm²/ms, OP = 0.4).
pub fn phantom_mixed(f_iso: f64, res: &PhantomResolution) -> Result<Phantom> {
    if !(0.0..=1.0).contains(&f_iso) {
        return Err(Error::Range(format!("f_iso = {f_iso} outside [0, 1]")));
    }
    let iso_nodes = normal_nodes(res.scalar);
    let iso: Vec<(f64, SymTensor3)> = iso_nodes
        .iter()
        .map(|(w, z)| (*w, SymTensor3::isotropic(3.0 + 0.1 * z)))
        .collect();
    let grid = normal_nodes(res.grid);
    let (dirs, weights) = watson_orientations(0.4, res.orientations)?;
    let mut aniso = Vec::with_capacity(grid.len() * grid.len() * dirs.len());
    for (wp, zp) in &grid {
        let d_par = 1.77 * (1.0 + 0.1 * zp);
        for (wr, zr) in &grid {
            let d_perp = 0.31 * (1.0 + 0.1 * zr);
            for (u, wo) in dirs.iter().zip(&weights) {
                let w = wp * wr * wo;
                if w > 0.0 {
                    aniso.push((w, axisym_along(d_par, d_perp, u)));
                }
            }
        }
    }
    let dtd = DiscreteDtd::from_weights(iso)?.mix(&DiscreteDtd::from_weights(aniso)?, f_iso)?;
    Phantom::new(format!("mixed(f_iso={f_iso})"), dtd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptors::order_parameter;

    fn small() -> PhantomResolution {
        PhantomResolution {
            orientations: 250,
            ..PhantomResolution::default()
        }
    }

    #[test]
    fn bimodal_examples() {
        let p = phantom_bimodal_iso(0.8, BIMODAL_SIGMA * BIMODAL_SIGMA, 64).unwrap();
        assert!((p.ground_truth.e_iso - 0.8).abs() < 1e-14);
        assert!((p.ground_truth.v_iso - 0.0025).abs() < 1e-15);
        let p = phantom_bimodal_iso(1.9, 1.21, 64).unwrap();
        assert!((p.ground_truth.v_iso - 1.21).abs() < 1e-12);
        assert!((p.ground_truth.e_iso - 1.9).abs() < 1e-14);
        assert!(matches!(phantom_bimodal_iso(1.0, 0.0, 64), Err(Error::Infeasible(_))));
        assert!(matches!(phantom_bimodal_iso(0.8, 1.0, 64), Err(Error::Infeasible(_))));
    }

    #[test]
    fn aniso_targets() {
        let res = small();
        for (e, op) in [(0.5, 1.0), (0.5, 0.6), (0.5, 0.2)] {
            let p = phantom_aniso(e, op, AnisoShape::Linear, &res).unwrap();
            assert!((p.ground_truth.e_aniso2_norm - e).abs() < 1e-9, "{e} {op}");
            assert!((order_parameter(&p.dtd).unwrap() - op).abs() < 1e-3);
            assert!((p.ground_truth.e_iso - ANISO_D_ISO).abs() < 1e-12);
        }
        let p = phantom_aniso(0.1, 0.4, AnisoShape::Planar, &res).unwrap();
        assert!((p.ground_truth.e_aniso2_norm - 0.1).abs() < 1e-9);
        let p = phantom_aniso(0.3, 0.0, AnisoShape::Linear, &res).unwrap();
        assert!(order_parameter(&p.dtd).unwrap().abs() <= 0.02);
        assert!(matches!(
            phantom_aniso(0.5, 0.5, AnisoShape::Planar, &res),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn coarse_orientation_sets_reach_every_op() {
        let res = PhantomResolution {
            orientations: 60,
            ..PhantomResolution::default()
        };
        for op in [0.0, 0.2, 0.4, 0.6] {
            let p = phantom_aniso(0.5, op, AnisoShape::Linear, &res).unwrap();
            assert!((order_parameter(&p.dtd).unwrap() - op).abs() < 0.02, "{op}");
        }
    }

    #[test]
    fn mixed_boundaries() {
        let res = small();
        let p = phantom_mixed(0.5, &res).unwrap();
        assert!((p.ground_truth.e_iso - (1.5 + 0.5 * (1.77 + 0.62) / 3.0)).abs() < 1e-12);
        let p = phantom_mixed(1.0, &res).unwrap();
        assert!(p.ground_truth.e_aniso2.abs() < 1e-12);
        assert!((p.ground_truth.e_iso - 3.0).abs() < 1e-12);
        let p = phantom_mixed(0.0, &res).unwrap();
        assert!((order_parameter(&p.dtd).unwrap() - 0.4).abs() < 1e-3);
        assert!(matches!(phantom_mixed(1.5, &res), Err(Error::Range(_))));
    }
}
