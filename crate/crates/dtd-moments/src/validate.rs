//! Finite-difference and sampling checks of the closed-form moments.

use dtd_moments_core::distributions::{fd_moments, GammaSampler};
use dtd_moments_core::{
    euler_rotation, mandel_outer, mandel_vec, DerivativeLayout, MomentPair, MvGaussian, NcMvGamma, SymTensor3,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite-difference step, ms/µm².
pub const FD_STEP: f64 = 1e-5;
pub const GAMMA_TOLERANCE: f64 = 1e-5;
pub const GAUSSIAN_MEAN_TOLERANCE: f64 = 1e-6;
pub const GAUSSIAN_COV_TOLERANCE: f64 = 1e-5;
/// Largest accepted |z|-score of a sampled mean component.
pub const SAMPLING_Z_LIMIT: f64 = 5.0;
pub const SAMPLING_DRAWS: u64 = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dist {
    Gamma,
    Gaussian,
}

fn rotation(rng: &mut ChaCha8Rng) -> nalgebra::Matrix3<f64> {
    euler_rotation(
        rng.random_range(-3.1..3.1),
        rng.random_range(0.0..3.1),
        rng.random_range(-3.1..3.1),
    )
}

/// Random valid nc-mv-Gamma: `κ ∈ [1.1, 10)`, Ψ eigenvalues in
/// `[0.05, 1.5)` µm²/ms, Θ eigenvalues in `(−κ, 5)` on a shared random frame.
pub fn random_gamma(rng: &mut ChaCha8Rng) -> NcMvGamma {
    let kappa = rng.random_range(1.1..10.0);
    let psi: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.05..1.5));
    let theta: [f64; 3] = std::array::from_fn(|_| rng.random_range(-kappa + 0.05..5.0));
    let r = rotation(rng);
    NcMvGamma::new(kappa, SymTensor3::from_eigen(psi, &r), SymTensor3::from_eigen(theta, &r))
        .expect("sampled parameters are valid")
}

/// Random mv-Gaussian with `Σ = Ψ`.
pub fn random_gaussian(rng: &mut ChaCha8Rng) -> MvGaussian {
    let mean = SymTensor3::from_eigen(std::array::from_fn(|_| rng.random_range(0.1..3.0)), &rotation(rng));
    let sigma = SymTensor3::from_eigen(std::array::from_fn(|_| rng.random_range(0.05..1.0)), &rotation(rng));
    MvGaussian::new(mean, sigma, sigma).expect("sampled parameters are valid")
}

/// Relative Frobenius errors of a finite-difference moment pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentErrors {
    pub mean: f64,
    pub cov: f64,
}

fn rel_errors(fd: &MomentPair, mean: &SymTensor3, cov: &dtd_moments_core::Tensor6) -> MomentErrors {
    MomentErrors {
        mean: (fd.mean - *mean).frobenius_norm() / mean.frobenius_norm(),
        cov: (fd.cov - *cov).frobenius_norm() / cov.frobenius_norm(),
    }
}

pub fn gamma_fd_errors(p: &NcMvGamma) -> Result<MomentErrors> {
    let fd = fd_moments(p, FD_STEP, DerivativeLayout::Outer)?;
    Ok(rel_errors(&fd, &p.mean(), &p.cov()))
}

/// Errors against `(M, Σ⊗Σ)`.
pub fn gaussian_fd_errors(g: &MvGaussian) -> Result<MomentErrors> {
    let fd = fd_moments(g, FD_STEP, DerivativeLayout::Outer)?;
    Ok(rel_errors(&fd, g.mean(), &mandel_outer(g.sigma(), g.sigma())))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingCheck {
    pub cases: usize,
    pub draws_per_case: u64,
    pub max_mean_z: f64,
    pub z_limit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub dist: Dist,
    pub trials: usize,
    pub seed: u64,
    pub max_rel_mean_error: f64,
    pub max_rel_cov_error: f64,
    pub mean_tolerance: f64,
    pub cov_tolerance: f64,
    pub sampling: Option<SamplingCheck>,
    pub passed: bool,
}

/// Largest |z|-score of the Mandel mean components over `draws` samples.
pub fn sampled_mean_z(p: &NcMvGamma, draws: u64, seed: u64) -> Result<f64> {
    let sampler = GammaSampler::new(p, seed)?;
    let mut sum = [0.0; 6];
    let mut sq = [0.0; 6];
    for d in sampler.iter(draws) {
        for (k, v) in mandel_vec(&d).0.into_iter().enumerate() {
            sum[k] += v;
            sq[k] += v * v;
        }
    }
    let n = draws as f64;
    let target = mandel_vec(&p.mean()).0;
    Ok((0..6)
        .map(|k| {
            let m = sum[k] / n;
            let se = ((sq[k] / n - m * m).max(0.0) * n / (n - 1.0) / n).sqrt();
            if se == 0.0 {
                if (m - target[k]).abs() < 1e-12 { 0.0 } else { f64::INFINITY }
            } else {
                (m - target[k]).abs() / se
            }
        })
        .fold(0.0, f64::max))
}

/// Gammas the exact sampler supports: half-integer κ and non-negative Θ.
fn sampleable_gamma(rng: &mut ChaCha8Rng) -> NcMvGamma {
    let kappa = 0.5 * rng.random_range(3..=8) as f64;
    let psi: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.1..1.0));
    let theta: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..3.0));
    let r = rotation(rng);
    NcMvGamma::new(kappa, SymTensor3::from_eigen(psi, &r), SymTensor3::from_eigen(theta, &r))
        .expect("sampled parameters are valid")
}

pub fn validate_moments(dist: Dist, trials: usize, seed: u64) -> Result<ValidationReport> {
    if trials == 0 {
        return Err(Error::Usage("--trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_mean, mut worst_cov) = (0.0f64, 0.0f64);
    for _ in 0..trials {
        let e = match dist {
            Dist::Gamma => gamma_fd_errors(&random_gamma(&mut rng))?,
            Dist::Gaussian => gaussian_fd_errors(&random_gaussian(&mut rng))?,
        };
        worst_mean = worst_mean.max(e.mean);
        worst_cov = worst_cov.max(e.cov);
    }
    let (mean_tolerance, cov_tolerance) = match dist {
        Dist::Gamma => (GAMMA_TOLERANCE, GAMMA_TOLERANCE),
        Dist::Gaussian => (GAUSSIAN_MEAN_TOLERANCE, GAUSSIAN_COV_TOLERANCE),
    };
    let sampling = match dist {
        Dist::Gaussian => None,
        Dist::Gamma => {
            let cases = trials.min(4);
            let mut z = 0.0f64;
            for k in 0..cases {
                let p = sampleable_gamma(&mut rng);
                z = z.max(sampled_mean_z(&p, SAMPLING_DRAWS, seed.wrapping_add(k as u64))?);
            }
            Some(SamplingCheck {
                cases,
                draws_per_case: SAMPLING_DRAWS,
                max_mean_z: z,
                z_limit: SAMPLING_Z_LIMIT,
            })
        }
    };
    let passed = worst_mean <= mean_tolerance
        && worst_cov <= cov_tolerance
        && sampling.as_ref().map_or(true, |s| s.max_mean_z <= s.z_limit);
    Ok(ValidationReport {
        dist,
        trials,
        seed,
        max_rel_mean_error: worst_mean,
        max_rel_cov_error: worst_cov,
        mean_tolerance,
        cov_tolerance,
        sampling,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_trials_is_usage() {
        let e = validate_moments(Dist::Gamma, 0, 1).unwrap_err();
        assert_eq!(e.status(), crate::error::ExitStatus::Usage);
    }

    #[test]
    fn small_runs_pass() {
        assert!(validate_moments(Dist::Gamma, 5, 3).unwrap().passed);
        assert!(validate_moments(Dist::Gaussian, 5, 3).unwrap().passed);
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            validate_moments(Dist::Gaussian, 3, 11).unwrap(),
            validate_moments(Dist::Gaussian, 3, 11).unwrap()
        );
    }
}
