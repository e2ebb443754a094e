use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::noise::add_rician;
use super::phantoms::Phantom;
use crate::encoding::{signal_dtd, AcqScheme};
use crate::error::Error;
use crate::fit::{fit_covariance, fit_mv_gamma, MvGammaOptions};

pub const DEFAULT_REALIZATIONS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Fitter {
    MvGamma(MvGammaOptions),
    Covariance,
}

impl Fitter {
    pub fn name(&self) -> &'static str {
        match self {
            Fitter::MvGamma(_) => "mvgamma",
            Fitter::Covariance => "cov",
        }
    }
}

/// Descriptor estimates from one noisy realization.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Estimate {
    pub e_iso: f64,
    pub v_iso: f64,
    pub e_aniso2_norm: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Realization {
    pub index: usize,
    pub estimate: Option<Estimate>,
    pub error: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DescriptorSummary {
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub iqr: f64,
    pub ground_truth: f64,
    /// `median − ground_truth`
    pub bias: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct McSummary {
    pub phantom: String,
    pub fitter: String,
    pub snr: f64,
    pub master_seed: u64,
    pub n_realizations: usize,
    /// Realizations without any estimate.
    pub n_failed: usize,
    /// Realizations whose estimate comes from a non-converged fit.
    pub n_unconverged: usize,
    pub e_iso: DescriptorSummary,
    pub v_iso: DescriptorSummary,
    pub e_aniso2_norm: DescriptorSummary,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Noise seed of realization `index`.
pub fn realization_seed(master_seed: u64, index: usize) -> u64 {
    splitmix64(master_seed ^ splitmix64(index as u64))
}

/// Linear-interpolation quantile of sorted data; NaN when empty.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

fn summarize_one(values: &mut [f64], truth: f64) -> DescriptorSummary {
    values.sort_by(f64::total_cmp);
    let median = quantile(values, 0.5);
    let q25 = quantile(values, 0.25);
    let q75 = quantile(values, 0.75);
    DescriptorSummary {
        median,
        q25,
        q75,
        iqr: q75 - q25,
        ground_truth: truth,
        bias: median - truth,
    }
}

/// Fits one noisy copy of `clean`. Depends only on its arguments, so
/// realizations can run in any order.
pub fn run_realization(
    clean: &[f64],
    scheme: &AcqScheme,
    fitter: &Fitter,
    snr: f64,
    master_seed: u64,
    index: usize,
) -> Realization {
    let noisy = add_rician(clean, snr, realization_seed(master_seed, index));
    let outcome = match fitter {
        Fitter::Covariance => fit_covariance(&noisy, scheme).and_then(|fit| {
            fit.descriptors
                .map(|d| (d, true))
                .ok_or_else(|| Error::Degenerate("fitted mean has no positive trace".into()))
        }),
        Fitter::MvGamma(opts) => match fit_mv_gamma(&noisy, scheme, opts) {
            Ok(fit) => Ok((fit.descriptors, true)),
            Err(Error::NotConverged(fit)) => Ok((fit.descriptors, false)),
            Err(e) => Err(e),
        },
    };
    match outcome {
        Ok((d, converged)) => Realization {
            index,
            estimate: Some(Estimate {
                e_iso: d.e_iso,
                v_iso: d.v_iso,
                e_aniso2_norm: d.e_aniso2_norm,
                converged,
            }),
            error: None,
        },
        Err(e) => Realization {
            index,
            estimate: None,
            error: Some(e.to_string()),
        },
    }
}

/// Medians and interquartile ranges over every realization that produced
/// an estimate.
pub fn summarize(
    phantom: &Phantom,
    fitter: &Fitter,
    snr: f64,
    master_seed: u64,
    realizations: &[Realization],
) -> McSummary {
    let est: Vec<&Estimate> = realizations.iter().filter_map(|r| r.estimate.as_ref()).collect();
    let pick = |f: fn(&Estimate) -> f64| est.iter().map(|e| f(e)).collect::<Vec<f64>>();
    let gt = &phantom.ground_truth;
    McSummary {
        phantom: phantom.label.clone(),
        fitter: fitter.name().into(),
        snr,
        master_seed,
        n_realizations: realizations.len(),
        n_failed: realizations.len() - est.len(),
        n_unconverged: est.iter().filter(|e| !e.converged).count(),
        e_iso: summarize_one(&mut pick(|e| e.e_iso), gt.e_iso),
        v_iso: summarize_one(&mut pick(|e| e.v_iso), gt.v_iso),
        e_aniso2_norm: summarize_one(&mut pick(|e| e.e_aniso2_norm), gt.e_aniso2_norm),
    }
}

/// Serial Monte-Carlo run over `n` realizations.
pub fn run_monte_carlo(
    phantom: &Phantom,
    scheme: &AcqScheme,
    fitter: &Fitter,
    snr: f64,
    n: usize,
    master_seed: u64,
) -> McSummary {
    let clean = signal_dtd(&phantom.dtd, scheme);
    let runs: Vec<Realization> = (0..n)
        .map(|i| run_realization(&clean, scheme, fitter, snr, master_seed, i))
        .collect();
    summarize(phantom, fitter, snr, master_seed, &runs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.25), 1.75);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert!(quantile(&[], 0.5).is_nan());
    }

    #[test]
    fn seeds_differ_per_index() {
        assert_ne!(realization_seed(1, 0), realization_seed(1, 1));
        assert_ne!(realization_seed(1, 0), realization_seed(2, 0));
    }
}
