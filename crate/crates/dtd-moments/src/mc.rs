//! Parallel Monte-Carlo runs. Realizations are keyed by `(seed, index)` and
//! collected in index order, so results do not depend on the worker count.

use dtd_moments_core::encoding::signal_dtd;
use dtd_moments_core::experiments::{run_realization, summarize, Fitter, McSummary, Phantom, Realization};
use dtd_moments_core::AcqScheme;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Thread pool bounded to `jobs` workers; `0` uses every available core.
pub fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {jobs} workers: {e}")))
}

pub struct McRun {
    pub summary: McSummary,
    pub realizations: Vec<Realization>,
}

pub fn run_parallel(
    pool: &rayon::ThreadPool,
    phantom: &Phantom,
    scheme: &AcqScheme,
    fitter: &Fitter,
    snr: f64,
    n: usize,
    seed: u64,
) -> McRun {
    let clean = signal_dtd(&phantom.dtd, scheme);
    let realizations: Vec<Realization> = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| run_realization(&clean, scheme, fitter, snr, seed, i))
            .collect()
    });
    McRun {
        summary: summarize(phantom, fitter, snr, seed, &realizations),
        realizations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dtd_moments_core::experiments::{phantom_bimodal_iso, run_monte_carlo};
    use dtd_moments_core::{generate_scheme, SchemeSpec};

    #[test]
    fn parallel_equals_serial() {
        let scheme = generate_scheme(&SchemeSpec::default_scheme()).unwrap();
        let ph = phantom_bimodal_iso(1.0, 0.1, 16).unwrap();
        let serial = run_monte_carlo(&ph, &scheme, &Fitter::Covariance, 30.0, 24, 9);
        for jobs in [1, 3] {
            let par = run_parallel(&pool(jobs).unwrap(), &ph, &scheme, &Fitter::Covariance, 30.0, 24, 9);
            assert_eq!(par.summary, serial);
        }
    }
}
