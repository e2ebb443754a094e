use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// One Rician draw `√((s + ν/snr)² + (ν′/snr)²)` with the normals taken
/// from the stream `(seed, index)`.
pub fn rician_sample(s: f64, snr: f64, seed: u64, index: u64) -> f64 {
    if snr.is_infinite() {
        return s;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let nu: f64 = StandardNormal.sample(&mut rng);
    let nu_q: f64 = StandardNormal.sample(&mut rng);
    let re = s + nu / snr;
    let im = nu_q / snr;
    (re * re + im * im).sqrt()
}

/// Adds Rician noise point by point; an infinite SNR returns the input.
pub fn add_rician(signals: &[f64], snr: f64, seed: u64) -> Vec<f64> {
    signals
        .iter()
        .enumerate()
        .map(|(i, s)| rician_sample(*s, snr, seed, i as u64))
        .collect()
}
