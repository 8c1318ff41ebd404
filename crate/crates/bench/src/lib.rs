//! Shared fixtures for the benchmarks.

use keyhole_stc::design::{random_correlation, random_gram};
use keyhole_stc::{effective_spectrum, CorrelationMatrix, EffectiveSpectrum, GramMatrix, RngStream};

/// A random Gram matrix, full-rank correlation and their effective spectrum.
pub fn fixture(m: usize, seed: u64) -> (GramMatrix, CorrelationMatrix, EffectiveSpectrum) {
    let mut rng = RngStream::new(seed, 0).generator();
    let gram = random_gram(m, &mut rng).expect("random gram");
    let corr = random_correlation(m, None, &mut rng).expect("random correlation");
    let spectrum = effective_spectrum(&gram, &corr).expect("effective spectrum");
    (gram, corr, spectrum)
}
