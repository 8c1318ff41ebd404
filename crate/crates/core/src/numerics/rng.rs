//! Reproducible, splittable random streams.
//!
//! Every stream is a ChaCha8 keystream: the 256-bit key is expanded from the
//! 64-bit seed and the 64-bit stream id lives in ChaCha's nonce, so two
//! streams with distinct ids never share keystream blocks. Child streams for
//! parallel blocks are derived deterministically with [`RngStream::split`].

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// A (seed, stream-id) pair naming one reproducible sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Child stream `index` of this stream; same seed, derived stream id.
    pub fn split(&self, index: u64) -> Self {
        let mixed = splitmix64(self.stream ^ splitmix64(index.wrapping_add(0x5851_f42d_4c95_7f2d)));
        Self { seed: self.seed, stream: mixed }
    }

    pub fn generator(&self) -> StreamRng {
        let mut key = [0u8; 32];
        let mut word = self.seed;
        for chunk in key.chunks_exact_mut(8) {
            word = splitmix64(word);
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(self.stream);
        StreamRng { inner }
    }
}

/// Generator bound to one [`RngStream`].
#[derive(Debug, Clone)]
pub struct StreamRng {
    inner: ChaCha8Rng,
}

impl StreamRng {
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Circularly-symmetric complex Gaussian with E|z|² = 1.
    pub fn complex_normal(&mut self) -> Complex64 {
        let re: f64 = self.standard_normal();
        let im: f64 = self.standard_normal();
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    /// Unit-mean exponential, drawn as |z|² of a unit complex Gaussian.
    pub fn unit_exponential(&mut self) -> f64 {
        self.complex_normal().norm_sqr()
    }

    pub fn fill_complex_normal(&mut self, out: &mut [Complex64]) {
        for z in out {
            *z = self.complex_normal();
        }
    }
}

/// n i.i.d. CN(0, 1) entries.
pub fn sample_cn_vector(n: usize, rng: &mut StreamRng) -> Vec<Complex64> {
    assert!(n >= 1, "sample_cn_vector needs n >= 1");
    (0..n).map(|_| rng.complex_normal()).collect()
}
