//! Reproducible, counter-based random streams.
//!
//! Every random quantity is drawn from a ChaCha8 stream addressed by a key
//! and a stream number. Experiment seeds are derived *by position* — the
//! output block at counter `index` of the stream `tag` under key
//! `master_seed` — so a sample's randomness does not depend on which worker
//! draws it or in which order samples are processed.
//!
//! Gaussian variates use the Box–Muller transform on pairs of uniforms
//! (`u₁ ∈ (0,1]`, `u₂ ∈ [0,1)`, both with 53 random bits), returning both
//! the cosine and the sine variate in that order.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn key_from(seed: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key
}

/// Derives the seed for sample `index` of stream `tag` under `master_seed`.
///
/// This is a pure function of its arguments (a single ChaCha8 output word at
/// a fixed counter position), which makes disorder averages invariant under
/// parallel scheduling.
pub fn derive_seed(master_seed: u64, tag: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::from_seed(key_from(master_seed));
    rng.set_stream(tag);
    rng.set_word_pos(u128::from(index) * 2);
    rng.next_u64()
}

/// Packs small integers into a stream tag (16 bits each).
pub fn stream_tag(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0u64, |acc, &p| acc.rotate_left(16) ^ (p & 0xffff))
}

/// A random stream keyed by a 64-bit seed and a stream number.
#[derive(Debug, Clone)]
pub struct StreamRng {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl StreamRng {
    /// Opens stream `stream` under key `seed`.
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::from_seed(key_from(seed));
        rng.set_stream(stream);
        Self { rng, spare: None }
    }

    /// Raw 64-bit output.
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1]`.
    fn uniform_open_low(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal variate (Box–Muller).
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform_open_low();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// Bernoulli variate with success probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Uniform integer in `[0, bound)` (bound > 0), by rejection.
    pub fn below(&mut self, bound: u64) -> u64 {
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let v = self.rng.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }
}
