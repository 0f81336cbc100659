//! Deterministic random-stream derivation.
//!
//! Every randomized routine in the crate takes a `u64` seed and derives its
//! draws from a ChaCha stream keyed by that seed, so results are
//! bit-reproducible across runs and platforms. Independent sub-streams
//! (simulation repetitions, per-call jitter) are derived from
//! `(master seed, stream index)` and never share state, which makes
//! fan-out order-independent.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::scalar::Real;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent ChaCha generator from a master seed and a stream
/// index.
pub fn derive_rng(master: u64, stream: u64) -> ChaCha12Rng {
    let mut state = master ^ stream.wrapping_mul(0xA076_1D64_78BD_642F);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(seed)
}

/// Collapse `(master, index)` into a fresh `u64` seed for a sub-run.
pub fn substream_seed(master: u64, index: u64) -> u64 {
    let mut state = master ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93);
    splitmix64(&mut state)
}

/// One standard normal draw, converted into the working scalar type.
pub fn standard_normal<F: Real, R: Rng + ?Sized>(rng: &mut R) -> F {
    let z: f64 = StandardNormal.sample(rng);
    F::of(z)
}

/// One uniform draw on `[0, 1)`.
pub fn uniform_01<F: Real, R: Rng + ?Sized>(rng: &mut R) -> F {
    F::of(rng.random::<f64>())
}

/// One uniform draw on `(0, 1]`, safe to feed into a quantile function.
pub fn uniform_01_open_low<F: Real, R: Rng + ?Sized>(rng: &mut R) -> F {
    F::of(1.0 - rng.random::<f64>())
}

/// One uniform draw on `[-half_width, half_width]`.
pub fn uniform_symmetric<F: Real, R: Rng + ?Sized>(rng: &mut R, half_width: F) -> F {
    half_width * (F::of(2.0) * uniform_01::<F, R>(rng) - F::one())
}
