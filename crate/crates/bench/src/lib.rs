//! Deterministic workload builders shared by the benchmarks, so numbers
//! are comparable run to run.

use perseus_core::{BitStream, GenBounds, SessionParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// A default-bounds parameter set drawn from a fixed seed.
pub fn demo_params(seed: u64) -> SessionParams {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    SessionParams::generate(&GenBounds::default(), 15, 35, 8, &mut rng)
        .expect("default bounds always admit a code")
}

pub fn random_payload(seed: u64, len: usize) -> Vec<u8> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut bytes = vec![0u8; len];
    rng.fill(&mut bytes[..]);
    bytes
}

pub fn random_message(seed: u64, bits: usize) -> BitStream {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..bits).map(|_| rng.gen_bool(0.5)).collect()
}
