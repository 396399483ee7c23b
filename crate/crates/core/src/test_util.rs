//! Shared helpers for unit tests: seeded RNGs and random valid code/pattern
//! instances of controllable size.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::code::{ConvCode, PuncturedCode};
use crate::gf2::{BitStream, Gf2Poly};

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn random_bits<R: Rng>(rng: &mut R, len: usize) -> BitStream {
    (0..len).map(|_| rng.gen::<bool>()).collect()
}

pub fn random_code<R: Rng>(
    rng: &mut R,
    k_range: RangeInclusive<usize>,
    n_range: RangeInclusive<usize>,
    mem_range: RangeInclusive<usize>,
) -> ConvCode {
    loop {
        let k = rng.gen_range(k_range.clone());
        let n = rng.gen_range(n_range.clone());
        if k >= n {
            continue;
        }
        let mem = rng.gen_range(mem_range.clone());
        let polys: Vec<Vec<Gf2Poly>> = (0..k)
            .map(|_| (0..n).map(|_| Gf2Poly::random(mem, rng)).collect())
            .collect();
        if let Ok(code) = ConvCode::new(k, n, mem, polys) {
            return code;
        }
    }
}

pub fn random_punctured<R: Rng>(
    rng: &mut R,
    k_range: RangeInclusive<usize>,
    n_range: RangeInclusive<usize>,
    mem_range: RangeInclusive<usize>,
    width_range: RangeInclusive<usize>,
) -> PuncturedCode {
    loop {
        let code = random_code(rng, k_range.clone(), n_range.clone(), mem_range.clone());
        let width = rng.gen_range(width_range.clone());
        let rows: Vec<Vec<bool>> = (0..code.n())
            .map(|_| (0..width).map(|_| rng.gen_bool(0.8)).collect())
            .collect();
        if let Ok(pc) = PuncturedCode::new(code, &rows) {
            return pc;
        }
    }
}
