//! The keyed deterministic noise layer: four Fibonacci LFSRs feeding a
//! 16-entry biased Boolean filter.
//!
//! Stepping convention (fixed bit-exactly for interoperability): each
//! register outputs its lowest bit, computes feedback as the parity of
//! `reg AND tap`, then shifts right with the feedback entering at the top.
//! The filter is indexed as `(b1<<3) | (b2<<2) | (b3<<1) | b4` over the four
//! register output bits, and the noise bit is applied to the punctured bit
//! stream *before* hex transport encoding.

use rand::{CryptoRng, Rng};

use crate::error::{Error, Result};
use crate::gf2::BitStream;

/// Register lengths; the key is their concatenated initial fills,
/// 19+23+29+31 = 102 bits.
pub const LFSR_LENS: [u32; 4] = [19, 23, 29, 31];

/// Feedback tap masks. Register masks are derived as `(1 << len) - 1`; the
/// published MASK2 constant (27 bits) contradicts its own register length of
/// 23 and is treated as an erratum.
pub const LFSR_TAPS: [u32; 4] = [0x47E07, 0x1772AF, 0x1C95269, 0x43E98841];

/// Noise probability percentage must stay in this range: 0 defeats the
/// scheme, and anything near 50 is cryptography rather than noise.
pub const PROBA_RANGE: std::ops::RangeInclusive<u8> = 1..=49;

fn reg_mask(idx: usize) -> u32 {
    ((1u64 << LFSR_LENS[idx]) - 1) as u32
}

/// The 102-bit secret: initial fills for the four registers.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct NoiseKey {
    pub inits: [u32; 4],
}

impl NoiseKey {
    /// Draws a fresh random key: each fill is masked to its register width
    /// and redrawn if zero (an all-zero LFSR state is a fixed point).
    pub fn generate<R: Rng + CryptoRng + ?Sized>(rng: &mut R) -> Self {
        let mut inits = [0u32; 4];
        for (i, init) in inits.iter_mut().enumerate() {
            *init = loop {
                let candidate = rng.next_u32() & reg_mask(i);
                if candidate != 0 {
                    break candidate;
                }
            };
        }
        NoiseKey { inits }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, &init) in self.inits.iter().enumerate() {
            if init == 0 {
                return Err(Error::InvalidParams(format!(
                    "noise key register {} is zero",
                    i + 1
                )));
            }
            if init > reg_mask(i) {
                return Err(Error::InvalidParams(format!(
                    "noise key register {} exceeds {} bits",
                    i + 1,
                    LFSR_LENS[i]
                )));
            }
        }
        Ok(())
    }
}

/// Draws a noise configuration: `proba` uniform in `[lo, hi]` percent, and a
/// 16-entry filter with each entry set with probability `proba/100`,
/// resampled while degenerate (all-zero or all-one).
pub fn gen_noise_config<R: Rng + CryptoRng + ?Sized>(
    rng: &mut R,
    lo: u8,
    hi: u8,
) -> Result<(u16, u8)> {
    if lo < *PROBA_RANGE.start() || hi > *PROBA_RANGE.end() || lo > hi {
        return Err(Error::InvalidRange(format!(
            "noise probability range [{lo}, {hi}] outside [1, 49]"
        )));
    }
    let proba = rng.gen_range(lo..=hi);
    let bf = loop {
        let mut bf = 0u16;
        for entry in 0..16 {
            if rng.gen_range(0..100u8) < proba {
                bf |= 1 << entry;
            }
        }
        if bf != 0 && bf != 0xFFFF {
            break bf;
        }
    };
    Ok((bf, proba))
}

/// The keystream generator. Stateful and single-owner: one generator per
/// payload, stepped sequentially in transmission order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NoiseGenerator {
    regs: [u32; 4],
    bf: u16,
    proba: u8,
}

impl NoiseGenerator {
    /// Builds a generator at keystream position 0. The filter table is taken
    /// as-is (a degenerate table is permitted for test constructions); the
    /// probability tag must lie in [1, 49].
    pub fn new(key: &NoiseKey, bf: u16, proba: u8) -> Result<Self> {
        key.validate()?;
        if !PROBA_RANGE.contains(&proba) {
            return Err(Error::InvalidRange(format!(
                "noise probability {proba} outside [1, 49]"
            )));
        }
        Ok(NoiseGenerator {
            regs: key.inits,
            bf,
            proba,
        })
    }

    /// Filter table weight; the realized flip probability is `weight/16`.
    pub fn filter_weight(&self) -> u32 {
        self.bf.count_ones()
    }

    pub fn proba(&self) -> u8 {
        self.proba
    }

    /// Advances every register one step and filters their output bits into
    /// one noise bit.
    pub fn step(&mut self) -> bool {
        let mut index = 0usize;
        for (i, reg) in self.regs.iter_mut().enumerate() {
            let out = *reg & 1;
            let feedback = (*reg & LFSR_TAPS[i]).count_ones() & 1;
            *reg = (*reg >> 1) | (feedback << (LFSR_LENS[i] - 1));
            index = (index << 1) | out as usize;
        }
        (self.bf >> index) & 1 == 1
    }

    /// XORs the keystream into `s`. Applying again with an identically keyed
    /// generator restores the input (XOR involution).
    pub fn apply(&mut self, s: &BitStream) -> BitStream {
        let mut out = BitStream::with_capacity(s.len());
        for bit in s.iter() {
            out.push(bit ^ self.step());
        }
        out
    }
}
