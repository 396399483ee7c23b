//! Random generation of complete codec parameter sets.
//!
//! The generator draws `(k, n, mem, M)` uniformly from configurable ranges,
//! resampling until the tuple is usable (`k < n`, and the puncturing budget
//! leaves at least `k·M` symbols per period so decoding remains possible).
//! Polynomials are uniform over all coefficient vectors of degree ≤ `mem`;
//! punctured positions are a uniform distinct subset that never blanks an
//! entire pattern column. Every candidate is probe-decoded end to end before
//! being returned, so a caller never receives parameters that cannot round
//! trip; 64 consecutive probe failures abort generation.

use rand::{CryptoRng, Rng};

use crate::code::{ConvCode, PuncturedCode, MAX_MEMORY, MAX_PATTERN_WIDTH, MAX_STREAMS};
use crate::decode::decode_linear;
use crate::error::{Error, Result};
use crate::gf2::{BitStream, Gf2Poly};

/// Inclusive parameter ranges, each expressed as `min` plus a `span`
/// (`value ∈ [min, min + span]`).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct GenBounds {
    pub k_min: usize,
    pub k_span: usize,
    pub n_min: usize,
    pub n_span: usize,
    pub mem_min: usize,
    pub mem_span: usize,
    pub mwidth_min: usize,
    pub mwidth_span: usize,
}

impl Default for GenBounds {
    /// The published operating point: k ∈ [1,6], n ∈ [5,11], mem ∈ [10,30],
    /// pattern width ∈ [6,22].
    fn default() -> Self {
        GenBounds {
            k_min: 1,
            k_span: 5,
            n_min: 5,
            n_span: 6,
            mem_min: 10,
            mem_span: 20,
            mwidth_min: 6,
            mwidth_span: 16,
        }
    }
}

impl GenBounds {
    pub fn validate(&self) -> Result<()> {
        if self.k_min < 1 {
            return Err(Error::InvalidBounds("k_min must be at least 1".into()));
        }
        if self.mwidth_min < 1 {
            return Err(Error::InvalidBounds(
                "pattern width must be at least 1".into(),
            ));
        }
        if self.k_min >= self.n_min + self.n_span {
            return Err(Error::InvalidBounds(format!(
                "no tuple with k < n: k_min = {} but n never exceeds {}",
                self.k_min,
                self.n_min + self.n_span
            )));
        }
        if self.k_min + self.k_span > MAX_STREAMS || self.n_min + self.n_span > MAX_STREAMS {
            return Err(Error::InvalidBounds(format!(
                "stream counts are capped at {MAX_STREAMS}"
            )));
        }
        if self.mem_min + self.mem_span > MAX_MEMORY {
            return Err(Error::InvalidBounds(format!(
                "memory is capped at {MAX_MEMORY}"
            )));
        }
        if self.mwidth_min + self.mwidth_span > MAX_PATTERN_WIDTH {
            return Err(Error::InvalidBounds(format!(
                "pattern width is capped at {MAX_PATTERN_WIDTH}"
            )));
        }
        Ok(())
    }
}

/// Default share of pattern positions that are punctured away: one in 8.
pub const DEFAULT_PUNCTURE_DIVISOR: u32 = 8;

/// Abort after this many consecutive candidates fail the probe decode.
const MAX_PROBE_FAILURES: u32 = 64;

/// Give up on tuple drawing after this many rejections; with any usable
/// bounds the accept probability is far from zero, so exhausting this budget
/// means the bounds admit no (or practically no) valid tuple.
const MAX_TUPLE_DRAWS: u32 = 10_000;

fn punctured_count(n: usize, mwidth: usize, divisor: u32) -> usize {
    n * mwidth / divisor as usize
}

fn tuple_is_valid(k: usize, n: usize, mwidth: usize, divisor: u32) -> bool {
    let weight = n * mwidth - punctured_count(n, mwidth, divisor);
    k < n && weight >= k * mwidth
}

fn draw_tuple<R: Rng + ?Sized>(
    bounds: &GenBounds,
    divisor: u32,
    rng: &mut R,
) -> Result<(usize, usize, usize, usize)> {
    for _ in 0..MAX_TUPLE_DRAWS {
        let k = rng.gen_range(bounds.k_min..=bounds.k_min + bounds.k_span);
        let n = rng.gen_range(bounds.n_min..=bounds.n_min + bounds.n_span);
        let mem = rng.gen_range(bounds.mem_min..=bounds.mem_min + bounds.mem_span);
        let mwidth = rng.gen_range(bounds.mwidth_min..=bounds.mwidth_min + bounds.mwidth_span);
        if tuple_is_valid(k, n, mwidth, divisor) {
            return Ok((k, n, mem, mwidth));
        }
    }
    Err(Error::InvalidBounds(
        "bounds admit no tuple with k < n and enough unpunctured symbols".into(),
    ))
}

/// Uniformly chooses which pattern positions to puncture: `count` distinct
/// cells of the `n × mwidth` grid, redrawn whenever a column would lose all
/// its symbols. Feasible because `count ≤ n·mwidth/8 ≤ (n-1)·mwidth`.
fn draw_pattern<R: Rng + ?Sized>(
    n: usize,
    mwidth: usize,
    count: usize,
    rng: &mut R,
) -> Vec<Vec<bool>> {
    let cells = n * mwidth;
    let mut indices: Vec<usize> = (0..cells).collect();
    'placement: loop {
        for i in 0..count {
            let j = rng.gen_range(i..cells);
            indices.swap(i, j);
        }
        let mut col_zeros = vec![0usize; mwidth];
        for &idx in &indices[..count] {
            let col = idx % mwidth;
            col_zeros[col] += 1;
            if col_zeros[col] == n {
                continue 'placement;
            }
        }
        let mut pattern = vec![vec![true; mwidth]; n];
        for &idx in &indices[..count] {
            pattern[idx / mwidth][idx % mwidth] = false;
        }
        return pattern;
    }
}

fn draw_polys<R: Rng + ?Sized>(k: usize, n: usize, mem: usize, rng: &mut R) -> Vec<Vec<Gf2Poly>> {
    (0..k)
        .map(|_| loop {
            let row: Vec<Gf2Poly> = (0..n).map(|_| Gf2Poly::random(mem, rng)).collect();
            if row.iter().any(|p| !p.is_zero()) {
                break row;
            }
        })
        .collect()
}

/// Encodes and decodes a throwaway message through the candidate; the
/// generator only returns parameters that survive this.
fn probe(pc: &PuncturedCode, rng: &mut (impl Rng + ?Sized)) -> bool {
    let k = pc.base().k();
    let msg_bits = k * 256usize.div_ceil(k);
    let msg: BitStream = (0..msg_bits).map(|_| rng.gen_bool(0.5)).collect();
    let coded = match pc.base().encode(&msg) {
        Ok(c) => c,
        Err(_) => return false,
    };
    let es = match pc.unpuncture(&pc.puncture(&coded)) {
        Ok(es) => es,
        Err(_) => return false,
    };
    match decode_linear(pc, &es, msg_bits) {
        Ok(report) => report.message == msg,
        Err(_) => false,
    }
}

/// Draws a full parameter set with the default puncturing share.
pub fn generate_code<R: Rng + CryptoRng + ?Sized>(
    bounds: &GenBounds,
    rng: &mut R,
) -> Result<PuncturedCode> {
    generate_code_with_divisor(bounds, DEFAULT_PUNCTURE_DIVISOR, rng)
}

/// Draws a full parameter set, puncturing `n·M/divisor` positions per
/// period. Larger divisors puncture less and decode more robustly.
pub fn generate_code_with_divisor<R: Rng + CryptoRng + ?Sized>(
    bounds: &GenBounds,
    divisor: u32,
    rng: &mut R,
) -> Result<PuncturedCode> {
    if !matches!(divisor, 8 | 16 | 32) {
        return Err(Error::InvalidRange(format!(
            "puncture divisor must be 8, 16, or 32, got {divisor}"
        )));
    }
    bounds.validate()?;
    let mut failures = 0;
    loop {
        let (k, n, mem, mwidth) = draw_tuple(bounds, divisor, rng)?;
        let count = punctured_count(n, mwidth, divisor);
        let pattern = draw_pattern(n, mwidth, count, rng);
        let code = ConvCode::new(k, n, mem, draw_polys(k, n, mem, rng))?;
        let pc = PuncturedCode::new(code, &pattern)?;
        if probe(&pc, rng) {
            return Ok(pc);
        }
        failures += 1;
        if failures >= MAX_PROBE_FAILURES {
            return Err(Error::GenerationFailure(MAX_PROBE_FAILURES));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::{random_bits, rng};

    #[test]
    fn default_bounds_match_published_ranges() {
        let b = GenBounds::default();
        assert_eq!((b.k_min, b.k_min + b.k_span), (1, 6));
        assert_eq!((b.n_min, b.n_min + b.n_span), (5, 11));
        assert_eq!((b.mem_min, b.mem_min + b.mem_span), (10, 30));
        assert_eq!((b.mwidth_min, b.mwidth_min + b.mwidth_span), (6, 22));
    }

    #[test]
    fn generated_codes_respect_bounds_and_round_trip() {
        let b = GenBounds::default();
        let mut r = rng(31);
        for _ in 0..40 {
            let pc = generate_code(&b, &mut r).unwrap();
            let (k, n, mem) = (pc.base().k(), pc.base().n(), pc.base().mem());
            assert!((1..=6).contains(&k) && (5..=11).contains(&n) && k < n);
            assert!((10..=30).contains(&mem));
            assert!((6..=22).contains(&pc.width()));
            assert_eq!(pc.weight(), n * pc.width() - n * pc.width() / 8);
            assert!(pc.weight() >= k * pc.width());

            // Fresh probe with a message the generator never saw.
            let msg = random_bits(&mut r, k * 512usize.div_ceil(k));
            let es = pc
                .unpuncture(&pc.puncture(&pc.base().encode(&msg).unwrap()))
                .unwrap();
            assert_eq!(decode_linear(&pc, &es, msg.len()).unwrap().message, msg);
        }
    }

    #[test]
    fn divisor_controls_puncture_share() {
        let b = GenBounds::default();
        let mut r = rng(32);
        for divisor in [8u32, 16, 32] {
            let pc = generate_code_with_divisor(&b, divisor, &mut r).unwrap();
            let cells = pc.base().n() * pc.width();
            assert_eq!(pc.weight(), cells - cells / divisor as usize);
        }
    }

    #[test]
    fn bad_divisor_is_rejected() {
        let mut r = rng(33);
        for divisor in [0u32, 7, 9, 64] {
            assert!(matches!(
                generate_code_with_divisor(&GenBounds::default(), divisor, &mut r),
                Err(Error::InvalidRange(_))
            ));
        }
    }

    #[test]
    fn impossible_bounds_are_rejected() {
        let mut r = rng(34);
        let cases = [
            GenBounds {
                k_min: 0,
                ..GenBounds::default()
            },
            GenBounds {
                mwidth_min: 0,
                ..GenBounds::default()
            },
            // k can never be below n.
            GenBounds {
                k_min: 11,
                k_span: 0,
                ..GenBounds::default()
            },
            GenBounds {
                mem_min: 70_000,
                ..GenBounds::default()
            },
        ];
        for bounds in cases {
            assert!(matches!(
                generate_code(&bounds, &mut r),
                Err(Error::InvalidBounds(_))
            ));
        }
    }

    #[test]
    fn infeasible_constraint_is_reported_as_invalid_bounds() {
        // k = 8, n = 9, divisor 8 punctures floor(9M/8) ≥ M+1 positions for
        // M ≥ 8, leaving fewer than kM symbols; no tuple ever validates.
        let bounds = GenBounds {
            k_min: 8,
            k_span: 0,
            n_min: 9,
            n_span: 0,
            mem_min: 2,
            mem_span: 0,
            mwidth_min: 8,
            mwidth_span: 8,
        };
        assert!(matches!(
            generate_code(&bounds, &mut rng(35)),
            Err(Error::InvalidBounds(_))
        ));
    }

    /// Chi-square uniformity checks on the tuple draw. The joint over
    /// (k, n) must be uniform on the 39 pairs that survive the k < n
    /// constraint, and mem and M must be exactly uniform since the
    /// constraint never touches them. Thresholds are 0.999 quantiles.
    #[test]
    fn tuple_draw_is_uniform_over_the_valid_region() {
        let b = GenBounds::default();
        let mut r = rng(36);
        let draws = 20_000usize;

        let mut kn = std::collections::HashMap::new();
        let mut mem_counts = [0u32; 21];
        let mut m_counts = [0u32; 17];
        for _ in 0..draws {
            let (k, n, mem, m) = draw_tuple(&b, 8, &mut r).unwrap();
            assert!(tuple_is_valid(k, n, m, 8));
            *kn.entry((k, n)).or_insert(0u32) += 1;
            mem_counts[mem - 10] += 1;
            m_counts[m - 6] += 1;
        }

        // 6 × 7 pairs minus (5,5), (6,5), (6,6).
        let valid_pairs: Vec<(usize, usize)> = (1..=6)
            .flat_map(|k| (5..=11).map(move |n| (k, n)))
            .filter(|&(k, n)| k < n)
            .collect();
        assert_eq!(valid_pairs.len(), 39);
        let expected = draws as f64 / 39.0;
        let stat: f64 = valid_pairs
            .iter()
            .map(|pair| {
                let observed = *kn.get(pair).unwrap_or(&0) as f64;
                (observed - expected).powi(2) / expected
            })
            .sum();
        assert!(stat < 70.703, "(k, n) joint chi-square {stat} (df 38)");
        assert_eq!(kn.len(), 39, "draws outside the valid region");

        let chi = |counts: &[u32]| {
            let expected = draws as f64 / counts.len() as f64;
            counts
                .iter()
                .map(|&c| (c as f64 - expected).powi(2) / expected)
                .sum::<f64>()
        };
        let mem_stat = chi(&mem_counts);
        assert!(mem_stat < 45.315, "mem chi-square {mem_stat} (df 20)");
        let m_stat = chi(&m_counts);
        assert!(m_stat < 39.252, "pattern width chi-square {m_stat} (df 16)");
    }

    #[test]
    fn polynomial_coefficients_are_unbiased() {
        // Each coefficient of each drawn polynomial is a fair coin; over
        // 40_000 coefficient draws the ones-fraction stays within 4 sigma.
        let mut r = rng(37);
        let mem = 19usize;
        let mut ones = 0u64;
        let draws = 2_000;
        for _ in 0..draws {
            ones += Gf2Poly::random(mem, &mut r).weight() as u64;
        }
        let total = (draws * (mem + 1)) as f64;
        let frac = ones as f64 / total;
        let sigma = (0.25 / total).sqrt();
        assert!(
            (frac - 0.5).abs() < 4.0 * sigma,
            "coefficient bias: {frac} over {total} draws"
        );
    }

    #[test]
    fn punctured_positions_cover_the_grid_uniformly() {
        // With n = 5, M = 8 and divisor 8 the generator drops 5 of 40 cells;
        // across many draws every cell should be hit at the same rate.
        // Column-exclusion rejection cannot bias single-cell probabilities
        // by symmetry (rows and columns are exchangeable).
        let mut r = rng(38);
        let (n, mwidth, count) = (5usize, 8usize, 5usize);
        let draws = 16_000u32;
        let mut hits = vec![0u32; n * mwidth];
        for _ in 0..draws {
            let pattern = draw_pattern(n, mwidth, count, &mut r);
            for (i, row) in pattern.iter().enumerate() {
                for (j, &kept) in row.iter().enumerate() {
                    if !kept {
                        hits[i * mwidth + j] += 1;
                    }
                }
            }
        }
        let expected = draws as f64 * count as f64 / (n * mwidth) as f64;
        let stat: f64 = hits
            .iter()
            .map(|&h| (h as f64 - expected).powi(2) / expected)
            .sum();
        // 39 degrees of freedom (cell totals are constrained to sum to
        // count per draw); 0.999 quantile.
        assert!(stat < 70.703, "cell occupancy chi-square {stat}");
    }
}
