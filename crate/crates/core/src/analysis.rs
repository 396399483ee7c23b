//! Validation instruments: byte-entropy profiling of protected payloads,
//! derivation of the unpunctured code equivalent to a punctured one, and a
//! deliberately desk-scale brute-force encoder reconstruction used to
//! demonstrate how quickly interception stops paying off as channel noise
//! rises.

use rand::Rng;

use crate::code::{ConvCode, PuncturedCode};
use crate::error::{Error, Result};
use crate::gf2::{BitStream, Gf2Poly};

/// Shannon-entropy summary of a byte sample.
#[derive(Clone, Debug)]
pub struct EntropyReport {
    /// Bits per byte, in `[0, 8]`.
    pub byte_entropy: f64,
    pub histogram: [u64; 256],
    pub sample_bytes: usize,
}

/// Measures the byte histogram entropy of `data`. Protected payloads are
/// measured on packed binary bytes, not on their hex transport text (hex
/// caps at 4 bits/byte and would flatten the comparison).
pub fn byte_entropy(data: &[u8]) -> Result<EntropyReport> {
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut histogram = [0u64; 256];
    for &b in data {
        histogram[b as usize] += 1;
    }
    let total = data.len() as f64;
    let sum: f64 = histogram
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            p * p.log2()
        })
        .sum();
    Ok(EntropyReport {
        byte_entropy: (-sum).max(0.0),
        histogram,
        sample_bytes: data.len(),
    })
}

/// Derives the unpunctured `(I, kM, ⌈mem/M⌉)` code equivalent to `pc` by
/// phase decomposition: one super-section spans a full pattern period, its
/// inputs are the `k·M` phases of the original input streams and its
/// outputs are the `I` surviving symbols, enumerated in transmission order.
///
/// The result reproduces `puncture(encode(base, m))` bit for bit, so the
/// punctured construction inherits the known theory of ordinary codes; note
/// that the returned code may be rate 1 and may contain all-zero input rows,
/// both legitimate for equivalents.
pub fn equivalent_code(pc: &PuncturedCode) -> ConvCode {
    let base = pc.base();
    let (k, n, mem, m) = (base.k(), base.n(), base.mem(), pc.width());
    let mem_eq = mem.div_ceil(m);

    let mut outputs = Vec::with_capacity(pc.weight());
    for sp in 0..m {
        for j in 0..n {
            if pc.keeps(j, sp) {
                outputs.push((sp, j));
            }
        }
    }

    // A coefficient d of base polynomial (i, j) couples output phase sp to
    // input phase s = (sp - d) mod M at a super-section lag of
    // e = (d + s - sp) / M; distinct d never collide on the same e.
    let mut exps = vec![vec![Vec::<usize>::new(); outputs.len()]; k * m];
    for (o, &(sp, j)) in outputs.iter().enumerate() {
        for i in 0..k {
            for d in base.poly(i, j).support() {
                let s = (sp + m - d % m) % m;
                let e = (d + s - sp) / m;
                exps[s * k + i][o].push(e);
            }
        }
    }
    let polys = exps
        .into_iter()
        .map(|row| row.into_iter().map(|e| Gf2Poly::from_support(&e)).collect())
        .collect();
    ConvCode::new_relaxed(k * m, outputs.len(), mem_eq, polys)
        .expect("phase decomposition stays within constructor caps")
}

/// Outcome of a brute-force reconstruction pass.
#[derive(Clone, Debug)]
pub struct ReconstructionResult {
    /// Hypotheses whose syndrome fraction fell below the threshold, as
    /// single-input rate-1/2 encoders.
    pub candidates: Vec<ConvCode>,
    /// Number of hypotheses examined (the full space in exhaustive mode).
    pub tested: usize,
    /// Whether the true encoder is among the candidates, up to output-stream
    /// order. Defaults to false; filled by [`ReconstructionResult::note_true_encoder`]
    /// in controlled experiments where the truth is known.
    pub success: bool,
}

impl ReconstructionResult {
    /// True if `(f1, f2)` appears among the candidates in either stream
    /// order.
    pub fn contains_pair(&self, f1: &Gf2Poly, f2: &Gf2Poly) -> bool {
        self.candidates.iter().any(|c| {
            let (g1, g2) = (c.poly(0, 0), c.poly(0, 1));
            (g1 == f1 && g2 == f2) || (g1 == f2 && g2 == f1)
        })
    }

    /// Records whether the known true encoder survived the search.
    pub fn note_true_encoder(&mut self, f1: &Gf2Poly, f2: &Gf2Poly) {
        self.success = self.contains_pair(f1, f2);
    }
}

/// XORs `src << shift` into `dst`, `shift < 64`.
fn xor_shifted(dst: &mut [u64], src: &[u64], shift: usize) {
    if shift == 0 {
        for (d, s) in dst.iter_mut().zip(src) {
            *d ^= s;
        }
        return;
    }
    for w in (0..dst.len()).rev() {
        let lo = if w < src.len() { src[w] << shift } else { 0 };
        let hi = if w >= 1 && w - 1 < src.len() {
            src[w - 1] >> (64 - shift)
        } else {
            0
        };
        dst[w] ^= lo | hi;
    }
}

fn xor_weight(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum()
}

/// Exhaustive reconstruction of an unpunctured single-input rate-1/2
/// encoder from its (possibly noisy) output stream.
///
/// Every polynomial pair `(g1, g2)` with `deg ≤ max_mem`, `g1 ≤ g2`, and at
/// least one odd constant term is scored by its parity-check syndrome: for
/// the true encoder `c1·f2 ⊕ c2·f1 = 0` identically, and channel noise
/// raises the nonzero fraction to roughly `(1 - (1-2p)^w)/2` for a check of
/// weight `w`. Pairs are tried in both stream orders and kept as candidates
/// when the better fraction stays below `threshold`.
///
/// `noise_p` documents the test condition for the caller's records and is
/// validated, not used in scoring; pick `threshold` above the expected
/// true-pair fraction and well below 1/2.
pub fn reconstruct_bruteforce(
    intercepted: &BitStream,
    max_mem: usize,
    noise_p: f64,
    threshold: f64,
) -> Result<ReconstructionResult> {
    if max_mem > 8 {
        return Err(Error::HypothesisSpaceTooLarge { max_mem });
    }
    if !(0.0..0.5).contains(&noise_p) {
        return Err(Error::InvalidRange(format!(
            "noise probability {noise_p} outside [0, 0.5)"
        )));
    }
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidRange(format!(
            "syndrome threshold {threshold} outside (0, 1]"
        )));
    }
    let half = intercepted.len() / 2;
    if half <= max_mem {
        return Err(Error::InvalidParams(format!(
            "intercepted stream too short: {} bits for memory up to {max_mem}",
            intercepted.len()
        )));
    }

    let mut c1 = BitStream::with_capacity(half);
    let mut c2 = BitStream::with_capacity(half);
    for t in 0..half {
        c1.push(intercepted.get(2 * t));
        c2.push(intercepted.get(2 * t + 1));
    }

    // Precompute c·g for every g once; the pair loop then only XORs and
    // counts. Products have half + max_mem meaningful bits.
    let prod_words = (half + max_mem).div_ceil(64);
    let g_count = 1usize << (max_mem + 1);
    let products = |c: &BitStream| -> Vec<Vec<u64>> {
        (0..g_count)
            .map(|g| {
                let mut acc = vec![0u64; prod_words];
                for d in 0..=max_mem {
                    if g >> d & 1 == 1 {
                        xor_shifted(&mut acc, c.words(), d);
                    }
                }
                acc
            })
            .collect()
    };
    let p1 = products(&c1);
    let p2 = products(&c2);

    let syndrome_bits = (half + max_mem) as f64;
    let mut candidates = Vec::new();
    let mut tested = 0usize;
    for g1 in 0..g_count {
        for g2 in g1..g_count {
            if (g1 | g2) & 1 == 0 {
                continue;
            }
            tested += 1;
            let w = xor_weight(&p1[g2], &p2[g1]).min(xor_weight(&p1[g1], &p2[g2]));
            if (w as f64) < threshold * syndrome_bits {
                let pair = [g1 as u64, g2 as u64].map(Gf2Poly::from_coeff_bits);
                let mem = pair.iter().filter_map(|p| p.degree()).max().unwrap_or(0);
                let code = ConvCode::new_relaxed(1, 2, mem, vec![pair.to_vec()])
                    .expect("candidate degrees fit the declared memory");
                candidates.push(code);
            }
        }
    }

    Ok(ReconstructionResult {
        candidates,
        tested,
        success: false,
    })
}

/// One noise level of a reconstruction sweep.
#[derive(Clone, Copy, Debug)]
pub struct SweepPoint {
    pub noise_p: f64,
    pub trials: u32,
    pub successes: u32,
    pub hypotheses: usize,
}

/// Draws a reconstruction target: an unpunctured rate-1/2 encoder with
/// memory 2, distinct nonzero polynomials, and an odd constant term
/// somewhere — the family whose checks are light enough for interception to
/// stand a chance on a quiet channel, which is what the sweep demonstrates
/// breaking down.
fn draw_target<R: Rng + ?Sized>(rng: &mut R) -> (Gf2Poly, Gf2Poly) {
    loop {
        let a = rng.gen_range(1..8u64);
        let b = rng.gen_range(1..8u64);
        if a != b && (a | b) & 1 == 1 {
            return (Gf2Poly::from_coeff_bits(a), Gf2Poly::from_coeff_bits(b));
        }
    }
}

/// Runs `trials` reconstruction attempts at each noise level: encode a
/// random message with a fresh target, flip each coded bit independently
/// with probability `p`, search, and count how often the true encoder
/// survives. Success collapses between 2% and 15% channel noise.
pub fn reconstruction_sweep<R: Rng + ?Sized>(
    rng: &mut R,
    noise_levels: &[f64],
    trials: u32,
    bits: usize,
    max_mem: usize,
    threshold: f64,
) -> Result<Vec<SweepPoint>> {
    const TARGET_MEM: usize = 2;
    let sections = bits / 2;
    if sections <= TARGET_MEM {
        return Err(Error::InvalidParams(format!(
            "sweep needs more than {} stream bits",
            2 * TARGET_MEM
        )));
    }
    let mut out = Vec::with_capacity(noise_levels.len());
    for &p in noise_levels {
        let mut successes = 0u32;
        let mut hypotheses = 0usize;
        for _ in 0..trials {
            let (f1, f2) = draw_target(rng);
            let code = ConvCode::new(1, 2, TARGET_MEM, vec![vec![f1.clone(), f2.clone()]])?;
            let msg: BitStream = (0..sections - TARGET_MEM).map(|_| rng.gen_bool(0.5)).collect();
            let mut stream = code.encode(&msg)?;
            if p > 0.0 {
                for i in 0..stream.len() {
                    if rng.gen_bool(p) {
                        stream.flip(i);
                    }
                }
            }
            let mut result = reconstruct_bruteforce(&stream, max_mem, p, threshold)?;
            result.note_true_encoder(&f1, &f2);
            hypotheses = result.tested;
            successes += result.success as u32;
        }
        out.push(SweepPoint {
            noise_p: p,
            trials,
            successes,
            hypotheses,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::{random_bits, random_punctured, rng};

    #[test]
    fn entropy_of_uniform_bytes_is_eight() {
        let data: Vec<u8> = (0..=255u8).collect();
        let report = byte_entropy(&data).unwrap();
        assert_eq!(report.byte_entropy, 8.0);
        assert_eq!(report.sample_bytes, 256);
        assert!(report.histogram.iter().all(|&c| c == 1));
    }

    #[test]
    fn entropy_of_constant_bytes_is_zero() {
        let report = byte_entropy(&[0x41; 1000]).unwrap();
        assert_eq!(report.byte_entropy, 0.0);
        assert!(report.byte_entropy.is_sign_positive());
        assert_eq!(report.histogram[0x41], 1000);
    }

    #[test]
    fn entropy_of_two_equiprobable_bytes_is_one() {
        let data: Vec<u8> = b"ab".iter().copied().cycle().take(500).collect();
        assert_eq!(byte_entropy(&data).unwrap().byte_entropy, 1.0);
    }

    #[test]
    fn entropy_rejects_empty_input() {
        assert!(matches!(byte_entropy(&[]), Err(Error::EmptyInput)));
    }

    fn poly(exps: &[usize]) -> Gf2Poly {
        Gf2Poly::from_support(exps)
    }

    fn worked_example() -> PuncturedCode {
        let base = ConvCode::new(1, 2, 2, vec![vec![poly(&[0, 2]), poly(&[0, 1, 2])]]).unwrap();
        PuncturedCode::new(base, &[vec![true, false], vec![true, true]]).unwrap()
    }

    #[test]
    fn equivalent_of_worked_example_matches_published_polynomials() {
        let eq = equivalent_code(&worked_example());
        assert_eq!((eq.k(), eq.n(), eq.mem()), (2, 3, 1));
        let expect = [
            // input phase 0: outputs (col 0, x), (col 0, y), (col 1, y)
            poly(&[0, 1]),
            poly(&[0, 1]),
            poly(&[0]),
            // input phase 1
            poly(&[]),
            poly(&[1]),
            poly(&[0, 1]),
        ];
        for (idx, want) in expect.iter().enumerate() {
            assert_eq!(eq.poly(idx / 3, idx % 3), want, "polynomial {idx}");
        }
    }

    #[test]
    fn equivalent_under_identity_pattern_is_the_base_code() {
        let mut r = rng(41);
        for _ in 0..20 {
            let pc = random_punctured(&mut r, 1..=3, 2..=5, 0..=8, 1..=1);
            let pc = PuncturedCode::new(
                pc.base().clone(),
                &vec![vec![true]; pc.base().n()],
            )
            .unwrap();
            let eq = equivalent_code(&pc);
            let base = pc.base();
            assert_eq!((eq.k(), eq.n(), eq.mem()), (base.k(), base.n(), base.mem()));
            for i in 0..base.k() {
                for j in 0..base.n() {
                    assert_eq!(eq.poly(i, j), base.poly(i, j));
                }
            }
        }
    }

    /// Both encoders describe the same transmitted stream, so they must
    /// agree on the overlap and be zero past each other's flush.
    fn streams_agree(a: &BitStream, b: &BitStream) -> bool {
        let common = a.len().min(b.len());
        (0..common).all(|i| a.get(i) == b.get(i))
            && (common..a.len()).all(|i| !a.get(i))
            && (common..b.len()).all(|i| !b.get(i))
    }

    #[test]
    fn equivalent_stream_matches_punctured_stream_rate_half() {
        let mut r = rng(42);
        let mut messages = 0;
        while messages < 1_000 {
            let pc = random_punctured(&mut r, 1..=1, 2..=2, 0..=4, 1..=6);
            let eq = equivalent_code(&pc);
            for _ in 0..20 {
                let periods = r.gen_range(1..=8usize);
                let msg = random_bits(&mut r, pc.base().k() * pc.width() * periods);
                let punctured = pc.puncture(&pc.base().encode(&msg).unwrap());
                let direct = eq.encode(&msg).unwrap();
                assert!(
                    streams_agree(&punctured, &direct),
                    "streams diverge for k=1 n=2 mem={} M={}",
                    pc.base().mem(),
                    pc.width()
                );
                messages += 1;
            }
        }
    }

    #[test]
    fn equivalent_stream_matches_punctured_stream_general() {
        let mut r = rng(43);
        for _ in 0..100 {
            let pc = random_punctured(&mut r, 1..=3, 2..=6, 0..=10, 1..=5);
            let eq = equivalent_code(&pc);
            for _ in 0..5 {
                let periods = r.gen_range(1..=5usize);
                let msg = random_bits(&mut r, pc.base().k() * pc.width() * periods);
                let punctured = pc.puncture(&pc.base().encode(&msg).unwrap());
                let direct = eq.encode(&msg).unwrap();
                assert!(streams_agree(&punctured, &direct));
            }
        }
    }

    #[test]
    fn reconstruction_rejects_oversized_hypothesis_space() {
        let stream = random_bits(&mut rng(44), 1000);
        assert!(matches!(
            reconstruct_bruteforce(&stream, 9, 0.0, 0.1),
            Err(Error::HypothesisSpaceTooLarge { max_mem: 9 })
        ));
    }

    #[test]
    fn reconstruction_validates_fractions() {
        let stream = random_bits(&mut rng(45), 1000);
        assert!(matches!(
            reconstruct_bruteforce(&stream, 2, 0.5, 0.1),
            Err(Error::InvalidRange(_))
        ));
        assert!(matches!(
            reconstruct_bruteforce(&stream, 2, 0.0, 0.0),
            Err(Error::InvalidRange(_))
        ));
    }

    #[test]
    fn hypothesis_count_is_exhaustive() {
        // Pairs g1 <= g2 over all polynomials of degree <= max_mem with at
        // least one odd constant term: 26 for memory 2, 6176 for memory 6.
        let stream = random_bits(&mut rng(46), 10_000);
        let r2 = reconstruct_bruteforce(&stream, 2, 0.0, 1e-9).unwrap();
        assert_eq!(r2.tested, 26);
        let r6 = reconstruct_bruteforce(&stream, 6, 0.0, 1e-9).unwrap();
        assert_eq!(r6.tested, 6176);
    }

    #[test]
    fn noiseless_stream_yields_true_pair_with_zero_syndrome() {
        let (f1, f2) = (poly(&[0, 2]), poly(&[0, 1, 2]));
        let code = ConvCode::new(1, 2, 2, vec![vec![f1.clone(), f2.clone()]]).unwrap();
        let msg = random_bits(&mut rng(47), 4_998);
        let stream = code.encode(&msg).unwrap();
        assert_eq!(stream.len(), 10_000);
        // A threshold this small only passes exactly-zero syndromes.
        let mut result = reconstruct_bruteforce(&stream, 6, 0.0, 1e-9).unwrap();
        result.note_true_encoder(&f1, &f2);
        assert!(result.success);
        assert!(result.contains_pair(&f2, &f1), "order must not matter");
    }

    #[test]
    fn sweep_success_collapses_with_noise() {
        let mut r = rng(48);
        let points =
            reconstruction_sweep(&mut r, &[0.02, 0.25], 20, 10_000, 6, 0.10).unwrap();
        assert_eq!(points[0].hypotheses, 6176);
        assert!(
            points[0].successes >= 17,
            "quiet channel: {}/20",
            points[0].successes
        );
        assert!(
            points[1].successes <= 2,
            "noisy channel: {}/20",
            points[1].successes
        );
    }
}
