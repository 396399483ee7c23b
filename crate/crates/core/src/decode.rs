//! Receiver-side decoding.
//!
//! The primary decoder ([`decode_linear`]) treats decoding after exact noise
//! removal as what it is — solving a sparse GF(2) linear system. Every
//! surviving symbol contributes one parity equation over a window of
//! `k*(mem+1)` message bits, so elimination over the banded system runs in
//! `O(L * poly(k, n, mem))` and never materializes a dense matrix.
//!
//! [`decode_viterbi`] is the classic trellis reference decoder for small
//! codes (`k*mem <= 16`): maximum-likelihood under the Hamming metric, with
//! erased positions contributing nothing to branch metrics. It tolerates
//! residual channel errors, which the linear decoder does not.

use crate::code::PuncturedCode;
use crate::error::{Error, Result};
use crate::gf2::BitStream;

/// Interleaved symbol stream with erasures at the positions the puncturing
/// pattern deleted. Position `t*n + j` is output stream `j` at section `t`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ErasureStream {
    n: usize,
    sections: usize,
    values: BitStream,
    known: BitStream,
}

impl ErasureStream {
    pub(crate) fn from_parts(
        n: usize,
        sections: usize,
        values: BitStream,
        known: BitStream,
    ) -> Self {
        debug_assert_eq!(values.len(), n * sections);
        debug_assert_eq!(known.len(), n * sections);
        ErasureStream {
            n,
            sections,
            values,
            known,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sections(&self) -> usize {
        self.sections
    }

    /// Total positions (erased and known).
    pub fn len(&self) -> usize {
        self.n * self.sections
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Symbol at `pos`, or `None` if the position was punctured away.
    pub fn get(&self, pos: usize) -> Option<bool> {
        self.known.get(pos).then(|| self.values.get(pos))
    }

    pub(crate) fn values_words(&self) -> &[u64] {
        self.values.words()
    }

    pub(crate) fn known_words(&self) -> &[u64] {
        self.known.words()
    }
}

/// Which decoding path produced a report.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DecodeMethod {
    Linear,
    Viterbi,
}

/// Outcome of a successful decode. `rank_deficit` is zero exactly when the
/// message was uniquely determined (an ambiguous system is an error, never a
/// guess).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DecodeReport {
    pub message: BitStream,
    pub rank_deficit: usize,
    pub method: DecodeMethod,
}

/// Banded GF(2) elimination state. A pivot row is keyed by its leading
/// (highest) unknown and stored as `row_words` words ending at the word
/// containing that lead, so every XOR is word-aligned.
///
/// Callers must feed equations with non-increasing window bases (newest
/// section first): this keeps every pivot's coefficients at or above the
/// windows still to come, which is what bounds the reduction to the band.
struct BandSolver {
    unknowns: usize,
    row_words: usize,
    /// Flat pivot storage: pivot for unknown `u` at `u * row_words`.
    pivots: Vec<u64>,
    /// Bit `u`: a pivot with leading unknown `u` exists.
    present: Vec<u64>,
    /// Bit `u`: right-hand side of the stored pivot row.
    rhs: Vec<u64>,
    pivot_count: usize,
}

impl BandSolver {
    fn new(unknowns: usize, band: usize) -> Self {
        // A row based at `lead & !63` spans at most 63 slack bits plus the
        // band, so ceil((band + 63) / 64) words always cover it.
        let row_words = (band + 126) / 64;
        let flag_words = unknowns.div_ceil(64).max(1);
        BandSolver {
            unknowns,
            row_words,
            pivots: vec![0; unknowns * row_words],
            present: vec![0; flag_words],
            rhs: vec![0; flag_words],
            pivot_count: 0,
        }
    }

    fn has_pivot(&self, u: usize) -> bool {
        (self.present[u / 64] >> (u % 64)) & 1 == 1
    }

    fn rhs_bit(&self, u: usize) -> bool {
        (self.rhs[u / 64] >> (u % 64)) & 1 == 1
    }

    /// Reduces one equation against the stored pivots and either absorbs it
    /// as a new pivot, discards it as redundant, or reports inconsistency.
    ///
    /// `row` holds `row_words` words of coefficients for unknowns starting at
    /// the 64-bit-aligned `base`; `value` is the equation's right-hand side.
    fn eliminate(&mut self, row: &mut [u64], base: usize, mut value: bool) -> Result<()> {
        debug_assert_eq!(base % 64, 0);
        let base_word = base / 64;
        // When every unknown in the row's window has a pivot, reduction is
        // guaranteed to terminate at zero: band locality keeps the cascade
        // inside the window (pivot tails never reach below it), every lead
        // it can visit is pivoted, and each step strictly lowers the lead.
        // Such a row cannot add rank, so skip the cascade; the caller's
        // re-encoding check still catches any inconsistency the row would
        // have exposed. Testing only the unknowns the row touches would be
        // unsound — the cascade introduces pivot-tail unknowns the row
        // never touched.
        let window_pivoted = (0..self.row_words).all(|wi| {
            let lo = (base_word + wi) * 64;
            if lo >= self.unknowns {
                return true; // beyond the last unknown: nothing to pin
            }
            let valid = self.unknowns - lo;
            let need = if valid >= 64 { !0u64 } else { (1 << valid) - 1 };
            self.present[base_word + wi] & need == need
        });
        if window_pivoted {
            return Ok(());
        }
        let last = self.row_words - 1;
        let mut wi = last as isize;
        while wi >= 0 {
            let w = row[wi as usize];
            if w == 0 {
                wi -= 1;
                continue;
            }
            let u = (base_word + wi as usize) * 64 + 63 - w.leading_zeros() as usize;
            debug_assert!(u < self.unknowns, "equation touches unknown {u} out of range");
            if self.has_pivot(u) {
                // Pivot word `t` lines up with row word `wi - last + t`.
                // Words that would land below the row are zero by the
                // arrival-order contract (the pivot came from a window at or
                // above this one).
                let pivot = &self.pivots[u * self.row_words..(u + 1) * self.row_words];
                for (t, &p) in pivot.iter().enumerate() {
                    let dst = wi - last as isize + t as isize;
                    if dst < 0 {
                        debug_assert_eq!(p, 0, "pivot reaches below the current window");
                        continue;
                    }
                    row[dst as usize] ^= p;
                }
                value ^= self.rhs_bit(u);
            } else {
                // New pivot: re-base the row so its lead sits in the last word.
                let slot = &mut self.pivots[u * self.row_words..(u + 1) * self.row_words];
                for (t, s) in slot.iter_mut().enumerate() {
                    let src = wi - last as isize + t as isize;
                    *s = if src >= 0 { row[src as usize] } else { 0 };
                }
                self.present[u / 64] |= 1 << (u % 64);
                if value {
                    self.rhs[u / 64] |= 1 << (u % 64);
                }
                self.pivot_count += 1;
                return Ok(());
            }
        }
        if value {
            return Err(Error::Integrity(
                "inconsistent parity equation (corrupted payload or wrong parameters)".into(),
            ));
        }
        Ok(()) // redundant equation
    }

    /// Back-substitutes in ascending unknown order (each pivot's tail holds
    /// only lower, already-solved unknowns). Requires full rank.
    fn solve(&self) -> BitStream {
        // `pad` zero words below the solution absorb pivot words that reach
        // below unknown 0; those words are structurally zero.
        let pad = self.row_words - 1;
        let mut sol = vec![0u64; pad + self.unknowns.div_ceil(64)];
        for u in 0..self.unknowns {
            debug_assert!(self.has_pivot(u));
            let lead_word = u / 64;
            let pivot = &self.pivots[u * self.row_words..(u + 1) * self.row_words];
            let mut ones = 0u32;
            for (t, &p) in pivot.iter().enumerate() {
                ones += (p & sol[lead_word + t]).count_ones();
            }
            // The lead bit of the pivot ANDs against a still-unset solution
            // bit, so `ones` counts only the already-solved tail.
            if self.rhs_bit(u) ^ (ones & 1 == 1) {
                sol[pad + lead_word] |= 1 << (u % 64);
            }
        }
        BitStream::from_words(sol[pad..].to_vec(), self.unknowns)
    }
}

/// Exact erasure-aware decoding of a noise-free punctured stream by banded
/// GF(2) elimination.
///
/// `msg_bits` is the padded message length in bits (a multiple of k); the
/// erasure stream must carry exactly `msg_bits/k + mem` sections. Errors:
/// [`Error::AmbiguousDecode`] when the surviving symbols do not pin every
/// message bit, [`Error::Integrity`] when they contradict each other
/// (corrupted payload or wrong parameters).
pub fn decode_linear(
    pc: &PuncturedCode,
    es: &ErasureStream,
    msg_bits: usize,
) -> Result<DecodeReport> {
    let base = pc.base();
    let (k, n, mem) = (base.k(), base.n(), base.mem());
    if msg_bits % k != 0 {
        return Err(Error::MessageLength { len: msg_bits, k });
    }
    if es.n() != n || es.sections() != base.sections_for(msg_bits) {
        return Err(Error::LengthMismatch(format!(
            "erasure stream geometry {}x{} does not match {} sections of {} symbols",
            es.sections(),
            es.n(),
            base.sections_for(msg_bits),
            n
        )));
    }

    let symbols = msg_bits / k;
    let band = k * (mem + 1);
    let mut solver = BandSolver::new(msg_bits, band);

    if msg_bits > 0 {
        // Per-output window masks relative to the window start (s-mem)*k:
        // window bit (mem-d)*k + i is the coefficient of input i at delay d.
        let mask_words = solver.row_words;
        let mut base_masks = vec![vec![0u64; mask_words]; n];
        for i in 0..k {
            for j in 0..n {
                for d in base.poly(i, j).support() {
                    let bit = (mem - d) * k + i;
                    base_masks[j][bit / 64] |= 1 << (bit % 64);
                }
            }
        }
        // Interior sections reuse the base mask shifted by the window
        // start's misalignment; cache the 64 possible shifts lazily.
        let mut shifted: Vec<Option<Vec<u64>>> = vec![None; n * 64];

        // Elimination order never changes the result, only the work: fed
        // newest-section-first with the deepest-reaching streams ahead, each
        // fresh unknown is pinned the first time it appears as a leading
        // bit, so pivot insertion stops cascading across the band and most
        // redundant equations hit the skip path in `eliminate`.
        let mut stream_order: Vec<usize> = (0..n).collect();
        stream_order.sort_by_key(|&j| {
            std::cmp::Reverse((0..k).filter_map(|i| base.poly(i, j).degree()).max())
        });

        let mut row = vec![0u64; solver.row_words];
        'sections: for s in (0..es.sections()).rev() {
            let col = s % pc.width();
            let interior = s >= mem && s < symbols;
            let ws_raw = s as isize * k as isize - (mem * k) as isize;
            let ws = ws_raw.max(0) as usize;
            let row_base = ws & !63;
            for &j in &stream_order {
                if !pc.keeps(j, col) {
                    continue;
                }
                let value = es.get(s * n + j).expect("kept position is known");
                if interior {
                    let shift = (ws_raw as usize) - row_base;
                    let cached = &mut shifted[j * 64 + shift];
                    let mask = cached.get_or_insert_with(|| {
                        let mut m = base_masks[j].clone();
                        shl_words(&mut m, shift);
                        m
                    });
                    row.copy_from_slice(mask);
                } else {
                    // Boundary sections: assemble bit by bit, dropping taps
                    // that reach before the message or into the flush zeros.
                    row.fill(0);
                    for i in 0..k {
                        for d in base.poly(i, j).support() {
                            let t_in = s as isize - d as isize;
                            if t_in >= 0 && (t_in as usize) < symbols {
                                let u = t_in as usize * k + i;
                                let rel = u - row_base;
                                row[rel / 64] |= 1 << (rel % 64);
                            }
                        }
                    }
                }
                solver.eliminate(&mut row, row_base, value)?;
                if solver.pivot_count == msg_bits {
                    break 'sections;
                }
            }
        }
    }

    let deficit = msg_bits - solver.pivot_count;
    if deficit > 0 {
        return Err(Error::AmbiguousDecode { deficit });
    }
    let message = if msg_bits > 0 {
        solver.solve()
    } else {
        BitStream::new()
    };

    // Re-encode and compare against every surviving symbol (including flush
    // sections and any equations skipped once full rank was reached). This is
    // the integrity self-check: corrupted payloads or mismatched parameters
    // fail here instead of decoding to silent garbage.
    let coded = base.encode(&message).expect("solution length is valid");
    for ((c, v), kn) in coded
        .words()
        .iter()
        .zip(es.values_words())
        .zip(es.known_words())
    {
        if (c ^ v) & kn != 0 {
            return Err(Error::Integrity(
                "decoded message fails the re-encoding check".into(),
            ));
        }
    }

    Ok(DecodeReport {
        message,
        rank_deficit: 0,
        method: DecodeMethod::Linear,
    })
}

/// Multiword left shift by up to 63 bits.
fn shl_words(words: &mut [u64], shift: usize) {
    debug_assert!(shift < 64);
    if shift == 0 {
        return;
    }
    for w in (0..words.len()).rev() {
        let mut v = words[w] << shift;
        if w > 0 {
            v |= words[w - 1] >> (64 - shift);
        }
        words[w] = v;
    }
}

/// Maximum-likelihood trellis decoding under the Hamming metric. Erased
/// positions contribute zero branch metric; ties break toward the smaller
/// predecessor state index so results are bit-exact across implementations.
///
/// Intended for small codes: requires `k*mem <= 16` and a trellis small
/// enough to keep the traceback in memory.
pub fn decode_viterbi(
    pc: &PuncturedCode,
    es: &ErasureStream,
    msg_bits: usize,
) -> Result<DecodeReport> {
    let base = pc.base();
    let (k, n, mem) = (base.k(), base.n(), base.mem());
    if k * mem > 16 {
        return Err(Error::ParametersTooLarge { kmem: k * mem });
    }
    if msg_bits % k != 0 {
        return Err(Error::MessageLength { len: msg_bits, k });
    }
    let sections = base.sections_for(msg_bits);
    if es.n() != n || es.sections() != sections {
        return Err(Error::LengthMismatch(format!(
            "erasure stream geometry {}x{} does not match {sections} sections of {n} symbols",
            es.sections(),
            es.n(),
        )));
    }
    let states = 1usize << (k * mem);
    if sections.saturating_mul(states) > 1 << 27 {
        return Err(Error::ParametersTooLarge { kmem: k * mem });
    }

    let symbols = msg_bits / k;
    let inputs = 1usize << k;
    let state_mask = (states - 1) as u32;

    // Output signature per extended state (state << k | input): bit j is
    // output stream j. Streams beyond 64 fall back to recomputation, which
    // no practical small code hits.
    assert!(n <= 64, "viterbi supports up to 64 output streams");
    let mut omasks = vec![0u64; n];
    for i in 0..k {
        for j in 0..n {
            for d in base.poly(i, j).support() {
                omasks[j] |= 1 << (d * k + i);
            }
        }
    }
    let mut out_sig = vec![0u64; states * inputs];
    for (full, sig) in out_sig.iter_mut().enumerate() {
        for (j, m) in omasks.iter().enumerate() {
            if (full as u64 & m).count_ones() & 1 == 1 {
                *sig |= 1 << j;
            }
        }
    }

    const INF: u32 = u32::MAX / 2;
    let mut metric = vec![INF; states];
    let mut next = vec![INF; states];
    metric[0] = 0;
    // Traceback stores the winning extended state per (section, state).
    let mut back = vec![0u32; sections * states];

    for s in 0..sections {
        // Received values and known mask for this section, packed by stream.
        let mut rec = 0u64;
        let mut rec_mask = 0u64;
        for j in 0..n {
            if let Some(b) = es.get(s * n + j) {
                rec_mask |= 1 << j;
                if b {
                    rec |= 1 << j;
                }
            }
        }
        next.fill(INF);
        let flush = s >= symbols;
        let back_row = &mut back[s * states..(s + 1) * states];
        for ps in 0..states {
            let m = metric[ps];
            if m >= INF {
                continue;
            }
            let input_range = if flush { 0..1 } else { 0..inputs };
            for u in input_range {
                let full = (ps << k) | u;
                let bm = ((out_sig[full] ^ rec) & rec_mask).count_ones();
                let ns = (full as u32 & state_mask) as usize;
                let cand = m + bm;
                if cand < next[ns] {
                    next[ns] = cand;
                    back_row[ns] = full as u32;
                }
            }
        }
        std::mem::swap(&mut metric, &mut next);
    }

    debug_assert!(metric[0] < INF, "zero-tail state must be reachable");
    let mut message = BitStream::zeros(msg_bits);
    let mut st = 0usize;
    for s in (0..sections).rev() {
        let full = back[s * states + st];
        if s < symbols {
            let u = full & ((inputs - 1) as u32);
            for i in 0..k {
                if (u >> i) & 1 == 1 {
                    message.set(s * k + i, true);
                }
            }
        }
        st = (full >> k) as usize;
    }

    Ok(DecodeReport {
        message,
        rank_deficit: 0,
        method: DecodeMethod::Viterbi,
    })
}
