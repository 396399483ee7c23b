//! Convolutional encoder model, zero-tail terminated encoding, puncturing and
//! stream interleaving.
//!
//! Conventions fixed here:
//! * Message bits de-interleave round-robin into the k input streams
//!   (message bit `t*k + i` is input stream `i` at time `t`).
//! * Output interleaving is section-major, output-index-minor:
//!   `c_1[0], c_2[0], ..., c_n[0], c_1[1], ...`.
//! * Encoding starts from zero-filled registers and appends `mem` zero flush
//!   symbols per stream (zero-tail termination); the flush output is
//!   transmitted, so the coded length is `n * (L/k + mem)`.

use crate::decode::ErasureStream;
use crate::error::{Error, Result};
use crate::gf2::{BitStream, Gf2Poly};

/// Dimension caps imposed by the wire format (k, n as u8; mem, M as u16).
pub(crate) const MAX_STREAMS: usize = u8::MAX as usize;
pub(crate) const MAX_MEMORY: usize = u16::MAX as usize;
pub(crate) const MAX_PATTERN_WIDTH: usize = u16::MAX as usize;

/// A (n, k, mem) convolutional encoder: k input streams, n output streams,
/// and a k×n matrix of generator polynomials of degree at most `mem`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConvCode {
    k: usize,
    n: usize,
    mem: usize,
    /// Row-major k×n: entry (i, j) at index `i*n + j`.
    polys: Vec<Gf2Poly>,
}

impl ConvCode {
    /// Validates and builds an encoder. Requires `1 <= k < n`, every
    /// polynomial of degree at most `mem`, and at least one nonzero
    /// polynomial per input row.
    pub fn new(k: usize, n: usize, mem: usize, polys: Vec<Vec<Gf2Poly>>) -> Result<Self> {
        if k < 1 || k >= n {
            return Err(Error::InvalidParams(format!(
                "need 1 <= k < n, got k={k}, n={n}"
            )));
        }
        if n > MAX_STREAMS {
            return Err(Error::InvalidParams(format!(
                "stream counts are capped at {MAX_STREAMS}"
            )));
        }
        let code = Self::new_relaxed(k, n, mem, polys)?;
        for i in 0..k {
            if (0..n).all(|j| code.poly(i, j).is_zero()) {
                return Err(Error::InvalidParams(format!(
                    "input row {i} has only zero polynomials"
                )));
            }
        }
        Ok(code)
    }

    /// Like [`ConvCode::new`] but without the `k < n`, nonzero-row, and
    /// wire-format stream caps. Equivalent codes derived from punctured
    /// codes can be rate 1, can contain all-zero rows, and have `k·M` input
    /// phases, which may exceed the serializable stream count.
    pub(crate) fn new_relaxed(
        k: usize,
        n: usize,
        mem: usize,
        polys: Vec<Vec<Gf2Poly>>,
    ) -> Result<Self> {
        if k < 1 || n < 1 {
            return Err(Error::InvalidParams("k and n must be at least 1".into()));
        }
        if k > MAX_PATTERN_WIDTH * MAX_STREAMS || n > MAX_PATTERN_WIDTH * MAX_STREAMS
            || mem > MAX_MEMORY
        {
            return Err(Error::InvalidParams(format!(
                "dimensions out of range: k={k}, n={n}, mem={mem}"
            )));
        }
        if polys.len() != k || polys.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidParams(format!(
                "polynomial matrix must be {k}x{n}"
            )));
        }
        let flat: Vec<Gf2Poly> = polys.into_iter().flatten().collect();
        for (idx, p) in flat.iter().enumerate() {
            if p.degree().is_some_and(|d| d > mem) {
                return Err(Error::InvalidParams(format!(
                    "polynomial ({}, {}) exceeds memory {mem}",
                    idx / n,
                    idx % n
                )));
            }
        }
        Ok(ConvCode {
            k,
            n,
            mem,
            polys: flat,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mem(&self) -> usize {
        self.mem
    }

    /// Generator polynomial for input stream `i`, output stream `j`.
    pub fn poly(&self, i: usize, j: usize) -> &Gf2Poly {
        &self.polys[i * self.n + j]
    }

    /// Trellis sections consumed by a message of `msg_bits` bits, including
    /// the `mem` flush sections.
    pub fn sections_for(&self, msg_bits: usize) -> usize {
        msg_bits / self.k + self.mem
    }

    /// Window masks for the encoder: output `j` is the parity of the sliding
    /// window ANDed with `masks[j]`, where window bit `d*k + i` holds input
    /// `i` at time `t - d`.
    fn window_masks(&self) -> (usize, Vec<Vec<u64>>) {
        let wbits = self.k * (self.mem + 1);
        let wwords = wbits.div_ceil(64).max(1);
        let mut masks = vec![vec![0u64; wwords]; self.n];
        for i in 0..self.k {
            for j in 0..self.n {
                for d in self.poly(i, j).support() {
                    let bit = d * self.k + i;
                    masks[j][bit / 64] |= 1 << (bit % 64);
                }
            }
        }
        (wwords, masks)
    }

    /// Zero-tail terminated encoding of `message` (length must be a multiple
    /// of k). Output length is `n * (len/k + mem)`.
    pub fn encode(&self, message: &BitStream) -> Result<BitStream> {
        if message.len() % self.k != 0 {
            return Err(Error::MessageLength {
                len: message.len(),
                k: self.k,
            });
        }
        let symbols = message.len() / self.k;
        let sections = symbols + self.mem;
        let (wwords, masks) = self.window_masks();
        let mut window = vec![0u64; wwords];
        let mut out = BitStream::with_capacity(self.n * sections);
        for t in 0..sections {
            shl_in_place(&mut window, self.k);
            if t < symbols {
                for i in 0..self.k {
                    if message.get(t * self.k + i) {
                        window[i / 64] |= 1 << (i % 64);
                    }
                }
            }
            for mask in &masks {
                let mut acc = 0u64;
                for (w, m) in window.iter().zip(mask) {
                    acc ^= w & m;
                }
                out.push(acc.count_ones() & 1 == 1);
            }
        }
        Ok(out)
    }
}

/// Multiword left shift by `shift` bits, dropping bits that leave the slice.
fn shl_in_place(words: &mut [u64], shift: usize) {
    let (ws, bs) = (shift / 64, shift % 64);
    if ws >= words.len() {
        words.fill(0);
        return;
    }
    for w in (0..words.len()).rev() {
        let mut v = if w >= ws { words[w - ws] << bs } else { 0 };
        if bs != 0 && w > ws {
            v |= words[w - ws - 1] >> (64 - bs);
        }
        words[w] = v;
    }
}

/// A convolutional code plus an n×M puncturing matrix: walking trellis
/// sections with column index `section mod M`, output symbol `i` of a section
/// is transmitted iff `p[i][section mod M] = 1`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PuncturedCode {
    base: ConvCode,
    /// Bit-packed n×M pattern, entry (i, j) at bit `i*M + j`.
    pattern: Vec<u64>,
    width: usize,
    weight: usize,
    /// Prefix sums of column weights: `col_prefix[c]` = kept symbols in
    /// columns `0..c`; `col_prefix[M]` = weight.
    col_prefix: Vec<usize>,
}

impl PuncturedCode {
    /// Validates and builds a punctured code. The pattern must be n rows of
    /// width M with no all-zero column and weight at least k·M.
    pub fn new(base: ConvCode, pattern_rows: &[Vec<bool>]) -> Result<Self> {
        let n = base.n();
        if pattern_rows.len() != n {
            return Err(Error::InvalidParams(format!(
                "pattern must have {n} rows, got {}",
                pattern_rows.len()
            )));
        }
        let width = pattern_rows[0].len();
        if width == 0 || width > MAX_PATTERN_WIDTH {
            return Err(Error::InvalidParams(format!(
                "pattern width {width} out of range"
            )));
        }
        if pattern_rows.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidParams("ragged pattern rows".into()));
        }
        let mut pattern = vec![0u64; (n * width).div_ceil(64)];
        let mut weight = 0usize;
        for (i, row) in pattern_rows.iter().enumerate() {
            for (j, &keep) in row.iter().enumerate() {
                if keep {
                    let bit = i * width + j;
                    pattern[bit / 64] |= 1 << (bit % 64);
                    weight += 1;
                }
            }
        }
        if weight < base.k() * width {
            return Err(Error::InvalidParams(format!(
                "pattern weight {weight} below k*M = {} (punctured rate would exceed 1)",
                base.k() * width
            )));
        }
        let mut col_prefix = vec![0usize; width + 1];
        for c in 0..width {
            let colw = (0..n)
                .filter(|&i| {
                    let bit = i * width + c;
                    (pattern[bit / 64] >> (bit % 64)) & 1 == 1
                })
                .count();
            if colw == 0 {
                return Err(Error::InvalidParams(format!(
                    "pattern column {c} is all-zero"
                )));
            }
            col_prefix[c + 1] = col_prefix[c] + colw;
        }
        Ok(PuncturedCode {
            base,
            pattern,
            width,
            weight,
            col_prefix,
        })
    }

    pub fn base(&self) -> &ConvCode {
        &self.base
    }

    /// Pattern width M.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Pattern weight I (symbols transmitted per M sections).
    pub fn weight(&self) -> usize {
        self.weight
    }

    /// Pattern entry for output stream `i`, column `j`.
    pub fn keeps(&self, i: usize, j: usize) -> bool {
        let bit = i * self.width + j;
        (self.pattern[bit / 64] >> (bit % 64)) & 1 == 1
    }

    /// Transmitted symbol count for the first `sections` trellis sections.
    pub fn coded_len_for_sections(&self, sections: usize) -> usize {
        let full = sections / self.width;
        let rem = sections % self.width;
        full * self.weight + self.col_prefix[rem]
    }

    /// Exact transmitted bit count for a message of `msg_bits` bits
    /// (including flush), per the section walk.
    pub fn expected_coded_bits(&self, msg_bits: usize) -> Result<usize> {
        if msg_bits % self.base.k() != 0 {
            return Err(Error::MessageLength {
                len: msg_bits,
                k: self.base.k(),
            });
        }
        Ok(self.coded_len_for_sections(self.base.sections_for(msg_bits)))
    }

    /// Deletes symbols from an interleaved coded stream per the pattern walk.
    /// `coded` must be a whole number of sections (as produced by
    /// [`ConvCode::encode`]).
    pub fn puncture(&self, coded: &BitStream) -> BitStream {
        let n = self.base.n();
        assert!(
            coded.len() % n == 0,
            "coded stream is not a whole number of sections"
        );
        let sections = coded.len() / n;
        let mut out = BitStream::with_capacity(self.coded_len_for_sections(sections));
        for t in 0..sections {
            let col = t % self.width;
            for i in 0..n {
                if self.keeps(i, col) {
                    out.push(coded.get(t * n + i));
                }
            }
        }
        out
    }

    /// Re-inserts an erasure at every deleted position, restoring the full
    /// interleaved geometry. The received length must land exactly on a
    /// section boundary of the pattern walk.
    pub fn unpuncture(&self, received: &BitStream) -> Result<ErasureStream> {
        let n = self.base.n();
        // Infer the section count from the received length.
        let full_periods = received.len() / self.weight;
        let mut sections = full_periods * self.width;
        let mut consumed = full_periods * self.weight;
        while consumed < received.len() {
            let colw = self.col_prefix[sections % self.width + 1]
                - self.col_prefix[sections % self.width];
            consumed += colw;
            sections += 1;
            if consumed > received.len() {
                return Err(Error::LengthMismatch(format!(
                    "received length {} does not land on a section boundary of the \
                     puncturing walk",
                    received.len()
                )));
            }
        }
        let mut values = BitStream::with_capacity(n * sections);
        let mut known = BitStream::with_capacity(n * sections);
        let mut pos = 0;
        for t in 0..sections {
            let col = t % self.width;
            for i in 0..n {
                if self.keeps(i, col) {
                    values.push(received.get(pos));
                    known.push(true);
                    pos += 1;
                } else {
                    values.push(false);
                    known.push(false);
                }
            }
        }
        Ok(ErasureStream::from_parts(n, sections, values, known))
    }
}
