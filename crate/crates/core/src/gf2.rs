//! Bit-exact GF(2) primitives: polynomials, bit streams, and the hex-nibble
//! transport codec shared by the rest of the crate.
//!
//! Bit-order conventions (fixed for wire compatibility):
//! * Inside a hex nibble, bits are MSB-first; a final partial nibble is
//!   right-zero-padded and the true bit length travels out of band.
//! * Byte/bit conversions are MSB-first within each byte.

use std::fmt;

use crate::error::{Error, Result};

/// Maximum representable polynomial degree (bounded by the encoder memory cap,
/// which is serialized as a u16).
pub const MAX_POLY_DEGREE: usize = u16::MAX as usize;

/// A polynomial over GF(2), stored dense and bit-packed (coefficient of x^d at
/// bit d). The zero polynomial has an empty coefficient set.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Gf2Poly {
    /// Coefficient words, LSB-first; no trailing zero word is kept.
    words: Vec<u64>,
}

impl Gf2Poly {
    pub fn zero() -> Self {
        Gf2Poly { words: Vec::new() }
    }

    pub fn one() -> Self {
        Gf2Poly { words: vec![1] }
    }

    /// Polynomial with the given exponents set, e.g. `[0, 2]` is `1 + x^2`.
    ///
    /// Panics if an exponent exceeds [`MAX_POLY_DEGREE`].
    pub fn from_support(exponents: &[usize]) -> Self {
        let mut p = Gf2Poly::zero();
        for &d in exponents {
            assert!(d <= MAX_POLY_DEGREE, "exponent {d} exceeds degree cap");
            p.set_coeff(d, true);
        }
        p
    }

    /// Polynomial from the low 64 coefficients packed LSB-first
    /// (bit d of `bits` is the coefficient of x^d).
    pub fn from_coeff_bits(bits: u64) -> Self {
        let mut p = Gf2Poly { words: vec![bits] };
        p.normalize();
        p
    }

    /// Uniform random polynomial of degree at most `max_degree` (every
    /// coefficient an independent fair bit).
    pub fn random<R: rand::Rng + ?Sized>(max_degree: usize, rng: &mut R) -> Self {
        assert!(max_degree <= MAX_POLY_DEGREE, "degree cap exceeded");
        let nbits = max_degree + 1;
        let mut words = vec![0u64; nbits.div_ceil(64)];
        for w in &mut words {
            *w = rng.gen();
        }
        let last_bits = nbits % 64;
        if last_bits != 0 {
            *words.last_mut().unwrap() &= (1u64 << last_bits) - 1;
        }
        let mut p = Gf2Poly { words };
        p.normalize();
        p
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    /// Degree of the polynomial, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        let last = self.words.last()?;
        Some((self.words.len() - 1) * 64 + (63 - last.leading_zeros() as usize))
    }

    /// Coefficient of x^d.
    pub fn coeff(&self, d: usize) -> bool {
        self.words
            .get(d / 64)
            .map_or(false, |w| (w >> (d % 64)) & 1 == 1)
    }

    fn set_coeff(&mut self, d: usize, value: bool) {
        let word = d / 64;
        if word >= self.words.len() {
            if !value {
                return;
            }
            self.words.resize(word + 1, 0);
        }
        if value {
            self.words[word] |= 1 << (d % 64);
        } else {
            self.words[word] &= !(1 << (d % 64));
        }
        self.normalize();
    }

    fn normalize(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    /// Iterator over the exponents with a set coefficient, ascending.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            (0..64).filter_map(move |b| ((w >> b) & 1 == 1).then_some(wi * 64 + b))
        })
    }

    /// Number of nonzero coefficients.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// Carry-less product over GF(2).
pub fn poly_mul(a: &Gf2Poly, b: &Gf2Poly) -> Gf2Poly {
    if a.is_zero() || b.is_zero() {
        return Gf2Poly::zero();
    }
    let (da, db) = (a.degree().unwrap(), b.degree().unwrap());
    let mut words = vec![0u64; (da + db + 1).div_ceil(64)];
    for d in a.support() {
        let (shift_w, shift_b) = (d / 64, d % 64);
        for (wi, &w) in b.words.iter().enumerate() {
            words[wi + shift_w] ^= w << shift_b;
            if shift_b != 0 && wi + shift_w + 1 < words.len() {
                words[wi + shift_w + 1] ^= w >> (64 - shift_b);
            }
        }
    }
    let mut p = Gf2Poly { words };
    p.normalize();
    p
}

impl std::ops::Mul for &Gf2Poly {
    type Output = Gf2Poly;
    fn mul(self, rhs: &Gf2Poly) -> Gf2Poly {
        poly_mul(self, rhs)
    }
}

/// GF(2) addition is XOR of the coefficient sequences.
impl std::ops::BitXor for &Gf2Poly {
    type Output = Gf2Poly;
    fn bitxor(self, rhs: &Gf2Poly) -> Gf2Poly {
        let (longer, shorter) = if self.words.len() >= rhs.words.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut words = longer.words.clone();
        for (w, s) in words.iter_mut().zip(&shorter.words) {
            *w ^= s;
        }
        let mut p = Gf2Poly { words };
        p.normalize();
        p
    }
}

/// Total order matching comparison of the coefficient sequences as integers
/// (so `g1 <= g2` enumeration is well defined).
impl Ord for Gf2Poly {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.words
            .len()
            .cmp(&other.words.len())
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl PartialOrd for Gf2Poly {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for d in self.support() {
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match d {
                0 => write!(f, "1")?,
                1 => write!(f, "x")?,
                _ => write!(f, "x^{d}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Poly({self})")
    }
}

/// A growable sequence of bits; the workhorse carrier for messages and coded
/// streams. Bit `i` lives at bit `i % 64` of word `i / 64`.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct BitStream {
    words: Vec<u64>,
    len: usize,
}

impl BitStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        BitStream {
            words: Vec::with_capacity(bits.div_ceil(64)),
            len: 0,
        }
    }

    /// A stream of `len` zero bits.
    pub fn zeros(len: usize) -> Self {
        BitStream {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, bit: bool) {
        if self.len % 64 == 0 {
            self.words.push(0);
        }
        if bit {
            self.words[self.len / 64] |= 1 << (self.len % 64);
        }
        self.len += 1;
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range (len {})", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index {i} out of range (len {})", self.len);
        if bit {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range (len {})", self.len);
        self.words[i / 64] ^= 1 << (i % 64);
    }

    /// Iterator over the bits in order.
    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Interprets bytes MSB-first: bit 7 of `bytes[0]` becomes bit 0.
    pub fn from_bytes_msb(bytes: &[u8]) -> Self {
        let mut s = BitStream::with_capacity(bytes.len() * 8);
        for &byte in bytes {
            for shift in (0..8).rev() {
                s.push((byte >> shift) & 1 == 1);
            }
        }
        s
    }

    /// Packs bits MSB-first into bytes; a final partial byte is
    /// right-zero-padded.
    pub fn to_bytes_msb(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len.div_ceil(8)];
        for i in 0..self.len {
            if self.get(i) {
                out[i / 8] |= 1 << (7 - i % 8);
            }
        }
        out
    }

    /// First `len` bits as a new stream. Panics if `len > self.len()`.
    pub fn truncated(&self, len: usize) -> BitStream {
        assert!(len <= self.len);
        let mut words = self.words[..len.div_ceil(64)].to_vec();
        if len % 64 != 0 {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << (len % 64)) - 1;
            }
        }
        BitStream { words, len }
    }

    /// XORs `other` into `self` bit-for-bit. Panics on length mismatch.
    pub fn xor_in_place(&mut self, other: &BitStream) {
        assert_eq!(self.len, other.len, "xor of unequal-length streams");
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w ^= o;
        }
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    /// Builds a stream from raw words, truncating to `len` bits.
    pub(crate) fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.truncate(len.div_ceil(64));
        words.resize(len.div_ceil(64), 0);
        if len % 64 != 0 {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << (len % 64)) - 1;
            }
        }
        BitStream { words, len }
    }
}

impl FromIterator<bool> for BitStream {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut s = BitStream::new();
        for b in iter {
            s.push(b);
        }
        s
    }
}

impl fmt::Debug for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitStream(len={}, ", self.len)?;
        for i in 0..self.len.min(64) {
            write!(f, "{}", self.get(i) as u8)?;
        }
        if self.len > 64 {
            write!(f, "…")?;
        }
        write!(f, ")")
    }
}

/// Renders a bit stream as lowercase hex, 4 bits per character, MSB-first
/// within each nibble; a final partial nibble is right-zero-padded. The true
/// bit length must travel out of band (the frame header carries it).
pub fn bits_to_nibble_hex(s: &BitStream) -> String {
    let mut out = String::with_capacity(s.len().div_ceil(4));
    let mut i = 0;
    while i < s.len() {
        let mut nibble = 0u8;
        for pos in 0..4 {
            if i + pos < s.len() && s.get(i + pos) {
                nibble |= 1 << (3 - pos);
            }
        }
        out.push(char::from_digit(nibble as u32, 16).unwrap());
        i += 4;
    }
    out
}

/// Inverse of [`bits_to_nibble_hex`] truncated to `bit_len` bits.
///
/// Accepts upper- or lowercase hex. Errors on a non-hex character or on
/// `bit_len` exceeding what the text can carry.
pub fn nibble_hex_to_bits(t: &str, bit_len: usize) -> Result<BitStream> {
    if bit_len > 4 * t.len() {
        return Err(Error::LengthMismatch(format!(
            "bit length {bit_len} exceeds {} hex characters",
            t.len()
        )));
    }
    let mut s = BitStream::with_capacity(bit_len);
    for c in t.chars() {
        let nibble = c
            .to_digit(16)
            .ok_or_else(|| Error::MalformedPayload(format!("non-hex character {c:?}")))?
            as u8;
        for pos in 0..4 {
            if s.len() == bit_len {
                return Ok(s);
            }
            s.push((nibble >> (3 - pos)) & 1 == 1);
        }
    }
    Ok(s)
}
