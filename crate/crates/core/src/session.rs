//! Wire formats and the end-to-end pipeline.
//!
//! Two byte formats live here, both frozen and covered by fixture files:
//!
//! - the **parameter blob**, the secret a sender hands the receiver over a
//!   confidential side channel (`"PRSS"` magic, fixed header, polynomial and
//!   pattern tables, CRC32 footer);
//! - the **frame container**, the protected payload itself (13-byte header
//!   per chunk plus hex-nibble text or packed binary payload).
//!
//! Multi-byte integers are little-endian; bit-level fields pack MSB-first
//! within each byte. The noise keystream is initialized once per
//! protect/unprotect call and runs continuously across chunks, so one call
//! is one keystream — re-keying per chunk would reuse keystream prefixes.

use rand::{CryptoRng, Rng};

use crate::code::{ConvCode, PuncturedCode};
use crate::codegen::{generate_code_with_divisor, GenBounds};
use crate::decode::decode_linear;
use crate::error::{Error, Result};
use crate::gf2::{bits_to_nibble_hex, nibble_hex_to_bits, BitStream, Gf2Poly};
use crate::noise::{gen_noise_config, NoiseGenerator, NoiseKey, PROBA_RANGE};

pub const PARAMS_VERSION: u8 = 1;
pub const FRAME_VERSION: u8 = 1;

/// Default chunk size for [`protect`]; the linear decoder does not need the
/// split, but small chunks keep frame loss localized and memory flat.
pub const DEFAULT_CHUNK_BYTES: usize = 2048;

/// Everything the receiver needs: the punctured encoder and the noise
/// generator configuration. Possession of this struct is the key.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SessionParams {
    pub code: PuncturedCode,
    pub key: NoiseKey,
    pub bf: u16,
    pub proba: u8,
}

impl SessionParams {
    /// Draws a complete fresh parameter set.
    pub fn generate<R: Rng + CryptoRng + ?Sized>(
        bounds: &GenBounds,
        proba_lo: u8,
        proba_hi: u8,
        divisor: u32,
        rng: &mut R,
    ) -> Result<Self> {
        let code = generate_code_with_divisor(bounds, divisor, rng)?;
        let (bf, proba) = gen_noise_config(rng, proba_lo, proba_hi)?;
        let key = NoiseKey::generate(rng);
        Ok(SessionParams {
            code,
            key,
            bf,
            proba,
        })
    }
}

fn poly_bytes(mem: usize) -> usize {
    (mem + 1).div_ceil(8)
}

fn pattern_bytes(n: usize, width: usize) -> usize {
    (n * width).div_ceil(8)
}

/// Fixed-size part of the blob before the variable tables: magic, version,
/// dimensions, noise configuration, key.
const BLOB_HEADER_BYTES: usize = 30;

fn set_bit_msb(bytes: &mut [u8], idx: usize) {
    bytes[idx / 8] |= 0x80 >> (idx % 8);
}

fn get_bit_msb(bytes: &[u8], idx: usize) -> bool {
    bytes[idx / 8] & (0x80 >> (idx % 8)) != 0
}

/// Serializes the secret parameter blob. Layout (little-endian integers):
///
/// ```text
/// "PRSS" | version u8 | k u8 | n u8 | mem u16 | M u16 | proba u8 | bf u16
///        | init1..init4 u32 ×4
///        | polynomials, row-major k·n entries of ceil((mem+1)/8) bytes
///        | pattern, row-major n×M bits packed MSB-first
///        | CRC32 of everything above
/// ```
pub fn serialize_params(sp: &SessionParams) -> Vec<u8> {
    let base = sp.code.base();
    let (k, n, mem, width) = (base.k(), base.n(), base.mem(), sp.code.width());
    let mut out = Vec::with_capacity(
        BLOB_HEADER_BYTES + k * n * poly_bytes(mem) + pattern_bytes(n, width) + 4,
    );
    out.extend_from_slice(b"PRSS");
    out.push(PARAMS_VERSION);
    out.push(k as u8);
    out.push(n as u8);
    out.extend_from_slice(&(mem as u16).to_le_bytes());
    out.extend_from_slice(&(width as u16).to_le_bytes());
    out.push(sp.proba);
    out.extend_from_slice(&sp.bf.to_le_bytes());
    for init in sp.key.inits {
        out.extend_from_slice(&init.to_le_bytes());
    }
    for i in 0..k {
        for j in 0..n {
            let mut entry = vec![0u8; poly_bytes(mem)];
            for d in base.poly(i, j).support() {
                set_bit_msb(&mut entry, d);
            }
            out.extend_from_slice(&entry);
        }
    }
    let mut pattern = vec![0u8; pattern_bytes(n, width)];
    for i in 0..n {
        for j in 0..width {
            if sp.code.keeps(i, j) {
                set_bit_msb(&mut pattern, i * width + j);
            }
        }
    }
    out.extend_from_slice(&pattern);
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

/// Parses and fully re-validates a parameter blob: structural problems are
/// `Format`, checksum mismatches are `Corruption`, and well-formed blobs
/// carrying out-of-range values are `InvalidParams`.
pub fn deserialize_params(blob: &[u8]) -> Result<SessionParams> {
    if blob.len() < 5 || &blob[..4] != b"PRSS" {
        return Err(Error::Format("missing PRSS magic".into()));
    }
    if blob[4] != PARAMS_VERSION {
        return Err(Error::Format(format!(
            "unsupported params version {}",
            blob[4]
        )));
    }
    if blob.len() < BLOB_HEADER_BYTES + 4 {
        return Err(Error::Format("truncated params blob".into()));
    }
    let k = blob[5] as usize;
    let n = blob[6] as usize;
    let mem = u16::from_le_bytes([blob[7], blob[8]]) as usize;
    let width = u16::from_le_bytes([blob[9], blob[10]]) as usize;
    let proba = blob[11];
    let bf = u16::from_le_bytes([blob[12], blob[13]]);
    let mut inits = [0u32; 4];
    for (r, init) in inits.iter_mut().enumerate() {
        *init = u32::from_le_bytes(blob[14 + 4 * r..18 + 4 * r].try_into().unwrap());
    }

    let expected_len =
        BLOB_HEADER_BYTES + k * n * poly_bytes(mem) + pattern_bytes(n, width) + 4;
    if blob.len() != expected_len {
        return Err(Error::Format(format!(
            "blob is {} bytes, layout demands {expected_len}",
            blob.len()
        )));
    }
    let body = &blob[..blob.len() - 4];
    let stored = u32::from_le_bytes(blob[blob.len() - 4..].try_into().unwrap());
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(Error::Corruption { stored, computed });
    }

    let entry_bytes = poly_bytes(mem);
    let mut polys = Vec::with_capacity(k);
    let mut offset = BLOB_HEADER_BYTES;
    for _ in 0..k {
        let mut row = Vec::with_capacity(n);
        for _ in 0..n {
            let entry = &blob[offset..offset + entry_bytes];
            offset += entry_bytes;
            let mut support = Vec::new();
            for d in 0..entry_bytes * 8 {
                if get_bit_msb(entry, d) {
                    if d > mem {
                        return Err(Error::Format(
                            "nonzero padding bits in polynomial table".into(),
                        ));
                    }
                    support.push(d);
                }
            }
            row.push(Gf2Poly::from_support(&support));
        }
        polys.push(row);
    }

    let pattern_region = &blob[offset..offset + pattern_bytes(n, width)];
    let mut pattern = vec![vec![false; width]; n];
    for idx in 0..pattern_bytes(n, width) * 8 {
        if get_bit_msb(pattern_region, idx) {
            if idx >= n * width {
                return Err(Error::Format(
                    "nonzero padding bits in pattern table".into(),
                ));
            }
            pattern[idx / width][idx % width] = true;
        }
    }

    let code = PuncturedCode::new(ConvCode::new(k, n, mem, polys)?, &pattern)?;
    let key = NoiseKey { inits };
    key.validate()?;
    if !PROBA_RANGE.contains(&proba) {
        return Err(Error::InvalidParams(format!(
            "noise probability {proba} outside [1, 49]"
        )));
    }
    if bf == 0 || bf == 0xFFFF {
        return Err(Error::InvalidParams(
            "degenerate noise filter table".into(),
        ));
    }
    Ok(SessionParams {
        code,
        key,
        bf,
        proba,
    })
}

/// One protected chunk. `payload` holds exactly `coded_bit_len` bits; the
/// container encoding (hex text by default, packed binary on request) is
/// chosen when frames are written out.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Frame {
    pub version: u8,
    pub chunk_index: u32,
    pub plain_len_bytes: u32,
    pub coded_bit_len: u32,
    pub payload: BitStream,
}

impl Frame {
    /// The payload as transport hex text.
    pub fn payload_hex(&self) -> String {
        bits_to_nibble_hex(&self.payload)
    }
}

/// How frame payloads are written to byte containers.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PayloadMode {
    /// Lowercase hex nibbles, one ASCII byte per 4 payload bits.
    Hex,
    /// Packed bits, MSB-first.
    Binary,
}

const FRAME_HEADER_BYTES: usize = 13;

fn payload_container_bytes(coded_bit_len: usize, mode: PayloadMode) -> usize {
    match mode {
        PayloadMode::Hex => coded_bit_len.div_ceil(4),
        PayloadMode::Binary => coded_bit_len.div_ceil(8),
    }
}

/// Serializes frames back-to-back: per frame a 13-byte header
/// (version u8 | chunk_index u32 | plain_len_bytes u32 | coded_bit_len u32,
/// little-endian) followed by the payload in the chosen mode.
pub fn write_frames(frames: &[Frame], mode: PayloadMode) -> Vec<u8> {
    let mut out = Vec::new();
    for frame in frames {
        out.push(frame.version);
        out.extend_from_slice(&frame.chunk_index.to_le_bytes());
        out.extend_from_slice(&frame.plain_len_bytes.to_le_bytes());
        out.extend_from_slice(&frame.coded_bit_len.to_le_bytes());
        match mode {
            PayloadMode::Hex => out.extend_from_slice(frame.payload_hex().as_bytes()),
            PayloadMode::Binary => out.extend_from_slice(&frame.payload.to_bytes_msb()),
        }
    }
    out
}

/// Parses a frame container produced by [`write_frames`] with the same
/// payload mode.
pub fn read_frames(bytes: &[u8], mode: PayloadMode) -> Result<Vec<Frame>> {
    let mut frames = Vec::new();
    let mut offset = 0;
    while offset < bytes.len() {
        if bytes.len() - offset < FRAME_HEADER_BYTES {
            return Err(Error::Format("truncated frame header".into()));
        }
        let header = &bytes[offset..offset + FRAME_HEADER_BYTES];
        offset += FRAME_HEADER_BYTES;
        let version = header[0];
        let chunk_index = u32::from_le_bytes(header[1..5].try_into().unwrap());
        let plain_len_bytes = u32::from_le_bytes(header[5..9].try_into().unwrap());
        let coded_bit_len = u32::from_le_bytes(header[9..13].try_into().unwrap());
        let payload_bytes = payload_container_bytes(coded_bit_len as usize, mode);
        if bytes.len() - offset < payload_bytes {
            return Err(Error::Format(format!(
                "truncated frame payload for chunk {chunk_index}"
            )));
        }
        let region = &bytes[offset..offset + payload_bytes];
        offset += payload_bytes;
        let payload = match mode {
            PayloadMode::Hex => {
                let text = std::str::from_utf8(region)
                    .map_err(|_| Error::MalformedPayload("payload is not ASCII hex".into()))?;
                nibble_hex_to_bits(text, coded_bit_len as usize)?
            }
            PayloadMode::Binary => {
                BitStream::from_bytes_msb(region).truncated(coded_bit_len as usize)
            }
        };
        frames.push(Frame {
            version,
            chunk_index,
            plain_len_bytes,
            coded_bit_len,
            payload,
        });
    }
    Ok(frames)
}

/// Pads a chunk's bits with zeros up to a whole number of sections.
fn chunk_message_bits(k: usize, plain_len_bytes: usize) -> usize {
    k * (8 * plain_len_bytes).div_ceil(k)
}

/// Runs the sending pipeline: split into chunks, then per chunk encode,
/// puncture, and XOR the keyed noise, with one keystream covering the whole
/// call in chunk order.
pub fn protect(sp: &SessionParams, data: &[u8], chunk_bytes: usize) -> Result<Vec<Frame>> {
    if chunk_bytes < 1 {
        return Err(Error::InvalidRange("chunk size must be at least 1".into()));
    }
    let mut noise = NoiseGenerator::new(&sp.key, sp.bf, sp.proba)?;
    let k = sp.code.base().k();
    let mut frames = Vec::new();
    for (index, chunk) in data.chunks(chunk_bytes).enumerate() {
        let mut bits = BitStream::from_bytes_msb(chunk);
        while bits.len() < chunk_message_bits(k, chunk.len()) {
            bits.push(false);
        }
        let coded = sp.code.puncture(&sp.code.base().encode(&bits)?);
        if coded.len() > u32::MAX as usize || index > u32::MAX as usize {
            return Err(Error::InvalidRange(
                "chunk too large for the frame header".into(),
            ));
        }
        let payload = noise.apply(&coded);
        frames.push(Frame {
            version: FRAME_VERSION,
            chunk_index: index as u32,
            plain_len_bytes: chunk.len() as u32,
            coded_bit_len: payload.len() as u32,
            payload,
        });
    }
    Ok(frames)
}

/// Runs the receiving pipeline and returns the plaintext. Frames must be
/// complete and in order; any per-chunk failure is reported with the chunk
/// index attached.
pub fn unprotect(sp: &SessionParams, frames: &[Frame]) -> Result<Vec<u8>> {
    let mut noise = NoiseGenerator::new(&sp.key, sp.bf, sp.proba)?;
    let k = sp.code.base().k();
    let mut out = Vec::new();
    for (position, frame) in frames.iter().enumerate() {
        if frame.version != FRAME_VERSION {
            return Err(Error::Format(format!(
                "unsupported frame version {}",
                frame.version
            )));
        }
        let expected = position as u32;
        if frame.chunk_index != expected {
            return Err(Error::Sequence {
                expected,
                found: frame.chunk_index,
            });
        }
        if frame.payload.len() != frame.coded_bit_len as usize {
            return Err(Error::Format(format!(
                "chunk {expected}: payload holds {} bits, header claims {}",
                frame.payload.len(),
                frame.coded_bit_len
            )));
        }
        let msg_bits = chunk_message_bits(k, frame.plain_len_bytes as usize);
        let predicted = sp.code.expected_coded_bits(msg_bits)?;
        if frame.coded_bit_len as usize != predicted {
            return Err(Error::Format(format!(
                "chunk {expected}: {} coded bits cannot carry {} plaintext bytes (expected {predicted})",
                frame.coded_bit_len, frame.plain_len_bytes
            )));
        }

        let clean = noise.apply(&frame.payload);
        let es = sp
            .code
            .unpuncture(&clean)
            .map_err(|e| e.with_chunk(expected))?;
        let report =
            decode_linear(&sp.code, &es, msg_bits).map_err(|e| e.with_chunk(expected))?;
        let plain_bits = 8 * frame.plain_len_bytes as usize;
        if (plain_bits..msg_bits).any(|i| report.message.get(i)) {
            return Err(Error::Integrity(
                "nonzero padding bits after decode".into(),
            )
            .with_chunk(expected));
        }
        out.extend_from_slice(&report.message.truncated(plain_bits).to_bytes_msb());
    }
    Ok(out)
}
