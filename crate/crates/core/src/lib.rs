//! Scalable-security codec: punctured convolutional codes whose decoding
//! cost is tuned by public parameters, combined with a keyed deterministic
//! noise layer. The construction trades mathematical secrecy for a
//! *work-factor* guarantee — anyone may decode, but only the keyed receiver
//! decodes cheaply.
//!
//! Modules:
//! - [`gf2`]: GF(2) polynomials and exact-length bit streams, plus the
//!   hex-nibble transport encoding.
//! - [`code`]: convolutional encoders and puncturing patterns.
//! - [`decode`]: the banded linear-system decoder (keyed receiver path) and
//!   a small Viterbi reference decoder for noisy-channel experiments.
//! - [`noise`]: the LFSR-based keyed noise generator.
//! - [`codegen`]: random generation of full code/noise parameter sets.
//! - [`session`]: parameter-blob and framed-payload wire formats, and the
//!   end-to-end protect/unprotect pipeline.
//! - [`analysis`]: entropy measurement, punctured-to-equivalent-code
//!   conversion, and a brute-force reconstruction demonstrator sized for
//!   experiments on deliberately weak parameters.

pub mod analysis;
pub mod code;
pub mod codegen;
pub mod decode;
pub mod error;
pub mod gf2;
pub mod noise;
pub mod session;

#[cfg(test)]
mod test_util;

pub use analysis::{byte_entropy, equivalent_code, reconstruct_bruteforce, reconstruction_sweep, EntropyReport, ReconstructionResult, SweepPoint};
pub use code::{ConvCode, PuncturedCode};
pub use codegen::{generate_code, generate_code_with_divisor, GenBounds};
pub use decode::{decode_linear, decode_viterbi, DecodeMethod, DecodeReport, ErasureStream};
pub use error::{Error, Result};
pub use gf2::{bits_to_nibble_hex, nibble_hex_to_bits, poly_mul, BitStream, Gf2Poly};
pub use noise::{gen_noise_config, NoiseGenerator, NoiseKey};
pub use session::{deserialize_params, protect, read_frames, serialize_params, unprotect, write_frames, Frame, PayloadMode, SessionParams};
