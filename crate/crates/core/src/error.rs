//! Error taxonomy shared by every module in the crate.
//!
//! Variants are grouped by how a caller should react: malformed inputs
//! (`Format`, `MalformedPayload`, `LengthMismatch`, `Sequence`), corrupted but
//! well-formed data (`Corruption`), decode-time inconsistencies (`Integrity`,
//! `AmbiguousDecode`), and caller mistakes (`InvalidParams`, `InvalidBounds`,
//! `InvalidRange`, size limits). The CLI maps these groups to distinct exit
//! codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Payload text contains a character outside the hex alphabet.
    #[error("malformed payload: {0}")]
    MalformedPayload(String),

    /// A declared bit/byte count does not fit the data it describes.
    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    /// Message length is not a multiple of the encoder's input count k.
    #[error("message length {len} is not a multiple of k={k}")]
    MessageLength { len: usize, k: usize },

    /// Code or key parameters violate a structural invariant.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Generation bounds that cannot yield a valid code (e.g. k < n unsatisfiable).
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),

    /// A numeric range argument is outside its permitted interval.
    #[error("invalid range: {0}")]
    InvalidRange(String),

    /// Too many consecutive probe failures while generating a code.
    #[error("code generation failed: {0} consecutive probe round-trips failed")]
    GenerationFailure(u32),

    /// Viterbi state space would exceed the supported size (k*mem > 16).
    #[error("parameters too large for Viterbi: k*mem = {kmem} > 16; use the linear decoder")]
    ParametersTooLarge { kmem: usize },

    /// Brute-force reconstruction hypothesis space would be too large.
    #[error("hypothesis space too large: max_mem = {max_mem} > 8")]
    HypothesisSpaceTooLarge { max_mem: usize },

    /// Wire data is structurally unreadable (bad magic, truncation, bad field).
    #[error("format error: {0}")]
    Format(String),

    /// Wire data is structurally readable but fails its checksum.
    #[error("corruption detected: CRC mismatch (stored {stored:#010x}, computed {computed:#010x})")]
    Corruption { stored: u32, computed: u32 },

    /// Decoded data is inconsistent with the code (corrupted payload or wrong key).
    #[error("integrity error: {0}")]
    Integrity(String),

    /// The linear system does not pin every message bit.
    #[error("ambiguous decode: rank deficit {deficit}")]
    AmbiguousDecode { deficit: usize },

    /// Frames arrived out of order or with a gap.
    #[error("frame sequence error: expected chunk {expected}, found {found}")]
    Sequence { expected: u32, found: u32 },

    /// An operation that needs data received none.
    #[error("empty input")]
    EmptyInput,

    /// Error while processing one chunk of a framed stream.
    #[error("chunk {index}: {source}")]
    Chunk {
        index: u32,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps a decode-stage error with the chunk it occurred in.
    pub fn with_chunk(self, index: u32) -> Error {
        Error::Chunk {
            index,
            source: Box::new(self),
        }
    }

    /// The innermost error, unwrapping any chunk context.
    pub fn root(&self) -> &Error {
        match self {
            Error::Chunk { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
