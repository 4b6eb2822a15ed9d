//! Bit-exact Lempel-Ziv compressed-length functions.
//!
//! Compressed bit counts serve as computable upper bounds on description
//! length. Two fixed-parameter variants are defined, both with real
//! encoder/decoder pairs so every reported bit count is the length of an
//! actually decodable stream:
//!
//! - [`Compressor::Lz77`]: greedy matcher, 9-bit literals, 19-bit match
//!   tokens (12-bit offset ≤ 4095, lengths 3–66). Default for conditional
//!   estimates, since shared substrings across the separator are captured by
//!   explicit back-references.
//! - [`Compressor::Lz78`]: incremental-parsing dictionary, exact
//!   `ceil(log2(k))`-bit phrase indices.
//!
//! Joint costs concatenate payloads around the reserved separator byte
//! `0xFF`, which must never occur inside a payload.

mod bitio;
mod lz77;
mod lz78;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bitio::BitBuf;
pub use lz77::{LITERAL_BITS, MATCH_BITS, MAX_MATCH, MAX_OFFSET, MIN_MATCH};

/// Reserved separator byte for joint encodings; forbidden in payloads.
pub const SEPARATOR: u8 = 0xFF;

/// Which Lempel-Ziv variant to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Compressor {
    #[default]
    Lz77,
    Lz78,
}

impl std::fmt::Display for Compressor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Compressor::Lz77 => write!(f, "lz77"),
            Compressor::Lz78 => write!(f, "lz78"),
        }
    }
}

impl std::str::FromStr for Compressor {
    type Err = LzError;

    fn from_str(s: &str) -> Result<Self, LzError> {
        match s {
            "lz77" => Ok(Compressor::Lz77),
            "lz78" => Ok(Compressor::Lz78),
            other => Err(LzError::UnknownCompressor(other.to_string())),
        }
    }
}

/// Errors from compression-length operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum LzError {
    #[error("payload contains the reserved separator byte 0xFF at offset {0}")]
    SeparatorInPayload(usize),
    #[error("compressed stream ends mid-token")]
    TruncatedStream,
    #[error("match offset {offset} invalid with {produced} bytes produced")]
    BadOffset { offset: usize, produced: usize },
    #[error("phrase index {index} out of range ({known} phrases known)")]
    BadPhraseIndex { index: usize, known: usize },
    #[error("unknown compressor {0:?} (expected lz77 or lz78)")]
    UnknownCompressor(String),
}

/// A payload free of the reserved separator byte.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ByteString(Vec<u8>);

impl ByteString {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Result<Self, LzError> {
        let bytes = bytes.into();
        check_payload(&bytes)?;
        Ok(Self(bytes))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_payload(bytes: &[u8]) -> Result<(), LzError> {
    match bytes.iter().position(|&b| b == SEPARATOR) {
        Some(at) => Err(LzError::SeparatorInPayload(at)),
        None => Ok(()),
    }
}

/// Encode to an actual bit stream.
pub fn encode(input: &[u8], c: Compressor) -> BitBuf {
    match c {
        Compressor::Lz77 => lz77::encode(input),
        Compressor::Lz78 => lz78::encode(input),
    }
}

/// Decode a stream produced by [`encode`] with the same variant.
pub fn decode(bits: &BitBuf, c: Compressor) -> Result<Vec<u8>, LzError> {
    match c {
        Compressor::Lz77 => lz77::decode(bits),
        Compressor::Lz78 => lz78::decode(bits),
    }
}

/// Compressed length in bits. Deterministic across runs and platforms.
pub fn compressed_bits(input: &[u8], c: Compressor) -> u64 {
    encode(input, c).bit_len() as u64
}

/// Compressed length of `a ++ 0xFF ++ b` — the joint description cost.
pub fn joint_bits(a: &[u8], b: &[u8], c: Compressor) -> Result<u64, LzError> {
    check_payload(a)?;
    check_payload(b)?;
    let mut buf = Vec::with_capacity(a.len() + b.len() + 1);
    buf.extend_from_slice(a);
    buf.push(SEPARATOR);
    buf.extend_from_slice(b);
    Ok(compressed_bits(&buf, c))
}

/// Validate each part and join them around separator bytes.
fn join_validated(parts: &[&[u8]]) -> Result<Vec<u8>, LzError> {
    let mut out = Vec::new();
    for (i, part) in parts.iter().enumerate() {
        check_payload(part)?;
        if i > 0 {
            out.push(SEPARATOR);
        }
        out.extend_from_slice(part);
    }
    Ok(out)
}

/// Conditional description-length estimate of `x` given `ctx`:
/// `max(0, R(ctx ++ 0xFF ++ x) − R(ctx ++ 0xFF))`, clamped because a
/// complexity estimate cannot be negative. An empty context reduces to the
/// plain compressed length of `x`.
pub fn cond_complexity_estimate(x: &[u8], ctx: &[u8], c: Compressor) -> Result<u64, LzError> {
    if ctx.is_empty() {
        cond_complexity_estimate_parts(&[x], &[], c)
    } else {
        cond_complexity_estimate_parts(&[x], &[ctx], c)
    }
}

/// Multi-part form of [`cond_complexity_estimate`]: each part is a payload,
/// and parts are joined around separator bytes (payload ++ 0xFF ++ payload…)
/// on both the context and target sides. No context parts means no context.
pub fn cond_complexity_estimate_parts(
    x_parts: &[&[u8]],
    ctx_parts: &[&[u8]],
    c: Compressor,
) -> Result<u64, LzError> {
    let x = join_validated(x_parts)?;
    if ctx_parts.is_empty() {
        return Ok(compressed_bits(&x, c));
    }
    let mut buf = join_validated(ctx_parts)?;
    buf.push(SEPARATOR);
    let base = compressed_bits(&buf, c);
    buf.extend_from_slice(&x);
    Ok(compressed_bits(&buf, c).saturating_sub(base))
}
