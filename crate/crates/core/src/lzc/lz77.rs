//! Greedy LZ77 with fixed token widths.
//!
//! Token grammar:
//! - literal: flag bit 0 + 8 payload bits = 9 bits;
//! - match:   flag bit 1 + 12-bit offset (1..=4095) + 6-bit biased length
//!   (length − 3, so lengths 3..=66) = 19 bits.
//!
//! The encoder is greedy: at each position it takes the longest match in the
//! window, breaking ties by the smallest offset; candidates shorter than 3
//! bytes become literals, and offsets beyond 4095 are out of the window.
//! Matches may overlap the current position (run encoding).

use std::collections::HashMap;

use super::bitio::BitBuf;
use super::LzError;

pub const LITERAL_BITS: u32 = 9;
pub const MATCH_BITS: u32 = 19;
pub const MIN_MATCH: usize = 3;
pub const MAX_MATCH: usize = 66;
pub const MAX_OFFSET: usize = 4095;

const OFFSET_WIDTH: u32 = 12;
const LENGTH_WIDTH: u32 = 6;

fn key(input: &[u8], pos: usize) -> [u8; 3] {
    [input[pos], input[pos + 1], input[pos + 2]]
}

/// Longest match at `pos`, smallest offset among equals.
fn best_match(
    input: &[u8],
    pos: usize,
    chains: &HashMap<[u8; 3], Vec<usize>>,
) -> Option<(usize, usize)> {
    let remaining = input.len() - pos;
    if remaining < MIN_MATCH {
        return None;
    }
    let cap = remaining.min(MAX_MATCH);
    let candidates = chains.get(&key(input, pos))?;

    let mut best: Option<(usize, usize)> = None; // (offset, length)
    // Newest candidate first = smallest offset first; later (larger-offset)
    // candidates only win by being strictly longer.
    for &start in candidates.iter().rev() {
        let offset = pos - start;
        if offset > MAX_OFFSET {
            break;
        }
        let mut len = 0;
        while len < cap && input[start + len] == input[pos + len] {
            len += 1;
        }
        if len >= MIN_MATCH && best.map_or(true, |(_, bl)| len > bl) {
            best = Some((offset, len));
            if len == cap {
                break;
            }
        }
    }
    best
}

pub fn encode(input: &[u8]) -> BitBuf {
    let mut out = BitBuf::new();
    let mut chains: HashMap<[u8; 3], Vec<usize>> = HashMap::new();
    let mut pos = 0;
    while pos < input.len() {
        let step = match best_match(input, pos, &chains) {
            Some((offset, len)) => {
                out.push_bits(1, 1);
                out.push_bits(offset as u64, OFFSET_WIDTH);
                out.push_bits((len - MIN_MATCH) as u64, LENGTH_WIDTH);
                len
            }
            None => {
                out.push_bits(0, 1);
                out.push_bits(u64::from(input[pos]), 8);
                1
            }
        };
        for p in pos..pos + step {
            if p + MIN_MATCH <= input.len() {
                chains.entry(key(input, p)).or_default().push(p);
            }
        }
        pos += step;
    }
    out
}

pub fn decode(bits: &BitBuf) -> Result<Vec<u8>, LzError> {
    let mut out = Vec::new();
    let mut r = bits.reader();
    while r.remaining() > 0 {
        let flag = r.read_bits(1).ok_or(LzError::TruncatedStream)?;
        if flag == 0 {
            let byte = r.read_bits(8).ok_or(LzError::TruncatedStream)?;
            out.push(byte as u8);
        } else {
            let offset = r.read_bits(OFFSET_WIDTH).ok_or(LzError::TruncatedStream)? as usize;
            let len = r.read_bits(LENGTH_WIDTH).ok_or(LzError::TruncatedStream)? as usize
                + MIN_MATCH;
            if offset == 0 || offset > out.len() {
                return Err(LzError::BadOffset {
                    offset,
                    produced: out.len(),
                });
            }
            for _ in 0..len {
                let byte = out[out.len() - offset];
                out.push(byte);
            }
        }
    }
    Ok(out)
}
