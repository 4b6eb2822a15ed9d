//! LZ78 with exact per-phrase index widths.
//!
//! The input is parsed into phrases, each the longest already-seen phrase
//! extended by one fresh byte. Emitting the k-th phrase costs
//! `ceil(log2(k))` index bits (the dictionary holds k−1 phrases plus the
//! empty phrase) plus 8 literal bits. When the input ends in the middle of a
//! phrase, the remaining suffix equals some dictionary phrase and is emitted
//! as a bare index of `ceil(log2(T+1))` bits, `T` being the number of
//! complete phrases.

use std::collections::HashMap;

use super::bitio::BitBuf;
use super::LzError;

/// `ceil(log2(x))` for `x ≥ 1`.
pub fn ceil_log2(x: usize) -> u32 {
    debug_assert!(x >= 1);
    usize::BITS - (x - 1).leading_zeros()
}

pub fn encode(input: &[u8]) -> BitBuf {
    let mut out = BitBuf::new();
    // Trie edges: (phrase index, next byte) → phrase index. Phrase 0 is empty.
    let mut edges: HashMap<(u32, u8), u32> = HashMap::new();
    let mut complete: u32 = 0;
    let mut cur: u32 = 0;
    for &byte in input {
        if let Some(&next) = edges.get(&(cur, byte)) {
            cur = next;
            continue;
        }
        // New phrase: index of the longest existing prefix + one literal.
        let k = complete as usize + 1;
        out.push_bits(u64::from(cur), ceil_log2(k));
        out.push_bits(u64::from(byte), 8);
        edges.insert((cur, byte), k as u32);
        complete += 1;
        cur = 0;
    }
    if cur != 0 {
        // Trailing partial phrase: index into the T+1 known phrases.
        out.push_bits(u64::from(cur), ceil_log2(complete as usize + 1));
    }
    out
}

pub fn decode(bits: &BitBuf) -> Result<Vec<u8>, LzError> {
    let mut out = Vec::new();
    let mut phrases: Vec<Vec<u8>> = vec![Vec::new()];
    let mut r = bits.reader();
    while r.remaining() > 0 {
        let width = ceil_log2(phrases.len());
        if r.remaining() == width as usize {
            let idx = r.read_bits(width).ok_or(LzError::TruncatedStream)? as usize;
            let phrase = phrases.get(idx).ok_or(LzError::BadPhraseIndex {
                index: idx,
                known: phrases.len(),
            })?;
            out.extend_from_slice(phrase);
            break;
        }
        let idx = r.read_bits(width).ok_or(LzError::TruncatedStream)? as usize;
        let byte = r.read_bits(8).ok_or(LzError::TruncatedStream)? as u8;
        let mut phrase = phrases
            .get(idx)
            .ok_or(LzError::BadPhraseIndex {
                index: idx,
                known: phrases.len(),
            })?
            .clone();
        phrase.push(byte);
        out.extend_from_slice(&phrase);
        phrases.push(phrase);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_log2_small_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(4), 2);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(8), 3);
        assert_eq!(ceil_log2(9), 4);
    }
}
