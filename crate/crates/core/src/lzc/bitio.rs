//! Minimal MSB-first bit buffer shared by the two encoders and decoders.

/// Growable bit vector; bits are packed MSB-first within each byte.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitBuf {
    bytes: Vec<u8>,
    len_bits: usize,
}

impl BitBuf {
    pub fn new() -> Self {
        Self::default()
    }

    /// Total number of bits written.
    pub fn bit_len(&self) -> usize {
        self.len_bits
    }

    /// Append the `width` low bits of `value`, most significant first.
    pub fn push_bits(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 64);
        debug_assert!(width == 64 || value < (1u64 << width));
        for shift in (0..width).rev() {
            let bit = (value >> shift) & 1 == 1;
            let byte_idx = self.len_bits / 8;
            if byte_idx == self.bytes.len() {
                self.bytes.push(0);
            }
            if bit {
                self.bytes[byte_idx] |= 0x80 >> (self.len_bits % 8);
            }
            self.len_bits += 1;
        }
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader { buf: self, pos: 0 }
    }
}

/// Sequential reader over a [`BitBuf`].
pub struct BitReader<'a> {
    buf: &'a BitBuf,
    pos: usize,
}

impl BitReader<'_> {
    pub fn remaining(&self) -> usize {
        self.buf.len_bits - self.pos
    }

    /// Read `width` bits MSB-first; `None` when fewer bits remain.
    pub fn read_bits(&mut self, width: u32) -> Option<u64> {
        if (self.remaining() as u64) < u64::from(width) {
            return None;
        }
        let mut value = 0u64;
        for _ in 0..width {
            let byte = self.buf.bytes[self.pos / 8];
            let bit = (byte >> (7 - self.pos % 8)) & 1;
            value = (value << 1) | u64::from(bit);
            self.pos += 1;
        }
        Some(value)
    }
}
