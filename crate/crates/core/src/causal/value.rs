//! Node value types: real scalars, exact fixed-point decimal strings, and
//! packed bit strings.

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ValueError {
    #[error("digit values must share the fraction width: {0} vs {1}")]
    FractionWidthMismatch(u32, u32),
    #[error("digit value overflow")]
    DigitOverflow,
    #[error("cannot parse {0:?} as a fixed-point decimal with {1} fraction digits")]
    BadDigitLiteral(String, u32),
    #[error("bit strings must share their length: {0} vs {1}")]
    BitLengthMismatch(usize, usize),
    #[error("cannot parse {0:?} as a bit string (expected '0'/'1' characters)")]
    BadBitLiteral(String),
}

/// Exact fixed-point decimal with `frac_digits` fractional digits, stored as
/// an integer count of `10^{-frac_digits}` units. Addition is exact, so
/// chains of uniform-digit mechanisms never suffer binary rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DigitValue {
    units: u64,
    frac_digits: u32,
}

impl DigitValue {
    pub fn from_units(units: u64, frac_digits: u32) -> Self {
        Self { units, frac_digits }
    }

    pub fn zero(frac_digits: u32) -> Self {
        Self::from_units(0, frac_digits)
    }

    pub fn units(&self) -> u64 {
        self.units
    }

    pub fn frac_digits(&self) -> u32 {
        self.frac_digits
    }

    fn scale(&self) -> u64 {
        10u64.pow(self.frac_digits)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, ValueError> {
        if self.frac_digits != other.frac_digits {
            return Err(ValueError::FractionWidthMismatch(
                self.frac_digits,
                other.frac_digits,
            ));
        }
        let units = self
            .units
            .checked_add(other.units)
            .ok_or(ValueError::DigitOverflow)?;
        Ok(Self::from_units(units, self.frac_digits))
    }

    /// Decimal rendering `I.FFF…F` with exactly `frac_digits` fraction digits.
    pub fn render(&self) -> String {
        format!(
            "{}.{:0width$}",
            self.units / self.scale(),
            self.units % self.scale(),
            width = self.frac_digits as usize
        )
    }

    /// The fraction digits alone, e.g. `"4000000000"` for 0.4 at width 10.
    pub fn frac_string(&self) -> String {
        format!(
            "{:0width$}",
            self.units % self.scale(),
            width = self.frac_digits as usize
        )
    }

    /// Exact inverse of [`DigitValue::render`]; the fraction part must have
    /// exactly `frac_digits` digits.
    pub fn parse(s: &str, frac_digits: u32) -> Result<Self, ValueError> {
        let bad = || ValueError::BadDigitLiteral(s.to_string(), frac_digits);
        let (int_part, frac_part) = s.split_once('.').ok_or_else(bad)?;
        if int_part.is_empty()
            || frac_part.len() != frac_digits as usize
            || !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(bad());
        }
        let int: u64 = int_part.parse().map_err(|_| bad())?;
        let frac: u64 = if frac_digits == 0 {
            0
        } else {
            frac_part.parse().map_err(|_| bad())?
        };
        let units = int
            .checked_mul(10u64.pow(frac_digits))
            .and_then(|v| v.checked_add(frac))
            .ok_or(ValueError::DigitOverflow)?;
        Ok(Self::from_units(units, frac_digits))
    }

    pub fn to_f64(&self) -> f64 {
        self.units as f64 / self.scale() as f64
    }
}

/// A bit string of explicit length, packed MSB-first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitString {
    bytes: Vec<u8>,
    bits: usize,
}

impl BitString {
    pub fn zeros(bits: usize) -> Self {
        Self {
            bytes: vec![0; bits.div_ceil(8)],
            bits,
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut out = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                out.bytes[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out
    }

    pub fn random(rng: &mut impl rand::Rng, bits: usize) -> Self {
        let mut bytes = vec![0u8; bits.div_ceil(8)];
        rng.fill(bytes.as_mut_slice());
        if bits % 8 != 0 {
            let keep = 0xFFu8 << (8 - bits % 8);
            *bytes.last_mut().unwrap() &= keep;
        }
        Self { bytes, bits }
    }

    pub fn len_bits(&self) -> usize {
        self.bits
    }

    pub fn bit(&self, i: usize) -> bool {
        (self.bytes[i / 8] >> (7 - i % 8)) & 1 == 1
    }

    pub fn xor(&self, other: &Self) -> Result<Self, ValueError> {
        if self.bits != other.bits {
            return Err(ValueError::BitLengthMismatch(self.bits, other.bits));
        }
        let bytes = self
            .bytes
            .iter()
            .zip(&other.bytes)
            .map(|(a, b)| a ^ b)
            .collect();
        Ok(Self {
            bytes,
            bits: self.bits,
        })
    }

    /// Hex rendering, one char per 4 bits, a trailing partial nibble padded
    /// with zero bits. Hex stays clear of the 0xFF separator byte.
    pub fn render_hex(&self) -> String {
        let nibbles = self.bits.div_ceil(4);
        (0..nibbles)
            .map(|i| {
                let mut v = 0u8;
                for k in 0..4 {
                    let bit = i * 4 + k;
                    v = (v << 1) | u8::from(bit < self.bits && self.bit(bit));
                }
                char::from_digit(u32::from(v), 16).unwrap()
            })
            .collect()
    }

    /// Parse a `'0'/'1'` character string.
    pub fn parse_bits(s: &str) -> Result<Self, ValueError> {
        let mut bits = Vec::with_capacity(s.len());
        for ch in s.chars() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(ValueError::BadBitLiteral(s.to_string())),
            }
        }
        Ok(Self::from_bits(&bits))
    }

    pub fn to_bit_string(&self) -> String {
        (0..self.bits)
            .map(|i| if self.bit(i) { '1' } else { '0' })
            .collect()
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_bit_string())
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Self::parse_bits(&s).map_err(de::Error::custom)
    }
}

/// A node's observed value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Real(f64),
    Digits(DigitValue),
    Bits(BitString),
}

impl Value {
    /// Deterministic string rendering used for CSV emission and compression
    /// contexts: exact decimal for digit values, hex for bit strings,
    /// shortest round-trip decimal for reals.
    pub fn render(&self) -> String {
        match self {
            Value::Real(v) => format!("{v}"),
            Value::Digits(d) => d.render(),
            Value::Bits(b) => b.render_hex(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Value::Real(_) => "real",
            Value::Digits(_) => "digits",
            Value::Bits(_) => "bits",
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            Value::Real(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_digits(&self) -> Option<&DigitValue> {
        match self {
            Value::Digits(d) => Some(d),
            _ => None,
        }
    }

    pub fn as_bits(&self) -> Option<&BitString> {
        match self {
            Value::Bits(b) => Some(b),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digit_render_and_parse_round_trip() {
        let v = DigitValue::from_units(4_000_000_000, 10);
        assert_eq!(v.render(), "0.4000000000");
        assert_eq!(v.frac_string(), "4000000000");
        assert_eq!(DigitValue::parse("0.4000000000", 10).unwrap(), v);

        let sum = v.checked_add(&DigitValue::from_units(17_000_000_001, 10)).unwrap();
        assert_eq!(sum.render(), "2.1000000001");
    }

    #[test]
    fn digit_parse_rejects_malformed() {
        assert!(DigitValue::parse("0.123", 10).is_err());
        assert!(DigitValue::parse("abc", 10).is_err());
        assert!(DigitValue::parse(".5", 1).is_err());
        assert!(DigitValue::parse("1.2e3", 3).is_err());
    }

    #[test]
    fn bit_string_xor_and_hex() {
        let a = BitString::parse_bits("10110100").unwrap();
        let b = BitString::parse_bits("01010101").unwrap();
        let x = a.xor(&b).unwrap();
        assert_eq!(x.to_bit_string(), "11100001");
        assert_eq!(a.render_hex(), "b4");
        assert_eq!(BitString::zeros(12).render_hex(), "000");
        assert!(a.xor(&BitString::zeros(4)).is_err());
    }

    #[test]
    fn bit_string_partial_nibble_pads() {
        let a = BitString::parse_bits("101").unwrap();
        assert_eq!(a.render_hex(), "a");
    }
}
