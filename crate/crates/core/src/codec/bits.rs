//! Bitstrings and the Elias-gamma code used by every serialized object.
//!
//! Bits are stored MSB-first in reading order. The textual forms are a plain
//! `0`/`1` string and the `"<bitlen>:<hex>"` form used in scenario files,
//! where the hex digits hold the bits MSB-first, zero-padded to a nibble.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitsError {
    #[error("invalid bit character {0:?}")]
    BadBitChar(char),
    #[error("malformed hex-with-bitlength string {0:?}")]
    BadHex(String),
}

/// An owned, growable bitstring.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits {
    bits: Vec<bool>,
}

impl Bits {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Bits {
            bits: Vec::with_capacity(n),
        }
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        Bits { bits }
    }

    /// Parses a `0`/`1` string. Whitespace and `_` are ignored.
    pub fn parse(s: &str) -> Result<Self, BitsError> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                '_' | ' ' | '\t' | '\n' => {}
                other => return Err(BitsError::BadBitChar(other)),
            }
        }
        Ok(Bits { bits })
    }

    /// Parses the `"<bitlen>:<hex>"` form.
    pub fn from_hex(s: &str) -> Result<Self, BitsError> {
        let bad = || BitsError::BadHex(s.to_string());
        let (len, hex) = s.trim().split_once(':').ok_or_else(bad)?;
        let len: usize = len.trim().parse().map_err(|_| bad())?;
        let hex = hex.trim();
        if hex.len() != len.div_ceil(4) {
            return Err(bad());
        }
        let mut bits = Vec::with_capacity(hex.len() * 4);
        for c in hex.chars() {
            let d = c.to_digit(16).ok_or_else(bad)?;
            for shift in (0..4).rev() {
                bits.push((d >> shift) & 1 == 1);
            }
        }
        // Padding bits must be zero so that the form is canonical.
        if bits[len..].iter().any(|&b| b) {
            return Err(bad());
        }
        bits.truncate(len);
        Ok(Bits { bits })
    }

    /// Canonical lowercase `"<bitlen>:<hex>"` rendering.
    pub fn to_hex(&self) -> String {
        let mut out = format!("{}:", self.bits.len());
        for chunk in self.bits.chunks(4) {
            let mut d = 0u32;
            for i in 0..4 {
                d <<= 1;
                if chunk.get(i).copied().unwrap_or(false) {
                    d |= 1;
                }
            }
            out.push(std::char::from_digit(d, 16).unwrap());
        }
        out
    }

    /// The `width` low bits of `value`, MSB first.
    pub fn from_uint(value: u128, width: u32) -> Self {
        let mut b = Bits::with_capacity(width as usize);
        b.push_uint(value, width);
        b
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> Option<bool> {
        self.bits.get(i).copied()
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn truncate(&mut self, n: usize) {
        self.bits.truncate(n);
    }

    pub fn push_uint(&mut self, value: u128, width: u32) {
        for shift in (0..width).rev() {
            self.bits.push((value >> shift) & 1 == 1);
        }
    }

    pub fn extend_from(&mut self, other: &Bits) {
        self.bits.extend_from_slice(&other.bits);
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }

    pub fn starts_with(&self, prefix: &Bits) -> bool {
        self.bits.starts_with(&prefix.bits)
    }

    pub fn prefix(&self, n: usize) -> Bits {
        Bits {
            bits: self.bits[..n].to_vec(),
        }
    }

    /// Appends the Elias-gamma code of `m >= 1`.
    pub fn push_gamma(&mut self, m: u128) {
        assert!(m >= 1, "gamma code is defined for m >= 1");
        let width = 128 - m.leading_zeros();
        for _ in 0..width - 1 {
            self.bits.push(false);
        }
        self.push_uint(m, width);
    }

    /// Appends the Elias-gamma code of `v + 1`, so zero is representable.
    pub fn push_gamma0(&mut self, v: u64) {
        self.push_gamma(v as u128 + 1);
    }
}

/// Bit length of the gamma code of `m >= 1`.
pub fn gamma_len(m: u128) -> usize {
    debug_assert!(m >= 1);
    2 * (127 - m.leading_zeros() as usize) + 1
}

/// Bit length of the gamma code of `v + 1`.
pub fn gamma0_len(v: u64) -> usize {
    gamma_len(v as u128 + 1)
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits({self})")
    }
}

impl FromIterator<bool> for Bits {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Bits {
            bits: iter.into_iter().collect(),
        }
    }
}

impl Serialize for Bits {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Bits {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Bits::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Reason a read ran off the available bits or hit an oversized code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ReadError {
    #[error("unexpected end of bits")]
    Eof,
    #[error("gamma code exceeds 64-bit range")]
    Overflow,
}

/// Sequential reader over a bit slice. Counts bits consumed.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bits: &'a Bits) -> Self {
        BitReader {
            bits: &bits.bits,
            pos: 0,
        }
    }

    pub fn from_slice(bits: &'a [bool]) -> Self {
        BitReader { bits, pos: 0 }
    }

    #[inline]
    pub fn position(&self) -> usize {
        self.pos
    }

    #[inline]
    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }

    #[inline]
    pub fn read_bit(&mut self) -> Result<bool, ReadError> {
        let b = *self.bits.get(self.pos).ok_or(ReadError::Eof)?;
        self.pos += 1;
        Ok(b)
    }

    pub fn read_uint(&mut self, width: u32) -> Result<u64, ReadError> {
        debug_assert!(width <= 64);
        if self.remaining() < width as usize {
            self.pos = self.bits.len();
            return Err(ReadError::Eof);
        }
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | self.bits[self.pos] as u64;
            self.pos += 1;
        }
        Ok(v)
    }

    /// Reads a gamma code, returning `m >= 1`. Values above `u64::MAX` are
    /// rejected.
    pub fn read_gamma(&mut self) -> Result<u64, ReadError> {
        let mut zeros = 0u32;
        while !self.read_bit()? {
            zeros += 1;
            if zeros > 63 {
                return Err(ReadError::Overflow);
            }
        }
        let rest = self.read_uint(zeros)?;
        Ok((1u64 << zeros) | rest)
    }

    /// Reads a gamma code and subtracts one.
    pub fn read_gamma0(&mut self) -> Result<u64, ReadError> {
        self.read_gamma().map(|m| m - 1)
    }
}

/// The `index`-th bitstring in length-lexicographic order: the empty string,
/// then `0`, `1`, `00`, `01`, ...
pub fn length_lex(index: u64) -> Bits {
    let v = index as u128 + 1;
    let width = 127 - v.leading_zeros();
    Bits::from_uint(v & !(1u128 << width), width)
}

/// Inverse of [`length_lex`]. Returns `None` beyond `u64` range.
pub fn length_lex_index(bits: &Bits) -> Option<u64> {
    if bits.len() >= 64 {
        return None;
    }
    let mut v: u64 = 1;
    for b in bits.iter() {
        v = (v << 1) | b as u64;
    }
    Some(v - 1)
}
