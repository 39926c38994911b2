//! Packed bit streams and the on-disk coded-block format: an 8-byte
//! big-endian source length, a 2-byte big-endian alphabet size, then the
//! bit stream (MSB-first within each byte) padded to a byte boundary.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bit_len: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the `width` low bits of `code`, most significant first.
    pub fn push_bits(&mut self, code: u32, width: usize) {
        debug_assert!(width <= 32);
        debug_assert!(width == 32 || code < (1u64 << width) as u32);
        for i in (0..width).rev() {
            self.push_bit((code >> i) & 1 == 1);
        }
    }

    pub fn push_bit(&mut self, bit: bool) {
        if self.bit_len % 8 == 0 {
            self.bytes.push(0);
        }
        if bit {
            let byte = self.bit_len / 8;
            self.bytes[byte] |= 1 << (7 - self.bit_len % 8);
        }
        self.bit_len += 1;
    }

    pub fn bit_len(&self) -> usize {
        self.bit_len
    }

    pub fn into_parts(self) -> (Vec<u8>, usize) {
        (self.bytes, self.bit_len)
    }
}

#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        BitReader { bytes, pos: 0 }
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        let byte = self.pos / 8;
        if byte >= self.bytes.len() {
            return Err(Error::CorruptBlock("bit stream exhausted".into()));
        }
        let bit = (self.bytes[byte] >> (7 - self.pos % 8)) & 1 == 1;
        self.pos += 1;
        Ok(bit)
    }

    pub fn read_bits(&mut self, width: usize) -> Result<u32> {
        debug_assert!(width <= 32);
        let mut v = 0u32;
        for _ in 0..width {
            v = (v << 1) | self.read_bit()? as u32;
        }
        Ok(v)
    }
}

/// A coded block: the packed bit stream plus enough header to decode it.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedBlock {
    /// Packed bits, MSB-first.
    pub bits: Vec<u8>,
    /// Exact number of meaningful bits (the tail of the last byte is padding).
    pub bit_len: usize,
    /// Source blocklength.
    pub n: usize,
    /// Symbol alphabet size of the coded stream.
    pub alphabet_size: u16,
    /// bit_len / n.
    pub rate: f64,
}

impl EncodedBlock {
    pub fn new(bits: Vec<u8>, bit_len: usize, n: usize, alphabet_size: u16) -> Self {
        let rate = bit_len as f64 / n as f64;
        EncodedBlock { bits, bit_len, n, alphabet_size, rate }
    }

    /// Serializes header + padded bit stream.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(10 + self.bits.len());
        out.extend_from_slice(&(self.n as u64).to_be_bytes());
        out.extend_from_slice(&self.alphabet_size.to_be_bytes());
        out.extend_from_slice(&self.bits);
        out
    }

    /// Parses a serialized block. The exact bit count is not stored, so
    /// `bit_len` (and `rate`) are rounded up to the padded byte boundary;
    /// decoders stop after `n` symbols and never look at the padding.
    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        if data.len() < 10 {
            return Err(Error::CorruptBlock(format!("header needs 10 bytes, got {}", data.len())));
        }
        let n = u64::from_be_bytes(data[0..8].try_into().unwrap()) as usize;
        let alphabet_size = u16::from_be_bytes(data[8..10].try_into().unwrap());
        if n == 0 {
            return Err(Error::CorruptBlock("source length is zero".into()));
        }
        let bits = data[10..].to_vec();
        let bit_len = bits.len() * 8;
        Ok(EncodedBlock::new(bits, bit_len, n, alphabet_size))
    }
}
