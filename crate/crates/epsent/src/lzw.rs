//! Variable-width LZW over an arbitrary finite alphabet.
//!
//! The dictionary is seeded with the single symbols; the code width before
//! each emission is ceil(log2(dictionary size)), and the dictionary grows
//! without bound (no reset, no reserved codes). Encoder and decoder track
//! the size in lockstep, so the width schedule never needs to be signaled.

use std::collections::HashMap;

use crate::bits::{BitReader, BitWriter, EncodedBlock};
use crate::error::{Error, Result};

/// The growing phrase dictionary. Entry `i < alphabet_size` is the single
/// symbol `i`; later entries extend a previous entry by one symbol, so the
/// stored set is prefix-closed by construction.
#[derive(Debug, Clone)]
pub struct LzwCodebook {
    alphabet_size: u16,
    /// (previous code, appended symbol) per grown entry.
    entries: Vec<(u32, u16)>,
}

impl LzwCodebook {
    pub fn new(alphabet_size: u16) -> Self {
        LzwCodebook { alphabet_size, entries: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.alphabet_size as usize + self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Code width in bits for the next emission.
    pub fn width(&self) -> usize {
        ceil_log2(self.len())
    }

    fn push(&mut self, prev: u32, sym: u16) {
        self.entries.push((prev, sym));
    }

    /// Expands a code to its symbol string.
    fn expand(&self, mut code: u32) -> Vec<u16> {
        let mut out = Vec::new();
        loop {
            if (code as usize) < self.alphabet_size as usize {
                out.push(code as u16);
                break;
            }
            let (prev, sym) = self.entries[code as usize - self.alphabet_size as usize];
            out.push(sym);
            code = prev;
        }
        out.reverse();
        out
    }

    fn first_symbol(&self, mut code: u32) -> u16 {
        loop {
            if (code as usize) < self.alphabet_size as usize {
                return code as u16;
            }
            code = self.entries[code as usize - self.alphabet_size as usize].0;
        }
    }
}

fn ceil_log2(v: usize) -> usize {
    if v <= 1 {
        0
    } else {
        (usize::BITS - (v - 1).leading_zeros()) as usize
    }
}

/// Compresses a symbol sequence. All symbols must be below `alphabet_size`.
pub fn lzw_encode(symbols: &[u16], alphabet_size: u16) -> Result<EncodedBlock> {
    if alphabet_size == 0 {
        return Err(Error::PreconditionViolated("alphabet size must be at least 1".into()));
    }
    if symbols.is_empty() {
        return Err(Error::PreconditionViolated("cannot encode an empty sequence".into()));
    }
    if let Some(&bad) = symbols.iter().find(|&&s| s >= alphabet_size) {
        return Err(Error::PreconditionViolated(format!(
            "symbol {bad} outside alphabet of size {alphabet_size}"
        )));
    }
    let mut writer = BitWriter::new();
    let mut size = alphabet_size as usize;
    // Phrase trie keyed by (current code, next symbol).
    let mut map: HashMap<(u32, u16), u32> = HashMap::new();
    let emit = |writer: &mut BitWriter, size: usize, code: u32| {
        writer.push_bits(code, ceil_log2(size));
    };
    let mut cur: Option<u32> = None;
    for &s in symbols {
        cur = Some(match cur {
            None => s as u32,
            Some(c) => match map.get(&(c, s)) {
                Some(&code) => code,
                None => {
                    emit(&mut writer, size, c);
                    map.insert((c, s), size as u32);
                    size += 1;
                    s as u32
                }
            },
        });
    }
    emit(&mut writer, size, cur.expect("nonempty input"));
    let (bytes, bit_len) = writer.into_parts();
    Ok(EncodedBlock::new(bytes, bit_len, symbols.len(), alphabet_size))
}

/// Decompresses exactly `block.n` symbols.
pub fn lzw_decode(block: &EncodedBlock) -> Result<Vec<u16>> {
    decode_stream(&block.bits, block.n, block.alphabet_size)
}

pub fn decode_stream(bits: &[u8], n: usize, alphabet_size: u16) -> Result<Vec<u16>> {
    if alphabet_size == 0 {
        return Err(Error::PreconditionViolated("alphabet size must be at least 1".into()));
    }
    if n == 0 {
        return Err(Error::PreconditionViolated("cannot decode an empty sequence".into()));
    }
    let mut reader = BitReader::new(bits);
    let mut book = LzwCodebook::new(alphabet_size);
    let mut out: Vec<u16> = Vec::with_capacity(n);

    let first = reader.read_bits(book.width())?;
    if first as usize >= book.len() {
        return Err(Error::CorruptBlock(format!("initial code {first} out of range")));
    }
    out.extend(book.expand(first));
    let mut prev = first;
    while out.len() < n {
        let width = ceil_log2(book.len() + 1);
        let code = reader.read_bits(width)?;
        let entry = if (code as usize) < book.len() {
            book.expand(code)
        } else if code as usize == book.len() {
            // The phrase about to be defined: previous phrase plus its own
            // first symbol.
            let mut e = book.expand(prev);
            e.push(book.first_symbol(prev));
            e
        } else {
            return Err(Error::CorruptBlock(format!("code {code} beyond dictionary")));
        };
        book.push(prev, entry[0]);
        out.extend(entry);
        prev = code;
    }
    if out.len() != n {
        return Err(Error::CorruptBlock(format!(
            "decoded {} symbols, expected {}",
            out.len(),
            n
        )));
    }
    Ok(out)
}
