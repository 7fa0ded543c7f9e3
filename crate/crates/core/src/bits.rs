//! Packed bitstrings.
//!
//! Bit `i` lives in word `i / 64` at bit position `i % 64`. Bits past `len`
//! are always zero, so word-level equality is bitstring equality.
//!
//! The hex form is little-endian: byte `k` carries bits `8k..8k+8` with bit
//! `8k` as its least significant bit.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use rand_core::RngCore;

use crate::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Bits { len, words: alloc::vec![0; words_for(len)] }
    }

    pub fn ones(len: usize) -> Self {
        let mut b = Bits { len, words: alloc::vec![u64::MAX; words_for(len)] };
        b.clear_tail();
        b
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut b = Bits::zeros(len);
        for i in 0..len {
            if f(i) {
                b.words[i / 64] |= 1 << (i % 64);
            }
        }
        b
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Bits::from_fn(bits.len(), |i| bits[i])
    }

    /// Bits written as a `0`/`1` string, bit 0 first.
    pub fn from_bit_str(s: &str) -> Result<Self> {
        let mut v = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => v.push(false),
                '1' => v.push(true),
                _ => return Err(Error::BadInput(alloc::format!("not a bit: {c:?}"))),
            }
        }
        Ok(Bits::from_bools(&v))
    }

    /// The low `len` bits of `value`, least significant first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        let mut b = Bits::zeros(len);
        if len > 0 {
            b.words[0] = value;
            b.clear_tail();
        }
        b
    }

    pub fn from_words(words: Vec<u64>, len: usize) -> Result<Self> {
        if words.len() != words_for(len) {
            return Err(Error::BadLength { expected: words_for(len), got: words.len() });
        }
        let mut b = Bits { len, words };
        b.clear_tail();
        Ok(b)
    }

    pub fn random<R: RngCore + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut b = Bits::zeros(len);
        for w in b.words.iter_mut() {
            *w = rng.next_u64();
        }
        b.clear_tail();
        b
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn push(&mut self, v: bool) {
        if self.len % 64 == 0 {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, v);
    }

    pub fn extend_from(&mut self, other: &Bits) {
        if self.len % 64 == 0 {
            self.words.extend_from_slice(&other.words);
            self.len += other.len;
            return;
        }
        let shift = self.len % 64;
        let new_len = self.len + other.len;
        self.words.resize(words_for(new_len), 0);
        let base = self.len / 64;
        for (k, &w) in other.words.iter().enumerate() {
            self.words[base + k] |= w << shift;
            if base + k + 1 < self.words.len() {
                self.words[base + k + 1] |= w >> (64 - shift);
            }
        }
        self.len = new_len;
    }

    /// `r` zero bits followed by `self`.
    pub fn shifted_up(&self, r: usize) -> Bits {
        let mut out = Bits::zeros(r);
        out.extend_from(self);
        out
    }

    pub fn concat(&self, other: &Bits) -> Bits {
        let mut out = self.clone();
        out.extend_from(other);
        out
    }

    pub fn slice(&self, r: Range<usize>) -> Bits {
        assert!(r.start <= r.end && r.end <= self.len);
        let len = r.end - r.start;
        let mut out = Bits::zeros(len);
        let shift = r.start % 64;
        let base = r.start / 64;
        for k in 0..out.words.len() {
            let lo = self.words.get(base + k).copied().unwrap_or(0) >> shift;
            let hi = if shift == 0 {
                0
            } else {
                self.words.get(base + k + 1).copied().unwrap_or(0) << (64 - shift)
            };
            out.words[k] = lo | hi;
        }
        out.clear_tail();
        out
    }

    /// The low 64 bits as an integer (bit 0 least significant).
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64);
        self.words.first().copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_bools(&self) -> Vec<bool> {
        self.iter().collect()
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor(&self, other: &Bits) -> Bits {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn xor_assign(&mut self, other: &Bits) {
        assert_eq!(self.len, other.len, "xor of unequal lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn and(&self, other: &Bits) -> Bits {
        assert_eq!(self.len, other.len);
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        Bits { len: self.len, words }
    }

    pub fn not(&self) -> Bits {
        let mut out = Bits { len: self.len, words: self.words.iter().map(|w| !w).collect() };
        out.clear_tail();
        out
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &Bits) -> bool {
        assert_eq!(self.len, other.len);
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= a & b;
        }
        acc.count_ones() & 1 == 1
    }

    /// Bits at the positions where `mask` is set, in ascending order.
    pub fn select(&self, mask: &Bits) -> Bits {
        assert_eq!(self.len, mask.len);
        let mut out = Bits::zeros(mask.count_ones());
        let mut k = 0;
        for (&w, &m) in self.words.iter().zip(&mask.words) {
            let mut mm = m;
            while mm != 0 {
                let t = mm.trailing_zeros() as usize;
                if (w >> t) & 1 == 1 {
                    out.words[k / 64] |= 1 << (k % 64);
                }
                k += 1;
                mm &= mm - 1;
            }
        }
        out
    }

    /// Zero-pad (or truncate) to `len` bits.
    pub fn resized(&self, len: usize) -> Bits {
        if len <= self.len {
            return self.slice(0..len);
        }
        let mut out = self.clone();
        out.words.resize(words_for(len), 0);
        out.len = len;
        out
    }

    pub fn reversed(&self) -> Bits {
        let mut words: Vec<u64> = self.words.iter().rev().map(|w| w.reverse_bits()).collect();
        let pad = words.len() * 64 - self.len;
        let mut out = Bits { len: words.len() * 64, words: core::mem::take(&mut words) };
        if pad > 0 {
            out = out.slice(pad..out.len);
        }
        out
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.len.div_ceil(8);
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push((self.words[i / 8] >> (8 * (i % 8))) as u8);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::BadLength { expected: len.div_ceil(8), got: bytes.len() });
        }
        let mut b = Bits::zeros(len);
        for (i, &byte) in bytes.iter().enumerate() {
            b.words[i / 8] |= (byte as u64) << (8 * (i % 8));
        }
        let raw = b.words.clone();
        b.clear_tail();
        if raw != b.words {
            return Err(Error::FormatError("nonzero bits past declared length".into()));
        }
        Ok(b)
    }

    pub fn to_hex(&self) -> String {
        const DIGITS: &[u8; 16] = b"0123456789abcdef";
        let mut s = String::with_capacity(self.len.div_ceil(4));
        for byte in self.to_bytes() {
            s.push(DIGITS[(byte >> 4) as usize] as char);
            s.push(DIGITS[(byte & 15) as usize] as char);
        }
        s
    }

    pub fn from_hex(hex: &str, len: usize) -> Result<Self> {
        if hex.len() % 2 != 0 {
            return Err(Error::FormatError("odd-length hex".into()));
        }
        let mut bytes = Vec::with_capacity(hex.len() / 2);
        let raw = hex.as_bytes();
        for pair in raw.chunks(2) {
            let hi = hex_val(pair[0])?;
            let lo = hex_val(pair[1])?;
            bytes.push(hi << 4 | lo);
        }
        Bits::from_bytes(&bytes, len)
    }

    fn clear_tail(&mut self) {
        let r = self.len % 64;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }
}

fn hex_val(c: u8) -> Result<u8> {
    match c {
        b'0'..=b'9' => Ok(c - b'0'),
        b'a'..=b'f' => Ok(c - b'a' + 10),
        b'A'..=b'F' => Ok(c - b'A' + 10),
        _ => Err(Error::FormatError(alloc::format!("bad hex digit {:?}", c as char))),
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 128 {
            for b in self.iter() {
                f.write_str(if b { "1" } else { "0" })?;
            }
            Ok(())
        } else {
            write!(f, "Bits({}; {})", self.len, self.to_hex())
        }
    }
}

#[cfg(feature = "serde")]
mod serde_impl {
    use super::Bits;
    use alloc::format;
    use alloc::string::String;
    use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

    /// Serialized as `"<len>:<hex>"`.
    impl Serialize for Bits {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            s.serialize_str(&format!("{}:{}", self.len, self.to_hex()))
        }
    }

    impl<'de> Deserialize<'de> for Bits {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            let s = String::deserialize(d)?;
            let (len, hex) = s.split_once(':').ok_or_else(|| de::Error::custom("expected len:hex"))?;
            let len: usize = len.parse().map_err(de::Error::custom)?;
            Bits::from_hex(hex, len).map_err(de::Error::custom)
        }
    }
}
