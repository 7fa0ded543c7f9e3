//! The field GF(2^k) for `1 ≤ k ≤ 64` and polynomials over it.
//!
//! Each `k` uses the lexicographically smallest irreducible polynomial of
//! degree `k`. Elements are `u64` values whose bit `i` is the coefficient of
//! `x^i`.

use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::{Bits, Error, Result};

/// Largest `k·(d+1)` accepted by [`count_consistent_polys`].
pub const EXHAUSTIVE_POLY_BITS: u32 = 24;

/// Low `k` bits of the modulus for degree `k` (index `k − 1`); the leading
/// `x^k` term is implicit.
pub const IRREDUCIBLE_LOW: [u64; 64] = [
    0x0,
    0x3,
    0x3,
    0x3,
    0x5,
    0x3,
    0x3,
    0x1b,
    0x3,
    0x9,
    0x5,
    0x9,
    0x1b,
    0x21,
    0x3,
    0x2b,
    0x9,
    0x9,
    0x27,
    0x9,
    0x5,
    0x3,
    0x21,
    0x1b,
    0x9,
    0x1b,
    0x27,
    0x3,
    0x5,
    0x3,
    0x9,
    0x8d,
    0x4b,
    0x1b,
    0x5,
    0x35,
    0x3f,
    0x63,
    0x11,
    0x39,
    0x9,
    0x27,
    0x59,
    0x21,
    0x1b,
    0x3,
    0x21,
    0x2d,
    0x71,
    0x1d,
    0x4b,
    0x9,
    0x47,
    0x7d,
    0x47,
    0x95,
    0x11,
    0x63,
    0x7b,
    0x3,
    0x27,
    0x69,
    0x3,
    0x1b
,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Gf2k {
    k: u32,
    low: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Gf2kElem {
    pub k: u32,
    pub value: u64,
}

impl Gf2k {
    pub fn new(k: u32) -> Result<Self> {
        if !(1..=64).contains(&k) {
            return Err(Error::TooLarge { what: "field degree", size: k as u128, limit: 64 });
        }
        Ok(Gf2k { k, low: IRREDUCIBLE_LOW[k as usize - 1] })
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn modulus_low(&self) -> u64 {
        self.low
    }

    fn mask(&self) -> u64 {
        if self.k == 64 {
            u64::MAX
        } else {
            (1u64 << self.k) - 1
        }
    }

    pub fn size(&self) -> u128 {
        1u128 << self.k
    }

    pub fn elem(&self, value: u64) -> Gf2kElem {
        assert_eq!(value & !self.mask(), 0, "value exceeds field width");
        Gf2kElem { k: self.k, value }
    }

    pub fn zero(&self) -> Gf2kElem {
        self.elem(0)
    }

    pub fn one(&self) -> Gf2kElem {
        self.elem(1)
    }

    pub fn random<R: RngCore + ?Sized>(&self, rng: &mut R) -> Gf2kElem {
        self.elem(rng.next_u64() & self.mask())
    }

    pub fn from_bits(&self, b: &Bits) -> Result<Gf2kElem> {
        if b.len() != self.k as usize {
            return Err(Error::DimMismatch { expected: self.k as usize, got: b.len() });
        }
        Ok(self.elem(b.to_u64()))
    }

    pub fn to_bits(&self, e: Gf2kElem) -> Bits {
        Bits::from_u64(e.value, self.k as usize)
    }

    pub fn add(&self, a: Gf2kElem, b: Gf2kElem) -> Gf2kElem {
        self.check(a);
        self.check(b);
        self.elem(a.value ^ b.value)
    }

    pub fn mul(&self, a: Gf2kElem, b: Gf2kElem) -> Gf2kElem {
        self.check(a);
        self.check(b);
        let top = 1u64 << (self.k - 1);
        let (mut x, mut y, mut r) = (a.value, b.value, 0u64);
        while y != 0 {
            if y & 1 == 1 {
                r ^= x;
            }
            y >>= 1;
            let carry = x & top != 0;
            x = (x << 1) & self.mask();
            if carry {
                x ^= self.low;
            }
        }
        self.elem(r)
    }

    pub fn pow(&self, a: Gf2kElem, mut e: u128) -> Gf2kElem {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: Gf2kElem) -> Option<Gf2kElem> {
        if a.value == 0 {
            return None;
        }
        Some(self.pow(a, self.size() - 2))
    }

    fn check(&self, a: Gf2kElem) {
        assert_eq!(a.k, self.k, "element from a different field");
    }
}

/// A polynomial stored with a fixed coefficient count `d + 1`, constant
/// term first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Gf2kPoly {
    pub k: u32,
    pub coeffs: Vec<u64>,
}

impl Gf2kPoly {
    pub fn zero(field: &Gf2k, d: usize) -> Self {
        Gf2kPoly { k: field.k, coeffs: vec![0; d + 1] }
    }

    pub fn random<R: RngCore + ?Sized>(field: &Gf2k, d: usize, rng: &mut R) -> Self {
        Gf2kPoly { k: field.k, coeffs: (0..=d).map(|_| field.random(rng).value).collect() }
    }

    pub fn from_coeffs(field: &Gf2k, coeffs: &[Gf2kElem]) -> Self {
        Gf2kPoly { k: field.k, coeffs: coeffs.iter().map(|c| field.elem(c.value).value).collect() }
    }

    /// The degree bound `d` (coefficient count minus one).
    pub fn degree_bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, field: &Gf2k, x: Gf2kElem) -> Gf2kElem {
        assert_eq!(self.k, field.k);
        let mut acc = field.zero();
        for &c in self.coeffs.iter().rev() {
            acc = field.add(field.mul(acc, x), field.elem(c));
        }
        acc
    }
}

/// The unique polynomial of degree ≤ `d` through `d + 1` points.
pub fn lagrange_interpolate(field: &Gf2k, points: &[(Gf2kElem, Gf2kElem)], d: usize) -> Result<Gf2kPoly> {
    if points.len() != d + 1 {
        return Err(Error::BadLength { expected: d + 1, got: points.len() });
    }
    for (i, p) in points.iter().enumerate() {
        if points[..i].iter().any(|q| q.0 == p.0) {
            return Err(Error::DuplicateAbscissa);
        }
    }
    let mut result = vec![field.zero(); d + 1];
    for (i, &(ai, bi)) in points.iter().enumerate() {
        // basis numerator Π_{j≠i} (x − a_j), built coefficient by coefficient
        let mut basis = vec![field.one()];
        let mut denom = field.one();
        for (j, &(aj, _)) in points.iter().enumerate() {
            if j == i {
                continue;
            }
            let mut next = vec![field.zero(); basis.len() + 1];
            for (t, &c) in basis.iter().enumerate() {
                next[t + 1] = field.add(next[t + 1], c);
                next[t] = field.add(next[t], field.mul(c, aj));
            }
            basis = next;
            denom = field.mul(denom, field.add(ai, aj));
        }
        let scale = field.mul(bi, field.inv(denom).expect("distinct abscissae"));
        for (t, c) in basis.into_iter().enumerate() {
            result[t] = field.add(result[t], field.mul(c, scale));
        }
    }
    Ok(Gf2kPoly::from_coeffs(field, &result))
}

/// Number of polynomials of degree ≤ `d` over GF(2^k) passing through every
/// `eq` sample and through no `neq` sample.
pub fn count_consistent_polys(
    eq: &[(Gf2kElem, Gf2kElem)],
    neq: &[(Gf2kElem, Gf2kElem)],
    d: usize,
    k: u32,
) -> Result<u64> {
    let bits = k as u64 * (d as u64 + 1);
    if bits > EXHAUSTIVE_POLY_BITS as u64 {
        return Err(Error::TooLarge { what: "polynomial space", size: bits as u128, limit: EXHAUSTIVE_POLY_BITS as u128 });
    }
    let field = Gf2k::new(k)?;
    let mask = (1u64 << k) - 1;
    let mut count = 0;
    let mut poly = Gf2kPoly::zero(&field, d);
    for code in 0..1u64 << bits {
        for (t, c) in poly.coeffs.iter_mut().enumerate() {
            *c = (code >> (t as u32 * k)) & mask;
        }
        let ok = eq.iter().all(|&(a, b)| poly.eval(&field, a) == b)
            && neq.iter().all(|&(a, b)| poly.eval(&field, a) != b);
        count += ok as u64;
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aes_field_inverse() {
        let f = Gf2k::new(8).unwrap();
        assert_eq!(f.modulus_low(), 0x1b);
        assert_eq!(f.mul(f.elem(0x53), f.elem(0xca)), f.one());
        assert_eq!(f.inv(f.elem(0x53)), Some(f.elem(0xca)));
    }

    #[test]
    fn interpolation_examples() {
        let f = Gf2k::new(2).unwrap();
        let pts = [(f.elem(1), f.elem(1)), (f.elem(2), f.elem(2))];
        let p = lagrange_interpolate(&f, &pts, 1).unwrap();
        assert_eq!(p.coeffs, [0, 1]);
        let zeros = [(f.elem(0), f.zero()), (f.elem(1), f.zero()), (f.elem(3), f.zero())];
        assert_eq!(lagrange_interpolate(&f, &zeros, 2).unwrap(), Gf2kPoly::zero(&f, 2));
        let dup = [(f.elem(1), f.zero()), (f.elem(1), f.one())];
        assert_eq!(lagrange_interpolate(&f, &dup, 1), Err(Error::DuplicateAbscissa));
    }

    #[test]
    fn poly_count_examples() {
        let f = Gf2k::new(2).unwrap();
        assert_eq!(count_consistent_polys(&[(f.elem(1), f.elem(3))], &[], 1, 2).unwrap(), 4);
        let target = Gf2kPoly { k: 2, coeffs: vec![1, 2] };
        let eq: Vec<_> = [0, 1].iter().map(|&a| (f.elem(a), target.eval(&f, f.elem(a)))).collect();
        assert_eq!(count_consistent_polys(&eq, &[], 1, 2).unwrap(), 1);
        let neq = [(f.elem(3), target.eval(&f, f.elem(3)))];
        assert_eq!(count_consistent_polys(&eq, &neq, 1, 2).unwrap(), 0);
    }
}
