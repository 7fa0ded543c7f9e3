//! Dense matrices over GF(2), packed row-major into 64-bit words.

use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::{Bits, Error, Result};

/// Largest `n` accepted by the exhaustive counting oracles.
pub const EXHAUSTIVE_BITS: usize = 20;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl core::fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        writeln!(f, "Gf2Matrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows.min(16) {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = cols.div_ceil(64);
        Gf2Matrix { rows, cols, stride, data: vec![0; rows * stride] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Gf2Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn random<R: RngCore + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let mut m = Gf2Matrix::zeros(rows, cols);
        for i in 0..rows {
            let r = Bits::random(cols, rng);
            m.set_row(i, &r);
        }
        m
    }

    pub fn from_rows(rows: &[Bits]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Gf2Matrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::DimMismatch { expected: cols, got: r.len() });
            }
            m.set_row(i, r);
        }
        Ok(m)
    }

    /// Build from `0`/`1` row strings, e.g. `["11", "01"]`.
    pub fn from_strs(rows: &[&str]) -> Result<Self> {
        let rows: Result<Vec<Bits>> = rows.iter().map(|s| Bits::from_bit_str(s)).collect();
        Gf2Matrix::from_rows(&rows?)
    }

    /// Row-major bits, `rows·cols` long.
    pub fn from_row_major(rows: usize, cols: usize, bits: &Bits) -> Result<Self> {
        if bits.len() != rows * cols {
            return Err(Error::BadLength { expected: rows * cols, got: bits.len() });
        }
        let mut m = Gf2Matrix::zeros(rows, cols);
        for i in 0..rows {
            m.set_row(i, &bits.slice(i * cols..(i + 1) * cols));
        }
        Ok(m)
    }

    pub fn to_row_major(&self) -> Bits {
        let mut out = Bits::zeros(0);
        for i in 0..self.rows {
            out.extend_from(&self.row(i));
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(i < self.rows && j < self.cols);
        (self.data[i * self.stride + j / 64] >> (j % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        assert!(i < self.rows && j < self.cols);
        let w = &mut self.data[i * self.stride + j / 64];
        if v {
            *w |= 1 << (j % 64);
        } else {
            *w &= !(1 << (j % 64));
        }
    }

    pub fn row(&self, i: usize) -> Bits {
        Bits::from_words(self.row_words(i).to_vec(), self.cols).expect("row width")
    }

    pub fn set_row(&mut self, i: usize, r: &Bits) {
        assert_eq!(r.len(), self.cols);
        self.row_words_mut(i).copy_from_slice(r.words());
    }

    fn xor_rows(&mut self, dst: usize, src: usize) {
        let s = self.stride;
        let (a, b) = if dst < src {
            let (lo, hi) = self.data.split_at_mut(src * s);
            (&mut lo[dst * s..(dst + 1) * s], &hi[..s])
        } else {
            let (lo, hi) = self.data.split_at_mut(dst * s);
            (&mut hi[..s], &lo[src * s..(src + 1) * s])
        };
        for (x, y) in a.iter_mut().zip(b) {
            *x ^= y;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for k in 0..self.stride {
                self.data.swap(a * self.stride + k, b * self.stride + k);
            }
        }
    }

    /// `y_i = ⊕_j M[i][j]·x_j`.
    pub fn matvec(&self, x: &Bits) -> Result<Bits> {
        if x.len() != self.cols {
            return Err(Error::DimMismatch { expected: self.cols, got: x.len() });
        }
        let xw = x.words();
        Ok(Bits::from_fn(self.rows, |i| {
            let mut acc = 0u64;
            for (a, b) in self.row_words(i).iter().zip(xw) {
                acc ^= a & b;
            }
            acc.count_ones() & 1 == 1
        }))
    }

    pub fn mul(&self, other: &Gf2Matrix) -> Result<Gf2Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimMismatch { expected: self.cols, got: other.rows });
        }
        let mut out = Gf2Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    let src = other.row_words(j);
                    for (d, s) in out.data[i * out.stride..(i + 1) * out.stride].iter_mut().zip(src) {
                        *d ^= s;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Gf2Matrix {
        let mut t = Gf2Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    t.set(j, i, true);
                }
            }
        }
        t
    }

    /// Stack `self` on top of `below`.
    pub fn vstack(&self, below: &Gf2Matrix) -> Result<Gf2Matrix> {
        if self.cols != below.cols {
            return Err(Error::DimMismatch { expected: self.cols, got: below.cols });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&below.data);
        Ok(Gf2Matrix { rows: self.rows + below.rows, cols: self.cols, stride: self.stride, data })
    }

    /// Row-reduce in place; returns the pivot column of each pivot row, in
    /// order. `companion` receives the same row operations.
    fn eliminate(&mut self, mut companion: Option<&mut Gf2Matrix>) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c)) else { continue };
            self.swap_rows(r, p);
            if let Some(comp) = companion.as_deref_mut() {
                comp.swap_rows(r, p);
            }
            for i in 0..self.rows {
                if i != r && self.get(i, c) {
                    self.xor_rows(i, r);
                    if let Some(comp) = companion.as_deref_mut() {
                        comp.xor_rows(i, r);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().eliminate(None).len()
    }

    pub fn inverse(&self) -> Option<Gf2Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let mut a = self.clone();
        let mut inv = Gf2Matrix::identity(self.rows);
        let pivots = a.eliminate(Some(&mut inv));
        (pivots.len() == self.rows).then_some(inv)
    }

    /// `L` with `L·M = I_cols`.
    pub fn left_inverse(&self) -> Result<Gf2Matrix> {
        if self.rows < self.cols {
            return Err(Error::NotFullColumnRank);
        }
        let mut a = self.clone();
        let mut e = Gf2Matrix::identity(self.rows);
        let pivots = a.eliminate(Some(&mut e));
        if pivots.len() != self.cols {
            return Err(Error::NotFullColumnRank);
        }
        let mut l = Gf2Matrix::zeros(self.cols, self.rows);
        for i in 0..self.cols {
            l.set_row(i, &e.row(i));
        }
        Ok(l)
    }
}

/// Uniform element of GL(n, 2) by rejection, with its inverse.
pub fn random_invertible<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> (Gf2Matrix, Gf2Matrix) {
    assert!(n >= 1);
    loop {
        let m = Gf2Matrix::random(n, n, rng);
        if let Some(inv) = m.inverse() {
            return (m, inv);
        }
    }
}

/// Uniform `rows × cols` matrix of full column rank, by rejection.
pub fn random_full_column_rank<R: RngCore + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Gf2Matrix {
    assert!(rows >= cols);
    loop {
        let m = Gf2Matrix::random(rows, cols, rng);
        if m.rank() == cols {
            return m;
        }
    }
}

fn word_of(b: &Bits, n: usize) -> Result<u64> {
    if b.len() != n {
        return Err(Error::DimMismatch { expected: n, got: b.len() });
    }
    Ok(b.words().first().copied().unwrap_or(0))
}

/// Number of `v ∈ {0,1}^n` with `a·v = b` for every sample.
pub fn count_consistent_vectors(samples: &[(Bits, bool)], n: usize) -> Result<u64> {
    if n > EXHAUSTIVE_BITS {
        return Err(Error::TooLarge { what: "vector space", size: n as u128, limit: EXHAUSTIVE_BITS as u128 });
    }
    let packed: Vec<(u64, u32)> =
        samples.iter().map(|(a, b)| Ok((word_of(a, n)?, *b as u32))).collect::<Result<_>>()?;
    Ok((0..1u64 << n)
        .filter(|v| packed.iter().all(|&(a, b)| (a & v).count_ones() & 1 == b))
        .count() as u64)
}

/// All `rows × cols` matrices `M` with `M·a = b` for each `eq` sample and
/// `M·a ≠ b` for each `neq` sample, by exhaustive enumeration.
pub fn consistent_matrices(
    eq: &[(Bits, Bits)],
    neq: &[(Bits, Bits)],
    rows: usize,
    cols: usize,
) -> Result<Vec<Gf2Matrix>> {
    let total = rows * cols;
    if total > EXHAUSTIVE_BITS {
        return Err(Error::TooLarge { what: "matrix space", size: total as u128, limit: EXHAUSTIVE_BITS as u128 });
    }
    let check = |m: &Gf2Matrix, a: &Bits, b: &Bits| -> Result<bool> {
        if b.len() != rows {
            return Err(Error::DimMismatch { expected: rows, got: b.len() });
        }
        Ok(m.matvec(a)? == *b)
    };
    let mut out = Vec::new();
    for code in 0..1u64 << total {
        let m = Gf2Matrix::from_row_major(rows, cols, &Bits::from_u64(code, total))?;
        let mut ok = true;
        for (a, b) in eq {
            ok &= check(&m, a, b)?;
        }
        for (a, b) in neq {
            ok &= !check(&m, a, b)?;
        }
        if ok {
            out.push(m);
        }
    }
    Ok(out)
}

#[cfg(feature = "serde")]
mod serde_impl {
    use super::Gf2Matrix;
    use crate::Bits;
    use alloc::string::String;
    use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Repr {
        rows: usize,
        cols: usize,
        hex: String,
    }

    /// Serialized as `{rows, cols, hex}` with the row-major bits in hex.
    impl Serialize for Gf2Matrix {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            Repr { rows: self.rows, cols: self.cols, hex: self.to_row_major().to_hex() }.serialize(s)
        }
    }

    impl<'de> Deserialize<'de> for Gf2Matrix {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            let r = Repr::deserialize(d)?;
            let bits = Bits::from_hex(&r.hex, r.rows * r.cols).map_err(de::Error::custom)?;
            Gf2Matrix::from_row_major(r.rows, r.cols, &bits).map_err(de::Error::custom)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matvec_examples() {
        let m = Gf2Matrix::from_strs(&["11", "01"]).unwrap();
        assert_eq!(m.matvec(&Bits::from_bit_str("11").unwrap()).unwrap(), Bits::from_bit_str("01").unwrap());
        let x = Bits::from_bit_str("101").unwrap();
        assert_eq!(Gf2Matrix::identity(3).matvec(&x).unwrap(), x);
        assert_eq!(Gf2Matrix::zeros(3, 3).matvec(&x).unwrap(), Bits::zeros(3));
        assert!(matches!(m.matvec(&x), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn invertible_pair_is_mutually_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [1, 2, 7, 64, 130] {
            let (m, inv) = random_invertible(n, &mut rng);
            assert_eq!(m.mul(&inv).unwrap(), Gf2Matrix::identity(n));
            assert_eq!(inv.mul(&m).unwrap(), Gf2Matrix::identity(n));
        }
    }

    #[test]
    fn left_inverse_cases() {
        let stacked = Gf2Matrix::identity(3).vstack(&Gf2Matrix::zeros(1, 3)).unwrap();
        let l = stacked.left_inverse().unwrap();
        assert_eq!(l.mul(&stacked).unwrap(), Gf2Matrix::identity(3));
        let deficient = Gf2Matrix::from_strs(&["110", "011", "101", "000"]).unwrap();
        assert_eq!(deficient.left_inverse(), Err(Error::NotFullColumnRank));
    }

    #[test]
    fn counting_small_cases() {
        assert_eq!(count_consistent_vectors(&[], 3).unwrap(), 8);
        let a = Bits::from_bit_str("110").unwrap();
        assert_eq!(count_consistent_vectors(&[(a.clone(), true)], 3).unwrap(), 4);
        assert_eq!(count_consistent_vectors(&[(a.clone(), false), (a, true)], 3).unwrap(), 0);
        assert!(count_consistent_vectors(&[], 21).is_err());
    }
}
