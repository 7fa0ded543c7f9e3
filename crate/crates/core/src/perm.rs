//! Permutations of `{0,…,4}`.
//!
//! `p[i]` is the image of `i`. The matrix of `p` has a 1 at `(i, p[i])`, so
//! the matrix product `P_a·P_b` is the permutation "apply `a`, then `b`",
//! written `a.then(b)`.

use rand::Rng;
use rand_core::RngCore;

use crate::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Perm5([u8; 5]);

impl core::fmt::Debug for Perm5 {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let p = self.0;
        write!(f, "[{}{}{}{}{}]", p[0], p[1], p[2], p[3], p[4])
    }
}

impl Perm5 {
    pub const IDENTITY: Perm5 = Perm5([0, 1, 2, 3, 4]);
    /// The 5-cycle `(0 1 2 3 4)`.
    pub const CYCLE: Perm5 = Perm5([1, 2, 3, 4, 0]);

    pub fn new(map: [u8; 5]) -> Result<Self> {
        let mut seen = [false; 5];
        for &v in &map {
            if v > 4 || seen[v as usize] {
                return Err(Error::BadInput(alloc::format!("not a permutation: {map:?}")));
            }
            seen[v as usize] = true;
        }
        Ok(Perm5(map))
    }

    pub fn map(&self) -> [u8; 5] {
        self.0
    }

    pub fn apply(&self, i: u8) -> u8 {
        self.0[i as usize]
    }

    pub fn then(self, other: Perm5) -> Perm5 {
        let mut out = [0u8; 5];
        for (i, o) in out.iter_mut().enumerate() {
            *o = other.0[self.0[i] as usize];
        }
        Perm5(out)
    }

    pub fn inverse(self) -> Perm5 {
        let mut out = [0u8; 5];
        for (i, &v) in self.0.iter().enumerate() {
            out[v as usize] = i as u8;
        }
        Perm5(out)
    }

    pub fn is_identity(self) -> bool {
        self == Perm5::IDENTITY
    }

    pub fn is_five_cycle(self) -> bool {
        let mut x = 0u8;
        for step in 1..=5 {
            x = self.apply(x);
            if x == 0 {
                return step == 5;
            }
        }
        false
    }

    /// Lexicographic rank in `0..120`.
    pub fn index(self) -> usize {
        let mut rank = 0;
        for i in 0..5 {
            let smaller_later = (i + 1..5).filter(|&j| self.0[j] < self.0[i]).count();
            rank += smaller_later * FACT[4 - i];
        }
        rank
    }

    pub fn from_index(mut rank: usize) -> Perm5 {
        assert!(rank < 120);
        let mut pool: [u8; 5] = [0, 1, 2, 3, 4];
        let mut left = 5;
        let mut out = [0u8; 5];
        for (i, o) in out.iter_mut().enumerate() {
            let f = FACT[4 - i];
            let k = rank / f;
            rank %= f;
            *o = pool[k];
            for t in k..left - 1 {
                pool[t] = pool[t + 1];
            }
            left -= 1;
        }
        Perm5(out)
    }

    pub fn all() -> impl Iterator<Item = Perm5> {
        (0..120).map(Perm5::from_index)
    }

    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Perm5 {
        Perm5::from_index(rng.gen_range(0..120))
    }

    /// Row-major 5×5 permutation matrix; bit `5r + c` is set iff `p[r] = c`.
    pub fn matrix_bits(self) -> u32 {
        (0..5usize).fold(0u32, |acc, r| acc | 1 << (5 * r + self.0[r] as usize))
    }

    pub fn from_matrix_bits(bits: u32) -> Result<Perm5> {
        if bits >> 25 != 0 {
            return Err(Error::FormatError("matrix has more than 25 bits".into()));
        }
        let mut out = [0u8; 5];
        for (r, o) in out.iter_mut().enumerate() {
            let row = (bits >> (5 * r)) & 0x1f;
            if row.count_ones() != 1 {
                return Err(Error::FormatError(alloc::format!("row {r} is not a unit vector")));
            }
            *o = row.trailing_zeros() as u8;
        }
        Perm5::new(out).map_err(|_| Error::FormatError("matrix is not a permutation".into()))
    }
}

const FACT: [usize; 5] = [1, 1, 2, 6, 24];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip_and_group_laws() {
        for (i, p) in Perm5::all().enumerate() {
            assert_eq!(p.index(), i);
            assert_eq!(p.then(p.inverse()), Perm5::IDENTITY);
            assert_eq!(Perm5::from_matrix_bits(p.matrix_bits()).unwrap(), p);
        }
        assert_eq!(Perm5::all().filter(|p| p.is_five_cycle()).count(), 24);
    }

    #[test]
    fn matrix_product_matches_then() {
        // (P_a P_b)[i][k] = Σ_j P_a[i][j] P_b[j][k]
        let a = Perm5::new([2, 0, 1, 4, 3]).unwrap();
        let b = Perm5::new([1, 3, 0, 2, 4]).unwrap();
        let (ma, mb) = (a.matrix_bits(), b.matrix_bits());
        let mut prod = 0u32;
        for i in 0..5 {
            for k in 0..5 {
                let v = (0..5).any(|j| ma >> (5 * i + j) & 1 == 1 && mb >> (5 * j + k) & 1 == 1);
                prod |= (v as u32) << (5 * i + k);
            }
        }
        assert_eq!(Perm5::from_matrix_bits(prod).unwrap(), a.then(b));
    }

    #[test]
    fn identity_matrix_pattern() {
        assert_eq!(Perm5::IDENTITY.matrix_bits(), 0b10000_01000_00100_00010_00001);
        assert!(Perm5::from_matrix_bits(0b11).is_err());
    }
}
