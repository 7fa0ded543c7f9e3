//! Min-entropy on explicit distributions, splitting rules, two-universal
//! hashing and a privacy-amplification distance checker.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::gf2::Gf2Matrix;
use crate::{Bits, Error, Result};

const SUM_TOL: f64 = 1e-9;
const CMP_SLACK: f64 = 1e-12;

/// Largest support accepted by [`split_choice_multi`].
pub const MAX_SPLIT_SUPPORT: usize = 1 << 20;
/// Largest `m·ℓ` for exhaustive family enumeration.
pub const MAX_EXACT_FAMILY_BITS: usize = 20;

/// A finite distribution over equal-width bitstrings.
#[derive(Clone, Debug, PartialEq)]
pub struct Dist {
    support: Vec<(Bits, f64)>,
}

impl Dist {
    /// Merges repeated values and drops zero-probability entries.
    pub fn new(entries: Vec<(Bits, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptySupport);
        }
        let width = entries[0].0.len();
        let mut merged: BTreeMap<Bits, f64> = BTreeMap::new();
        let mut total = 0.0;
        for (v, p) in entries {
            if v.len() != width {
                return Err(Error::DimMismatch { expected: width, got: v.len() });
            }
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::BadInput(alloc::format!("invalid probability {p}")));
            }
            total += p;
            *merged.entry(v).or_insert(0.0) += p;
        }
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::BadInput(alloc::format!("probabilities sum to {total}")));
        }
        let support: Vec<_> = merged.into_iter().filter(|(_, p)| *p > 0.0).collect();
        if support.is_empty() {
            return Err(Error::EmptySupport);
        }
        Ok(Dist { support })
    }

    pub fn uniform(width: usize) -> Self {
        assert!(width < 32);
        let p = 1.0 / (1u64 << width) as f64;
        Dist { support: (0..1u64 << width).map(|v| (Bits::from_u64(v, width), p)).collect() }
    }

    pub fn uniform_over(values: &[Bits]) -> Result<Self> {
        let p = 1.0 / values.len() as f64;
        Dist::new(values.iter().map(|v| (v.clone(), p)).collect())
    }

    pub fn point(value: Bits) -> Self {
        Dist { support: vec![(value, 1.0)] }
    }

    pub fn support(&self) -> &[(Bits, f64)] {
        &self.support
    }

    pub fn width(&self) -> usize {
        self.support[0].0.len()
    }

    pub fn prob(&self, v: &Bits) -> f64 {
        self.support.binary_search_by(|(x, _)| x.cmp(v)).map_or(0.0, |i| self.support[i].1)
    }

    pub fn max_prob(&self) -> f64 {
        self.support.iter().map(|(_, p)| *p).fold(0.0, f64::max)
    }

    /// Image of the distribution under `f`.
    pub fn map(&self, mut f: impl FnMut(&Bits) -> Bits) -> Result<Dist> {
        Dist::new(self.support.iter().map(|(v, p)| (f(v), *p)).collect())
    }

    pub fn marginal(&self, range: core::ops::Range<usize>) -> Dist {
        self.map(|v| v.slice(range.clone())).expect("marginal of a valid distribution")
    }

    /// Statistical distance to `other`.
    pub fn distance(&self, other: &Dist) -> f64 {
        let mut diff: BTreeMap<&Bits, f64> = BTreeMap::new();
        for (v, p) in &self.support {
            *diff.entry(v).or_insert(0.0) += p;
        }
        for (v, p) in &other.support {
            *diff.entry(v).or_insert(0.0) -= p;
        }
        0.5 * diff.values().map(|d| d.abs()).sum::<f64>()
    }
}

/// `−lg max_x p(x)`.
pub fn min_entropy(d: &Dist) -> f64 {
    -libm::log2(d.max_prob())
}

/// `H∞(A|C) = −lg Σ_c max_a P(a, c)` where `split` maps an outcome to
/// `(a, c)`.
pub fn conditional_min_entropy(d: &Dist, mut split: impl FnMut(&Bits) -> (Bits, Bits)) -> f64 {
    let mut joint: BTreeMap<(Bits, Bits), f64> = BTreeMap::new();
    for (v, p) in d.support() {
        *joint.entry(split(v)).or_insert(0.0) += p;
    }
    let mut best: BTreeMap<Bits, f64> = BTreeMap::new();
    for ((_, c), p) in joint {
        let e = best.entry(c).or_insert(0.0);
        *e = e.max(p);
    }
    -libm::log2(best.values().sum())
}

fn at_least(p: f64, threshold: f64) -> bool {
    p + CMP_SLACK >= threshold
}

/// `C(x1) = [P(X1 = x1) ≥ 2^{−α/2}]` for a joint over `x0 ‖ x1`, with `X0`
/// the first `x0_width` bits.
#[derive(Clone, Debug)]
pub struct BinarySplitRule {
    x0_width: usize,
    threshold: f64,
    heavy: BTreeMap<Bits, bool>,
}

impl BinarySplitRule {
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// `C` as a function of the `X1` value.
    pub fn choose(&self, x1: &Bits) -> bool {
        self.heavy.get(x1).copied().unwrap_or(false)
    }

    /// `C` as a function of a full joint outcome.
    pub fn choose_joint(&self, x: &Bits) -> bool {
        self.choose(&x.slice(self.x0_width..x.len()))
    }
}

pub fn split_choice_binary(joint: &Dist, x0_width: usize, alpha: f64) -> Result<BinarySplitRule> {
    let width = joint.width();
    if x0_width > width {
        return Err(Error::DimMismatch { expected: width, got: x0_width });
    }
    let threshold = libm::exp2(-alpha / 2.0);
    let x1 = joint.marginal(x0_width..width);
    let heavy = x1.support().iter().map(|(v, p)| (v.clone(), at_least(*p, threshold))).collect();
    Ok(BinarySplitRule { x0_width, threshold, heavy })
}

/// Block choice for `X = X_0 … X_{ℓ−1}` built by recursive halving.
#[derive(Clone, Debug)]
pub struct MultiSplitRule {
    pub blocks: usize,
    pub block_width: usize,
    choice: BTreeMap<Bits, usize>,
}

impl MultiSplitRule {
    /// Chosen block index for a support value (`None` off-support).
    pub fn choose(&self, x: &Bits) -> Option<usize> {
        self.choice.get(x).copied()
    }

    pub fn block<'a>(&self, x: &'a Bits, c: usize) -> Bits {
        x.slice(c * self.block_width..(c + 1) * self.block_width)
    }
}

/// Each level applies the binary rule to the currently selected half, with
/// the choice bits made so far carried alongside as conditioning.
///
/// After `lg ℓ` levels `max_{x,c} P(X_C = x, C = c) ≤ 2^{−H∞(X)/ℓ}`, so
/// `H∞(X_C | C) ≥ H∞(X)/ℓ − lg ℓ`.
pub fn split_choice_multi(joint: &Dist, blocks: usize) -> Result<MultiSplitRule> {
    if !blocks.is_power_of_two() {
        return Err(Error::BadInput("block count must be a power of two".into()));
    }
    if joint.support().len() > MAX_SPLIT_SUPPORT {
        return Err(Error::TooLarge {
            what: "support",
            size: joint.support().len() as u128,
            limit: MAX_SPLIT_SUPPORT as u128,
        });
    }
    let width = joint.width();
    if width % blocks != 0 {
        return Err(Error::DimMismatch { expected: blocks, got: width });
    }
    let bw = width / blocks;
    let h = min_entropy(joint);
    // (lo, len) of the selected block range, and the choice bits so far
    let mut state: Vec<(usize, usize, u64)> = vec![(0, blocks, 0); joint.support().len()];
    let mut level_h = h;
    while state[0].1 > 1 {
        let threshold = libm::exp2(-level_h / 2.0);
        let mut mass: BTreeMap<(u64, usize, Bits), f64> = BTreeMap::new();
        for ((x, p), &(lo, len, c)) in joint.support().iter().zip(&state) {
            let half = len / 2;
            let z1 = x.slice((lo + half) * bw..(lo + len) * bw);
            *mass.entry((c, lo, z1)).or_insert(0.0) += p;
        }
        for ((x, _), st) in joint.support().iter().zip(state.iter_mut()) {
            let (lo, len, c) = *st;
            let half = len / 2;
            let z1 = x.slice((lo + half) * bw..(lo + len) * bw);
            let bit = at_least(mass[&(c, lo, z1)], threshold);
            let next_lo = if bit { lo } else { lo + half };
            *st = (next_lo, half, c << 1 | bit as u64);
        }
        level_h /= 2.0;
    }
    let choice = joint.support().iter().zip(&state).map(|((x, _), &(lo, _, _))| (x.clone(), lo)).collect();
    Ok(MultiSplitRule { blocks, block_width: bw, choice })
}

/// A linear two-universal hash `{0,1}^m → {0,1}^ℓ`.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum HashFunc {
    /// A uniformly random `ℓ × m` matrix.
    Dense(Gf2Matrix),
    /// A uniformly random Toeplitz matrix, stored by its diagonals.
    Toeplitz(ToeplitzHash),
}

/// `T[i][j] = diag[i − j + m − 1]`, with `m + ℓ − 1` key bits.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ToeplitzHash {
    pub input_len: usize,
    pub output_len: usize,
    pub diag: Bits,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum HashFamily {
    Dense,
    Toeplitz,
}

impl HashFunc {
    pub fn input_len(&self) -> usize {
        match self {
            HashFunc::Dense(a) => a.cols(),
            HashFunc::Toeplitz(t) => t.input_len,
        }
    }

    pub fn output_len(&self) -> usize {
        match self {
            HashFunc::Dense(a) => a.rows(),
            HashFunc::Toeplitz(t) => t.output_len,
        }
    }

    pub fn family(&self) -> HashFamily {
        match self {
            HashFunc::Dense(_) => HashFamily::Dense,
            HashFunc::Toeplitz(_) => HashFamily::Toeplitz,
        }
    }

    /// The key bits: row-major matrix, or the diagonal string.
    pub fn key_bits(&self) -> Bits {
        match self {
            HashFunc::Dense(a) => a.to_row_major(),
            HashFunc::Toeplitz(t) => t.diag.clone(),
        }
    }

    /// The explicit matrix of the function.
    pub fn matrix(&self) -> Gf2Matrix {
        match self {
            HashFunc::Dense(a) => a.clone(),
            HashFunc::Toeplitz(t) => {
                let (m, l) = (t.input_len, t.output_len);
                let mut a = Gf2Matrix::zeros(l, m);
                for i in 0..l {
                    for j in 0..m {
                        a.set(i, j, t.diag.get(i + m - 1 - j));
                    }
                }
                a
            }
        }
    }
}

pub fn sample_hash<R: RngCore + ?Sized>(m: usize, l: usize, rng: &mut R) -> HashFunc {
    HashFunc::Dense(Gf2Matrix::random(l, m, rng))
}

pub fn sample_toeplitz<R: RngCore + ?Sized>(m: usize, l: usize, rng: &mut R) -> HashFunc {
    assert!(m >= 1);
    HashFunc::Toeplitz(ToeplitzHash { input_len: m, output_len: l, diag: Bits::random(m + l - 1, rng) })
}

pub fn sample_from<R: RngCore + ?Sized>(family: HashFamily, m: usize, l: usize, rng: &mut R) -> HashFunc {
    match family {
        HashFamily::Dense => sample_hash(m, l, rng),
        HashFamily::Toeplitz => sample_toeplitz(m, l, rng),
    }
}

pub fn apply_hash(h: &HashFunc, x: &Bits) -> Result<Bits> {
    match h {
        HashFunc::Dense(a) => a.matvec(x),
        HashFunc::Toeplitz(t) => t.apply(x),
    }
}

impl ToeplitzHash {
    /// Row `i` is the window `diag[i .. i + m]` against `x` reversed. The
    /// reversed input is pre-shifted by each residue `r = i mod 64` so every
    /// row becomes a word-aligned AND-and-parity pass.
    pub fn apply(&self, x: &Bits) -> Result<Bits> {
        let (m, l) = (self.input_len, self.output_len);
        if x.len() != m {
            return Err(Error::DimMismatch { expected: m, got: x.len() });
        }
        let y = x.reversed();
        let span = m + 63;
        let nw = span.div_ceil(64);
        let dw = self.diag.words();
        let mut out = Bits::zeros(l);
        for r in 0..l.min(64) {
            let z = y.shifted_up(r).resized(nw * 64);
            let zw = z.words();
            let mut i = r;
            while i < l {
                let a = i / 64;
                let mut acc = 0u64;
                for (w, zv) in zw.iter().enumerate() {
                    acc ^= dw.get(a + w).copied().unwrap_or(0) & zv;
                }
                if acc.count_ones() & 1 == 1 {
                    out.set(i, true);
                }
                i += 64;
            }
        }
        Ok(out)
    }
}

/// Result of [`privacy_amp_distance`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PaDistance {
    pub distance: f64,
    /// `true` when every member of the family was enumerated.
    pub exact: bool,
    pub functions: u64,
}

/// `½·2^{−(H∞ − ℓ)/2}`.
pub fn privacy_amp_bound(h_min: f64, l: usize) -> f64 {
    0.5 * libm::exp2(-(h_min - l as f64) / 2.0)
}

fn hashed_distance(d: &Dist, h: &Gf2Matrix) -> f64 {
    let l = h.rows();
    let mut out = vec![0.0; 1 << l];
    for (x, p) in d.support() {
        out[h.matvec(x).expect("width").to_u64() as usize] += p;
    }
    let u = 1.0 / (1u64 << l) as f64;
    0.5 * out.iter().map(|q| (q - u).abs()).sum::<f64>()
}

/// Distance of `(F(X), F)` from `(U_ℓ, F)` over the dense family, averaged
/// over every `ℓ × m` matrix.
pub fn privacy_amp_distance(d: &Dist, l: usize) -> Result<PaDistance> {
    let m = d.width();
    if m * l > MAX_EXACT_FAMILY_BITS {
        return Err(Error::TooLarge { what: "hash family", size: (m * l) as u128, limit: MAX_EXACT_FAMILY_BITS as u128 });
    }
    let count = 1u64 << (m * l);
    let mut total = 0.0;
    for code in 0..count {
        let a = Gf2Matrix::from_row_major(l, m, &Bits::from_u64(code, m * l))?;
        total += hashed_distance(d, &a);
    }
    Ok(PaDistance { distance: total / count as f64, exact: true, functions: count })
}

/// Same quantity estimated from `samples` random family members.
pub fn privacy_amp_distance_sampled<R: RngCore + ?Sized>(
    d: &Dist,
    l: usize,
    samples: u64,
    rng: &mut R,
) -> Result<PaDistance> {
    if l > 20 {
        return Err(Error::TooLarge { what: "output length", size: l as u128, limit: 20 });
    }
    let m = d.width();
    let mut total = 0.0;
    for _ in 0..samples {
        total += hashed_distance(d, &Gf2Matrix::random(l, m, rng));
    }
    Ok(PaDistance { distance: total / samples as f64, exact: false, functions: samples })
}
