//! BB84 conjugate coding, simulated symbolically.
//!
//! A qubit prepared as `|b⟩` in basis `β` and measured in basis `β` yields
//! `b`; measured in the other basis it yields a fresh uniform bit. That is
//! the whole semantics honest parties need, so no amplitudes are tracked.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::{Bits, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Basis {
    /// `+`, the computational basis.
    Rectilinear,
    /// `×`, the Hadamard basis.
    Diagonal,
}

impl Basis {
    pub fn from_bit(b: bool) -> Basis {
        if b {
            Basis::Diagonal
        } else {
            Basis::Rectilinear
        }
    }

    pub fn to_bit(self) -> bool {
        self == Basis::Diagonal
    }

    pub fn other(self) -> Basis {
        Basis::from_bit(!self.to_bit())
    }

    pub fn symbol(self) -> char {
        match self {
            Basis::Rectilinear => '+',
            Basis::Diagonal => 'x',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QubitPrep {
    pub bit: bool,
    pub basis: Basis,
}

pub fn prepare(bit: bool, basis: Basis) -> QubitPrep {
    QubitPrep { bit, basis }
}

/// Measure a prepared qubit. Single use is enforced by [`Channel`], not here.
pub fn measure<R: RngCore + ?Sized>(q: QubitPrep, basis: Basis, rng: &mut R) -> bool {
    if q.basis == basis {
        q.bit
    } else {
        rng.next_u32() & 1 == 1
    }
}

/// The preparation record of `|x⟩_θ`: bit `i` of `bases` is 1 for `×`.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConjugateState {
    bits: Bits,
    bases: Bits,
}

impl ConjugateState {
    pub fn encode(x: &Bits, theta: &Bits) -> Result<Self> {
        if x.len() != theta.len() {
            return Err(Error::DimMismatch { expected: x.len(), got: theta.len() });
        }
        Ok(ConjugateState { bits: x.clone(), bases: theta.clone() })
    }

    pub fn from_preps(preps: &[QubitPrep]) -> Self {
        ConjugateState {
            bits: Bits::from_fn(preps.len(), |i| preps[i].bit),
            bases: Bits::from_fn(preps.len(), |i| preps[i].basis.to_bit()),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> QubitPrep {
        QubitPrep { bit: self.bits.get(i), basis: Basis::from_bit(self.bases.get(i)) }
    }

    pub fn preps(&self) -> Vec<QubitPrep> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }

    pub fn bits(&self) -> &Bits {
        &self.bits
    }

    pub fn bases(&self) -> &Bits {
        &self.bases
    }
}

/// Delivered qubits plus per-qubit consumption flags.
///
/// Every qubit leaves the channel exactly once: by measurement, or by an
/// adversary moving it into storage with [`Channel::take`].
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Channel {
    state: ConjugateState,
    consumed: Bits,
}

impl Channel {
    pub fn deliver(state: ConjugateState) -> Self {
        let consumed = Bits::zeros(state.len());
        Channel { state, consumed }
    }

    pub fn len(&self) -> usize {
        self.state.len()
    }

    pub fn is_empty(&self) -> bool {
        self.state.is_empty()
    }

    pub fn is_consumed(&self, i: usize) -> bool {
        self.consumed.get(i)
    }

    pub fn fully_consumed(&self) -> bool {
        self.consumed.count_ones() == self.len()
    }

    pub fn measure<R: RngCore + ?Sized>(&mut self, i: usize, basis: Basis, rng: &mut R) -> Result<bool> {
        let q = self.take(i)?;
        Ok(measure(q, basis, rng))
    }

    /// Remove qubit `i` unmeasured.
    pub fn take(&mut self, i: usize) -> Result<QubitPrep> {
        if self.consumed.get(i) {
            return Err(Error::DoubleMeasure { position: i });
        }
        self.consumed.set(i, true);
        Ok(self.state.get(i))
    }

    /// Measure every qubit, qubit `i` in basis `bases[i]`.
    pub fn measure_all<R: RngCore + ?Sized>(&mut self, bases: &Bits, rng: &mut R) -> Result<Bits> {
        if bases.len() != self.len() {
            return Err(Error::DimMismatch { expected: self.len(), got: bases.len() });
        }
        if let Some(pos) = (0..self.consumed.words().len())
            .find(|&k| self.consumed.words()[k] != 0)
            .map(|k| k * 64 + self.consumed.words()[k].trailing_zeros() as usize)
        {
            return Err(Error::DoubleMeasure { position: pos });
        }
        let noise = Bits::random(self.len(), rng);
        let matched = self.state.bases.xor(bases).not();
        let out = self.state.bits.and(&matched).xor(&noise.and(&matched.not()));
        self.consumed = Bits::ones(self.len());
        Ok(out)
    }

    /// Measure every qubit in the same basis.
    pub fn measure_all_in<R: RngCore + ?Sized>(&mut self, basis: Basis, rng: &mut R) -> Result<Bits> {
        let bases = if basis.to_bit() { Bits::ones(self.len()) } else { Bits::zeros(self.len()) };
        self.measure_all(&bases, rng)
    }

    /// The preparation record, for transcripts.
    pub fn state(&self) -> &ConjugateState {
        &self.state
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matched_basis_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for bit in [false, true] {
            for basis in [Basis::Rectilinear, Basis::Diagonal] {
                for _ in 0..32 {
                    assert_eq!(measure(prepare(bit, basis), basis, &mut rng), bit);
                }
            }
        }
    }

    #[test]
    fn mismatched_basis_is_unbiased() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let trials = 20_000;
        let ones = (0..trials)
            .filter(|_| measure(prepare(false, Basis::Rectilinear), Basis::Diagonal, &mut rng))
            .count() as f64;
        let sigma = (trials as f64 * 0.25).sqrt();
        assert!((ones - trials as f64 / 2.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn second_measurement_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = Bits::from_bit_str("0110").unwrap();
        let state = ConjugateState::encode(&x, &Bits::zeros(4)).unwrap();
        let mut ch = Channel::deliver(state.clone());
        assert_eq!(ch.measure_all_in(Basis::Rectilinear, &mut rng).unwrap(), x);
        assert_eq!(ch.measure(2, Basis::Rectilinear, &mut rng), Err(Error::DoubleMeasure { position: 2 }));
        let mut ch = Channel::deliver(state);
        ch.measure(1, Basis::Diagonal, &mut rng).unwrap();
        assert_eq!(ch.measure_all_in(Basis::Rectilinear, &mut rng), Err(Error::DoubleMeasure { position: 1 }));
    }
}
