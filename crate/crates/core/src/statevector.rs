//! A small dense statevector engine for circuits over {H, X, Z, CNOT} with
//! computational-basis measurements.
//!
//! Qubit `q` is bit `q` of the basis-state index.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use rand_core::RngCore;

use crate::{Bits, Error, Result};

pub const DEFAULT_QUBIT_CAP: usize = 12;

const NORM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const ZERO: Complex = Complex { re: 0.0, im: 0.0 };
    pub const ONE: Complex = Complex { re: 1.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        Complex { re, im }
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn scale(self, k: f64) -> Complex {
        Complex { re: self.re * k, im: self.im * k }
    }
}

impl Add for Complex {
    type Output = Complex;
    fn add(self, o: Complex) -> Complex {
        Complex { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for Complex {
    type Output = Complex;
    fn sub(self, o: Complex) -> Complex {
        Complex { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Mul for Complex {
    type Output = Complex;
    fn mul(self, o: Complex) -> Complex {
        Complex { re: self.re * o.re - self.im * o.im, im: self.re * o.im + self.im * o.re }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Gate {
    H(usize),
    X(usize),
    Z(usize),
    Cnot { control: usize, target: usize },
    /// Computational-basis measurement; appends one outcome bit.
    Measure(usize),
}

impl Gate {
    fn max_qubit(self) -> usize {
        match self {
            Gate::H(q) | Gate::X(q) | Gate::Z(q) | Gate::Measure(q) => q,
            Gate::Cnot { control, target } => control.max(target),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex>,
}

impl StateVector {
    pub fn basis_state(n: usize, index: usize, cap: usize) -> Result<Self> {
        if n > cap {
            return Err(Error::CapExceeded { what: "qubit", needed: n as u128, cap: cap as u128 });
        }
        if index >= 1 << n {
            return Err(Error::BadInput("basis index out of range".into()));
        }
        let mut amps = vec![Complex::ZERO; 1 << n];
        amps[index] = Complex::ONE;
        Ok(StateVector { n, amps })
    }

    /// `|x⟩ ⊗ |0…0⟩` with `x` on qubits `0..x.len()`.
    pub fn from_bits(x: &Bits, ancillas: usize, cap: usize) -> Result<Self> {
        let idx = x.iter().enumerate().fold(0usize, |acc, (i, b)| acc | (b as usize) << i);
        StateVector::basis_state(x.len() + ancillas, idx, cap)
    }

    pub fn from_amplitudes(amps: Vec<Complex>, cap: usize) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::NotNormalized);
        }
        let n = amps.len().trailing_zeros() as usize;
        if n > cap {
            return Err(Error::CapExceeded { what: "qubit", needed: n as u128, cap: cap as u128 });
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized);
        }
        Ok(StateVector { n, amps })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn apply_unitary(&mut self, g: Gate) {
        match g {
            Gate::H(q) => {
                let mask = 1 << q;
                let k = core::f64::consts::FRAC_1_SQRT_2;
                for i in 0..self.amps.len() {
                    if i & mask == 0 {
                        let (a, b) = (self.amps[i], self.amps[i | mask]);
                        self.amps[i] = (a + b).scale(k);
                        self.amps[i | mask] = (a - b).scale(k);
                    }
                }
            }
            Gate::X(q) => {
                let mask = 1 << q;
                for i in 0..self.amps.len() {
                    if i & mask == 0 {
                        self.amps.swap(i, i | mask);
                    }
                }
            }
            Gate::Z(q) => {
                let mask = 1 << q;
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & mask != 0 {
                        *a = a.scale(-1.0);
                    }
                }
            }
            Gate::Cnot { control, target } => {
                let (c, t) = (1 << control, 1 << target);
                for i in 0..self.amps.len() {
                    if i & c != 0 && i & t == 0 {
                        self.amps.swap(i, i | t);
                    }
                }
            }
            Gate::Measure(_) => unreachable!(),
        }
    }

    /// Probability that measuring qubit `q` yields 1.
    pub fn prob_one(&self, q: usize) -> f64 {
        let mask = 1 << q;
        self.amps.iter().enumerate().filter(|(i, _)| i & mask != 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Project qubit `q` onto `outcome` and renormalize; returns the
    /// probability of that outcome. A zero-probability outcome leaves the
    /// state unnormalized at zero.
    fn collapse(&mut self, q: usize, outcome: bool) -> f64 {
        let mask = 1 << q;
        let p1 = self.prob_one(q);
        let p = if outcome { p1 } else { 1.0 - p1 };
        let p = p.clamp(0.0, 1.0);
        let k = if p > 0.0 { 1.0 / libm::sqrt(p) } else { 0.0 };
        for (i, a) in self.amps.iter_mut().enumerate() {
            if ((i & mask) != 0) == outcome {
                *a = a.scale(k);
            } else {
                *a = Complex::ZERO;
            }
        }
        p
    }
}

/// Result of [`sv_run`]: sampled outcomes with the probability each had when
/// it was drawn.
#[derive(Clone, Debug)]
pub struct SvRun {
    pub outcomes: Vec<bool>,
    pub probabilities: Vec<f64>,
    pub state: StateVector,
}

fn check_circuit(circuit: &[Gate], n: usize) -> Result<()> {
    for g in circuit {
        if g.max_qubit() >= n {
            return Err(Error::BadInput(alloc::format!("gate {g:?} acts outside {n} qubits")));
        }
        if let Gate::Cnot { control, target } = *g {
            if control == target {
                return Err(Error::BadInput("CNOT control equals target".into()));
            }
        }
    }
    Ok(())
}

/// Run `circuit`, sampling measurement outcomes from the Born rule.
pub fn sv_run<R: RngCore + ?Sized>(circuit: &[Gate], input: StateVector, rng: &mut R) -> Result<SvRun> {
    check_circuit(circuit, input.n)?;
    if (input.norm_sqr() - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized);
    }
    let mut st = input;
    let mut outcomes = Vec::new();
    let mut probabilities = Vec::new();
    for &g in circuit {
        match g {
            Gate::Measure(q) => {
                let p1 = st.prob_one(q);
                let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
                let outcome = u < p1;
                let p = st.collapse(q, outcome);
                outcomes.push(outcome);
                probabilities.push(p);
            }
            _ => st.apply_unitary(g),
        }
    }
    Ok(SvRun { outcomes, probabilities, state: st })
}

/// Probability that `circuit` applied to `input` produces exactly `outcomes`.
pub fn outcome_probability(circuit: &[Gate], input: StateVector, outcomes: &[bool]) -> Result<f64> {
    check_circuit(circuit, input.n)?;
    let measures = circuit.iter().filter(|g| matches!(g, Gate::Measure(_))).count();
    if measures != outcomes.len() {
        return Err(Error::BadLength { expected: measures, got: outcomes.len() });
    }
    let mut st = input;
    let mut prob = 1.0;
    let mut k = 0;
    for &g in circuit {
        match g {
            Gate::Measure(q) => {
                prob *= st.collapse(q, outcomes[k]);
                k += 1;
                if prob == 0.0 {
                    return Ok(0.0);
                }
            }
            _ => st.apply_unitary(g),
        }
    }
    Ok(prob)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hadamard_then_measure_is_fair() {
        let st = StateVector::basis_state(1, 0, 12).unwrap();
        let p0 = outcome_probability(&[Gate::H(0), Gate::Measure(0)], st.clone(), &[false]).unwrap();
        let p1 = outcome_probability(&[Gate::H(0), Gate::Measure(0)], st, &[true]).unwrap();
        assert!((p0 - 0.5).abs() < 1e-12 && (p1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn measuring_one_is_certain() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let st = StateVector::basis_state(1, 1, 12).unwrap();
        let run = sv_run(&[Gate::Measure(0)], st, &mut rng).unwrap();
        assert_eq!(run.outcomes, [true]);
        assert_eq!(run.probabilities, [1.0]);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(StateVector::basis_state(13, 0, 12), Err(Error::CapExceeded { .. })));
        let bad = vec![Complex::ONE, Complex::ONE];
        assert_eq!(StateVector::from_amplitudes(bad, 12), Err(Error::NotNormalized));
    }
}
