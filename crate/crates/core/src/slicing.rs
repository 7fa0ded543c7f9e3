//! One-time programs for circuits deeper than a single NC¹ block.
//!
//! The circuit is cut into `M` blocks of depth at most `2·lg N` over an
//! `N`-bit state. Block `i` is compiled as `Ĉ_i(a) = C_i(a ⊕ k_{i−1}) ⊕ k_i`
//! with fresh pads `k_i` (`k_{−1} = 0`). The evaluator keeps every
//! `(a_i, b_i)` and hands the whole proof to a final one-time program `D`
//! that checks `Ĉ_i(a_i) = b_i` and `b_i = a_{i+1}` and releases `k_{M−1}`
//! only if every check passes.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::bp::{Barrington, Circuit, Formula};
use crate::otp::{CompiledFunction, OtpConfig, OtpParams};
use crate::{ceil_log2, Bits, Error, Result};

/// A circuit presented as `M` blocks, each a list of `N` formulas over the
/// `N`-bit output of the previous block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlicedCircuit {
    pub width: usize,
    pub blocks: Vec<Vec<Formula>>,
}

impl SlicedCircuit {
    pub fn new(width: usize, blocks: Vec<Vec<Formula>>) -> Result<Self> {
        if width == 0 || blocks.is_empty() {
            return Err(Error::BadInput("empty sliced circuit".into()));
        }
        let limit = 2 * ceil_log2(width).max(1) as usize;
        for (i, block) in blocks.iter().enumerate() {
            if block.len() != width || block.iter().any(|f| f.arity() > width) {
                return Err(Error::BadInput(alloc::format!("block {i} is not {width} bits wide")));
            }
            let depth = block.iter().map(Formula::depth).max().unwrap_or(0);
            if depth > limit {
                return Err(Error::BlockDepthExceeded { block: i, depth, limit });
            }
        }
        Ok(SlicedCircuit { width, blocks })
    }

    pub fn depth(&self) -> usize {
        self.blocks.iter().map(|b| b.iter().map(Formula::depth).max().unwrap_or(0)).sum()
    }

    fn eval_block(&self, i: usize, a: &Bits) -> Bits {
        Bits::from_fn(self.width, |j| self.blocks[i][j].eval(a))
    }

    /// Direct evaluation; `w` is zero-extended to `N` bits.
    pub fn eval(&self, w: &Bits) -> Bits {
        (0..self.blocks.len()).fold(w.resized(self.width), |a, i| self.eval_block(i, &a))
    }
}

fn mask_inputs(f: &Formula, k: &Bits) -> Formula {
    match f {
        Formula::Var(j) if k.get(*j) => Formula::not(Formula::Var(*j)),
        Formula::Var(j) => Formula::Var(*j),
        Formula::Not(g) => Formula::not(mask_inputs(g, k)),
        Formula::And(a, b) => Formula::and(mask_inputs(a, k), mask_inputs(b, k)),
        Formula::Or(a, b) => Formula::or(mask_inputs(a, k), mask_inputs(b, k)),
    }
}

/// `Ĉ_{i, k_in, k_out}` as `N` formulas of the same depth.
pub fn padded_block(block: &[Formula], k_in: &Bits, k_out: &Bits) -> Vec<Formula> {
    block
        .iter()
        .enumerate()
        .map(|(j, f)| {
            let g = mask_inputs(f, k_in);
            if k_out.get(j) {
                Formula::not(g)
            } else {
                g
            }
        })
        .collect()
}

/// `D_{k_{M−1}}` over the proof `a_0 ‖ b_0 ‖ … ‖ a_{M−1} ‖ b_{M−1}`.
/// Outputs `k_{M−1} ‖ 1` if all checks pass and all zeros (⊥) otherwise.
pub fn decryption_circuit(c: &SlicedCircuit, pads: &[Bits]) -> Result<Circuit> {
    let (n, m) = (c.width, c.blocks.len());
    let last = pads.last().ok_or_else(|| Error::BadInput("no pads".into()))?.clone();
    let hat: Vec<Vec<Formula>> = (0..m)
        .map(|i| {
            let k_in = if i == 0 { Bits::zeros(n) } else { pads[i - 1].clone() };
            padded_block(&c.blocks[i], &k_in, &pads[i])
        })
        .collect();
    let mask = (1u64 << n) - 1;
    let key = last.to_u64();
    Circuit::from_fn(2 * m * n, n + 1, |proof| {
        let part = |t: usize| Bits::from_u64(proof >> (t * n) & mask, n);
        let ok = (0..m).all(|i| {
            let (a, b) = (part(2 * i), part(2 * i + 1));
            let consistent = Bits::from_fn(n, |j| hat[i][j].eval(&a)) == b;
            consistent && (i + 1 == m || b == part(2 * i + 2))
        });
        if ok {
            key | 1 << n
        } else {
            0
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SliceManifest {
    pub blocks: usize,
    pub width: usize,
    pub depth: usize,
}

#[derive(Clone, Debug)]
pub struct SlicedTransmission {
    pub manifest: SliceManifest,
    pub sub_programs: Vec<CompiledFunction>,
    pub dec_program: CompiledFunction,
}

/// Sizes of every transmission `poly_compile` would emit (blocks, then
/// `D`), computed without opening any OT session.
pub fn poly_plan(c: &SlicedCircuit, cfg: &OtpConfig) -> Result<Vec<OtpParams>> {
    let b = Barrington::new();
    let zero = alloc::vec![Bits::zeros(c.width); c.blocks.len()];
    let mut out = Vec::new();
    for block in &c.blocks {
        out.push(CompiledFunction::plan(&Circuit::from_formulas(c.width, block.clone()), &b, cfg)?);
    }
    out.push(CompiledFunction::plan(&decryption_circuit(c, &zero)?, &b, cfg)?);
    Ok(out)
}

pub fn poly_compile<R: RngCore + ?Sized>(c: &SlicedCircuit, cfg: &OtpConfig, rng: &mut R) -> Result<SlicedTransmission> {
    let n = c.width;
    let b = Barrington::new();
    let pads: Vec<Bits> = (0..c.blocks.len()).map(|_| Bits::random(n, rng)).collect();
    let d = decryption_circuit(c, &pads)?;
    // refuse before any qubit is prepared
    CompiledFunction::plan(&d, &b, cfg)?;
    let mut sub_programs = Vec::with_capacity(c.blocks.len());
    for (i, block) in c.blocks.iter().enumerate() {
        let k_in = if i == 0 { Bits::zeros(n) } else { pads[i - 1].clone() };
        let hat = Circuit::from_formulas(n, padded_block(block, &k_in, &pads[i]));
        sub_programs.push(CompiledFunction::compile(&hat, &b, cfg, rng)?);
    }
    let dec_program = CompiledFunction::compile(&d, &b, cfg, rng)?;
    let manifest = SliceManifest { blocks: c.blocks.len(), width: n, depth: c.depth() };
    Ok(SlicedTransmission { manifest, sub_programs, dec_program })
}

/// Run every block and return the proof `a_0 ‖ b_0 ‖ …`, or `None` if a
/// block program lands outside its accept/reject pair.
pub fn poly_prove<R: RngCore + ?Sized>(t: &mut SlicedTransmission, w: &Bits, rng: &mut R) -> Result<Option<Bits>> {
    let n = t.manifest.width;
    if w.len() > n {
        return Err(Error::BadLength { expected: n, got: w.len() });
    }
    let mut a = w.resized(n);
    let mut proof = Bits::zeros(0);
    for p in &mut t.sub_programs {
        let Some(b) = p.evaluate(&a, rng)? else { return Ok(None) };
        proof.extend_from(&a);
        proof.extend_from(&b);
        a = b;
    }
    Ok(Some(proof))
}

/// Feed a proof to `D` and unpad the last block output.
pub fn poly_finish<R: RngCore + ?Sized>(t: &mut SlicedTransmission, proof: &Bits, rng: &mut R) -> Result<Option<Bits>> {
    let n = t.manifest.width;
    if proof.len() != 2 * n * t.manifest.blocks {
        return Err(Error::BadLength { expected: 2 * n * t.manifest.blocks, got: proof.len() });
    }
    let Some(out) = t.dec_program.evaluate(proof, rng)? else { return Ok(None) };
    if !out.get(n) {
        return Ok(None);
    }
    let key = out.slice(0..n);
    Ok(Some(proof.slice(proof.len() - n..proof.len()).xor(&key)))
}

pub fn poly_evaluate<R: RngCore + ?Sized>(t: &mut SlicedTransmission, w: &Bits, rng: &mut R) -> Result<Option<Bits>> {
    match poly_prove(t, w, rng)? {
        Some(proof) => poly_finish(t, &proof, rng),
        None => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;

    fn toy() -> SlicedCircuit {
        let f = |s: &str| Formula::parse(s).unwrap();
        SlicedCircuit::new(2, alloc::vec![alloc::vec![f("x0 & x1"), f("x0 | !x1")]]).unwrap()
    }

    #[test]
    fn depth_limit_enforced() {
        let deep = Formula::parse("((x0 & x1) & (x0 | x1)) & x1").unwrap();
        let err = SlicedCircuit::new(2, alloc::vec![alloc::vec![deep, Formula::var(0)]]).unwrap_err();
        assert!(matches!(err, Error::BlockDepthExceeded { block: 0, depth: 3, limit: 2 }));
    }

    #[test]
    fn decryption_circuit_checks_chain() {
        let f = |s: &str| Formula::parse(s).unwrap();
        let c = SlicedCircuit::new(2, alloc::vec![alloc::vec![f("x1"), f("x0")], alloc::vec![f("x0 & x1"), f("!x0")]]).unwrap();
        let pads = alloc::vec![Bits::from_bit_str("10").unwrap(), Bits::from_bit_str("01").unwrap()];
        let d = decryption_circuit(&c, &pads).unwrap();
        for w in 0..4u64 {
            let a0 = Bits::from_u64(w, 2);
            let b0 = Bits::from_fn(2, |j| padded_block(&c.blocks[0], &Bits::zeros(2), &pads[0])[j].eval(&a0));
            let b1 = Bits::from_fn(2, |j| padded_block(&c.blocks[1], &pads[0], &pads[1])[j].eval(&b0));
            let proof = a0.concat(&b0).concat(&b0).concat(&b1);
            let out = d.eval(&proof);
            assert!(out.get(2));
            assert_eq!(b1.xor(&out.slice(0..2)), c.eval(&a0));
            let mut bad = proof.clone();
            bad.flip(4);
            assert!(d.eval(&bad).is_zero());
        }
    }

    #[test]
    fn single_block_end_to_end() {
        let c = toy();
        let mut r = ChaCha8Rng::seed_from_u64(5);
        for w in 0..4u64 {
            let w = Bits::from_u64(w, 2);
            let mut t = poly_compile(&c, &OtpConfig::new(0), &mut r).unwrap();
            assert_eq!(poly_evaluate(&mut t, &w, &mut r).unwrap(), Some(c.eval(&w)));
            assert!(matches!(poly_evaluate(&mut t, &w, &mut r), Err(Error::DoubleMeasure { .. })));
        }
    }
}
