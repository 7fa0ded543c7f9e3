//! Program broadcast: many single-evaluation copies of one program.
//!
//! Each copy carries `12m` conjugate-coded qubits `|x⟩_θ`, a one-time
//! program for `P ⊕ c` and the string `r`, where `θ = F·r` and `c = H(x)`.
//! Once issuance stops and the memory bound has passed, `F` and `H` are
//! revealed; an honest user who kept its `12m` qubits recovers `x`, hence
//! `c`, and unpads its single output.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::bp::{Barrington, Circuit, Formula, OutputFn};
use crate::conjugate::{Channel, ConjugateState};
use crate::entropy::{apply_hash, sample_hash, HashFunc};
use crate::gf2::Gf2Matrix;
use crate::otp::{CompiledFunction, OtpConfig};
use crate::transcript::{Body, Transcript};
use crate::{ceil_log2, Bits, Error, Result};

/// Qubits per output bit carried by each copy.
pub const CARRIER_FACTOR: usize = 12;

/// `P ⊕ c`: every output with `c_j = 1` negated.
pub fn xor_outputs(p: &Circuit, c: &Bits) -> Circuit {
    let outputs = p
        .outputs
        .iter()
        .enumerate()
        .map(|(j, o)| match (o, c.get(j)) {
            (o, false) => o.clone(),
            (OutputFn::Formula(f), true) => OutputFn::Formula(Formula::not(f.clone())),
            (OutputFn::Table(t), true) => OutputFn::Table(t.not()),
        })
        .collect();
    Circuit { inputs: p.inputs, outputs }
}

/// Smallest output width allowed for `n` inputs: `⌈lg n⌉²`.
pub fn min_output_width(n: usize) -> usize {
    let l = ceil_log2(n) as usize;
    l * l
}

pub struct BroadcastState {
    pub program: Circuit,
    f: Gf2Matrix,
    h: HashFunc,
    pub s: usize,
    pub cfg: OtpConfig,
    finalized: bool,
    issued: usize,
    pub transcript: Transcript,
}

#[derive(Clone, Debug)]
pub struct BroadcastCopy {
    pub index: usize,
    pub conj: Channel,
    pub otp: CompiledFunction,
    pub r: Bits,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BroadcastReveal {
    pub f: Gf2Matrix,
    pub h: HashFunc,
}

impl BroadcastReveal {
    pub fn theta(&self, r: &Bits) -> Result<Bits> {
        self.f.matvec(r)
    }

    pub fn pad(&self, x: &Bits) -> Result<Bits> {
        apply_hash(&self.h, x)
    }
}

impl BroadcastState {
    pub fn output_width(&self) -> usize {
        self.program.outputs.len()
    }

    pub fn carrier_len(&self) -> usize {
        self.f.rows()
    }

    pub fn issued(&self) -> usize {
        self.issued
    }

    pub fn is_finalized(&self) -> bool {
        self.finalized
    }
}

/// Pads `P` with constant-zero outputs up to `⌈lg n⌉²`, then samples the
/// `12m × 12m` matrix `F` and `H: {0,1}^{12m} → {0,1}^m`.
pub fn br_setup<R: RngCore + ?Sized>(p: &Circuit, s: usize, cfg: OtpConfig, rng: &mut R) -> Result<BroadcastState> {
    let mut program = p.clone();
    let width = min_output_width(p.inputs).max(p.outputs.len()).max(1);
    while program.outputs.len() < width {
        if p.inputs > crate::bp::MAX_TABLE_INPUTS {
            return Err(Error::TooLarge { what: "null output table", size: p.inputs as u128, limit: crate::bp::MAX_TABLE_INPUTS as u128 });
        }
        program.outputs.push(OutputFn::Table(Bits::zeros(1 << p.inputs)));
    }
    let big = CARRIER_FACTOR * width;
    let f = Gf2Matrix::random(big, big, rng);
    let h = sample_hash(big, width, rng);
    let mut transcript = Transcript::new(crate::Profile::Paper, cfg.detail);
    transcript.param("inputs", p.inputs);
    transcript.param("outputs", width);
    transcript.param("s", s);
    transcript.message("br_setup", Body::Text { text: alloc::format!("n={} m={} carrier={}", p.inputs, width, big) });
    Ok(BroadcastState { program, f, h, s, cfg: OtpConfig { s, ..cfg }, finalized: false, issued: 0, transcript })
}

/// Setup with a caller-chosen `F` (square, carrier-sized) and `H` from the
/// carrier to the output width. Outputs are not padded.
pub fn br_setup_keyed(p: &Circuit, f: Gf2Matrix, h: HashFunc, s: usize, cfg: OtpConfig) -> Result<BroadcastState> {
    if f.rows() != f.cols() {
        return Err(Error::DimMismatch { expected: f.rows(), got: f.cols() });
    }
    if h.input_len() != f.rows() {
        return Err(Error::DimMismatch { expected: f.rows(), got: h.input_len() });
    }
    if h.output_len() != p.outputs.len() {
        return Err(Error::DimMismatch { expected: p.outputs.len(), got: h.output_len() });
    }
    let mut transcript = Transcript::new(crate::Profile::Paper, cfg.detail);
    transcript.param("inputs", p.inputs);
    transcript.param("outputs", p.outputs.len());
    transcript.param("s", s);
    transcript.message("br_setup", Body::Text { text: alloc::format!("n={} m={} carrier={}", p.inputs, p.outputs.len(), f.rows()) });
    Ok(BroadcastState { program: p.clone(), f, h, s, cfg: OtpConfig { s, ..cfg }, finalized: false, issued: 0, transcript })
}

pub fn br_issue<R: RngCore + ?Sized>(st: &mut BroadcastState, rng: &mut R) -> Result<BroadcastCopy> {
    if st.finalized {
        return Err(Error::Finalized);
    }
    let big = st.carrier_len();
    let r = Bits::random(big, rng);
    let x = Bits::random(big, rng);
    let theta = st.f.matvec(&r)?;
    let c = apply_hash(&st.h, &x)?;
    let otp = CompiledFunction::compile(&xor_outputs(&st.program, &c), &Barrington::new(), &st.cfg, rng)?;
    let conj = ConjugateState::encode(&x, &theta)?;
    let index = st.issued;
    let label = alloc::format!("br_issue[{index}]");
    st.transcript.qubits(&label, &conj);
    st.transcript.message(&label, Body::Hex { bits: r.len(), hex: r.to_hex() });
    st.issued += 1;
    Ok(BroadcastCopy { index, conj: Channel::deliver(conj), otp, r })
}

/// Stop issuing; record the global bound, then reveal `(F, H)`.
pub fn br_finalize(st: &mut BroadcastState) -> Result<BroadcastReveal> {
    if st.finalized {
        return Err(Error::AlreadyFinalized);
    }
    st.finalized = true;
    st.transcript.bound("bound");
    let key = st.f.to_row_major().concat(&st.h.key_bits());
    st.transcript.reveal("br_reveal", Body::Hex { bits: key.len(), hex: key.to_hex() });
    Ok(BroadcastReveal { f: st.f.clone(), h: st.h.clone() })
}

/// The single evaluation of the copy: `P(v) ⊕ c`, or `None` (⊥).
pub fn br_evaluate<R: RngCore + ?Sized>(copy: &mut BroadcastCopy, v: &Bits, rng: &mut R) -> Result<Option<Bits>> {
    copy.otp.evaluate(v, rng)
}

/// Measure the stored carrier in `θ = F·r` and strip `c = H(x)`.
pub fn br_unpad<R: RngCore + ?Sized>(
    copy: &mut BroadcastCopy,
    padded: &Bits,
    reveal: &BroadcastReveal,
    rng: &mut R,
) -> Result<Bits> {
    let theta = reveal.theta(&copy.r)?;
    let x = copy.conj.measure_all(&theta, rng)?;
    Ok(padded.xor(&reveal.pad(&x)?))
}

pub fn br_redeem<R: RngCore + ?Sized>(
    copy: &mut BroadcastCopy,
    v: &Bits,
    reveal: &BroadcastReveal,
    rng: &mut R,
) -> Result<Option<Bits>> {
    match br_evaluate(copy, v, rng)? {
        Some(y) => br_unpad(copy, &y, reveal, rng).map(Some),
        None => Ok(None),
    }
}

/// Issue `count` copies, then finalize.
pub fn br_issue_all<R: RngCore + ?Sized>(
    st: &mut BroadcastState,
    count: usize,
    rng: &mut R,
) -> Result<(Vec<BroadcastCopy>, BroadcastReveal)> {
    let copies = (0..count).map(|_| br_issue(st, rng)).collect::<Result<Vec<_>>>()?;
    Ok((copies, br_finalize(st)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;

    fn toy() -> Circuit {
        let f = |s: &str| Formula::parse(s).unwrap();
        Circuit::from_formulas(4, alloc::vec![f("x0 & x1"), f("x2 | x3"), f("!x1")])
    }

    #[test]
    fn setup_pads_outputs() {
        let mut r = ChaCha8Rng::seed_from_u64(1);
        let st = br_setup(&toy(), 0, OtpConfig::new(0), &mut r).unwrap();
        assert_eq!(st.output_width(), 4);
        assert_eq!((st.f.rows(), st.f.cols()), (48, 48));
    }

    #[test]
    fn honest_redemption_and_lifecycle() {
        let mut r = ChaCha8Rng::seed_from_u64(2);
        let p = toy();
        let mut st = br_setup(&p, 8, OtpConfig::new(8), &mut r).unwrap();
        let (mut copies, reveal) = br_issue_all(&mut st, 16, &mut r).unwrap();
        assert!(matches!(br_issue(&mut st, &mut r), Err(Error::Finalized)));
        assert!(matches!(br_finalize(&mut st), Err(Error::AlreadyFinalized)));
        for (v, copy) in copies.iter_mut().enumerate() {
            let v = Bits::from_u64(v as u64, 4);
            let out = br_redeem(copy, &v, &reveal, &mut r).unwrap().unwrap();
            assert_eq!(out.slice(0..3), p.eval(&v));
            assert!(out.slice(3..4).is_zero());
            assert!(matches!(br_unpad(copy, &out, &reveal, &mut r), Err(Error::DoubleMeasure { .. })));
        }
        let kinds: Vec<&str> = st.transcript.events.iter().map(|e| e.label()).collect();
        let bound = kinds.iter().position(|k| *k == "bound").unwrap();
        assert_eq!(kinds[bound + 1], "br_reveal");
    }
}
