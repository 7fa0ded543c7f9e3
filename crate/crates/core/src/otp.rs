//! One-time programs for matrix branching programs.
//!
//! Each instruction `(j, b)` becomes `B_j^b · D_{j−1}⁻¹ · M_j^b · D_j` with
//! Kilian conjugators `D` and fresh pads `B`. The pads for the steps reading
//! input `i` are packed into `s_i^0, s_i^1` and delivered by one OT session
//! per input, so the evaluator can strip exactly one consistent path.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::bp::{BpOutput, Circuit, Barrington, Mbp};
use crate::entropy::HashFamily;
use crate::ot::{ot_receive_measure, ot_recover, OtParams, OtSession};
use crate::perm::Perm5;
use crate::transcript::{Body, Detail, Transcript};
use crate::{Bits, Error, Result};

/// Bits per packed permutation matrix.
pub const MATRIX_BITS: usize = 25;
/// Default limit on the total number of qubits in one transmission.
pub const DEFAULT_QUBIT_CAP: u128 = 1 << 27;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KilianRand {
    /// `D_0 … D_{N−2}`; `D_{−1}` and `D_{N−1}` are the identity.
    pub d: Vec<Perm5>,
}

impl KilianRand {
    fn at(&self, j: isize) -> Perm5 {
        if j < 0 || j as usize >= self.d.len() {
            Perm5::IDENTITY
        } else {
            self.d[j as usize]
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadKeys {
    pub b: Vec<[Perm5; 2]>,
}

/// The fully padded instruction table `E(P)`.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EncodedProgram {
    pub table: Vec<[Perm5; 2]>,
    pub n: usize,
    pub q_acc: Perm5,
    pub q_rej: Perm5,
}

impl EncodedProgram {
    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Two bytes per instruction: the ranks of both permutations.
    pub fn table_bytes(&self) -> Vec<u8> {
        self.table.iter().flat_map(|[a, b]| [a.index() as u8, b.index() as u8]).collect()
    }
}

pub fn kilian_with(p: &Mbp, k: &KilianRand) -> Vec<[Perm5; 2]> {
    p.instructions
        .iter()
        .enumerate()
        .map(|(j, ins)| {
            let left = k.at(j as isize - 1).inverse();
            let right = k.at(j as isize);
            [left.then(ins[0]).then(right), left.then(ins[1]).then(right)]
        })
        .collect()
}

pub fn kilian_randomize<R: RngCore + ?Sized>(p: &Mbp, rng: &mut R) -> (Vec<[Perm5; 2]>, KilianRand) {
    let k = KilianRand { d: (0..p.len().saturating_sub(1)).map(|_| Perm5::random(rng)).collect() };
    (kilian_with(p, &k), k)
}

pub fn encode_with(table: &[[Perm5; 2]], pads: &PadKeys) -> Vec<[Perm5; 2]> {
    table
        .iter()
        .zip(&pads.b)
        .map(|(ins, b)| [b[0].then(ins[0]), b[1].then(ins[1])])
        .collect()
}

pub fn otp_encode<R: RngCore + ?Sized>(
    table: &[[Perm5; 2]],
    n: usize,
    q_acc: Perm5,
    q_rej: Perm5,
    rng: &mut R,
) -> (EncodedProgram, PadKeys) {
    let pads = PadKeys { b: table.iter().map(|_| [Perm5::random(rng), Perm5::random(rng)]).collect() };
    (EncodedProgram { table: encode_with(table, &pads), n, q_acc, q_rej }, pads)
}

/// `s_i^b` for a single program.
pub fn pack_keys(pads: &PadKeys, n: usize, i: usize, b: bool) -> Bits {
    pack_joint(core::slice::from_ref(pads), n, i, b)
}

/// `s_i^b` for programs sharing input: program-major, then ascending
/// `j ≡ i (mod n)`, 25 row-major matrix bits each.
pub fn pack_joint(pads: &[PadKeys], n: usize, i: usize, b: bool) -> Bits {
    let mut out = Bits::zeros(0);
    for p in pads {
        for j in (i..p.b.len()).step_by(n) {
            out.extend_from(&Bits::from_u64(p.b[j][b as usize].matrix_bits() as u64, MATRIX_BITS));
        }
    }
    out
}

/// Inverse of [`pack_joint`]: pads `B_{p,j}` for every program `p` and every
/// `j ≡ i (mod n)` below `len`.
pub fn unpack_joint(s: &Bits, programs: usize, len: usize, n: usize, i: usize) -> Result<Vec<Vec<Perm5>>> {
    let per = (i..len).step_by(n).count();
    if s.len() != programs * per * MATRIX_BITS {
        return Err(Error::BadLength { expected: programs * per * MATRIX_BITS, got: s.len() });
    }
    (0..programs)
        .map(|p| {
            (0..per)
                .map(|k| {
                    let at = (p * per + k) * MATRIX_BITS;
                    Perm5::from_matrix_bits(s.slice(at..at + MATRIX_BITS).to_u64() as u32)
                })
                .collect()
        })
        .collect()
}

/// Sizes of a (joint) transmission.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OtpParams {
    /// Program length `N` (common to all outputs).
    pub len: usize,
    /// Inputs.
    pub n: usize,
    /// Programs decoded jointly.
    pub outputs: usize,
    pub m: usize,
    pub l: usize,
    pub s: usize,
}

impl OtpParams {
    /// `m = 250·N·n1 + 4·n1·s`, `ℓ = 25·N·n1/n`.
    pub fn derive(len: usize, n: usize, outputs: usize, s: usize) -> Result<Self> {
        if n == 0 || len % n != 0 {
            return Err(Error::BadInput(alloc::format!("program length {len} is not a multiple of n = {n}")));
        }
        let m = (250u128 * len as u128 * outputs as u128 + 4 * outputs as u128 * s as u128) as usize;
        Ok(OtpParams { len, n, outputs, m, l: MATRIX_BITS * len * outputs / n, s })
    }

    pub fn total_qubits(&self) -> u128 {
        self.n as u128 * self.m as u128
    }

    /// Qubits plus classical bits: `n·m` qubits, `n·(2ℓ + hash keys)` and
    /// the `E(P)` table.
    pub fn size_bits(&self, family: HashFamily) -> u128 {
        let key = match family {
            HashFamily::Dense => self.m as u128 * self.l as u128,
            HashFamily::Toeplitz => (self.m + self.l).saturating_sub(1) as u128,
        };
        let per_session = self.m as u128 + 2 * self.l as u128 + 2 * key;
        self.total_qubits() + self.n as u128 * per_session + (self.outputs * self.len * 2 * MATRIX_BITS) as u128
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OtpConfig {
    pub s: usize,
    pub family: HashFamily,
    pub qubit_cap: u128,
    pub detail: Detail,
}

impl OtpConfig {
    /// Toeplitz hashing, default caps, summary transcripts.
    pub fn new(s: usize) -> Self {
        OtpConfig { s, family: HashFamily::Toeplitz, qubit_cap: DEFAULT_QUBIT_CAP, detail: Detail::Summary }
    }

    pub fn with_detail(mut self, detail: Detail) -> Self {
        self.detail = detail;
        self
    }

    pub fn with_family(mut self, family: HashFamily) -> Self {
        self.family = family;
        self
    }

    pub fn with_qubit_cap(mut self, cap: u128) -> Self {
        self.qubit_cap = cap;
        self
    }
}

/// `n` OT sessions carrying the pad strings, then `E(P)` in the clear.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OneTimeTransmission {
    pub params: OtpParams,
    pub sessions: Vec<OtSession>,
    pub encoded: Vec<EncodedProgram>,
    pub transcript: Transcript,
}

impl OneTimeTransmission {
    pub fn ot_params(&self) -> OtParams {
        self.sessions.first().map_or(OtParams::new(0, 0, self.params.s), |s| s.params)
    }

    pub fn is_consumed(&self) -> bool {
        self.sessions.iter().any(|s| s.channel.fully_consumed() && !s.channel.is_empty())
    }
}

/// Size check without doing any work.
pub fn plan_joint(programs: &[Mbp], cfg: &OtpConfig) -> Result<OtpParams> {
    let first = programs.first().ok_or_else(|| Error::BadInput("no programs".into()))?;
    let n = first.n;
    if programs.iter().any(|p| p.n != n) {
        return Err(Error::BadInput("programs read different inputs".into()));
    }
    let len = programs.iter().map(Mbp::len).max().unwrap_or(0);
    let params = OtpParams::derive(len, n, programs.len(), cfg.s)?;
    if params.total_qubits() > cfg.qubit_cap {
        return Err(Error::CapExceeded { what: "qubits", needed: params.total_qubits(), cap: cfg.qubit_cap });
    }
    Ok(params)
}

pub fn otp_compile<R: RngCore + ?Sized>(p: &Mbp, s: usize, rng: &mut R) -> Result<OneTimeTransmission> {
    compile_joint(core::slice::from_ref(p), &OtpConfig::new(s), rng)
}

pub fn nc1_compile<R: RngCore + ?Sized>(programs: &[Mbp], s: usize, rng: &mut R) -> Result<OneTimeTransmission> {
    compile_joint(programs, &OtpConfig::new(s), rng)
}

/// Joint compile: programs are padded with identities to a common length,
/// randomized and encoded independently, and one OT session per input
/// carries the pads of every program.
pub fn compile_joint<R: RngCore + ?Sized>(programs: &[Mbp], cfg: &OtpConfig, rng: &mut R) -> Result<OneTimeTransmission> {
    let params = plan_joint(programs, cfg)?;
    let mut transcript = Transcript::new(crate::Profile::Paper, cfg.detail);
    transcript.param("N", params.len);
    transcript.param("n", params.n);
    transcript.param("outputs", params.outputs);
    transcript.param("m", params.m);
    transcript.param("l", params.l);
    transcript.param("s", params.s);
    let mut encoded = Vec::with_capacity(programs.len());
    let mut pads = Vec::with_capacity(programs.len());
    for p in programs {
        let p = p.padded_to(params.len)?;
        let (table, _) = kilian_randomize(&p, rng);
        let (e, b) = otp_encode(&table, p.n, p.q_acc, p.q_rej, rng);
        encoded.push(e);
        pads.push(b);
    }
    let ot = OtParams::new(params.m, params.l, params.s).with_family(cfg.family);
    let mut sessions = Vec::with_capacity(params.n);
    for i in 0..params.n {
        let s0 = pack_joint(&pads, params.n, i, false);
        let s1 = pack_joint(&pads, params.n, i, true);
        sessions.push(OtSession::open(ot, &s0, &s1, &mut transcript, rng)?);
    }
    for e in &encoded {
        let bytes = e.table_bytes();
        transcript.message("otp.encoded", Body::Hex { bits: bytes.len() * 8, hex: Bits::from_bytes(&bytes, bytes.len() * 8)?.to_hex() });
    }
    Ok(OneTimeTransmission { params, sessions, encoded, transcript })
}

/// Honest joint evaluation: one output per program.
pub fn otp_evaluate_joint<R: RngCore + ?Sized>(
    t: &mut OneTimeTransmission,
    w: &Bits,
    rng: &mut R,
) -> Result<Vec<BpOutput>> {
    let p = t.params;
    if w.len() != p.n {
        return Err(Error::BadLength { expected: p.n, got: w.len() });
    }
    if t.encoded.len() != p.outputs || t.encoded.iter().any(|e| e.len() != p.len || e.n != p.n) {
        return Err(Error::FormatError("encoded program does not match the manifest".into()));
    }
    let mut measured = Vec::with_capacity(p.n);
    for (i, sess) in t.sessions.iter_mut().enumerate() {
        measured.push(ot_receive_measure(&mut sess.channel, w.get(i), rng)?);
    }
    t.transcript.bound("bound");
    // pads[i][prog][k] strips step j = i + k·n of program prog
    let mut pads = Vec::with_capacity(p.n);
    for (i, sess) in t.sessions.iter_mut().enumerate() {
        let msg = sess.release(&mut t.transcript)?;
        let y = ot_recover(&measured[i], w.get(i), &msg)?;
        pads.push(unpack_joint(&y, p.outputs, p.len, p.n, i)?);
    }
    Ok(t.encoded
        .iter()
        .enumerate()
        .map(|(prog, e)| {
            let product = e.table.iter().enumerate().fold(Perm5::IDENTITY, |acc, (j, ins)| {
                let bit = w.get(j % p.n) as usize;
                acc.then(pads[j % p.n][prog][j / p.n].inverse().then(ins[bit]))
            });
            if product == e.q_acc {
                BpOutput::One
            } else if product == e.q_rej {
                BpOutput::Zero
            } else {
                BpOutput::Undef
            }
        })
        .collect())
}

pub fn otp_evaluate<R: RngCore + ?Sized>(t: &mut OneTimeTransmission, w: &Bits, rng: &mut R) -> Result<BpOutput> {
    let out = otp_evaluate_joint(t, w, rng)?;
    out.first().copied().ok_or_else(|| Error::FormatError("transmission carries no program".into()))
}

/// Compile each output, refusing as soon as the joint transmission is
/// certain to exceed the qubit cap.
fn compile_outputs(c: &Circuit, b: &Barrington, cfg: &OtpConfig) -> Result<Vec<Mbp>> {
    let n = c.inputs.max(1);
    let mut out: Vec<Mbp> = Vec::with_capacity(c.outputs.len());
    let mut total: u128 = 0;
    for o in &c.outputs {
        let p = match o {
            crate::bp::OutputFn::Formula(f) => b.compile(f, c.inputs)?,
            crate::bp::OutputFn::Table(t) => b.compile_table(t, c.inputs)?,
        };
        total += p.len() as u128;
        if total > b.cap {
            return Err(Error::CapExceeded { what: "instruction", needed: total, cap: b.cap });
        }
        let len = out.iter().map(Mbp::len).chain([p.len()]).max().unwrap_or(0);
        let qubits = n as u128 * (250 * len as u128 * c.outputs.len() as u128 + 4 * c.outputs.len() as u128 * cfg.s as u128);
        if qubits > cfg.qubit_cap {
            return Err(Error::CapExceeded { what: "qubits", needed: qubits, cap: cfg.qubit_cap });
        }
        out.push(p);
    }
    Ok(out)
}

/// A multi-output function compiled into one joint transmission. The
/// output is `None` (⊥) if any program lands outside `{q_acc, q_rej}`.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CompiledFunction {
    pub inputs: usize,
    pub outputs: usize,
    pub transmission: OneTimeTransmission,
}

impl CompiledFunction {
    /// Plan the sizes of compiling `c` without building anything.
    pub fn plan(c: &Circuit, barrington: &Barrington, cfg: &OtpConfig) -> Result<OtpParams> {
        plan_joint(&compile_outputs(c, barrington, cfg)?, cfg)
    }

    pub fn compile<R: RngCore + ?Sized>(c: &Circuit, barrington: &Barrington, cfg: &OtpConfig, rng: &mut R) -> Result<Self> {
        let programs = compile_outputs(c, barrington, cfg)?;
        Ok(CompiledFunction { inputs: c.inputs, outputs: c.outputs.len(), transmission: compile_joint(&programs, cfg, rng)? })
    }

    /// Input and output widths, for format checks.
    pub fn widths(&self) -> (usize, usize) {
        (self.inputs, self.outputs)
    }

    /// `true` if the transmission is internally consistent with its widths.
    pub fn well_formed(&self) -> bool {
        let t = &self.transmission;
        let p = t.params;
        p.n == self.inputs
            && p.outputs == self.outputs
            && t.sessions.len() == p.n
            && t.encoded.len() == p.outputs
            && t.encoded.iter().all(|e| e.len() == p.len && e.n == p.n)
            && t.sessions.iter().all(|s| s.params.m == p.m && s.params.l == p.l && s.channel.len() == p.m)
    }

    pub fn evaluate<R: RngCore + ?Sized>(&mut self, w: &Bits, rng: &mut R) -> Result<Option<Bits>> {
        let out = otp_evaluate_joint(&mut self.transmission, w, rng)?;
        let bits: Option<Vec<bool>> = out.iter().map(|o| o.bit()).collect();
        Ok(bits.map(|b| Bits::from_bools(&b)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bp::{mbp_eval, Formula};
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;

    #[test]
    fn kilian_identity_and_telescoping() {
        let mut r = ChaCha8Rng::seed_from_u64(1);
        let p = Barrington::new().compile(&Formula::parse("(x0 & x1) | x2").unwrap(), 3).unwrap();
        let id = KilianRand { d: alloc::vec![Perm5::IDENTITY; p.len() - 1] };
        assert_eq!(kilian_with(&p, &id), p.instructions);
        let (table, _) = kilian_randomize(&p, &mut r);
        let q = Mbp { instructions: table, ..p.clone() };
        for w in 0..8 {
            let w = Bits::from_u64(w, 3);
            assert_eq!(q.path_product(&w).unwrap(), p.path_product(&w).unwrap());
        }
    }

    #[test]
    fn pack_round_trip_and_identity_pattern() {
        let pads = PadKeys { b: alloc::vec![[Perm5::IDENTITY; 2]; 6] };
        let s = pack_keys(&pads, 3, 1, true);
        assert_eq!(s.len(), 25 * 2);
        let id = Bits::from_u64(Perm5::IDENTITY.matrix_bits() as u64, 25);
        assert_eq!(s, id.concat(&id));
        let mut r = ChaCha8Rng::seed_from_u64(2);
        let pads = PadKeys { b: (0..6).map(|_| [Perm5::random(&mut r), Perm5::random(&mut r)]).collect() };
        let s = pack_keys(&pads, 3, 2, false);
        let back = unpack_joint(&s, 1, 6, 3, 2).unwrap();
        assert_eq!(back[0], alloc::vec![pads.b[2][0], pads.b[5][0]]);
    }

    #[test]
    fn single_step_parameters() {
        let p = Mbp { instructions: alloc::vec![[Perm5::IDENTITY, Perm5::CYCLE]], n: 1, q_acc: Perm5::CYCLE, q_rej: Perm5::IDENTITY };
        let mut r = ChaCha8Rng::seed_from_u64(3);
        let t = otp_compile(&p, 5, &mut r).unwrap();
        assert_eq!(t.sessions.len(), 1);
        assert_eq!((t.params.l, t.params.m), (25, 270));
    }

    #[test]
    fn and2_end_to_end_and_single_use() {
        let b = Barrington::new();
        let f = Formula::parse("x0 & x1").unwrap();
        let p = b.compile(&f, 2).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(4);
        for w in 0..4 {
            let w = Bits::from_u64(w, 2);
            let mut t = otp_compile(&p, 16, &mut r).unwrap();
            assert_eq!(otp_evaluate(&mut t, &w, &mut r).unwrap(), mbp_eval(&p, &w).unwrap());
            assert!(matches!(otp_evaluate(&mut t, &w, &mut r), Err(Error::DoubleMeasure { .. })));
        }
    }

    #[test]
    fn qubit_cap_refuses_with_sizes() {
        let p = crate::bp::identity_program(4, 200_000);
        let err = plan_joint(&[p], &OtpConfig::new(0)).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { what: "qubits", needed, .. } if needed == 4 * 250 * 200_000));
    }
}
