//! 1-2 oblivious transfer from conjugate coding.
//!
//! The sender prepares `|x⟩_θ` for random `x, θ`; the receiver measures
//! everything in basis `[+,×]_c`. After the memory bound the sender
//! announces `θ`, two hash functions and `e_b = f_b(x|_{I_b}) ⊕ s_b`, where
//! `I_b` is the set of positions with `θ_i = [+,×]_b`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::conjugate::{Basis, Channel, ConjugateState};
use crate::entropy::{apply_hash, sample_from, HashFamily, HashFunc};
use crate::transcript::{Body, Transcript};
use crate::{Bits, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OtParams {
    /// Qubits sent.
    pub m: usize,
    /// String length.
    pub l: usize,
    /// Adversary memory bound, in qubits.
    pub s: usize,
    pub family: HashFamily,
}

impl OtParams {
    pub fn new(m: usize, l: usize, s: usize) -> Self {
        OtParams { m, l, s, family: HashFamily::Dense }
    }

    /// `m` raised to at least `8·(2ℓ + s)`.
    pub fn with_defaults(m: usize, l: usize, s: usize) -> Self {
        OtParams::new(m.max(8 * (2 * l + s)), l, s)
    }

    pub fn with_family(mut self, family: HashFamily) -> Self {
        self.family = family;
        self
    }

    /// `m/4 − 2ℓ − s`, the entropy left after the bound minus what the
    /// strings consume.
    pub fn margin(&self) -> f64 {
        self.m as f64 / 4.0 - 2.0 * self.l as f64 - self.s as f64
    }

    /// `true` when the margin is at most `m/100`.
    pub fn below_comfort(&self) -> bool {
        self.margin() <= self.m as f64 / 100.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum OtPhase {
    Init,
    QubitsSent,
    Finalized,
}

#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OtSenderState {
    pub params: OtParams,
    x: Bits,
    theta: Bits,
    s0: Bits,
    s1: Bits,
    phase: OtPhase,
    sent_seq: u64,
}

impl OtSenderState {
    pub fn phase(&self) -> OtPhase {
        self.phase
    }

    /// Sender log, for audits.
    pub fn x(&self) -> &Bits {
        &self.x
    }

    pub fn theta(&self) -> &Bits {
        &self.theta
    }

    pub fn strings(&self) -> (&Bits, &Bits) {
        (&self.s0, &self.s1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OtPhase2Msg {
    /// Bit `i` set means `θ_i = ×`.
    pub theta: Bits,
    pub f0: HashFunc,
    pub f1: HashFunc,
    pub e0: Bits,
    pub e1: Bits,
}

impl OtPhase2Msg {
    pub fn f(&self, b: bool) -> &HashFunc {
        if b {
            &self.f1
        } else {
            &self.f0
        }
    }

    pub fn e(&self, b: bool) -> &Bits {
        if b {
            &self.e1
        } else {
            &self.e0
        }
    }

    pub fn to_body(&self) -> Body {
        Body::OtPhase2 {
            theta: self.theta.to_hex(),
            f0_hex: self.f0.key_bits().to_hex(),
            f1_hex: self.f1.key_bits().to_hex(),
            e0_hex: self.e0.to_hex(),
            e1_hex: self.e1.to_hex(),
        }
    }
}

/// Mask of `I_b`: positions whose basis is `[+,×]_b`.
pub fn index_set(theta: &Bits, b: bool) -> Bits {
    if b {
        theta.clone()
    } else {
        theta.not()
    }
}

/// `x|_I` zero-padded to the hash input length `m`.
fn restricted(x: &Bits, mask: &Bits) -> Bits {
    x.select(mask).resized(x.len())
}

pub fn ot_phase1<R: RngCore + ?Sized>(
    params: OtParams,
    s0: &Bits,
    s1: &Bits,
    tr: &mut Transcript,
    rng: &mut R,
) -> Result<(OtSenderState, ConjugateState)> {
    for s in [s0, s1] {
        if s.len() != params.l {
            return Err(Error::BadLength { expected: params.l, got: s.len() });
        }
    }
    let x = Bits::random(params.m, rng);
    let theta = Bits::random(params.m, rng);
    let state = ConjugateState::encode(&x, &theta)?;
    let sent_seq = tr.qubits("ot.qubits", &state);
    let sender = OtSenderState { params, x, theta, s0: s0.clone(), s1: s1.clone(), phase: OtPhase::QubitsSent, sent_seq };
    Ok((sender, state))
}

pub fn ot_receive_measure<R: RngCore + ?Sized>(channel: &mut Channel, c: bool, rng: &mut R) -> Result<Bits> {
    channel.measure_all_in(Basis::from_bit(c), rng)
}

pub fn ot_phase2<R: RngCore + ?Sized>(
    sender: &mut OtSenderState,
    tr: &mut Transcript,
    rng: &mut R,
) -> Result<OtPhase2Msg> {
    if sender.phase != OtPhase::QubitsSent {
        return Err(Error::PhaseViolation("phase 2 requires qubits sent and not finalized"));
    }
    tr.require_bound_after(sender.sent_seq, "phase 2 before the memory bound")?;
    let p = sender.params;
    let f0 = sample_from(p.family, p.m, p.l, rng);
    let f1 = sample_from(p.family, p.m, p.l, rng);
    let e0 = apply_hash(&f0, &restricted(&sender.x, &index_set(&sender.theta, false)))?.xor(&sender.s0);
    let e1 = apply_hash(&f1, &restricted(&sender.x, &index_set(&sender.theta, true)))?.xor(&sender.s1);
    sender.phase = OtPhase::Finalized;
    let msg = OtPhase2Msg { theta: sender.theta.clone(), f0, f1, e0, e1 };
    tr.message("ot.phase2", msg.to_body());
    Ok(msg)
}

/// `y = e_c ⊕ f_c(x′|_{I_c})`.
pub fn ot_recover(x_prime: &Bits, c: bool, msg: &OtPhase2Msg) -> Result<Bits> {
    if x_prime.len() != msg.theta.len() {
        return Err(Error::DimMismatch { expected: msg.theta.len(), got: x_prime.len() });
    }
    let mask = index_set(&msg.theta, c);
    Ok(msg.e(c).xor(&apply_hash(msg.f(c), &restricted(x_prime, &mask))?))
}

/// A sender session bundled with its channel: the unit other constructions
/// embed. The sender's later randomness comes from its own seeded stream.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OtSession {
    pub params: OtParams,
    pub channel: Channel,
    sender: OtSenderState,
    sender_rng: ChaCha8Rng,
}

impl OtSession {
    pub fn open<R: RngCore + ?Sized>(
        params: OtParams,
        s0: &Bits,
        s1: &Bits,
        tr: &mut Transcript,
        rng: &mut R,
    ) -> Result<Self> {
        let (sender, state) = ot_phase1(params, s0, s1, tr, rng)?;
        let mut seed = [0u8; 32];
        rng.fill_bytes(&mut seed);
        Ok(OtSession { params, channel: Channel::deliver(state), sender, sender_rng: ChaCha8Rng::from_seed(seed) })
    }

    /// Phase 2, available once a bound event follows the qubits.
    pub fn release(&mut self, tr: &mut Transcript) -> Result<OtPhase2Msg> {
        ot_phase2(&mut self.sender, tr, &mut self.sender_rng)
    }

    pub fn sender(&self) -> &OtSenderState {
        &self.sender
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn honest_run_recovers_chosen_string() {
        let mut r = rng(11);
        let params = OtParams::new(256, 16, 0);
        for c in [false, true] {
            let s0 = Bits::random(16, &mut r);
            let s1 = Bits::random(16, &mut r);
            let mut tr = Transcript::full();
            let mut sess = OtSession::open(params, &s0, &s1, &mut tr, &mut r).unwrap();
            let x = ot_receive_measure(&mut sess.channel, c, &mut r).unwrap();
            tr.bound("bound");
            let msg = sess.release(&mut tr).unwrap();
            assert_eq!(ot_recover(&x, c, &msg).unwrap(), if c { s1 } else { s0 });
            assert_eq!(index_set(&msg.theta, false).count_ones() + index_set(&msg.theta, true).count_ones(), 256);
        }
    }

    #[test]
    fn phase2_before_bound_is_refused() {
        let mut r = rng(12);
        let mut tr = Transcript::summary();
        let s = Bits::zeros(4);
        let mut sess = OtSession::open(OtParams::new(64, 4, 0), &s, &s, &mut tr, &mut r).unwrap();
        assert!(matches!(sess.release(&mut tr), Err(Error::PhaseViolation(_))));
        tr.bound("bound");
        sess.release(&mut tr).unwrap();
        assert!(matches!(sess.release(&mut tr), Err(Error::PhaseViolation(_))));
    }

    #[test]
    fn margin_warning() {
        assert!(OtParams::new(100, 10, 5).below_comfort());
        assert!(!OtParams::with_defaults(0, 16, 0).below_comfort());
        assert_eq!(OtParams::with_defaults(10, 16, 4).m, 288);
    }
}
