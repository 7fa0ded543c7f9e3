//! Security experiments run against concrete storage-bounded adversaries.
//!
//! A strategy decides, qubit by qubit, whether to measure now or keep the
//! qubit unmeasured; at the bound the number kept must not exceed `s`.
//! Trials draw all randomness from `(seed, trial)` so any single trial can
//! be replayed, and the per-trial functions are exposed for parallel
//! drivers. "Computationally unbounded" adversaries are exhaustive
//! enumerators and refuse parameters above a toy limit.

use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::broadcast::{br_finalize, br_issue, BroadcastState};
use crate::conjugate::{measure, Basis, Channel, QubitPrep};
use crate::encryption::{
    asy_dec, asy_enc, asy_gen, asy_keyreceive, asy_keysend, sym_dec, sym_enc_with, sym_gen, AsymCiphertext,
    AsymParams, SymCiphertext,
};
use crate::entropy::Dist;
use crate::gf2k::{Gf2k, Gf2kElem, Gf2kPoly};
use crate::ot::{ot_recover, OtParams, OtSession};
use crate::otp::OtpConfig;
use crate::statevector::{outcome_probability, Gate, StateVector, DEFAULT_QUBIT_CAP};
use crate::tokens::{sigtok_gen, tok_gen, SigTokenKey, TokenCiphertext, TokenKey};
use crate::transcript::{ParamValue, Transcript};
use crate::{Bits, Error, Profile, Result};

/// Largest λ accepted by exhaustive adversaries.
pub const MAX_TOY_LAMBDA: u64 = 20;

/// Largest polynomial space, in bits, a consistent-polynomial forger walks.
pub const MAX_FORGER_BITS: usize = 20;

/// One randomness stream per trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// What an adversary holds at the bound for one channel.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AdversaryMemory {
    /// `(position, basis, outcome)` for every measured qubit.
    pub measured: Vec<(usize, Basis, bool)>,
    /// Qubits kept unmeasured.
    pub stored: Vec<(usize, QubitPrep)>,
}

impl AdversaryMemory {
    /// Best estimate of the prepared string once `θ` is known: stored qubits
    /// are measured in `θ`, the rest keep their recorded outcome.
    pub fn resolve<R: RngCore + ?Sized>(&self, len: usize, theta: &Bits, rng: &mut R) -> Bits {
        let mut x = Bits::zeros(len);
        for &(i, _, bit) in &self.measured {
            x.set(i, bit);
        }
        for &(i, q) in &self.stored {
            x.set(i, measure(q, Basis::from_bit(theta.get(i)), rng));
        }
        x
    }

    /// Positions whose resolved value is certainly correct.
    pub fn known(&self, len: usize, theta: &Bits) -> Bits {
        let mut k = Bits::zeros(len);
        for &(i, b, _) in &self.measured {
            k.set(i, b.to_bit() == theta.get(i));
        }
        for &(i, _) in &self.stored {
            k.set(i, true);
        }
        k
    }
}

pub type CustomStrategy = fn(&mut [Channel], usize, &mut dyn RngCore) -> Result<Vec<AdversaryMemory>>;

#[derive(Clone, Copy, Debug)]
pub enum StrategyKind {
    /// One random basis for every qubit.
    MeasureAllRandom,
    MeasureAllFixed(Basis),
    /// Keep the first `s` qubits in arrival order, measure the rest in one
    /// random basis.
    StoreFirstS,
    /// Keep `s` uniformly chosen qubits, measure the rest in one random basis.
    StoreRandomS,
    Custom(CustomStrategy),
}

#[derive(Clone, Copy, Debug)]
pub struct AdversaryStrategy {
    pub kind: StrategyKind,
    pub s: usize,
}

impl AdversaryStrategy {
    pub fn new(kind: StrategyKind, s: usize) -> Self {
        AdversaryStrategy { kind, s }
    }

    pub fn name(&self) -> String {
        match self.kind {
            StrategyKind::MeasureAllRandom => "measure-all-random".into(),
            StrategyKind::MeasureAllFixed(b) => alloc::format!("measure-all-fixed-{}", b.symbol()),
            StrategyKind::StoreFirstS => "store-first-s".into(),
            StrategyKind::StoreRandomS => "store-random-s".into(),
            StrategyKind::Custom(_) => "custom".into(),
        }
    }

    /// Process every qubit of `channels` (in order, as one stream) and
    /// enforce the budget at the bound.
    pub fn process<R: RngCore>(&self, channels: &mut [Channel], rng: &mut R) -> Result<Vec<AdversaryMemory>> {
        let total: usize = channels.iter().map(Channel::len).sum();
        let keep = match self.kind {
            StrategyKind::MeasureAllRandom | StrategyKind::MeasureAllFixed(_) => Bits::zeros(total),
            StrategyKind::StoreFirstS => Bits::from_fn(total, |i| i < self.s),
            StrategyKind::StoreRandomS => random_subset(total, self.s.min(total), rng),
            StrategyKind::Custom(f) => {
                let mem = f(channels, self.s, rng)?;
                check_budget(&mem, self.s)?;
                return Ok(mem);
            }
        };
        let basis = match self.kind {
            StrategyKind::MeasureAllFixed(b) => b,
            _ => Basis::from_bit(rng.next_u32() & 1 == 1),
        };
        let mut mem = Vec::with_capacity(channels.len());
        let mut offset = 0;
        for ch in channels.iter_mut() {
            let mut m = AdversaryMemory::default();
            for i in 0..ch.len() {
                if keep.get(offset + i) {
                    m.stored.push((i, ch.take(i)?));
                } else {
                    m.measured.push((i, basis, ch.measure(i, basis, rng)?));
                }
            }
            offset += ch.len();
            mem.push(m);
        }
        check_budget(&mem, self.s)?;
        Ok(mem)
    }
}

/// The bound: total qubits kept unmeasured must not exceed `s`.
pub fn check_budget(mem: &[AdversaryMemory], s: usize) -> Result<()> {
    let retained: usize = mem.iter().map(|m| m.stored.len()).sum();
    if retained > s {
        return Err(Error::BudgetViolation { retained, budget: s });
    }
    Ok(())
}

fn random_subset<R: RngCore + ?Sized>(n: usize, k: usize, rng: &mut R) -> Bits {
    // partial Fisher–Yates
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + (rng.next_u64() % (n - i) as u64) as usize;
        idx.swap(i, j);
    }
    let mut out = Bits::zeros(n);
    for &i in &idx[..k] {
        out.set(i, true);
    }
    out
}

/// Wilson score interval at 95%.
pub fn wilson_95(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * libm::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExperimentReport {
    pub experiment: String,
    pub params: Vec<(String, ParamValue)>,
    pub trials: u64,
    pub successes: u64,
    pub rate: f64,
    pub ci95: (f64, f64),
    pub seed: u64,
}

impl ExperimentReport {
    pub fn from_outcomes(experiment: &str, params: Vec<(String, ParamValue)>, outcomes: &[bool], seed: u64) -> Self {
        let trials = outcomes.len() as u64;
        let successes = outcomes.iter().filter(|&&b| b).count() as u64;
        ExperimentReport {
            experiment: experiment.into(),
            params,
            trials,
            successes,
            rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
            ci95: wilson_95(successes, trials),
            seed,
        }
    }

    /// Combine reports of disjoint trial ranges of the same experiment.
    pub fn merge(&self, other: &ExperimentReport) -> ExperimentReport {
        let trials = self.trials + other.trials;
        let successes = self.successes + other.successes;
        ExperimentReport {
            trials,
            successes,
            rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
            ci95: wilson_95(successes, trials),
            ..self.clone()
        }
    }
}

fn param(k: &str, v: impl Into<ParamValue>) -> (String, ParamValue) {
    (k.into(), v.into())
}

/// One OT^Dis trial: the adversary receives the qubits, the bound applies,
/// phase 2 and then `b` arrive, and it outputs `e_b ⊕ f_b(x′|_{I_b})` from
/// its best estimate `x′`.
pub fn ot_dis_trial(strategy: &AdversaryStrategy, params: OtParams, seed: u64, trial: u64) -> Result<bool> {
    let mut rng = trial_rng(seed, trial);
    let s0 = Bits::random(params.l, &mut rng);
    let s1 = Bits::random(params.l, &mut rng);
    let b = rng.next_u32() & 1 == 1;
    let mut tr = Transcript::summary();
    let mut sess = OtSession::open(params, &s0, &s1, &mut tr, &mut rng)?;
    let mem = strategy.process(core::slice::from_mut(&mut sess.channel), &mut rng)?;
    tr.bound("bound");
    let msg = sess.release(&mut tr)?;
    let x = mem[0].resolve(params.m, &msg.theta, &mut rng);
    let guess = ot_recover(&x, b, &msg)?;
    Ok(guess == if b { s1 } else { s0 })
}

pub fn run_ot_dis(strategy: &AdversaryStrategy, params: OtParams, trials: u64, seed: u64) -> Result<ExperimentReport> {
    let outcomes = (0..trials).map(|t| ot_dis_trial(strategy, params, seed, t)).collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport::from_outcomes("ot-dis", ot_dis_params(strategy, params), &outcomes, seed))
}

pub fn ot_dis_params(strategy: &AdversaryStrategy, params: OtParams) -> Vec<(String, ParamValue)> {
    alloc::vec![
        param("strategy", strategy.name()),
        param("m", params.m),
        param("l", params.l),
        param("s", strategy.s),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Scheme {
    Sym,
    Asy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CcaAdversary {
    /// Ignores the ciphertext.
    RandomGuess,
    /// Evaluates `f` on a random `t` and the payload program on a uniformly
    /// guessed `y` before the bound.
    BruteForce,
    /// Keeps every ciphertext qubit and decrypts after the key reveal;
    /// refused with `BudgetViolation` unless the ciphertext fits in `s`.
    StoreAll,
    /// Control: receives the key before the challenge.
    KeyBeforeChallenge,
}

/// Sizes for the asymmetric experiments: 24 carrier qubits, `m′ = 2`,
/// and a 2-bit key index.
pub fn toy_asym_params(lambda: u64, s: usize) -> AsymParams {
    AsymParams { n: 2, ..AsymParams::with_sizes(lambda, s, Profile::Desk, 24, 2) }
}

fn ciphertext_qubits(ct: &SymCiphertext) -> u128 {
    ct.ot_f.transmission.params.total_qubits() + ct.ot_p.transmission.params.total_qubits()
}

fn brute_force_guess<R: RngCore + ?Sized>(ct: &mut SymCiphertext, mu: [&Bits; 2], rng: &mut R) -> Result<bool> {
    let m = ct.m;
    ct.ot_f.evaluate(&Bits::random(m, rng), rng)?;
    let y = Bits::random(2 * m, rng);
    if let Some(out) = ct.ot_p.evaluate(&y, rng)? {
        if out.get(m + ct.l) {
            return Ok(out.slice(m..m + ct.l) == *mu[1]);
        }
    }
    Ok(rng.next_u32() & 1 == 1)
}

/// One qDCCA1 trial. The adversary makes `q_e` encryption queries on random
/// messages and forwards `q_d` of the resulting ciphertexts to the
/// decryption oracle before the challenge; brute-force adversaries also
/// try each remaining query ciphertext on a guessed input.
pub fn qdcca1_trial(
    scheme: Scheme,
    adversary: CcaAdversary,
    lambda: u64,
    s: usize,
    queries: (usize, usize),
    seed: u64,
    trial: u64,
) -> Result<bool> {
    if lambda > MAX_TOY_LAMBDA {
        return Err(Error::TooLarge { what: "λ for exhaustive adversaries", size: lambda as u128, limit: MAX_TOY_LAMBDA as u128 });
    }
    let mut rng = trial_rng(seed, trial);
    let cfg = OtpConfig::new(s);
    let l = 4;
    let b = rng.next_u32() & 1 == 1;
    let mu = [Bits::random(l, &mut rng), Bits::random(l, &mut rng)];
    if mu[0] == mu[1] {
        return Ok(rng.next_u32() & 1 == 1);
    }
    // key material; the asymmetric experiment extracts k through a broadcast
    enum Keys {
        Sym(crate::encryption::SymKey),
        Asy(crate::encryption::AsymPrivKey, crate::encryption::SubKey),
    }
    let keys = match scheme {
        Scheme::Sym => Keys::Sym(sym_gen(lambda, &mut rng)?),
        Scheme::Asy => {
            let params = toy_asym_params(lambda, s);
            let sk = asy_gen(params, &mut rng)?;
            let mut st = asy_keysend(&sk, cfg)?;
            let mut copy = br_issue(&mut st, &mut rng)?;
            let reveal = br_finalize(&mut st)?;
            let kv = asy_keyreceive(&params, &mut copy, &reveal, &mut rng)?;
            Keys::Asy(sk, kv)
        }
    };
    let encrypt = |mu: &Bits, rng: &mut ChaCha8Rng| -> Result<AsymCiphertext> {
        match &keys {
            Keys::Sym(k) => Ok(AsymCiphertext { v: Bits::zeros(0), ct: sym_enc_with(&cfg, k, mu, rng)? }),
            Keys::Asy(_, kv) => asy_enc(&cfg, kv, mu, rng),
        }
    };
    let decrypt = |ct: &mut AsymCiphertext, rng: &mut ChaCha8Rng| -> Result<Option<Bits>> {
        match &keys {
            Keys::Sym(k) => sym_dec(k, &mut ct.ct, rng),
            Keys::Asy(sk, _) => asy_dec(sk, ct, rng),
        }
    };
    let (q_e, q_d) = queries;
    let mut oracle_cts = (0..q_e).map(|_| encrypt(&Bits::random(l, &mut rng), &mut rng)).collect::<Result<Vec<_>>>()?;
    for (i, ct) in oracle_cts.iter_mut().enumerate() {
        if i < q_d {
            decrypt(ct, &mut rng)?;
        } else if adversary == CcaAdversary::BruteForce {
            brute_force_guess(&mut ct.ct, [&mu[0], &mu[1]], &mut rng)?;
        }
    }
    let mut challenge = encrypt(&mu[b as usize], &mut rng)?;
    let guess = match adversary {
        CcaAdversary::RandomGuess => rng.next_u32() & 1 == 1,
        CcaAdversary::BruteForce => brute_force_guess(&mut challenge.ct, [&mu[0], &mu[1]], &mut rng)?,
        CcaAdversary::StoreAll => {
            let needed = ciphertext_qubits(&challenge.ct);
            if needed > s as u128 {
                return Err(Error::BudgetViolation { retained: needed.min(usize::MAX as u128) as usize, budget: s });
            }
            decrypt(&mut challenge, &mut rng)?.as_ref() == Some(&mu[1])
        }
        CcaAdversary::KeyBeforeChallenge => decrypt(&mut challenge, &mut rng)?.as_ref() == Some(&mu[1]),
    };
    Ok(guess == b)
}

pub fn run_qdcca1(
    scheme: Scheme,
    adversary: CcaAdversary,
    lambda: u64,
    s: usize,
    queries: (usize, usize),
    trials: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    let outcomes = (0..trials)
        .map(|t| qdcca1_trial(scheme, adversary, lambda, s, queries, seed, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport::from_outcomes("qdcca1", qdcca1_params(scheme, adversary, lambda, s, queries), &outcomes, seed))
}

pub fn qdcca1_params(
    scheme: Scheme,
    adversary: CcaAdversary,
    lambda: u64,
    s: usize,
    queries: (usize, usize),
) -> Vec<(String, ParamValue)> {
    alloc::vec![
        param("scheme", alloc::format!("{scheme:?}").to_lowercase()),
        param("adversary", alloc::format!("{adversary:?}")),
        param("lambda", lambda),
        param("s", s),
        param("q_e", queries.0),
        param("q_d", queries.1),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TokenExpKind {
    Sig,
    Enc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TokenStrategy {
    /// Use every token legitimately, then fill the last slot by a uniform
    /// guess (a random signature, or one of the two unopened messages).
    Guess,
    /// Signature tokens only: predict the missing signature from a
    /// polynomial drawn uniformly among those consistent with the view.
    ConsistentPoly,
    /// Produce only the `d + e` pairs the tokens legitimately give.
    Legit,
    /// Control: one token more than the experiment allows.
    ExtraToken,
}

/// A single-query oracle: the token semantics the simulation argument
/// reduces a one-time program to.
struct OneShot<F> {
    f: F,
    used: bool,
}

impl<F> OneShot<F> {
    fn new(f: F) -> Self {
        OneShot { f, used: false }
    }

    fn query<A, B>(&mut self, a: A) -> Result<B>
    where
        F: FnMut(A) -> B,
    {
        if self.used {
            return Err(Error::DoubleMeasure { position: 0 });
        }
        self.used = true;
        Ok((self.f)(a))
    }
}

fn random_poly_consistent<R: RngCore + ?Sized>(
    field: &Gf2k,
    d: usize,
    eq: &[(Gf2kElem, Gf2kElem)],
    neq: &[(Gf2kElem, Gf2kElem)],
    rng: &mut R,
) -> Result<Gf2kPoly> {
    let k = field.degree();
    let bits = k as usize * (d + 1);
    if bits > MAX_FORGER_BITS {
        return Err(Error::TooLarge { what: "forger polynomial space", size: bits as u128, limit: MAX_FORGER_BITS as u128 });
    }
    let mask = (1u64 << k) - 1;
    let mut chosen = None;
    let mut seen = 0u64;
    let mut poly = Gf2kPoly::zero(field, d);
    for code in 0..1u64 << bits {
        for (t, c) in poly.coeffs.iter_mut().enumerate() {
            *c = code >> (t as u32 * k) & mask;
        }
        let ok = eq.iter().all(|&(a, b)| poly.eval(field, a) == b) && neq.iter().all(|&(a, b)| poly.eval(field, a) != b);
        if ok {
            // reservoir sampling keeps the choice uniform
            seen += 1;
            if rng.next_u64() % seen == 0 {
                chosen = Some(poly.clone());
            }
        }
    }
    chosen.ok_or(Error::ZeroEvidence)
}

fn sig_token_trial<R: RngCore>(key: &SigTokenKey, e: usize, d: usize, strategy: TokenStrategy, rng: &mut R) -> Result<bool> {
    let n = key.n;
    let field = key.field();
    let size = 1u64 << n;
    let signs = if strategy == TokenStrategy::ExtraToken { e + 1 } else { e };
    let mut sign_tokens: Vec<_> = (0..signs).map(|_| OneShot::new(|mu: u64| key.sign(mu))).collect();
    let mut verify_tokens: Vec<_> = (0..d).map(|_| OneShot::new(|(mu, s): (u64, u64)| key.sign(mu) == s)).collect();
    let mut pairs: Vec<(u64, u64)> = Vec::new();
    let mut messages: Vec<u64> = (0..size).collect();
    for i in (1..messages.len()).rev() {
        messages.swap(i, (rng.next_u64() % (i as u64 + 1)) as usize);
    }
    let mut fresh = messages.into_iter();
    for t in &mut sign_tokens {
        let mu = fresh.next().ok_or_else(|| Error::BadInput("message space exhausted".into()))?;
        pairs.push((mu, t.query(mu)?));
    }
    let mut rejected: Vec<(u64, u64)> = Vec::new();
    let predict = |mu: u64, pairs: &[(u64, u64)], rejected: &[(u64, u64)], rng: &mut R| -> Result<u64> {
        match strategy {
            TokenStrategy::ConsistentPoly => {
                let eq: Vec<_> = pairs.iter().map(|&(a, b)| (field.elem(a), field.elem(b))).collect();
                let neq: Vec<_> = rejected.iter().map(|&(a, b)| (field.elem(a), field.elem(b))).collect();
                let f = random_poly_consistent(&field, n - 1, &eq, &neq, rng)?;
                Ok(f.eval(&field, field.elem(mu)).value)
            }
            _ => Ok(rng.next_u64() % size),
        }
    };
    // verification tokens test guesses on fresh messages
    for t in &mut verify_tokens {
        if strategy == TokenStrategy::Legit {
            break;
        }
        let mu = fresh.next().ok_or_else(|| Error::BadInput("message space exhausted".into()))?;
        let sigma = predict(mu, &pairs, &rejected, rng)?;
        if t.query((mu, sigma))? {
            pairs.push((mu, sigma));
        } else {
            rejected.push((mu, sigma));
        }
    }
    let need = e + d + 1;
    while pairs.len() < need && strategy != TokenStrategy::Legit {
        let Some(mu) = fresh.next() else { break };
        let sigma = predict(mu, &pairs, &rejected, rng)?;
        pairs.push((mu, sigma));
    }
    // d + e + 1 fresh verification tokens judge the output
    Ok(pairs.len() >= need && pairs[..need].iter().all(|&(mu, s)| key.sign(mu) == s))
}

fn enc_token_trial<R: RngCore>(key: &TokenKey, e: usize, d: usize, strategy: TokenStrategy, rng: &mut R) -> Result<bool> {
    if strategy == TokenStrategy::ConsistentPoly {
        return Err(Error::TooLarge {
            what: "forger polynomial space",
            size: (6 * key.n * (key.n + 1)) as u128,
            limit: MAX_FORGER_BITS as u128,
        });
    }
    let n = key.n;
    let size = 1u64 << n;
    if (d + 2 + e) as u64 > size {
        return Err(Error::BadInput("message space too small for the experiment".into()));
    }
    let mut order: Vec<u64> = (0..size).collect();
    for i in (1..order.len()).rev() {
        order.swap(i, (rng.next_u64() % (i as u64 + 1)) as usize);
    }
    let msgs: Vec<Bits> = order.iter().map(|&v| Bits::from_u64(v, n)).collect();
    // steps 2–5: d + 2 messages, d + 1 of them encrypted under fresh r
    let chosen = msgs[..d + 2].to_vec();
    let skip = (rng.next_u64() % (d as u64 + 2)) as usize;
    let challenge: Vec<TokenCiphertext> = (0..d + 2)
        .filter(|&i| i != skip)
        .map(|i| key.encrypt(&Bits::random(2 * n, rng), &chosen[i]))
        .collect::<Result<_>>()?;
    let encs = if strategy == TokenStrategy::ExtraToken { e + 1 } else { e };
    let mut enc_tokens: Vec<_> = (0..encs)
        .map(|_| {
            let r = Bits::random(2 * n, rng);
            OneShot::new(move |x: &Bits| key.encrypt(&r, x))
        })
        .collect();
    let mut dec_tokens: Vec<_> = (0..d).map(|_| OneShot::new(|ct: &TokenCiphertext| key.decrypt(ct))).collect();
    let mut pairs: Vec<(Bits, TokenCiphertext)> = Vec::new();
    for (t, ct) in dec_tokens.iter_mut().zip(&challenge) {
        if let Some(mu) = t.query(ct)? {
            pairs.push((mu, ct.clone()));
        }
    }
    for (t, mu) in enc_tokens.iter_mut().zip(&msgs[d + 2..]) {
        pairs.push((mu.clone(), t.query(mu)??));
    }
    let need = d + e + 1;
    if pairs.len() < need && strategy != TokenStrategy::Legit {
        // the last challenge ciphertext belongs to one of the two messages
        // no decryption has produced
        let opened: Vec<&Bits> = pairs.iter().map(|p| &p.0).collect();
        let left: Vec<&Bits> = chosen.iter().filter(|m| !opened.contains(m)).collect();
        if let (Some(ct), false) = (challenge.get(d), left.is_empty()) {
            let pick = left[(rng.next_u64() % left.len() as u64) as usize].clone();
            pairs.push((pick, ct.clone()));
        }
    }
    let mut distinct: Vec<&Bits> = pairs.iter().map(|p| &p.0).collect();
    distinct.sort();
    distinct.dedup();
    Ok(pairs.len() >= need
        && distinct.len() == pairs.len()
        && pairs[..need].iter().all(|(mu, ct)| key.decrypt(ct).as_ref() == Some(mu)))
}

/// One token-experiment trial with single-query token semantics. Requires
/// `e + d < q` unless the strategy is the extra-token control.
pub fn token_exp_trial(
    kind: TokenExpKind,
    lambda: u64,
    q: usize,
    e: usize,
    d: usize,
    strategy: TokenStrategy,
    seed: u64,
    trial: u64,
) -> Result<bool> {
    if e + d >= q {
        return Err(Error::BadInput(alloc::format!("e + d = {} must be below q = {q}", e + d)));
    }
    if lambda > MAX_TOY_LAMBDA {
        return Err(Error::TooLarge { what: "λ for exhaustive adversaries", size: lambda as u128, limit: MAX_TOY_LAMBDA as u128 });
    }
    let mut rng = trial_rng(seed, trial);
    match kind {
        TokenExpKind::Sig => {
            let key = sigtok_gen(lambda, q, &mut rng)?;
            sig_token_trial(&key, e, d, strategy, &mut rng)
        }
        TokenExpKind::Enc => {
            let key = tok_gen(lambda, q, &mut rng)?;
            enc_token_trial(&key, e, d, strategy, &mut rng)
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn run_token_exp(
    kind: TokenExpKind,
    lambda: u64,
    q: usize,
    e: usize,
    d: usize,
    strategy: TokenStrategy,
    trials: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    let outcomes = (0..trials)
        .map(|t| token_exp_trial(kind, lambda, q, e, d, strategy, seed, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport::from_outcomes("token-exp", token_exp_params(kind, lambda, q, e, d, strategy), &outcomes, seed))
}

pub fn token_exp_params(
    kind: TokenExpKind,
    lambda: u64,
    q: usize,
    e: usize,
    d: usize,
    strategy: TokenStrategy,
) -> Vec<(String, ParamValue)> {
    alloc::vec![
        param("kind", alloc::format!("{kind:?}").to_lowercase()),
        param("lambda", lambda),
        param("q", q),
        param("e", e),
        param("d", d),
        param("strategy", alloc::format!("{strategy:?}")),
    ]
}

/// Outcome of a storage attack on one broadcast.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BroadcastAttack {
    pub copies: usize,
    /// Pads recovered from fully stored carriers.
    pub recovered: usize,
    /// Correct pad guesses among the copies not fully stored.
    pub guessed_correct: usize,
    pub guessed_total: usize,
}

/// Issue `copies` copies to the adversary, apply `strategy` to their
/// carriers as one stream, close the broadcast, then reconstruct every pad
/// from the reveal. A pad counts as recovered when every carrier qubit of
/// its copy was known exactly; otherwise the guess `H(x′)` is scored.
pub fn broadcast_attack<R: RngCore>(
    st: &mut BroadcastState,
    copies: usize,
    strategy: &AdversaryStrategy,
    rng: &mut R,
) -> Result<BroadcastAttack> {
    let issued = (0..copies).map(|_| br_issue(st, rng)).collect::<Result<Vec<_>>>()?;
    let mut channels: Vec<Channel> = issued.iter().map(|c| c.conj.clone()).collect();
    let mem = strategy.process(&mut channels, rng)?;
    let reveal = br_finalize(st)?;
    let mut out = BroadcastAttack { copies, recovered: 0, guessed_correct: 0, guessed_total: 0 };
    for (copy, m) in issued.iter().zip(&mem) {
        let len = copy.conj.len();
        let theta = reveal.theta(&copy.r)?;
        let truth = reveal.pad(copy.conj.state().bits())?;
        let guess = reveal.pad(&m.resolve(len, &theta, rng))?;
        if m.known(len, &theta).count_ones() == len {
            out.recovered += (guess == truth) as usize;
        } else {
            out.guessed_total += 1;
            out.guessed_correct += (guess == truth) as usize;
        }
    }
    Ok(out)
}

/// `Pr[X = x | outcomes]` over all `n`-bit inputs, by Bayes with a uniform
/// prior and Born-rule likelihoods.
#[derive(Clone, Debug, PartialEq)]
pub struct Posterior {
    pub dist: Dist,
}

pub fn extract_posterior(circuit: &[Gate], n: usize, ancillas: usize, outcomes: &[bool]) -> Result<Posterior> {
    if n + ancillas > DEFAULT_QUBIT_CAP {
        return Err(Error::CapExceeded {
            what: "statevector qubit",
            needed: (n + ancillas) as u128,
            cap: DEFAULT_QUBIT_CAP as u128,
        });
    }
    let mut likelihood = Vec::with_capacity(1 << n);
    for x in 0..1u64 << n {
        let x = Bits::from_u64(x, n);
        let p = outcome_probability(circuit, StateVector::from_bits(&x, ancillas, DEFAULT_QUBIT_CAP)?, outcomes)?;
        likelihood.push((x, p));
    }
    // Pr[x | m] = Pr[m | x] / (2^n Pr[m]) with Pr[m] = Σ Pr[m | x] / 2^n
    let evidence: f64 = likelihood.iter().map(|(_, p)| p).sum();
    if evidence <= 0.0 {
        return Err(Error::ZeroEvidence);
    }
    let entries = likelihood.into_iter().map(|(x, p)| (x, p / evidence)).collect();
    Ok(Posterior { dist: Dist::new(entries)? })
}

/// One OT session as the simulator sees it: the posterior over the
/// prepared string, the index set `I_1`, and the string actually sent.
#[derive(Clone, Debug)]
pub struct SplitInput {
    pub posterior: Posterior,
    pub i1: Bits,
    pub actual: Bits,
}

/// `C = 1` iff `Pr[X|_{I_1} = x|_{I_1}] ≥ 2^{−m/4−2}`, per session.
pub fn split_from_posterior(inputs: &[SplitInput]) -> Result<Bits> {
    let mut c = Bits::zeros(inputs.len());
    for (k, inp) in inputs.iter().enumerate() {
        let m = inp.actual.len();
        if inp.i1.len() != m || inp.posterior.dist.width() != m {
            return Err(Error::DimMismatch { expected: m, got: inp.i1.len() });
        }
        let target = inp.actual.select(&inp.i1);
        let mass: f64 = inp
            .posterior
            .dist
            .support()
            .iter()
            .filter(|(x, _)| x.select(&inp.i1) == target)
            .map(|(_, p)| p)
            .sum();
        c.set(k, mass >= libm::exp2(-(m as f64) / 4.0 - 2.0) * (1.0 - 1e-12));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::broadcast::br_setup;
    use crate::bp::{Circuit, Formula};

    #[test]
    fn wilson_reference_values() {
        let (lo, hi) = wilson_95(50, 100);
        assert!((lo - 0.403_831).abs() < 1e-5 && (hi - 0.596_169).abs() < 1e-5);
        assert_eq!(wilson_95(0, 10).0, 0.0);
    }

    #[test]
    fn budget_is_enforced() {
        fn greedy(chs: &mut [Channel], _s: usize, _r: &mut dyn RngCore) -> Result<Vec<AdversaryMemory>> {
            let mut m = AdversaryMemory::default();
            for i in 0..chs[0].len() {
                m.stored.push((i, chs[0].take(i)?));
            }
            Ok(alloc::vec![m])
        }
        let p = OtParams::new(64, 4, 0);
        let st = AdversaryStrategy::new(StrategyKind::Custom(greedy), 8);
        assert!(matches!(ot_dis_trial(&st, p, 1, 0), Err(Error::BudgetViolation { retained: 64, budget: 8 })));
    }

    #[test]
    fn ot_dis_controls() {
        let p = OtParams::new(128, 8, 0);
        let all = run_ot_dis(&AdversaryStrategy::new(StrategyKind::StoreFirstS, 128), p, 50, 3).unwrap();
        assert_eq!(all.successes, 50);
        let none = run_ot_dis(&AdversaryStrategy::new(StrategyKind::MeasureAllRandom, 0), p, 400, 3).unwrap();
        assert!(none.rate > 0.4 && none.rate < 0.6, "{}", none.rate);
    }

    #[test]
    fn token_experiment_controls() {
        for kind in [TokenExpKind::Sig, TokenExpKind::Enc] {
            let legit = run_token_exp(kind, 1, 2, 1, 0, TokenStrategy::Legit, 20, 5).unwrap();
            assert_eq!(legit.successes, 0);
            let extra = run_token_exp(kind, 1, 2, 1, 0, TokenStrategy::ExtraToken, 20, 5).unwrap();
            assert_eq!(extra.successes, 20);
        }
        assert!(token_exp_trial(TokenExpKind::Sig, 1, 2, 1, 1, TokenStrategy::Guess, 0, 0).is_err());
    }

    #[test]
    fn posterior_of_a_single_measurement() {
        let post = extract_posterior(&[Gate::Measure(0)], 2, 0, &[false]).unwrap();
        for x in 0..4u64 {
            let p = post.dist.prob(&Bits::from_u64(x, 2));
            assert!((p - if x & 1 == 0 { 0.5 } else { 0.0 }).abs() < 1e-12);
        }
        assert!(matches!(
            extract_posterior(&[Gate::X(1), Gate::Measure(1)], 1, 1, &[false]),
            Err(Error::ZeroEvidence)
        ));
    }

    #[test]
    fn store_q_recovers_exactly_q_pads() {
        let mut r = ChaCha8Rng::seed_from_u64(9);
        let f = |s: &str| Formula::parse(s).unwrap();
        let p = Circuit::from_formulas(4, alloc::vec![f("x0 & x1"), f("x2"), f("x1 | x3"), f("!x0")]);
        let mut st = br_setup(&p, 96, OtpConfig::new(96), &mut r).unwrap();
        let att = broadcast_attack(&mut st, 4, &AdversaryStrategy::new(StrategyKind::StoreFirstS, 96), &mut r).unwrap();
        assert_eq!((att.recovered, att.guessed_total), (2, 2));
    }
}
