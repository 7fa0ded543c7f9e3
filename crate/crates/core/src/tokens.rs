//! MACs, signatures, and q-time encryption and signature tokens.
//!
//! A MAC tag is a symmetric ciphertext of `μ`; verification decrypts and
//! compares. A signature pairs a one-time program for a fresh affine `f`
//! with one for `S_{P,μ}(x, y)`, which decodes a symmetric key from `P·x`
//! and releases `S′_x(f(t)) ‖ μ` only on `y = S_x(t ‖ f(t))`.
//!
//! Tokens are one-time programs of q-time pads. Encryption tokens carry
//! `x ↦ (M·(r‖x), F(M·(r‖x)))` with `F` of degree `n` over GF(2^{6n});
//! signature tokens carry `F` of degree `n − 1` over GF(2^n). Waves
//! broadcast the same functionalities, optionally gated on a receipt.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::bp::{Barrington, Circuit};
use crate::broadcast::{br_finalize, br_issue, br_redeem, br_setup, BroadcastCopy, BroadcastReveal, BroadcastState};
use crate::encryption::{
    affine_circuit, decode_subkey, payload_output, sym_dec, sym_enc_with, AsymPrivKey, SubKey,
    SymCiphertext, SymKey,
};
use crate::gf2::{random_full_column_rank, Gf2Matrix};
use crate::gf2k::{count_consistent_polys, Gf2k, Gf2kElem, Gf2kPoly};
use crate::otp::{CompiledFunction, OtpConfig};
use crate::transcript::Body;
use crate::{Bits, Error, Result};

pub type MacKey = SymKey;
pub type MacTag = SymCiphertext;
pub type SigPrivKey = AsymPrivKey;

/// Largest token parameter `n`: the encryption field GF(2^{6n}) must fit a
/// machine word.
pub const MAX_TOKEN_N: usize = 10;

pub fn mac_tag<R: RngCore + ?Sized>(s: usize, k: &MacKey, mu: &Bits, rng: &mut R) -> Result<MacTag> {
    sym_enc_with(&OtpConfig::new(s), k, mu, rng)
}

/// 1 iff the tag decrypts to `μ`. A malformed tag verifies to 0; a consumed
/// one is an error.
pub fn mac_verify<R: RngCore + ?Sized>(k: &MacKey, mu: &Bits, tag: &mut MacTag, rng: &mut R) -> Result<bool> {
    match sym_dec(k, tag, rng) {
        Ok(out) => Ok(out.as_ref() == Some(mu)),
        Err(Error::FormatError(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Signature {
    /// Input length of `P`.
    pub n: usize,
    /// Key scale `m′`.
    pub m: usize,
    pub l: usize,
    pub ot_f: CompiledFunction,
    pub ot_s: CompiledFunction,
}

impl Signature {
    pub fn check_format(&self, n: usize, m: usize) -> Result<()> {
        let ok = self.n == n
            && self.m == m
            && self.ot_f.widths() == (m, m)
            && self.ot_s.widths() == (n + 2 * m, m + self.l + 1)
            && self.ot_f.well_formed()
            && self.ot_s.well_formed();
        if ok {
            Ok(())
        } else {
            Err(Error::FormatError("signature widths do not match the sub-key".into()))
        }
    }
}

/// `S_{P,μ}` tabulated over `x ‖ y`, `x` in the low `n` positions.
pub fn signing_circuit(sk: &SigPrivKey, a: u64, b: u64, mu: &Bits) -> Result<Circuit> {
    let (n, m) = (sk.params.n, sk.params.m_prime);
    if n + 2 * m > crate::bp::MAX_TABLE_INPUTS {
        return Err(Error::TooLarge {
            what: "signing program inputs",
            size: (n + 2 * m) as u128,
            limit: crate::bp::MAX_TABLE_INPUTS as u128,
        });
    }
    let keys = (0..1u64 << n)
        .map(|x| decode_subkey(&sk.p.matvec(&Bits::from_u64(x, n))?, m))
        .collect::<Result<Vec<_>>>()?;
    let low = (1u64 << n) - 1;
    Circuit::from_fn_bits(n + 2 * m, m + mu.len() + 1, |u| {
        payload_output(&keys[(u & low) as usize], a, b, mu, &Bits::from_u64(u >> n, 2 * m))
    })
}

pub fn sig_sign<R: RngCore + ?Sized>(s: usize, sk: &SigPrivKey, mu: &Bits, rng: &mut R) -> Result<Signature> {
    sig_sign_with(&OtpConfig::new(s), sk, mu, rng)
}

pub fn sig_sign_with<R: RngCore + ?Sized>(cfg: &OtpConfig, sk: &SigPrivKey, mu: &Bits, rng: &mut R) -> Result<Signature> {
    let (n, m) = (sk.params.n, sk.params.m_prime);
    let a = Bits::random(m, rng).to_u64();
    let b = Bits::random(m, rng).to_u64();
    let barrington = Barrington::new();
    let ot_f = CompiledFunction::compile(&affine_circuit(a, b, m)?, &barrington, cfg, rng)?;
    let ot_s = CompiledFunction::compile(&signing_circuit(sk, a, b, mu)?, &barrington, cfg, rng)?;
    Ok(Signature { n, m, l: mu.len(), ot_f, ot_s })
}

/// Evaluate `f` on a random `t`, then `S_{P,μ}` on `(v, S_v(t ‖ f(t)))`.
/// A malformed signature verifies to 0; a consumed one is an error.
pub fn sig_verify<R: RngCore + ?Sized>(kv: &SubKey, mu: &Bits, sig: &mut Signature, rng: &mut R) -> Result<bool> {
    let m = kv.m_prime;
    if sig.check_format(kv.v.len(), m).is_err() || sig.l != mu.len() {
        return Ok(false);
    }
    let key = kv.sym_key()?;
    let t = Bits::random(m, rng);
    let Some(ft) = sig.ot_f.evaluate(&t, rng)? else { return Ok(false) };
    let y = key.s(&t.concat(&ft))?;
    let Some(out) = sig.ot_s.evaluate(&kv.v.concat(&y), rng)? else { return Ok(false) };
    let expected = Bits::from_u64(key.s_prime(ft.to_u64()), m).concat(mu);
    Ok(out.get(m + sig.l) && out.slice(0..m + sig.l) == expected)
}

/// `n = max(λ, q) + 1`.
pub fn token_n(lambda: u64, q: usize) -> usize {
    (lambda as usize).max(q) + 1
}

fn check_token_n(n: usize) -> Result<()> {
    if n > MAX_TOKEN_N {
        return Err(Error::TooLarge { what: "token parameter n", size: n as u128, limit: MAX_TOKEN_N as u128 });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TokenKind {
    Enc,
    Dec,
    Sign,
    Verify,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TokenManifest {
    pub kind: TokenKind,
    pub wave_id: u64,
    pub index: usize,
}

/// A single-use token: one compiled program plus its manifest.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Token {
    pub manifest: TokenManifest,
    pub n: usize,
    pub otp: CompiledFunction,
}

/// Encryption-token key `(M, M⁻¹, F)` with its issuance counter.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TokenKey {
    pub n: usize,
    pub q: usize,
    pub mat: Gf2Matrix,
    pub mat_inv: Gf2Matrix,
    pub f: Gf2kPoly,
    issued: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TokenCiphertext {
    pub c0: Bits,
    pub c1: Bits,
}

impl TokenKey {
    pub fn field(&self) -> Gf2k {
        Gf2k::new(6 * self.n as u32).expect("n checked at generation")
    }

    pub fn issued(&self) -> usize {
        self.issued
    }

    fn poly(&self, x: &Bits) -> Bits {
        let field = self.field();
        field.to_bits(self.f.eval(&field, field.from_bits(x).expect("6n-bit element")))
    }

    /// `Enc_{k,r}(x) = (M·(r‖x), F(M·(r‖x)))`.
    pub fn encrypt(&self, r: &Bits, x: &Bits) -> Result<TokenCiphertext> {
        if r.len() != 2 * self.n {
            return Err(Error::BadLength { expected: 2 * self.n, got: r.len() });
        }
        if x.len() != self.n {
            return Err(Error::BadLength { expected: self.n, got: x.len() });
        }
        let c0 = self.mat.matvec(&r.concat(x))?;
        let c1 = self.poly(&c0);
        Ok(TokenCiphertext { c0, c1 })
    }

    /// `Dec_k`: the last `n` bits of `M⁻¹·c0` if `c1 = F(c0)`, else ⊥.
    pub fn decrypt(&self, ct: &TokenCiphertext) -> Option<Bits> {
        let w = 6 * self.n;
        if ct.c0.len() != w || ct.c1.len() != w || self.poly(&ct.c0) != ct.c1 {
            return None;
        }
        let pre = self.mat_inv.matvec(&ct.c0).ok()?;
        Some(pre.slice(2 * self.n..3 * self.n))
    }
}

pub fn tok_gen<R: RngCore + ?Sized>(lambda: u64, q: usize, rng: &mut R) -> Result<TokenKey> {
    let n = token_n(lambda, q);
    check_token_n(n)?;
    let mat = random_full_column_rank(6 * n, 3 * n, rng);
    let mat_inv = mat.left_inverse()?;
    let field = Gf2k::new(6 * n as u32)?;
    let f = Gf2kPoly::random(&field, n, rng);
    Ok(TokenKey { n, q, mat, mat_inv, f, issued: 0 })
}

/// Messages shorter than `n` are zero-padded; longer ones are refused.
pub fn pad_message(mu: &Bits, n: usize) -> Result<Bits> {
    if mu.len() > n {
        return Err(Error::BadLength { expected: n, got: mu.len() });
    }
    Ok(mu.resized(n))
}

fn take_quota(issued: &mut usize, quota: usize) -> Result<()> {
    if *issued >= quota {
        return Err(Error::QuotaExceeded { quota });
    }
    *issued += 1;
    Ok(())
}

fn compile_token<R: RngCore + ?Sized>(
    c: &Circuit,
    kind: TokenKind,
    index: usize,
    n: usize,
    s: usize,
    rng: &mut R,
) -> Result<Token> {
    let mut otp = CompiledFunction::compile(c, &Barrington::new(), &OtpConfig::new(s), rng)?;
    let wave_id = rng.next_u64();
    otp.transmission.transcript.message(
        "token_manifest",
        Body::Text { text: alloc::format!("kind={kind:?} wave_id={wave_id} index={index}") },
    );
    Ok(Token { manifest: TokenManifest { kind, wave_id, index }, n, otp })
}

pub fn tok_enc_issue<R: RngCore + ?Sized>(s: usize, k: &mut TokenKey, rng: &mut R) -> Result<Token> {
    take_quota(&mut k.issued, k.q)?;
    let n = k.n;
    let r = Bits::random(2 * n, rng);
    let key = &*k;
    let c = Circuit::from_fn_bits(n, 12 * n, |x| {
        let ct = key.encrypt(&r, &Bits::from_u64(x, n)).expect("widths fixed by n");
        ct.c0.concat(&ct.c1)
    })?;
    compile_token(&c, TokenKind::Enc, k.issued - 1, n, s, rng)
}

pub fn tok_enc_use<R: RngCore + ?Sized>(token: &mut Token, mu: &Bits, rng: &mut R) -> Result<TokenCiphertext> {
    let n = token.n;
    let out = token
        .otp
        .evaluate(&pad_message(mu, n)?, rng)?
        .ok_or_else(|| Error::FormatError("encryption token evaluated to ⊥".into()))?;
    Ok(TokenCiphertext { c0: out.slice(0..6 * n), c1: out.slice(6 * n..12 * n) })
}

/// `Dec_k` as a program over `(x0, x1)`: data outputs then a valid bit.
pub fn dec_circuit(k: &TokenKey) -> Result<Circuit> {
    let w = 6 * k.n;
    Circuit::from_fn_bits(2 * w, k.n + 1, |u| {
        let ct = TokenCiphertext { c0: Bits::from_u64(u, 2 * w).slice(0..w), c1: Bits::from_u64(u, 2 * w).slice(w..2 * w) };
        match k.decrypt(&ct) {
            Some(mu) => mu.concat(&Bits::ones(1)),
            None => Bits::zeros(k.n + 1),
        }
    })
}

/// Decryption tokens read `12n ≥ 24` bits, so tabulation refuses them at
/// every admissible `n`; the refusal carries the width.
pub fn tok_dec_issue<R: RngCore + ?Sized>(s: usize, k: &TokenKey, rng: &mut R) -> Result<Token> {
    let c = dec_circuit(k)?;
    compile_token(&c, TokenKind::Dec, 0, k.n, s, rng)
}

pub fn tok_dec_use<R: RngCore + ?Sized>(token: &mut Token, ct: &TokenCiphertext, rng: &mut R) -> Result<Option<Bits>> {
    let w = 6 * token.n;
    if ct.c0.len() != w || ct.c1.len() != w {
        return Ok(None);
    }
    let Some(out) = token.otp.evaluate(&ct.c0.concat(&ct.c1), rng)? else { return Ok(None) };
    Ok(out.get(token.n).then(|| out.slice(0..token.n)))
}

/// Signature-token key: `F` of degree `n − 1` over GF(2^n).
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SigTokenKey {
    pub n: usize,
    pub q: usize,
    pub f: Gf2kPoly,
    issued: usize,
}

impl SigTokenKey {
    pub fn field(&self) -> Gf2k {
        Gf2k::new(self.n as u32).expect("n checked at generation")
    }

    pub fn issued(&self) -> usize {
        self.issued
    }

    pub fn sign(&self, mu: u64) -> u64 {
        let field = self.field();
        self.f.eval(&field, field.elem(mu)).value
    }
}

pub fn sigtok_gen<R: RngCore + ?Sized>(lambda: u64, q: usize, rng: &mut R) -> Result<SigTokenKey> {
    let n = token_n(lambda, q);
    check_token_n(n)?;
    let field = Gf2k::new(n as u32)?;
    Ok(SigTokenKey { n, q, f: Gf2kPoly::random(&field, n - 1, rng), issued: 0 })
}

pub fn sign_circuit(k: &SigTokenKey) -> Result<Circuit> {
    Circuit::from_fn(k.n, k.n, |mu| k.sign(mu))
}

/// `V(μ, σ)`: one output bit, 1 for accept and 0 for ⊥.
pub fn verify_circuit(k: &SigTokenKey) -> Result<Circuit> {
    let (n, low) = (k.n, (1u64 << k.n) - 1);
    Circuit::from_fn(2 * n, 1, |u| (k.sign(u & low) == u >> n) as u64)
}

pub fn sigtok_issue<R: RngCore + ?Sized>(s: usize, k: &mut SigTokenKey, rng: &mut R) -> Result<Token> {
    take_quota(&mut k.issued, k.q)?;
    compile_token(&sign_circuit(k)?, TokenKind::Sign, k.issued - 1, k.n, s, rng)
}

pub fn sigtok_sign<R: RngCore + ?Sized>(token: &mut Token, mu: &Bits, rng: &mut R) -> Result<Bits> {
    token
        .otp
        .evaluate(&pad_message(mu, token.n)?, rng)?
        .ok_or_else(|| Error::FormatError("signature token evaluated to ⊥".into()))
}

pub fn sigtok_verify_issue<R: RngCore + ?Sized>(s: usize, k: &SigTokenKey, rng: &mut R) -> Result<Token> {
    compile_token(&verify_circuit(k)?, TokenKind::Verify, 0, k.n, s, rng)
}

pub fn sigtok_verify<R: RngCore + ?Sized>(vtoken: &mut Token, mu: &Bits, sigma: &Bits, rng: &mut R) -> Result<bool> {
    let n = vtoken.n;
    if sigma.len() != n {
        return Ok(false);
    }
    let input = pad_message(mu, n)?.concat(sigma);
    Ok(vtoken.otp.evaluate(&input, rng)?.is_some_and(|out| out.get(0)))
}

/// Best forging probability against a uniformly random polynomial of
/// degree ≤ `d` over GF(2^k), given the view (`eq` points on the curve,
/// `neq` points known to be off it) and a fresh abscissa `a`:
/// `max_b #{f consistent, f(a) = b} / #{f consistent}`, exactly.
pub fn forge_success_exact(
    eq: &[(Gf2kElem, Gf2kElem)],
    neq: &[(Gf2kElem, Gf2kElem)],
    a: Gf2kElem,
    d: usize,
    k: u32,
) -> Result<(u64, u64)> {
    let total = count_consistent_polys(eq, neq, d, k)?;
    if total == 0 {
        return Err(Error::ZeroEvidence);
    }
    let mut best = 0;
    let mut with_point = eq.to_vec();
    with_point.push((a, a));
    for b in 0..1u64 << k {
        *with_point.last_mut().expect("pushed above") = (a, Gf2kElem { k, value: b });
        best = best.max(count_consistent_polys(&with_point, neq, d, k)?);
    }
    Ok((best, total))
}

/// The bound `2^{k(d−m−1)} / (2^{k(d−m)}(1 − p/2^k)) = 1/(2^k − p)` on a
/// fresh guess after `m + 1` true and `p` false samples, as a fraction.
pub fn lagrange_forge_bound(k: u32, p: u64) -> Result<(u64, u64)> {
    let size = 1u64 << k;
    if p >= size {
        return Err(Error::BadInput("more false samples than field elements".into()));
    }
    Ok((1, size - p))
}

/// A receipt gate: the wave function releases its output only when the
/// presented receipt equals a one-time MAC `a·d + b` over GF(2^w) of the
/// prior operation's descriptor `d`.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrderGate {
    pub width: usize,
    pub prior: Bits,
    a: u64,
    b: u64,
}

impl OrderGate {
    pub fn new<R: RngCore + ?Sized>(prior: &Bits, rng: &mut R) -> Result<Self> {
        let field = Gf2k::new(prior.len() as u32)?;
        Ok(OrderGate { width: prior.len(), prior: prior.clone(), a: field.random(rng).value, b: field.random(rng).value })
    }

    /// The receipt the authority hands out once the prior operation is done.
    pub fn receipt(&self) -> Bits {
        let field = Gf2k::new(self.width as u32).expect("width checked at construction");
        let d = field.from_bits(&self.prior).expect("prior has gate width");
        field.to_bits(field.add(field.mul(field.elem(self.a), d), field.elem(self.b)))
    }
}

pub enum WaveKey {
    Enc(TokenKey),
    Sig(SigTokenKey),
}

/// A broadcast of one token functionality. Every wave function takes its
/// data input followed by the receipt and outputs data followed by a valid
/// bit; without a gate the receipt is empty.
pub struct TokenWave {
    pub kind: TokenKind,
    pub wave_id: u64,
    pub q: usize,
    pub n: usize,
    pub data_in: usize,
    pub data_out: usize,
    pub gate: Option<OrderGate>,
    pub state: BroadcastState,
}

type WaveFn<'a> = alloc::boxed::Box<dyn Fn(&Bits) -> Bits + 'a>;

fn wave_function<'a>(kind: &TokenKind, key: &'a WaveKey) -> Result<(usize, usize, WaveFn<'a>)> {
    match (kind, key) {
        (TokenKind::Enc, WaveKey::Enc(k)) => {
            let n = k.n;
            // input r ‖ x, with r chosen by the holder
            Ok((
                3 * n,
                12 * n,
                alloc::boxed::Box::new(move |u: &Bits| {
                    let ct = k.encrypt(&u.slice(0..2 * n), &u.slice(2 * n..3 * n)).expect("widths fixed by n");
                    ct.c0.concat(&ct.c1)
                }),
            ))
        }
        (TokenKind::Dec, WaveKey::Enc(k)) => {
            let (n, w) = (k.n, 6 * k.n);
            Ok((
                2 * w,
                n + 1,
                alloc::boxed::Box::new(move |u: &Bits| {
                    let ct = TokenCiphertext { c0: u.slice(0..w), c1: u.slice(w..2 * w) };
                    match k.decrypt(&ct) {
                        Some(mu) => mu.concat(&Bits::ones(1)),
                        None => Bits::zeros(n + 1),
                    }
                }),
            ))
        }
        (TokenKind::Sign, WaveKey::Sig(k)) => {
            let n = k.n;
            Ok((n, n, alloc::boxed::Box::new(move |u: &Bits| Bits::from_u64(k.sign(u.to_u64()), n))))
        }
        (TokenKind::Verify, WaveKey::Sig(k)) => {
            let n = k.n;
            Ok((
                2 * n,
                1,
                alloc::boxed::Box::new(move |u: &Bits| {
                    Bits::from_fn(1, |_| k.sign(u.slice(0..n).to_u64()) == u.slice(n..2 * n).to_u64())
                }),
            ))
        }
        _ => Err(Error::BadInput("wave kind does not match the key".into())),
    }
}

/// Open a wave; the key is consumed so that each wave runs on a fresh key.
pub fn tok_wave<R: RngCore + ?Sized>(
    kind: TokenKind,
    key: WaveKey,
    q: usize,
    s: usize,
    gate: Option<OrderGate>,
    rng: &mut R,
) -> Result<TokenWave> {
    let n = match &key {
        WaveKey::Enc(k) => k.n,
        WaveKey::Sig(k) => k.n,
    };
    let (data_in, data_out, f) = wave_function(&kind, &key)?;
    let rw = gate.as_ref().map_or(0, |g| g.width);
    let receipt = gate.as_ref().map(OrderGate::receipt);
    let inputs = data_in + rw;
    let program = Circuit::from_fn_bits(inputs, data_out + 1, |u| {
        let u = Bits::from_u64(u, inputs);
        let open = receipt.as_ref().is_none_or(|r| u.slice(data_in..inputs) == *r);
        if open {
            f(&u.slice(0..data_in)).concat(&Bits::ones(1))
        } else {
            Bits::zeros(data_out + 1)
        }
    })?;
    let wave_id = rng.next_u64();
    let mut state = br_setup(&program, s, OtpConfig::new(s), rng)?;
    state.transcript.param("wave_id", alloc::format!("{wave_id:016x}"));
    state.transcript.param("kind", alloc::format!("{kind:?}"));
    state.transcript.param("q", q);
    state.transcript.param("message_bits", n);
    Ok(TokenWave { kind, wave_id, q, n, data_in, data_out, gate, state })
}

impl TokenWave {
    pub fn issue<R: RngCore + ?Sized>(&mut self, rng: &mut R) -> Result<BroadcastCopy> {
        br_issue(&mut self.state, rng)
    }

    pub fn close(&mut self) -> Result<BroadcastReveal> {
        br_finalize(&mut self.state)
    }

    /// Redeem a copy on `input ‖ receipt`; `None` is ⊥ from the function.
    pub fn redeem<R: RngCore + ?Sized>(
        &self,
        copy: &mut BroadcastCopy,
        input: &Bits,
        receipt: Option<&Bits>,
        reveal: &BroadcastReveal,
        rng: &mut R,
    ) -> Result<Option<Bits>> {
        if input.len() != self.data_in {
            return Err(Error::BadLength { expected: self.data_in, got: input.len() });
        }
        let rw = self.gate.as_ref().map_or(0, |g| g.width);
        let receipt = receipt.cloned().unwrap_or_else(|| Bits::zeros(rw));
        if receipt.len() != rw {
            return Err(Error::BadLength { expected: rw, got: receipt.len() });
        }
        let Some(out) = br_redeem(copy, &input.concat(&receipt), reveal, rng)? else { return Ok(None) };
        Ok(out.get(self.data_out).then(|| out.slice(0..self.data_out)))
    }
}

/// The points `(μ, F(μ))` a holder learns from signing `messages`.
pub fn signed_points(k: &SigTokenKey, messages: &[u64]) -> Vec<(Gf2kElem, Gf2kElem)> {
    let field = k.field();
    messages.iter().map(|&m| (field.elem(m), field.elem(k.sign(m)))).collect()
}
