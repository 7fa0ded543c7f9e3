//! Symmetric and asymmetric encryption from one-time programs.
//!
//! Symmetric: the key is `S(x) = M·x ⊕ z` over `2m` bits and
//! `S′(x) = q·x + w mod 2^m`. A ciphertext is a one-time program for a
//! fresh affine `f(x) = a·x + b mod 2^m` followed by one for
//! `P(y) = S′(f(x)) ‖ μ` if `y = S(x ‖ f(x))` and ⊥ otherwise.
//!
//! Asymmetric: the public key is a broadcast of `P(v) = Pmat·v`; a user's
//! evaluation `P(v)` is decoded into a symmetric key at a smaller scale.
//!
//! Integers mod `2^m` are bitstrings read little-endian. ⊥ is carried as an
//! extra valid bit after the data outputs.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::bp::{Barrington, Circuit, Formula};
use crate::broadcast::{br_redeem, br_setup_keyed, BroadcastCopy, BroadcastReveal, BroadcastState};
use crate::entropy::{sample_hash, HashFunc};
use crate::gf2::{random_invertible, Gf2Matrix};
use crate::otp::{CompiledFunction, OtpConfig};
use crate::{Bits, Error, Profile, Result};

/// Widest modulus supported by the integer helpers.
pub const MAX_SYM_M: usize = 32;

fn mask(m: usize) -> u64 {
    if m >= 64 {
        u64::MAX
    } else {
        (1u64 << m) - 1
    }
}

/// `a·x + b mod 2^m`.
pub fn affine_mod(a: u64, x: u64, b: u64, m: usize) -> u64 {
    a.wrapping_mul(x).wrapping_add(b) & mask(m)
}

/// `m = ⌈(lg λ)^{3/2}⌉`.
pub fn sym_m(lambda: u64) -> usize {
    let l = libm::log2(lambda as f64);
    let v = libm::pow(l, 1.5);
    // guard against 8.000000001-style rounding on exact powers
    let r = libm::round(v);
    if libm::fabs(v - r) < 1e-9 {
        r as usize
    } else {
        libm::ceil(v) as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SymKey {
    pub m: usize,
    pub q: Bits,
    pub w: Bits,
    pub mat: Gf2Matrix,
    pub mat_inv: Gf2Matrix,
    pub z: Bits,
}

impl SymKey {
    pub fn from_parts(q: Bits, w: Bits, mat: Gf2Matrix, z: Bits) -> Result<Self> {
        let m = q.len();
        if m == 0 || m > MAX_SYM_M || w.len() != m || z.len() != 2 * m || mat.rows() != 2 * m || mat.cols() != 2 * m {
            return Err(Error::BadInput("inconsistent symmetric key widths".into()));
        }
        let mat_inv = mat.inverse().ok_or(Error::NotFullColumnRank)?;
        Ok(SymKey { m, q, w, mat, mat_inv, z })
    }

    /// `S(x) = M·x ⊕ z`.
    pub fn s(&self, x: &Bits) -> Result<Bits> {
        Ok(self.mat.matvec(x)?.xor(&self.z))
    }

    pub fn s_inv(&self, y: &Bits) -> Result<Bits> {
        self.mat_inv.matvec(&y.xor(&self.z))
    }

    /// `S′(x) = q·x + w mod 2^m`.
    pub fn s_prime(&self, x: u64) -> u64 {
        affine_mod(self.q.to_u64(), x, self.w.to_u64(), self.m)
    }
}

pub fn sym_gen_m<R: RngCore + ?Sized>(m: usize, rng: &mut R) -> Result<SymKey> {
    if m == 0 || m > MAX_SYM_M {
        return Err(Error::BadInput(alloc::format!("symmetric key width {m} outside 1..={MAX_SYM_M}")));
    }
    let q = Bits::random(m, rng);
    let w = Bits::random(m, rng);
    let (mat, mat_inv) = random_invertible(2 * m, rng);
    let z = Bits::random(2 * m, rng);
    Ok(SymKey { m, q, w, mat, mat_inv, z })
}

/// Key generation; `λ ≥ 3` so that `m ≥ 2`.
pub fn sym_gen<R: RngCore + ?Sized>(lambda: u64, rng: &mut R) -> Result<SymKey> {
    if lambda < 3 {
        return Err(Error::BadInput("λ must be at least 3".into()));
    }
    sym_gen_m(sym_m(lambda), rng)
}

/// `f: {0,1}^m → {0,1}^m`.
pub fn affine_circuit(a: u64, b: u64, m: usize) -> Result<Circuit> {
    Circuit::from_fn(m, m, |x| affine_mod(a, x, b, m))
}

/// `P_{k,f,μ}: {0,1}^{2m} → {0,1}^{m+ℓ}` plus the valid bit.
pub fn payload_circuit(k: &SymKey, a: u64, b: u64, mu: &Bits) -> Result<Circuit> {
    let m = k.m;
    Circuit::from_fn_bits(2 * m, m + mu.len() + 1, |y| payload_output(k, a, b, mu, &Bits::from_u64(y, 2 * m)))
}

/// `S′(f(x)) ‖ μ ‖ 1` if `y = S(x ‖ f(x))` for some `x`, all zeros otherwise.
pub fn payload_output(k: &SymKey, a: u64, b: u64, mu: &Bits, y: &Bits) -> Bits {
    let m = k.m;
    let pre = k.s_inv(y).expect("key widths checked");
    let (x, fx) = (pre.slice(0..m).to_u64(), pre.slice(m..2 * m).to_u64());
    if fx == affine_mod(a, x, b, m) {
        let mut out = Bits::from_u64(k.s_prime(fx), m);
        out.extend_from(mu);
        out.push(true);
        out
    } else {
        Bits::zeros(m + mu.len() + 1)
    }
}

#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SymCiphertext {
    pub m: usize,
    pub l: usize,
    pub ot_f: CompiledFunction,
    pub ot_p: CompiledFunction,
}

impl SymCiphertext {
    /// The format check: widths `m → m` and `2m → m+ℓ` (plus valid bit),
    /// and transmissions consistent with their manifests.
    pub fn check_format(&self, m: usize) -> Result<()> {
        let ok = self.m == m
            && self.ot_f.widths() == (m, m)
            && self.ot_p.widths() == (2 * m, m + self.l + 1)
            && self.ot_f.well_formed()
            && self.ot_p.well_formed();
        if ok {
            Ok(())
        } else {
            Err(Error::FormatError("ciphertext widths do not match the key".into()))
        }
    }
}

pub fn sym_enc<R: RngCore + ?Sized>(s: usize, k: &SymKey, mu: &Bits, rng: &mut R) -> Result<SymCiphertext> {
    sym_enc_with(&OtpConfig::new(s), k, mu, rng)
}

pub fn sym_enc_with<R: RngCore + ?Sized>(cfg: &OtpConfig, k: &SymKey, mu: &Bits, rng: &mut R) -> Result<SymCiphertext> {
    let m = k.m;
    let a = Bits::random(m, rng).to_u64();
    let b = Bits::random(m, rng).to_u64();
    let barrington = Barrington::new();
    let ot_f = CompiledFunction::compile(&affine_circuit(a, b, m)?, &barrington, cfg, rng)?;
    let ot_p = CompiledFunction::compile(&payload_circuit(k, a, b, mu)?, &barrington, cfg, rng)?;
    Ok(SymCiphertext { m, l: mu.len(), ot_f, ot_p })
}

/// `Ok(None)` is ⊥; malformed ciphertexts are `FormatError`.
pub fn sym_dec<R: RngCore + ?Sized>(k: &SymKey, ct: &mut SymCiphertext, rng: &mut R) -> Result<Option<Bits>> {
    ct.check_format(k.m)?;
    let m = k.m;
    let v = Bits::random(m, rng);
    let Some(fv) = ct.ot_f.evaluate(&v, rng)? else { return Ok(None) };
    let y = k.s(&v.concat(&fv))?;
    let Some(out) = ct.ot_p.evaluate(&y, rng)? else { return Ok(None) };
    if !out.get(m + ct.l) {
        return Ok(None);
    }
    if out.slice(0..m).to_u64() != k.s_prime(fv.to_u64()) {
        return Ok(None);
    }
    Ok(Some(out.slice(m..m + ct.l)))
}

/// Sizes for the asymmetric scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AsymParams {
    pub lambda: u64,
    pub s: usize,
    pub profile: Profile,
    /// Carrier qubits per key copy.
    pub m: usize,
    /// Input length of `P`.
    pub n: usize,
    /// Output length of `P`, `⌈m/12⌉`.
    pub out: usize,
    /// Scale of the decoded symmetric key.
    pub m_prime: usize,
}

impl AsymParams {
    /// Paper: `m = 100⌈(lg λ)³⌉`, `m′ = ⌈√(m/100)⌉`. Desk:
    /// `m = max(16, ⌈(lg λ)³⌉)`, `m′ = ⌈√m⌉`. Both: `n = max(⌈6s/m⌉+1, m)`.
    pub fn new(lambda: u64, s: usize, profile: Profile) -> Self {
        let cube = libm::ceil(libm::pow(libm::log2(lambda as f64), 3.0) - 1e-9).max(1.0) as usize;
        let (m, m_prime) = match profile {
            Profile::Paper => (100 * cube, libm::ceil(libm::sqrt(cube as f64) - 1e-9) as usize),
            Profile::Desk => {
                let m = cube.max(16);
                (m, libm::ceil(libm::sqrt(m as f64) - 1e-9) as usize)
            }
        };
        Self::with_sizes(lambda, s, profile, m, m_prime)
    }

    /// Explicit carrier size and key scale, with `n` and `⌈m/12⌉` derived.
    pub fn with_sizes(lambda: u64, s: usize, profile: Profile, m: usize, m_prime: usize) -> Self {
        let n = (6 * s).div_ceil(m) + 1;
        AsymParams { lambda, s, profile, m, n: n.max(m), out: m.div_ceil(12), m_prime }
    }

    /// Bits needed to decode a scale-`m′` symmetric key.
    pub fn key_material_bits(&self) -> usize {
        4 * self.m_prime * self.m_prime + 4 * self.m_prime
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AsymPrivKey {
    pub params: AsymParams,
    pub f: Gf2Matrix,
    pub h: HashFunc,
    pub p: Gf2Matrix,
}

pub fn asy_gen<R: RngCore + ?Sized>(params: AsymParams, rng: &mut R) -> Result<AsymPrivKey> {
    if params.m_prime == 0 || params.m_prime > MAX_SYM_M {
        return Err(Error::BadInput(alloc::format!("key scale {} outside 1..={MAX_SYM_M}", params.m_prime)));
    }
    Ok(AsymPrivKey {
        params,
        f: Gf2Matrix::random(params.m, params.m, rng),
        h: sample_hash(params.m, params.out, rng),
        p: Gf2Matrix::random(params.out, params.n, rng),
    })
}

/// `x ↦ Pmat·x` as balanced XOR formulas; an all-zero row is `x0 ∧ ¬x0`.
pub fn parity_circuit(p: &Gf2Matrix) -> Circuit {
    let fs = (0..p.rows())
        .map(|j| {
            let vars: Vec<Formula> = (0..p.cols()).filter(|&i| p.get(j, i)).map(Formula::var).collect();
            Formula::balanced(vars, Formula::xor).unwrap_or_else(|| Formula::and(Formula::var(0), Formula::not(Formula::var(0))))
        })
        .collect();
    Circuit::from_formulas(p.cols(), fs)
}

/// Open the key broadcast of `P`.
pub fn asy_keysend(sk: &AsymPrivKey, cfg: OtpConfig) -> Result<BroadcastState> {
    br_setup_keyed(&parity_circuit(&sk.p), sk.f.clone(), sk.h.clone(), sk.params.s, cfg)
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SubKey {
    pub v: Bits,
    pub pv: Bits,
    pub m_prime: usize,
}

impl SubKey {
    pub fn sym_key(&self) -> Result<SymKey> {
        decode_subkey(&self.pv, self.m_prime)
    }
}

/// Key material for attempt `counter`: `pv` itself on the first attempt if
/// long enough, else a ChaCha stream keyed by `pv` on stream `counter`.
fn key_material(pv: &Bits, counter: u64, need: usize) -> Bits {
    if counter == 0 && pv.len() >= need {
        return pv.slice(0..need);
    }
    let mut seed = [0u8; 32];
    for (i, b) in pv.to_bytes().iter().enumerate() {
        seed[i % 32] ^= b.rotate_left((i / 32) as u32);
    }
    seed[31] ^= pv.len() as u8;
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(counter);
    Bits::random(need, &mut rng)
}

/// `pv → (q, w, M rows, z)` in that order, retrying on singular `M`.
pub fn decode_subkey(pv: &Bits, m_prime: usize) -> Result<SymKey> {
    let m = m_prime;
    let need = 4 * m * m + 4 * m;
    for counter in 0.. {
        let bits = key_material(pv, counter, need);
        let q = bits.slice(0..m);
        let w = bits.slice(m..2 * m);
        let mat = Gf2Matrix::from_row_major(2 * m, 2 * m, &bits.slice(2 * m..2 * m + 4 * m * m))?;
        let z = bits.slice(2 * m + 4 * m * m..need);
        match SymKey::from_parts(q, w, mat, z) {
            Ok(k) => return Ok(k),
            Err(Error::NotFullColumnRank) => continue,
            Err(e) => return Err(e),
        }
    }
    unreachable!()
}

/// Pick `v`, evaluate the copy on it, then unpad after the reveal.
pub fn asy_keyreceive<R: RngCore + ?Sized>(
    params: &AsymParams,
    copy: &mut BroadcastCopy,
    reveal: &BroadcastReveal,
    rng: &mut R,
) -> Result<SubKey> {
    let v = Bits::random(params.n, rng);
    let pv = br_redeem(copy, &v, reveal, rng)?.ok_or_else(|| Error::FormatError("key copy evaluated to ⊥".into()))?;
    Ok(SubKey { v, pv, m_prime: params.m_prime })
}

#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AsymCiphertext {
    pub v: Bits,
    pub ct: SymCiphertext,
}

pub fn asy_enc<R: RngCore + ?Sized>(cfg: &OtpConfig, kv: &SubKey, mu: &Bits, rng: &mut R) -> Result<AsymCiphertext> {
    Ok(AsymCiphertext { v: kv.v.clone(), ct: sym_enc_with(cfg, &kv.sym_key()?, mu, rng)? })
}

pub fn asy_dec<R: RngCore + ?Sized>(sk: &AsymPrivKey, act: &mut AsymCiphertext, rng: &mut R) -> Result<Option<Bits>> {
    if act.v.len() != sk.params.n {
        return Err(Error::FormatError("sub-key index has the wrong length".into()));
    }
    let pv = sk.p.matvec(&act.v)?;
    sym_dec(&decode_subkey(&pv, sk.params.m_prime)?, &mut act.ct, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::broadcast::br_issue_all;

    #[test]
    fn parameter_formulas() {
        assert_eq!(sym_m(16), 8);
        assert_eq!(sym_m(4), 3);
        assert_eq!(sym_m(3), 2);
        assert_eq!(AsymParams::new(4, 0, Profile::Paper).m, 800);
        let p = AsymParams::new(16, 1000, Profile::Desk);
        assert_eq!((p.m, p.m_prime, p.out), (64, 8, 6));
        assert_eq!(p.n, 95);
        assert!(AsymParams::new(16, 0, Profile::Desk).n >= 64);
    }

    #[test]
    fn sym_round_trip_and_rejections() {
        let mut r = ChaCha8Rng::seed_from_u64(3);
        let k = sym_gen(3, &mut r).unwrap();
        assert_eq!(k.m, 2);
        assert_eq!(k.mat.mul(&k.mat_inv).unwrap(), Gf2Matrix::identity(4));
        let mu = Bits::from_bit_str("10110").unwrap();
        let mut ct = sym_enc(0, &k, &mu, &mut r).unwrap();
        assert_eq!(sym_dec(&k, &mut ct, &mut r).unwrap(), Some(mu.clone()));
        let mut ct = sym_enc(0, &k, &mu, &mut r).unwrap();
        ct.l += 1;
        assert!(matches!(sym_dec(&k, &mut ct, &mut r), Err(Error::FormatError(_))));
    }

    #[test]
    fn payload_rejects_off_graph_inputs() {
        let mut r = ChaCha8Rng::seed_from_u64(4);
        let k = sym_gen_m(2, &mut r).unwrap();
        let mu = Bits::from_bit_str("01").unwrap();
        let p = payload_circuit(&k, 3, 1, &mu).unwrap();
        let on_graph: Vec<Bits> = (0..4u64)
            .map(|x| k.s(&Bits::from_u64(x, 2).concat(&Bits::from_u64(affine_mod(3, x, 1, 2), 2))).unwrap())
            .collect();
        for y in 0..16u64 {
            let y = Bits::from_u64(y, 4);
            let out = p.eval(&y);
            assert_eq!(out.get(4), on_graph.contains(&y));
            if !out.get(4) {
                assert!(out.is_zero());
            }
        }
    }

    #[test]
    fn decode_is_deterministic_and_invertible() {
        let mut r = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let pv = Bits::random(6, &mut r);
            let a = decode_subkey(&pv, 3).unwrap();
            assert_eq!(a, decode_subkey(&pv, 3).unwrap());
            assert!(a.mat.inverse().is_some());
        }
    }

    #[test]
    fn asym_round_trip_at_toy_scale() {
        let mut r = ChaCha8Rng::seed_from_u64(6);
        let params = AsymParams::with_sizes(4, 0, Profile::Desk, 24, 2);
        let params = AsymParams { n: 4, ..params };
        let sk = asy_gen(params, &mut r).unwrap();
        let mut st = asy_keysend(&sk, OtpConfig::new(0)).unwrap();
        let (mut copies, reveal) = br_issue_all(&mut st, 1, &mut r).unwrap();
        let kv = asy_keyreceive(&params, &mut copies[0], &reveal, &mut r).unwrap();
        assert_eq!(kv.pv, sk.p.matvec(&kv.v).unwrap());
        let mu = Bits::from_bit_str("1101").unwrap();
        let mut act = asy_enc(&OtpConfig::new(0), &kv, &mu, &mut r).unwrap();
        assert_eq!(asy_dec(&sk, &mut act, &mut r).unwrap(), Some(mu));
    }
}
