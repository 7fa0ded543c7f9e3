use bqsm_core::encryption::{affine_mod, decode_subkey, payload_output, sym_dec, sym_enc, sym_gen_m, SymKey};
use bqsm_core::gf2::Gf2Matrix;
use bqsm_core::tokens::{mac_tag, mac_verify};
use bqsm_core::{Bits, Error};
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn short_message() -> impl Strategy<Value = Bits> {
    prop::collection::vec(any::<bool>(), 1..6).prop_map(|v| Bits::from_bools(&v))
}

proptest! {
    /// Any string decodes to a well-formed key with an invertible matrix,
    /// and decoding is a function of the string alone.
    #[test]
    fn every_sub_key_decodes_to_an_invertible_key(len in 1usize..200, m in 1usize..=6, seed: u64) {
        let pv = Bits::random(len, &mut rng(seed));
        let k = decode_subkey(&pv, m).unwrap();
        prop_assert_eq!((k.m, k.q.len(), k.w.len(), k.z.len()), (m, m, m, 2 * m));
        prop_assert_eq!(k.mat.mul(&k.mat_inv).unwrap(), Gf2Matrix::identity(2 * m));
        prop_assert_eq!(&decode_subkey(&pv, m).unwrap(), &k);
    }

    #[test]
    fn the_key_permutation_inverts(m in 1usize..=8, seed: u64) {
        let mut r = rng(seed);
        let k = sym_gen_m(m, &mut r).unwrap();
        let x = Bits::random(2 * m, &mut r);
        prop_assert_eq!(k.s_inv(&k.s(&x).unwrap()).unwrap(), x);
        let again = SymKey::from_parts(k.q.clone(), k.w.clone(), k.mat.clone(), k.z.clone()).unwrap();
        prop_assert_eq!(again, k);
    }

    /// The payload releases `S′(f(x)) ‖ μ ‖ 1` exactly on the image of
    /// `x ↦ S(x ‖ f(x))`.
    #[test]
    fn payload_releases_only_on_the_graph(m in 1usize..=3, a: u64, b: u64, mu in short_message(), seed: u64) {
        let k = sym_gen_m(m, &mut rng(seed)).unwrap();
        let mask = (1u64 << m) - 1;
        let graph: Vec<Bits> = (0..1u64 << m)
            .map(|x| k.s(&Bits::from_u64(x, m).concat(&Bits::from_u64((a.wrapping_mul(x).wrapping_add(b)) & mask, m))).unwrap())
            .collect();
        for y in 0..1u64 << (2 * m) {
            let y = Bits::from_u64(y, 2 * m);
            let out = payload_output(&k, a, b, &mu, &y);
            prop_assert_eq!(out.len(), m + mu.len() + 1);
            match graph.iter().position(|g| *g == y) {
                Some(x) => {
                    let fx = affine_mod(a, x as u64, b, m);
                    let head = Bits::from_u64(k.s_prime(fx), m);
                    prop_assert_eq!(out.slice(0..m), head);
                    prop_assert_eq!(out.slice(m..m + mu.len()), mu.clone());
                    prop_assert!(out.get(m + mu.len()));
                }
                None => prop_assert!(out.is_zero()),
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn symmetric_round_trip_is_single_use(mu in short_message(), seed: u64) {
        let mut r = rng(seed);
        let k = sym_gen_m(2, &mut r).unwrap();
        let mut ct = sym_enc(0, &k, &mu, &mut r).unwrap();
        prop_assert_eq!(sym_dec(&k, &mut ct, &mut r).unwrap(), Some(mu.clone()));
        prop_assert!(matches!(sym_dec(&k, &mut ct, &mut r), Err(Error::DoubleMeasure { .. })), "unexpected result");
    }

    #[test]
    fn tags_verify_only_their_message(mu in short_message(), flip in 0usize..5, seed: u64) {
        let mut r = rng(seed);
        let k = sym_gen_m(2, &mut r).unwrap();
        let mut tag = mac_tag(0, &k, &mu, &mut r).unwrap();
        prop_assert!(mac_verify(&k, &mu, &mut tag, &mut r).unwrap());
        let mut other = mu.clone();
        other.flip(flip % mu.len());
        let mut tag = mac_tag(0, &k, &mu, &mut r).unwrap();
        prop_assert!(!mac_verify(&k, &other, &mut tag, &mut r).unwrap());
    }
}
