use bqsm_core::bp::Formula;
use bqsm_core::otp::OtpConfig;
use bqsm_core::slicing::{poly_compile, poly_evaluate, poly_finish, poly_prove, SlicedCircuit};
use bqsm_core::Bits;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

/// Two bijective 2-bit blocks, so every altered proof bit breaks a check.
fn two_blocks() -> SlicedCircuit {
    let v = Formula::var;
    SlicedCircuit::new(2, vec![vec![Formula::xor(v(0), v(1)), v(1)], vec![v(0), Formula::xor(v(0), v(1))]]).unwrap()
}

#[test]
fn two_blocks_end_to_end() {
    let c = two_blocks();
    let mut r = ChaCha8Rng::seed_from_u64(1);
    for w in 0..4u64 {
        let w = Bits::from_u64(w, 2);
        let mut t = poly_compile(&c, &OtpConfig::new(0), &mut r).unwrap();
        assert_eq!(t.manifest.blocks, 2);
        assert_eq!(poly_evaluate(&mut t, &w, &mut r).unwrap(), Some(c.eval(&w)));
    }
}

#[test]
fn any_altered_proof_bit_is_rejected() {
    let c = two_blocks();
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let w = Bits::from_u64(2, 2);
    for bit in 0..8 {
        let mut t = poly_compile(&c, &OtpConfig::new(0), &mut r).unwrap();
        let mut proof = poly_prove(&mut t, &w, &mut r).unwrap().unwrap();
        proof.flip(bit);
        assert_eq!(poly_finish(&mut t, &proof, &mut r).unwrap(), None, "bit {bit}");
    }
}
