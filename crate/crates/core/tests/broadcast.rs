use bqsm_core::bp::{Circuit, Formula};
use bqsm_core::broadcast::{br_finalize, br_issue, br_issue_all, br_redeem, br_setup, xor_outputs, CARRIER_FACTOR};
use bqsm_core::otp::OtpConfig;
use bqsm_core::{Bits, Error};
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

fn table_circuit() -> impl Strategy<Value = Circuit> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(n, outs)| {
        prop::collection::vec(any::<u64>(), 1 << n)
            .prop_map(move |v| Circuit::from_fn(n, outs, |w| v[w as usize]).unwrap())
    })
}

proptest! {
    #[test]
    fn padding_outputs_twice_is_the_identity(c in table_circuit(), pad: u64) {
        let pad = Bits::from_u64(pad, c.outputs.len());
        let once = xor_outputs(&c, &pad);
        prop_assert_eq!(&xor_outputs(&once, &pad), &c);
        for w in 0..1u64 << c.inputs {
            let w = Bits::from_u64(w, c.inputs);
            prop_assert_eq!(once.eval(&w), c.eval(&w).xor(&pad));
        }
    }

    #[test]
    fn formula_outputs_negate_under_the_pad(pad: bool, w in 0u64..4) {
        let c = Circuit::from_formulas(2, vec![Formula::parse("x0 & !x1").unwrap()]);
        let p = Bits::from_bools(&[pad]);
        let w = Bits::from_u64(w, 2);
        prop_assert_eq!(xor_outputs(&xor_outputs(&c, &p), &p).eval(&w), c.eval(&w));
        prop_assert_eq!(xor_outputs(&c, &p).eval(&w), c.eval(&w).xor(&p));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn every_honest_copy_redeems_its_output(c in table_circuit(), copies in 1usize..4, seed: u64) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let mut st = br_setup(&c, 0, OtpConfig::new(0), &mut r).unwrap();
        prop_assert!(st.output_width() >= c.outputs.len());
        prop_assert_eq!(st.carrier_len(), CARRIER_FACTOR * st.output_width());
        let (mut issued, reveal) = br_issue_all(&mut st, copies, &mut r).unwrap();
        for (k, copy) in issued.iter_mut().enumerate() {
            prop_assert_eq!(copy.index, k);
            prop_assert_eq!(copy.conj.len(), CARRIER_FACTOR * st.output_width());
            let w = Bits::random(c.inputs, &mut r);
            let out = br_redeem(copy, &w, &reveal, &mut r).unwrap().unwrap();
            prop_assert_eq!(out.slice(0..c.outputs.len()), c.eval(&w));
            prop_assert!(out.slice(c.outputs.len()..out.len()).is_zero());
        }
    }
}

#[test]
fn issuance_stops_at_finalization() {
    let mut r = ChaCha8Rng::seed_from_u64(1);
    let c = Circuit::from_formulas(2, vec![Formula::parse("x0 | x1").unwrap()]);
    let mut st = br_setup(&c, 0, OtpConfig::new(0), &mut r).unwrap();
    br_issue(&mut st, &mut r).unwrap();
    br_finalize(&mut st).unwrap();
    assert!(st.is_finalized());
    assert_eq!(st.issued(), 1);
    assert!(matches!(br_issue(&mut st, &mut r), Err(Error::Finalized)));
    assert!(matches!(br_finalize(&mut st), Err(Error::AlreadyFinalized)));
}
