use bqsm_core::conjugate::{Basis, Channel, ConjugateState};
use bqsm_core::harness::{check_budget, AdversaryMemory, AdversaryStrategy, StrategyKind};
use bqsm_core::{Bits, Error, Result, RngCore};
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

fn kind() -> impl Strategy<Value = StrategyKind> {
    prop_oneof![
        Just(StrategyKind::MeasureAllRandom),
        Just(StrategyKind::MeasureAllFixed(Basis::Rectilinear)),
        Just(StrategyKind::MeasureAllFixed(Basis::Diagonal)),
        Just(StrategyKind::StoreFirstS),
        Just(StrategyKind::StoreRandomS),
    ]
}

fn channels(lens: &[usize], r: &mut ChaCha8Rng) -> (Vec<Channel>, Vec<(Bits, Bits)>) {
    let preps: Vec<(Bits, Bits)> = lens.iter().map(|&n| (Bits::random(n, r), Bits::random(n, r))).collect();
    let chans = preps.iter().map(|(x, t)| Channel::deliver(ConjugateState::encode(x, t).unwrap())).collect();
    (chans, preps)
}

/// Keeps one qubit more than allowed.
fn greedy(chs: &mut [Channel], s: usize, _: &mut dyn RngCore) -> Result<Vec<AdversaryMemory>> {
    let mut m = AdversaryMemory::default();
    for i in 0..(s + 1).min(chs[0].len()) {
        m.stored.push((i, chs[0].take(i)?));
    }
    Ok(vec![m])
}

proptest! {
    #[test]
    fn built_in_strategies_respect_the_budget(
        k in kind(), lens in prop::collection::vec(1usize..40, 1..4), s in 0usize..60, seed: u64,
    ) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (mut chs, preps) = channels(&lens, &mut r);
        let mem = AdversaryStrategy::new(k, s).process(&mut chs, &mut r).unwrap();
        let total: usize = lens.iter().sum();
        let stored: usize = mem.iter().map(|m| m.stored.len()).sum();
        let expect = match k {
            StrategyKind::StoreFirstS | StrategyKind::StoreRandomS => s.min(total),
            _ => 0,
        };
        prop_assert_eq!(stored, expect);
        prop_assert!(check_budget(&mem, s).is_ok());
        prop_assert!(chs.iter().all(Channel::fully_consumed));
        for ((m, (x, theta)), &n) in mem.iter().zip(&preps).zip(&lens) {
            prop_assert_eq!(m.measured.len() + m.stored.len(), n);
            let known = m.known(n, theta);
            let resolved = m.resolve(n, theta, &mut r);
            prop_assert!(resolved.xor(x).and(&known).is_zero());
        }
    }

    #[test]
    fn over_budget_memories_are_refused(s in 0usize..20, seed: u64) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (mut chs, _) = channels(&[32], &mut r);
        let res = AdversaryStrategy::new(StrategyKind::Custom(greedy), s).process(&mut chs, &mut r);
        prop_assert!(
            matches!(res, Err(Error::BudgetViolation { retained, budget }) if retained == s + 1 && budget == s),
            "{:?}", res
        );
    }
}
