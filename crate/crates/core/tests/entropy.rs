use std::collections::BTreeMap;

use bqsm_core::entropy::{
    conditional_min_entropy, min_entropy, privacy_amp_distance, split_choice_binary, split_choice_multi, Dist,
};
use bqsm_core::gf2::Gf2Matrix;
use bqsm_core::Bits;
use proptest::prelude::*;

const SLACK: f64 = 1e-9;

/// A distribution over `width`-bit values with the given integer weights
/// (at least one non-zero).
fn dist(width: usize, weights: &[u32]) -> Dist {
    let total: u32 = weights.iter().sum();
    Dist::new(
        weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0)
            .map(|(v, &w)| (Bits::from_u64(v as u64, width), w as f64 / total as f64))
            .collect(),
    )
    .unwrap()
}

fn weights(width: usize) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0u32..16, 1 << width).prop_filter("non-empty", |w| w.iter().any(|&x| x > 0))
}

fn joint_min_entropy<K: Ord>(d: &Dist, key: impl Fn(&Bits) -> K) -> f64 {
    let mut mass: BTreeMap<K, f64> = BTreeMap::new();
    for (x, p) in d.support() {
        *mass.entry(key(x)).or_insert(0.0) += p;
    }
    -mass.values().fold(0.0f64, |a, &b| a.max(b)).log2()
}

proptest! {
    #[test]
    fn binary_split_keeps_half_the_entropy(
        (width, w) in prop_oneof![Just(2usize), Just(4), Just(6)].prop_flat_map(|n| (Just(n), weights(n))),
        frac in 0.1f64..=1.0,
    ) {
        let d = dist(width, &w);
        let alpha = min_entropy(&d) * frac;
        let rule = split_choice_binary(&d, width / 2, alpha).unwrap();
        let h = joint_min_entropy(&d, |x| {
            let c = rule.choose_joint(x);
            (c, if c { x.slice(0..width / 2) } else { x.slice(width / 2..width) })
        });
        prop_assert!(h >= alpha / 2.0 - SLACK, "H = {h}, alpha = {alpha}");
    }

    #[test]
    fn multi_split_keeps_a_block_share(w in weights(8), blocks in prop_oneof![Just(2usize), Just(4)]) {
        let d = dist(8, &w);
        let rule = split_choice_multi(&d, blocks).unwrap();
        let bw = 8 / blocks;
        let h = conditional_min_entropy(&d, |x| {
            let c = rule.choose(x).unwrap();
            (x.slice(c * bw..(c + 1) * bw), Bits::from_u64(c as u64, 2))
        });
        prop_assert!(h >= min_entropy(&d) / blocks as f64 - (blocks as f64).log2() - SLACK);
    }

    #[test]
    fn privacy_amplification_stays_under_the_bound(w in weights(4), l in 1usize..=2) {
        let d = dist(4, &w);
        let pa = privacy_amp_distance(&d, l).unwrap();
        prop_assert!(pa.exact);
        let bound = 0.5 * (-(min_entropy(&d) - l as f64) / 2.0).exp2();
        prop_assert!(pa.distance <= bound + SLACK, "{} > {bound}", pa.distance);
    }
}

/// `H∞(X|U) ≥ H∞(XU) − |U|` for every uniform distribution on a subset of
/// 2-bit `X` times 2-bit `U`.
#[test]
fn chain_rule_on_every_uniform_subset() {
    for subset in 1..1u64 << 16 {
        let values: Vec<Bits> = (0..16).filter(|v| subset >> v & 1 == 1).map(|v| Bits::from_u64(v, 4)).collect();
        let d = Dist::uniform_over(&values).unwrap();
        let cond = conditional_min_entropy(&d, |v| (v.slice(0..2), v.slice(2..4)));
        assert!(cond >= min_entropy(&d) - 2.0 - SLACK, "subset {subset:#x}");
    }
}

/// Over all 2×4 matrices two distinct inputs collide with probability
/// exactly 1/4.
#[test]
fn linear_family_is_two_universal() {
    for x in 0..16u64 {
        for y in x + 1..16 {
            let collisions = (0..256u64)
                .filter(|&code| {
                    let h = Gf2Matrix::from_row_major(2, 4, &Bits::from_u64(code, 8)).unwrap();
                    h.matvec(&Bits::from_u64(x, 4)).unwrap() == h.matvec(&Bits::from_u64(y, 4)).unwrap()
                })
                .count();
            assert_eq!(collisions, 64);
        }
    }
}
