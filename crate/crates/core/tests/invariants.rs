use ergodic_core::systems::hik::{count_popcount_below, fiber_after, return_to_level, visits_by_power};
use ergodic_core::systems::rankone::tower_build;
use ergodic_core::systems::{BitLaw, Boole, Dynamics, Hik, HikState, LazyBits, RenewalLaw, TowerSpec};
use proptest::prelude::*;

fn omega(prefix: &[bool], key: u64) -> LazyBits {
    LazyBits::with_prefix(prefix, BitLaw::bernoulli(0.5).unwrap(), key)
}

proptest! {
    #[test]
    fn boole_preimages_carry_unit_weight(x in -50.0f64..50.0) {
        let pre = Boole::preimages(x);
        let w: f64 = pre.iter().map(|&y| Boole::preimage_weight(y)).sum();
        prop_assert!((w - 1.0).abs() < 1e-12);
        for y in pre {
            prop_assert!((Boole::map(y).unwrap() - x).abs() < 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn popcount_count_matches_enumeration(m in 0u64..4096, c in 0u32..13) {
        let brute = (0..m).filter(|v| v.count_ones() == c).count() as u64;
        prop_assert_eq!(count_popcount_below(m, c), brute);
    }

    #[test]
    fn hik_shortcuts_match_stepping(prefix in prop::collection::vec(any::<bool>(), 0..20), key in any::<u64>(), n in 1u32..11) {
        let hik = Hik::new(0.5).unwrap();
        let start = omega(&prefix, key);
        let mut s = HikState { omega: start.clone(), fiber: 0 };
        let mut visits = 0u64;
        let mut first = None;
        for k in 1..(1u64 << n) {
            hik.step(&mut s).unwrap();
            prop_assert_eq!(fiber_after(&start, k), s.fiber);
            if s.fiber == 0 {
                visits += 1;
                first.get_or_insert((k, s.omega.clone()));
            }
        }
        prop_assert_eq!(visits_by_power(&start, n).unwrap(), visits);
        if let Some((k, landing)) = first {
            let mut r = HikState { omega: start.clone(), fiber: 0 };
            prop_assert_eq!(return_to_level(&mut r, u64::MAX).unwrap(), k);
            prop_assert_eq!(r.omega.prefix(40), landing.prefix(40));
        }
    }

    #[test]
    fn renewal_occupation_is_the_summed_tail(
        values in prop::collection::btree_set(1u64..60, 1..6),
        weights in prop::collection::vec(0.05f64..1.0, 6),
        n in 0u64..80,
    ) {
        let values: Vec<u64> = values.into_iter().collect();
        let total: f64 = weights[..values.len()].iter().sum();
        let probs: Vec<f64> = weights[..values.len()].iter().map(|w| w / total).collect();
        let law = RenewalLaw::sparse(values.clone(), probs.clone()).unwrap();
        let direct: f64 = (0..=n).map(|k| values.iter().zip(&probs).filter(|(v, _)| **v > k).map(|p| p.1).sum::<f64>()).sum();
        prop_assert!((law.occupation(n) - direct).abs() < 1e-9 * (1.0 + direct));
    }

    #[test]
    fn tower_heights_follow_the_stacking_recursion(
        spec in prop::collection::vec((2u64..5, prop::collection::vec(0u64..5, 4)), 1..5)
    ) {
        let cuts: Vec<u64> = spec.iter().map(|s| s.0).collect();
        let spacers: Vec<Vec<u64>> = spec.iter().map(|s| s.1[..s.0 as usize].to_vec()).collect();
        let stages = tower_build(&TowerSpec::new(cuts.clone(), spacers.clone()).unwrap(), cuts.len()).unwrap();
        for k in 0..cuts.len() {
            let (h, next) = (stages[k].height, &stages[k + 1]);
            prop_assert_eq!(next.height, cuts[k] * h + spacers[k].iter().sum::<u64>());
            prop_assert_eq!(next.base_levels.len() as u64, cuts[..=k].iter().product::<u64>());
            prop_assert!((next.base_mass * cuts[..=k].iter().product::<u64>() as f64 - 1.0).abs() < 1e-12);
            for (j, off) in next.offsets.iter().enumerate() {
                let expected = j as u64 * h + spacers[k][..j].iter().sum::<u64>();
                prop_assert_eq!(*off, expected);
            }
        }
    }
}
