use ergodic_lab::experiments::{explicit_gaps, explicit_levels, gaussian_range_mean, log_grid, segments_cover_hull};
use ergodic_lab::Parallel;
use proptest::prelude::*;

#[test]
fn toy_tower_by_hand() {
    let stages = explicit_levels(&[2, 2], &[vec![0, 1], vec![0, 2]]);
    let heights: Vec<usize> = stages.iter().map(|s| s.0.len()).collect();
    assert_eq!(heights, [1, 3, 8]);
    assert_eq!(stages[2].0, [true, true, false, true, true, false, false, false]);
    assert_eq!(stages[2].1, [0, 3]);
    let (gaps, mass) = explicit_gaps(&stages[2].0);
    assert_eq!(gaps, [(1, 2.0 / 3.0), (2, 1.0 / 3.0)]);
    assert_eq!(mass, 0.25);
}

#[test]
fn gaussian_range_matches_brownian_mean() {
    // E[max − min] of Brownian motion on [0, 1] is 2·sqrt(2/π).
    let m = gaussian_range_mean(4000, 400, 9, &Parallel);
    let exact = 2.0 * (2.0 / std::f64::consts::PI).sqrt();
    assert!((m - exact).abs() < 0.03, "{m} vs {exact}");
}

#[test]
fn hull_cover_edge_cases() {
    assert!(segments_cover_hull(&[]));
    assert!(segments_cover_hull(&[0.0, 0.0]));
    assert!(segments_cover_hull(&[1.0, -3.0, 5.0]));
}

proptest! {
    #[test]
    fn partial_sum_segments_cover_hull(a in prop::collection::vec(-10.0f64..10.0, 0..40)) {
        prop_assert!(segments_cover_hull(&a));
    }

    #[test]
    fn log_grid_is_increasing_within_bounds(lo in 1.0f64..1e3, span in 1.0f64..1e6, count in 1usize..40) {
        let hi = lo * span;
        let g = log_grid(lo, hi, count);
        prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(g[0], lo.round() as u64);
        prop_assert!(*g.last().unwrap() <= hi.round() as u64);
    }

    #[test]
    fn explicit_tower_heights_and_base_mass(
        spec in prop::collection::vec((2u64..4, prop::collection::vec(0u64..4, 3)), 1..4)
    ) {
        let cuts: Vec<u64> = spec.iter().map(|s| s.0).collect();
        let spacers: Vec<Vec<u64>> = spec.iter().map(|s| s.1[..s.0 as usize].to_vec()).collect();
        let stages = explicit_levels(&cuts, &spacers);
        for (k, (c, l)) in cuts.iter().zip(&spacers).enumerate() {
            let h = stages[k].0.len() as u64;
            prop_assert_eq!(stages[k + 1].0.len() as u64, c * h + l.iter().sum::<u64>());
            let base = stages[k + 1].0.iter().filter(|b| **b).count();
            prop_assert_eq!(base as u64, cuts[..=k].iter().product::<u64>());
        }
        let (gaps, _) = explicit_gaps(&stages.last().unwrap().0);
        let total: f64 = gaps.iter().map(|g| g.1).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}
