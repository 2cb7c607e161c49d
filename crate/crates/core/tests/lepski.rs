use confball::lepski::{
    lepski_level, linear_estimator, oracle_level, resolution_grid, undersmoothed_level, validate_config, LepskiConfig,
};
use confball::model::{sample_observation, split_sample, RngStream};
use confball::selfsim::make_dyadic_selfsim;
use confball::CoeffSeq;
use proptest::prelude::*;

/// Rule applied literally: compares full estimator vectors for every pair.
fn lepski_brute(y: &CoeffSeq, n: u64, grid: &[u32]) -> u32 {
    for &j in grid {
        let fj = linear_estimator(y, j).unwrap();
        let ok = grid.iter().filter(|&&l| l > j).all(|&l| {
            let fl = linear_estimator(y, l).unwrap();
            fj.l2_dist_sq(&fl).unwrap() <= 4.0 * 2f64.powi(l as i32 + 1) / n as f64
        });
        if ok {
            return j;
        }
    }
    unreachable!()
}

proptest! {
    #[test]
    fn running_energies_match_pairwise_rule(
        seed in any::<u64>(),
        amp in 0.0f64..20.0,
        logn in 6u32..12,
        sp in 0.5f64..4.0,
    ) {
        let n = 1u64 << logn;
        let f = make_dyadic_selfsim(1.0, logn - 1, amp).unwrap();
        let obs = sample_observation(&f, n, &RngStream::keyed(seed, &[0])).unwrap();
        let y = split_sample(&obs, &RngStream::keyed(seed, &[1])).yprime;
        let grid = resolution_grid(n, sp).unwrap();
        prop_assert_eq!(lepski_level(&y, n, &grid).unwrap(), lepski_brute(&y, n, &grid));
    }

    #[test]
    fn grid_bounds(logn in 2u32..40, sp in 0.1f64..6.0) {
        let n = 1u64 << logn;
        let g = resolution_grid(n, sp).unwrap();
        let lo = ((logn as f64) / (2.0 * sp + 1.0)).ceil().max(1.0) as u32;
        prop_assert_eq!(g.first().copied(), Some(lo));
        prop_assert_eq!(g.last().copied(), Some(logn));
    }

    #[test]
    fn undersmoothing_never_below_lepski_level(jhat in 1u32..30, logn in 2u32..62, k2 in 0.55f64..1.0) {
        prop_assume!(jhat <= logn);
        let n = 1u64 << logn;
        if let Ok(sel) = undersmoothed_level(jhat, n, k2) {
            prop_assert!(sel.big_jhat >= jhat);
            prop_assert!(sel.jn_real >= jhat as f64 - 1e-9);
        }
    }

    #[test]
    fn defaults_are_feasible(s_min in 0.2f64..4.0, gap in 0.1f64..4.0, m in 0.05f64..0.95) {
        let cfg = LepskiConfig::with_m(s_min, s_min + gap, m).unwrap();
        prop_assert!(validate_config(&cfg).is_empty());
    }
}

#[test]
fn oracle_level_matches_definition() {
    let f = make_dyadic_selfsim(1.0, 20, 40.0).unwrap();
    let norm_sq: f64 = f.coeffs().iter().enumerate().map(|(i, c)| c * c * ((i + 1) as f64).powi(2)).sum();
    for logn in [10u32, 12, 14, 16, 18] {
        let n = 1u64 << logn;
        let grid = resolution_grid(n, 3.5).unwrap();
        let o = oracle_level(&f, 1.0, n, &grid).unwrap();
        let expect = grid
            .iter()
            .copied()
            .find(|&j| norm_sq / 4f64.powi(j as i32) <= 2f64.powi(j as i32 + 1) / n as f64)
            .unwrap();
        assert_eq!(o.j, expect);
        assert!(o.attained);
    }
}

#[test]
fn pure_noise_selects_bottom_of_grid_mostly() {
    let n = 4096;
    let grid = resolution_grid(n, 3.5).unwrap();
    let f = CoeffSeq::zeros(0);
    let hits = (0..200)
        .filter(|&rep| {
            let obs = sample_observation(&f, n, &RngStream::keyed(2, &[rep])).unwrap();
            let y = split_sample(&obs, &RngStream::keyed(2, &[rep, 1])).yprime;
            lepski_level(&y, n, &grid).unwrap() == grid[0]
        })
        .count();
    assert!(hits >= 195, "{hits}");
}
