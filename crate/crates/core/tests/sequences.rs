use confball::{CoeffSeq, Error};
use proptest::prelude::*;

fn seq() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 0..64)
}

proptest! {
    #[test]
    fn distance_is_symmetric_and_zero_on_diagonal(a in seq(), b in seq()) {
        let (f, g) = (CoeffSeq::new(a).unwrap(), CoeffSeq::new(b).unwrap());
        prop_assert_eq!(f.l2_dist_sq(&g).unwrap(), g.l2_dist_sq(&f).unwrap());
        prop_assert_eq!(f.l2_dist_sq(&f).unwrap(), 0.0);
    }

    #[test]
    fn triangle_inequality(a in seq(), b in seq(), c in seq()) {
        let (f, g, h) = (CoeffSeq::new(a).unwrap(), CoeffSeq::new(b).unwrap(), CoeffSeq::new(c).unwrap());
        let d = |x: &CoeffSeq, y: &CoeffSeq| x.l2_dist_sq(y).unwrap().sqrt();
        prop_assert!(d(&f, &h) <= d(&f, &g) + d(&g, &h) + 1e-9);
    }

    #[test]
    fn sobolev_norm_matches_direct_sum(a in seq(), s in 0.0f64..3.0) {
        let f = CoeffSeq::new(a.clone()).unwrap();
        let direct: f64 = a.iter().enumerate().map(|(i, c)| c * c * ((i + 1) as f64).powf(2.0 * s)).sum();
        let got = f.sobolev_norm_sq(s).unwrap();
        prop_assert!((got - direct).abs() <= 1e-9 * direct.max(1.0));
    }

    #[test]
    fn projection_splits_energy(a in seq(), j in 0u32..8) {
        let f = CoeffSeq::new(a).unwrap();
        let head = f.project(j).l2_norm_sq();
        let rest = f.l2_dist_sq(&f.project(j)).unwrap();
        prop_assert!((head + rest - f.l2_norm_sq()).abs() <= 1e-9 * f.l2_norm_sq().max(1.0));
        prop_assert_eq!(f.project(j).len(), f.len());
        prop_assert_eq!(f.truncate(j).l2_dist_sq(&f.project(j)).unwrap(), 0.0);
    }

    #[test]
    fn block_energy_counts_integer_indices(a in seq(), lo in 0.0f64..70.0, w in 0.0f64..70.0) {
        let f = CoeffSeq::new(a.clone()).unwrap();
        let hi = lo + w;
        let direct: f64 = a.iter().enumerate()
            .filter(|(i, _)| { let k = (*i + 1) as f64; k >= lo && k <= hi })
            .map(|(_, c)| c * c).sum();
        prop_assert!((f.block_energy(lo, hi).unwrap() - direct).abs() <= 1e-9 * direct.max(1.0));
    }

    #[test]
    fn text_round_trip(a in seq(), tail in prop::option::of(0.0f64..5.0)) {
        let f = match tail {
            Some(t) => CoeffSeq::with_tail(a, t).unwrap(),
            None => CoeffSeq::new(a).unwrap(),
        };
        prop_assert_eq!(CoeffSeq::parse_text(&f.to_text()).unwrap(), f);
    }
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.txt");
    let f = CoeffSeq::with_tail(vec![0.1, -2.5e-17, 3.0], 0.125).unwrap();
    f.write_file(&path).unwrap();
    assert_eq!(CoeffSeq::read_file(&path).unwrap().unwrap(), f);
}

#[test]
fn tails_compare_only_when_determined() {
    let t = CoeffSeq::with_tail(vec![1.0, 2.0], 0.5).unwrap();
    let short = CoeffSeq::new(vec![1.0]).unwrap();
    assert_eq!(t.l2_dist_sq(&short).unwrap(), 4.0 + 0.5);
    let long = CoeffSeq::new(vec![1.0, 2.0, 3.0]).unwrap();
    assert_eq!(t.l2_dist_sq(&long), Err(Error::IncomparableTails));
    assert!(matches!(t.sobolev_norm_sq(1.0), Err(Error::SobolevUndefinedForTail)));
}
