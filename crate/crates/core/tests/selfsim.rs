use confball::selfsim::{
    c_of_s, check_bayes_selfsim, check_membership, make_dyadic_selfsim, validate_eps, EpsTable, SelfSimParams,
};
use confball::{CoeffSeq, Error};
use proptest::prelude::*;

fn standard() -> SelfSimParams {
    SelfSimParams::new(1.0, 0.2, 100.0, 200.0, 5).unwrap().with_c(0.1).unwrap()
}

/// Literal membership test written against the definition.
fn member_brute(f: &[f64], p: &SelfSimParams, c: f64) -> bool {
    let norm: f64 = f.iter().enumerate().map(|(i, x)| x * x * ((i + 1) as f64).powf(2.0 * p.s)).sum();
    if norm < p.b * p.b || norm > p.big_b * p.big_b {
        return false;
    }
    let top = (f.len() as f64).log2().floor() as u32 - 1;
    (p.j0..=top).all(|j| {
        let lo = 2f64.powf(j as f64 * (1.0 - p.eps));
        let hi = 2f64.powi(j as i32);
        let e: f64 = f
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let k = (*i + 1) as f64;
                k >= lo - 1e-9 && k <= hi
            })
            .map(|(_, x)| x * x)
            .sum();
        e >= c * norm * 2f64.powf(-2.0 * j as f64 * p.s)
    })
}

#[test]
fn standard_truth_is_member() {
    let f = make_dyadic_selfsim(1.0, 20, 40.0).unwrap();
    let r = check_membership(&f, &standard()).unwrap();
    assert!(r.is_member, "{r:?}");
    assert_eq!(r.j_checked, 19);
    assert!((r.norm_sq.sqrt() - 156.1).abs() < 0.1);
}

#[test]
fn default_constant_rejects_standard_truth() {
    let f = make_dyadic_selfsim(1.0, 20, 40.0).unwrap();
    let p = SelfSimParams::new(1.0, 0.2, 100.0, 200.0, 5).unwrap();
    assert_eq!(p.block_constant(), c_of_s(1.0));
    assert_eq!(c_of_s(1.0), 128.0);
    assert!(!check_membership(&f, &p).unwrap().is_member);
}

#[test]
fn hidden_energy_breaks_membership() {
    let mut c = make_dyadic_selfsim(1.0, 20, 40.0).unwrap().into_coeffs();
    let lo = 1 << 18;
    for x in &mut c[lo - 1..lo - 1 + (lo >> 1)] {
        *x = (4.0 / (lo >> 1) as f64).sqrt();
    }
    let f = CoeffSeq::new(c).unwrap();
    assert!(!check_membership(&f, &standard()).unwrap().is_member);
}

#[test]
fn too_short_support_is_rejected() {
    let f = CoeffSeq::new(vec![1.0; 16]).unwrap();
    assert!(matches!(check_membership(&f, &standard()), Err(Error::SupportTooSmall { .. })));
}

proptest! {
    #[test]
    fn checker_matches_literal_definition(
        levels in 6u32..12,
        amp in 1.0f64..200.0,
        s in 0.5f64..2.0,
        eps in 0.1f64..0.6,
        c in 0.01f64..2.0,
        bump in prop::option::of((0usize..2000, -3.0f64..3.0)),
    ) {
        let mut coeffs = make_dyadic_selfsim(s, levels, amp).unwrap().into_coeffs();
        if let Some((i, v)) = bump {
            let k = i % coeffs.len();
            coeffs[k] += v;
        }
        let p = SelfSimParams::new(s, eps, 1.0, 1e6, 3).unwrap().with_c(c).unwrap();
        let got = check_membership(&CoeffSeq::new(coeffs.clone()).unwrap(), &p).unwrap();
        prop_assert_eq!(got.is_member, member_brute(&coeffs, &p, c));
    }

    #[test]
    fn membership_is_scale_invariant_without_norm_bounds(
        amp in 1.0f64..100.0,
        lambda in 0.01f64..100.0,
    ) {
        let f = make_dyadic_selfsim(1.0, 10, amp).unwrap();
        let g = CoeffSeq::new(f.coeffs().iter().map(|x| lambda * x).collect()).unwrap();
        let p = SelfSimParams::new(1.0, 0.2, 1e-12, 1e12, 5).unwrap().with_c(0.1).unwrap();
        let (a, b) = (check_membership(&f, &p).unwrap(), check_membership(&g, &p).unwrap());
        prop_assert_eq!(a.failures, b.failures);
    }
}

#[test]
fn bayes_variant_with_matching_window() {
    let f = make_dyadic_selfsim(1.0, 12, 40.0).unwrap();
    let r = check_bayes_selfsim(&f, 1.0, 200.0, 1e-4, 2f64.powf(0.2 * 1.0), 5);
    assert!(r.is_ok());
    let tiny = check_bayes_selfsim(&f, 1.0, 200.0, 1e-6, 4.0, 5).unwrap();
    assert!(tiny.is_member, "{tiny:?}");
    assert!(!check_bayes_selfsim(&f, 1.0, 1.0, 1e-6, 4.0, 5).unwrap().is_member);
}

#[test]
fn eps_restriction() {
    let t = EpsTable::constant(0.2, 1.0, 3.0, 9).unwrap();
    assert!(validate_eps(&t, 0.9, 1.0, 3.0).unwrap());
    assert!(!validate_eps(&t, 0.1, 1.0, 3.0).unwrap());
    let narrow = EpsTable::constant(0.2, 1.5, 3.0, 4).unwrap();
    assert!(validate_eps(&narrow, 0.9, 1.0, 3.0).is_err());
}
