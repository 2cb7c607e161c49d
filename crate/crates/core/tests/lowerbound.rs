use confball::lowerbound::{
    adversary_step_sq, adversary_tail_bound, block_partition, build_adversary_sequence, calibrate_c,
    chi_sq_divergence_enumerated, chi_sq_divergence_mixture, fano_lower_bound, kl_divergence,
    likelihood_ratio_test_errors, minimax_family, mixture_chi_sq_mc, mixture_log_lr, sample_size_schedule,
    varshamov_gilbert, AdversaryConfig, MinimaxSpec,
};
use confball::model::{sample_observation_in_window, RngStream};
use confball::selfsim::check_membership;
use confball::{CoeffSeq, Error};

fn adversary() -> AdversaryConfig {
    AdversaryConfig::new(0.5, 0.6, 1.0, 1.4, 0.75, 0.2).unwrap()
}

fn minimax_spec() -> MinimaxSpec {
    MinimaxSpec { s: 1.0, r: 1.2, eps: 0.5, b: 1.0, big_b: 2f64.sqrt(), j: 6, delta: 0.05, levels: 21 }
}

fn signs(seed: u64, len: usize) -> Vec<i8> {
    use rand::Rng;
    let mut r = RngStream::keyed(seed, &[len as u64]).rng();
    (0..len).map(|_| if r.random::<bool>() { 1 } else { -1 }).collect()
}

#[test]
fn chi_square_identity_by_three_routes() {
    for c in [0.05, 0.28, 1.0, 2.5] {
        for j in 2..=5u32 {
            let closed = chi_sq_divergence_mixture(c, j);
            let enumerated = chi_sq_divergence_enumerated(c, j).unwrap();
            let x = c * 2f64.powf(-(j as f64) / 2.0);
            let product = x.cosh().powi(1 << (j - 1));
            assert!((closed - enumerated).abs() <= 1e-12 * closed, "{c} {j}");
            assert!((closed - product).abs() <= 1e-12 * closed);
        }
    }
    assert!(chi_sq_divergence_enumerated(0.3, 6).is_err());
}

#[test]
fn chi_square_increases_to_quarter_limit() {
    let c = 0.4f64;
    let mut prev = 0.0;
    for j in 1..40 {
        let v = chi_sq_divergence_mixture(c, j);
        assert!(v >= prev);
        assert!(v <= (c * c / 4.0).exp() * (1.0 + 1e-12));
        prev = v;
    }
    assert!((prev - (c * c / 4.0).exp()).abs() < 1e-9);
    let c = calibrate_c(0.2);
    assert!(((c * c / 2.0).exp() - 1.04).abs() < 1e-12);
}

#[test]
fn mixture_lr_matches_direct_average() {
    let cfg = adversary();
    let j = 3;
    let a = cfg.amplitude(j);
    let n = 50;
    let base = CoeffSeq::new(vec![0.1; 15]).unwrap();
    let (_, z1) = block_partition(j).unwrap();
    let len = z1.clone().count();
    for rep in 0..20 {
        let obs = sample_observation_in_window(&base, n, 16, &RngStream::keyed(8, &[rep])).unwrap();
        let y = obs.y().coeffs();
        let nf = n as f64;
        let mut acc = 0.0;
        for mask in 0..(1u32 << len) {
            let ll: f64 = z1
                .clone()
                .enumerate()
                .map(|(i, k)| {
                    let b = if mask >> i & 1 == 1 { a } else { -a };
                    nf * b * (y[k - 1] - 0.1) - nf * b * b / 2.0
                })
                .sum();
            acc += ll.exp();
        }
        let direct = (acc / (1u32 << len) as f64).ln();
        let got = mixture_log_lr(&base, j, a, &obs).unwrap();
        assert!((got - direct).abs() < 1e-10, "{got} {direct}");
    }
}

#[test]
fn mixture_second_moment_by_simulation() {
    let cfg = adversary();
    for j in [6u32, 7] {
        let r = mixture_chi_sq_mc(&cfg, j, 20_000, 3).unwrap();
        assert_eq!(r.n, sample_size_schedule(&cfg, j).unwrap());
        let d = (r.monte_carlo.mean - r.closed_form).abs();
        assert!(d <= 3.0 * r.monte_carlo.se, "{j}: {r:?}");
    }
}

#[test]
fn likelihood_ratio_test_cannot_separate() {
    let cfg = adversary();
    let t = likelihood_ratio_test_errors(&cfg, 6, 20_000, 4).unwrap();
    let floor = 1.0 - 0.5 * ((1.0 + 0.04f64).ln() * 2.0).sqrt();
    assert!(t.total + 3.0 * t.se >= t.floor.min(floor), "{t:?}");
}

#[test]
fn adversary_members_are_selfsimilar_through_scale_20() {
    let cfg = adversary();
    let j_seq = [2u32, 4, 8];
    let betas: Vec<Vec<i8>> = j_seq.iter().map(|&j| signs(j as u64, 1 << (j - 1))).collect();
    let mut prev: Option<CoeffSeq> = None;
    for m in 0..=3 {
        let f = build_adversary_sequence(&cfg, m, &j_seq, &betas, 21).unwrap();
        let j_m = m.checked_sub(1).map(|i| j_seq[i]);
        let p = cfg.selfsim_params(j_m).unwrap();
        let r = check_membership(&f, &p).unwrap();
        assert!(r.is_member, "m = {m}: {r:?}");
        assert_eq!(r.j_checked, 20);
        if let (Some(g), Some(j)) = (&prev, j_m) {
            let d = f.l2_dist_sq(g).unwrap();
            let closed = adversary_step_sq(&cfg, j);
            assert!((d - closed).abs() <= 1e-12 * closed);
            let amp = 2f64.powf(-(0.6 + 0.5) * j as f64);
            assert!((d - amp * amp * (1 << (j - 1)) as f64).abs() <= 1e-12 * d);
        }
        prev = Some(f);
    }
    assert!(adversary_tail_bound(&cfg, 8) < adversary_step_sq(&cfg, 8));
}

#[test]
fn adversary_ordering_is_enforced() {
    assert!(matches!(AdversaryConfig::new(0.6, 0.5, 1.0, 1.4, 0.75, 0.2), Err(Error::Ordering(_))));
    assert!(AdversaryConfig::new(0.5, 0.6, 1.0, 1.4, 0.75, 0.5).is_err());
}

#[test]
fn codebook_at_level_six() {
    let code = varshamov_gilbert(32, 4, 16, &RngStream::keyed(1, &[])).unwrap();
    assert_eq!(code.len(), 16);
    assert!(!code.shortfall);
    for (a, u) in code.words.iter().enumerate() {
        assert_eq!(u.len(), 32);
        for v in &code.words[a + 1..] {
            assert!(u.iter().zip(v).filter(|(x, y)| x != y).count() >= 4);
        }
    }
}

#[test]
fn minimax_family_closed_forms() {
    let fam = minimax_family(&minimax_spec(), &RngStream::keyed(2, &[])).unwrap();
    assert_eq!(fam.codebook.block_len, 32);
    assert_eq!(fam.codebook.min_distance, 4);
    assert_eq!(fam.len(), 16);
    let n = 1u64 << 18;
    let h = 0.05 * 2f64.powf(-1.5 * 6.0);
    let floor = 0.05f64.powi(2) / 16.0 * 2f64.powi(-12);
    let members: Vec<CoeffSeq> = (0..fam.len()).map(|m| fam.member(m)).collect();
    let f0 = &fam.f0;
    assert!(check_membership(f0, &fam.params).unwrap().is_member);
    for (a, f) in members.iter().enumerate() {
        assert!(check_membership(f, &fam.params).unwrap().is_member);
        let direct: f64 = f.coeffs().iter().zip(f0.coeffs()).map(|(x, y)| (x - y) * (x - y)).sum();
        let kl = kl_divergence(f0, f, n).unwrap();
        assert!((kl - n as f64 / 2.0 * direct).abs() <= 1e-10 * kl.max(1e-300));
        let weight = fam.codebook.words[a].iter().filter(|&&b| b == 1).count() as f64;
        assert!((kl - n as f64 / 2.0 * h * h * weight).abs() <= 1e-10 * kl);
        assert!(kl <= 2f64.powi(3) / 4.0 * 64.0 * 0.05f64.powi(2));
        for (b, g) in members.iter().enumerate().skip(a + 1) {
            let d = f.l2_dist_sq(g).unwrap();
            let ham = fam.codebook.words[a].iter().zip(&fam.codebook.words[b]).filter(|(x, y)| x != y).count();
            assert!((d - h * h * ham as f64).abs() <= 1e-10 * d);
            assert!(d >= floor);
        }
    }
}

#[test]
fn minimax_ordering_and_room() {
    let mut s = minimax_spec();
    s.r = 2.5;
    assert!(matches!(minimax_family(&s, &RngStream::new(0, 0)), Err(Error::Ordering(_))));
    let mut s = minimax_spec();
    s.delta = 0.8;
    assert!(minimax_family(&s, &RngStream::new(0, 0)).is_err());
}

#[test]
fn fano_formula() {
    let v = fano_lower_bound(16, 0.01, 2.0);
    let want = 2.0 * 4.0 / 5.0 * (1.0 - 0.02 - (0.02 / 16f64.ln()).sqrt());
    assert!((v - want).abs() < 1e-15);
    let small = fano_lower_bound(2, 0.01, 1.0);
    let e = std::f64::consts::E;
    assert!((small - e.sqrt() / (1.0 + e.sqrt()) * (1.0 - 0.02 - 0.02f64.sqrt())).abs() < 1e-15);
    assert!(fano_lower_bound(16, 0.6, 1.0) < 0.0);
}
