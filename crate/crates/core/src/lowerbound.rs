//! Lower-bound constructions.
//!
//! Two families live here. The adversarial sequence `f_m` mixes the smooth
//! profile `2^{-(s'+1/2) l}` on the blocks `Z_l^0` with random sign
//! perturbations `2^{-(r'+1/2) j_i} beta` on `Z_{j_i}^1`; at the calibrated
//! sample sizes `n_m` the sign mixture cannot be told apart from `f_{m-1}`.
//! The minimax family perturbs a rescaled profile `K_1 2^{-(r+1/2) l}` by
//! codewords of a Varshamov-Gilbert code placed on `Z_j^1`, and feeds the
//! Fano-type bound.

use std::ops::RangeInclusive;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{self, Observation, RngStream};
use crate::numeric::{self, ln_cosh, pow2};
use crate::par;
use crate::selfsim::{c_of_s, SelfSimParams};
use crate::sequences::{dyadic_len, CoeffSeq};

/// Largest perturbation level accepted by the constructions.
pub const MAX_LEVEL: u32 = 12;
/// Largest codebook or family size.
pub const MAX_FAMILY: usize = 1 << 12;
/// Candidate budget of the greedy code search.
pub const VG_BUDGET: usize = 1_000_000;
/// Largest `J0` searched for when deriving construction parameters.
const J0_SEARCH: u32 = 64;

/// `(Z_i^0, Z_i^1)`: the first and second halves of `{2^i, ..., 2^{i+1} - 1}`.
pub fn block_partition(i: u32) -> Result<(RangeInclusive<usize>, RangeInclusive<usize>)> {
    if !(1..=62).contains(&i) {
        return Err(invalid(format!("block index must lie in 1..=62, got {i}")));
    }
    let lo = dyadic_len(i);
    let mid = lo + lo / 2;
    Ok((lo..=mid - 1, mid..=2 * lo - 1))
}

/// Largest `c` with `e^{c^2/2} <= 1 + delta^2`.
pub fn calibrate_c(delta: f64) -> f64 {
    (2.0 * (delta * delta).ln_1p()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdversaryConfig {
    pub r: f64,
    pub r_prime: f64,
    pub s: f64,
    pub s_prime: f64,
    pub eps: f64,
    pub delta: f64,
    pub c: f64,
}

impl AdversaryConfig {
    /// Validated configuration with `c = calibrate_c(delta)`.
    pub fn new(r: f64, r_prime: f64, s: f64, s_prime: f64, eps: f64, delta: f64) -> Result<Self> {
        let cfg = Self { r, r_prime, s, s_prime, eps, delta, c: calibrate_c(delta) };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { r, r_prime, s, s_prime, eps, delta, c } = *self;
        if !(eps > 0.0 && eps < 1.0) {
            return Err(invalid(format!("eps must lie in (0, 1), got {eps}")));
        }
        let top = r / (1.0 - eps);
        let chain = [
            ("0 < r", 0.0, r),
            ("r < r'", r, r_prime),
            ("r' < s", r_prime, s),
            ("s < r/(1-eps)", s, top),
            ("s < s'", s, s_prime),
            ("s'(1-eps) < r", s_prime * (1.0 - eps), r),
        ];
        for (name, lhs, rhs) in chain {
            if !(lhs < rhs) {
                return Err(Error::Ordering(format!("{name} fails: {lhs} vs {rhs}")));
            }
        }
        if !(delta > 0.0 && delta <= 0.2) {
            return Err(invalid(format!("delta must lie in (0, 1/5], got {delta}")));
        }
        if !(c > 0.0 && (0.5 * c * c).exp() <= (1.0 + delta * delta) * (1.0 + 1e-12)) {
            return Err(invalid(format!("c = {c} violates e^(c^2/2) <= 1 + delta^2")));
        }
        Ok(())
    }

    /// Perturbation amplitude `2^{-(r'+1/2) j}` on `Z_j^1`.
    pub fn amplitude(&self, j: u32) -> f64 {
        (-(self.r_prime + 0.5) * j as f64).exp2()
    }

    /// Squared Sobolev bound `B(s, s', r', j_m)`; `None` for the pure profile.
    pub fn norm_sq_bound(&self, j_m: Option<u32>) -> f64 {
        let (s, sp, rp) = (self.s, self.s_prime, self.r_prime);
        let smooth = (2.0 * sp + 1.0).exp2() * (1.0 + 1.0 / (2.0 * (sp - s)));
        let rough = j_m.map_or(0.0, |j| {
            let d = 2.0 * s - 2.0 * rp;
            (2.0 * s - 1.0).exp2() * (j as f64 * d).exp2() / (1.0 - (-d).exp2())
        });
        smooth + rough
    }

    /// Lower norm bound `b = 2^{-1/2 - (s' - r)}`.
    pub fn norm_lower(&self) -> f64 {
        (-0.5 - (self.s_prime - self.r)).exp2()
    }

    /// Membership parameters for `f_m` whose last perturbation sits at
    /// `j_m`: `J0` is the first scale from which
    /// `2^{-2s' ceil((1-eps)J)} / 2 >= c(s) B 2^{-2sJ}` holds on.
    pub fn selfsim_params(&self, j_m: Option<u32>) -> Result<SelfSimParams> {
        let b2 = self.norm_sq_bound(j_m);
        let rhs = c_of_s(self.s) * b2;
        let j0 = first_scale_from(|jf| {
            let top = numeric::ceil_snapped((1.0 - self.eps) * jf);
            (-2.0 * self.s_prime * top).exp2() / 2.0 >= rhs * (-2.0 * self.s * jf).exp2() && jf >= top + 1.0
        })?;
        SelfSimParams::new(self.s, self.eps, self.norm_lower(), b2.sqrt(), j0)
    }
}

/// Smallest `J >= 1` with `ok(J')` for all `J <= J' <= J0_SEARCH`.
fn first_scale_from(ok: impl Fn(f64) -> bool) -> Result<u32> {
    let mut start = None;
    for j in 1..=J0_SEARCH {
        match (ok(j as f64), start) {
            (true, None) => start = Some(j),
            (false, _) => start = None,
            _ => {}
        }
    }
    start.ok_or_else(|| invalid(format!("no admissible J0 below {J0_SEARCH}")))
}

fn check_sign_vector(beta: &[i8], expected: usize) -> Result<()> {
    if beta.len() != expected {
        return Err(invalid(format!("sign vector has length {}, expected {expected}", beta.len())));
    }
    if beta.iter().any(|&b| b != 1 && b != -1) {
        return Err(invalid("sign vector entries must be +1 or -1"));
    }
    Ok(())
}

/// Checks a perturbation level sequence: strictly increasing, within the
/// level cap, successive ratios at least `1 + 1/(2 r')`.
pub fn check_level_sequence(cfg: &AdversaryConfig, j_seq: &[u32]) -> Result<()> {
    let ratio = 1.0 + 1.0 / (2.0 * cfg.r_prime);
    for (a, &j) in j_seq.iter().enumerate() {
        if !(1..=MAX_LEVEL).contains(&j) {
            return Err(invalid(format!("perturbation level {j} outside 1..={MAX_LEVEL}")));
        }
        if a > 0 {
            let prev = j_seq[a - 1];
            if j <= prev || (j as f64) < ratio * prev as f64 * (1.0 - 1e-12) {
                return Err(Error::Ordering(format!("j_{} / j_{} = {j}/{prev} below 1 + 1/(2r') = {ratio}", a + 1, a)));
            }
        }
    }
    Ok(())
}

/// `f_m` stored through block `levels` (length `2^{levels+1} - 1`).
pub fn build_adversary_sequence(
    cfg: &AdversaryConfig,
    m: usize,
    j_seq: &[u32],
    betas: &[Vec<i8>],
    levels: u32,
) -> Result<CoeffSeq> {
    cfg.validate()?;
    check_level_sequence(cfg, j_seq)?;
    if m > j_seq.len() || m > betas.len() {
        return Err(invalid(format!("m = {m} exceeds the supplied levels or sign vectors")));
    }
    let top = if m == 0 { 0 } else { j_seq[m - 1] };
    if levels < top.max(1) || levels > 28 {
        return Err(invalid(format!("levels = {levels} must cover the last perturbation and stay <= 28")));
    }
    let mut coeffs = profile_coeffs(cfg.s_prime, 1.0, levels);
    for (&j, beta) in j_seq[..m].iter().zip(&betas[..m]) {
        check_sign_vector(beta, dyadic_len(j - 1))?;
        let a = cfg.amplitude(j);
        let (_, z1) = block_partition(j)?;
        for (k, &b) in z1.zip(beta) {
            coeffs[k - 1] = a * b as f64;
        }
    }
    CoeffSeq::new(coeffs)
}

/// `amp * 2^{-(p+1/2) l}` on each `Z_l^0`, `l = 1..=levels`.
fn profile_coeffs(p: f64, amp: f64, levels: u32) -> Vec<f64> {
    let mut coeffs = vec![0.0; dyadic_len(levels + 1) - 1];
    for l in 1..=levels {
        let lo = dyadic_len(l);
        coeffs[lo - 1..lo - 1 + lo / 2].fill(amp * (-(p + 0.5) * l as f64).exp2());
    }
    coeffs
}

/// Squared distance `||f_m - f_{m-1}||^2 = 2^{-2 r' j_m} / 2`.
pub fn adversary_step_sq(cfg: &AdversaryConfig, j_m: u32) -> f64 {
    (-2.0 * cfg.r_prime * j_m as f64).exp2() / 2.0
}

/// Upper bound `2^{-(2r'+1) j_m} / (2 - 2^{1-2r'})` on `||f_inf - f_m||^2`.
pub fn adversary_tail_bound(cfg: &AdversaryConfig, j_m: u32) -> f64 {
    (-(2.0 * cfg.r_prime + 1.0) * j_m as f64).exp2() / (2.0 - (1.0 - 2.0 * cfg.r_prime).exp2())
}

/// Continues `j_seq` with the smallest admissible levels.
pub fn extend_level_sequence(cfg: &AdversaryConfig, j_seq: &[u32], count: usize) -> Vec<u32> {
    let ratio = 1.0 + 1.0 / (2.0 * cfg.r_prime);
    let mut out = j_seq.to_vec();
    while out.len() < count {
        let next = match out.last() {
            Some(&j) => numeric::ceil_snapped(ratio * j as f64) as u32,
            None => 1,
        };
        out.push(next);
    }
    out
}

/// The limit `f_inf` truncated after block `levels`: stored prefix plus the
/// exact squared mass of the rest. Levels past `j_seq` continue via
/// [`extend_level_sequence`] and carry the amplitude but no stored signs.
pub fn adversary_limit(cfg: &AdversaryConfig, j_seq: &[u32], betas: &[Vec<i8>], levels: u32) -> Result<CoeffSeq> {
    let m = j_seq.iter().take_while(|&&j| j <= levels).count();
    let prefix = build_adversary_sequence(cfg, m, j_seq, betas, levels)?;
    let sp = cfg.s_prime;
    let profile_tail = (-(2.0 * sp) * (levels + 1) as f64).exp2() / 2.0 / (1.0 - (-2.0 * sp).exp2());
    let all = extend_level_sequence(cfg, j_seq, j_seq.len() + 64);
    let rough_tail = numeric::sum(all.iter().filter(|&&j| j > levels).map(|&j| adversary_step_sq(cfg, j)));
    CoeffSeq::with_tail(prefix.into_coeffs(), profile_tail + rough_tail)
}

/// `n_m = round(c 2^{j_m (2r' + 1/2)})`, at least 2.
pub fn sample_size_schedule(cfg: &AdversaryConfig, j_m: u32) -> Result<u64> {
    if j_m < 1 {
        return Err(invalid("j_m must be >= 1"));
    }
    let v = cfg.c * (j_m as f64 * (2.0 * cfg.r_prime + 0.5)).exp2();
    if !(v < 9.0e15) {
        return Err(Error::Overflow(format!("n_m = {v} exceeds exactly representable integers")));
    }
    Ok((v.round() as u64).max(2))
}

/// `E Z^2 = cosh(c 2^{-j/2})^{2^{j-1}}`, evaluated as `exp(2^{j-1} ln cosh)`.
pub fn chi_sq_divergence_mixture(c: f64, j: u32) -> f64 {
    (pow2(j - 1) * ln_cosh(c * (-(j as f64) / 2.0).exp2())).exp()
}

/// Same quantity by averaging `exp(x sum_i R_i)` over every sign vector
/// `R in {-1, 1}^{2^{j-1}}`, `x = c 2^{-j/2}`. Feasible for `j <= 5`.
pub fn chi_sq_divergence_enumerated(c: f64, j: u32) -> Result<f64> {
    if !(1..=5).contains(&j) {
        return Err(invalid(format!("exhaustive enumeration supports j in 1..=5, got {j}")));
    }
    let len = 1u32 << (j - 1);
    let x = c * (-(j as f64) / 2.0).exp2();
    let total = 1u64 << len;
    let sum = numeric::sum((0..total).map(|mask| {
        let plus = mask.count_ones() as f64;
        (x * (2.0 * plus - len as f64)).exp()
    }));
    Ok(sum / total as f64)
}

/// `log Z` for the equal-weight mixture over `base + a beta` on `Z_j^1`
/// against `base`, via the product form
/// `sum_k [ln cosh(n a (y_k - base_k)) - n a^2 / 2]`.
pub fn mixture_log_lr(base: &CoeffSeq, j: u32, amplitude: f64, obs: &Observation) -> Result<f64> {
    let (_, z1) = block_partition(j)?;
    if *z1.end() > obs.y().len() {
        return Err(Error::WindowOverflow { level: j + 1, len: obs.y().len() });
    }
    let n = obs.n() as f64;
    let y = obs.y().coeffs();
    let half = 0.5 * n * amplitude * amplitude;
    Ok(numeric::sum(z1.map(|k| {
        let b = base.get(k).unwrap_or(0.0);
        ln_cosh(n * amplitude * (y[k - 1] - b)) - half
    })))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
    pub reps: usize,
}

impl McEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        Self { mean: numeric::mean(xs), se: numeric::std_error(xs), reps: xs.len() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureChiSq {
    pub j: u32,
    pub n: u64,
    /// `n 2^{-(2r'+1/2) j}` with the rounded `n`.
    pub c_eff: f64,
    pub closed_form: f64,
    pub monte_carlo: McEstimate,
}

const TAG_CHI: u64 = 0x4348_4953;
const TAG_LRT: u64 = 0x4c52_5454;

/// Base sequence for the step at level `j`: the profile through block `j`.
fn step_base(cfg: &AdversaryConfig, j: u32) -> Result<CoeffSeq> {
    build_adversary_sequence(cfg, 0, &[], &[], j)
}

/// Monte Carlo `E Z^2` under `f_{m-1}` at the calibrated `n_m`.
pub fn mixture_chi_sq_mc(cfg: &AdversaryConfig, j: u32, reps: usize, seed: u64) -> Result<MixtureChiSq> {
    cfg.validate()?;
    if !(1..=MAX_LEVEL).contains(&j) {
        return Err(invalid(format!("level {j} outside 1..={MAX_LEVEL}")));
    }
    let n = sample_size_schedule(cfg, j)?;
    let a = cfg.amplitude(j);
    let base = step_base(cfg, j)?;
    let window = dyadic_len(j + 1);
    let draws = par::map_reps(reps, |rep| -> Result<f64> {
        let stream = RngStream::keyed(seed, &[TAG_CHI, j as u64, rep as u64]);
        let obs = model::sample_observation_in_window(&base, n, window, &stream)?;
        Ok((2.0 * mixture_log_lr(&base, j, a, &obs)?).exp())
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let c_eff = n as f64 * (-(2.0 * cfg.r_prime + 0.5) * j as f64).exp2();
    Ok(MixtureChiSq {
        j,
        n,
        c_eff,
        closed_form: chi_sq_divergence_mixture(c_eff, j),
        monte_carlo: McEstimate::from_samples(&draws),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestErrors {
    pub j: u32,
    pub n: u64,
    /// `P_{f_{m-1}}(Z > 1)`.
    pub type1: f64,
    /// `P_mixture(Z <= 1)`.
    pub type2: f64,
    pub total: f64,
    pub se: f64,
    pub floor: f64,
}

/// Errors of the likelihood-ratio test `Z > 1` between `f_{m-1}` and the
/// sign mixture; `floor = 1 - delta`.
pub fn likelihood_ratio_test_errors(cfg: &AdversaryConfig, j: u32, reps: usize, seed: u64) -> Result<TestErrors> {
    cfg.validate()?;
    let n = sample_size_schedule(cfg, j)?;
    let a = cfg.amplitude(j);
    let base = step_base(cfg, j)?;
    let window = dyadic_len(j + 1);
    let (_, z1) = block_partition(j)?;
    let outcomes = par::map_reps(reps, |rep| -> Result<(f64, f64)> {
        let stream = RngStream::keyed(seed, &[TAG_LRT, j as u64, rep as u64]);
        let null = model::sample_observation_in_window(&base, n, window, &stream.child(0))?;
        let reject = (mixture_log_lr(&base, j, a, &null)? > 0.0) as u8 as f64;
        let mut rng = stream.child(1).rng();
        let mut alt = base.coeffs().to_vec();
        for k in z1.clone() {
            alt[k - 1] = if rng.random::<bool>() { a } else { -a };
        }
        let alt = CoeffSeq::new(alt)?;
        let obs = model::sample_observation_in_window(&alt, n, window, &stream.child(2))?;
        let accept = (mixture_log_lr(&base, j, a, &obs)? <= 0.0) as u8 as f64;
        Ok((reject, accept))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let t1: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
    let t2: Vec<f64> = outcomes.iter().map(|o| o.1).collect();
    let (e1, e2) = (McEstimate::from_samples(&t1), McEstimate::from_samples(&t2));
    Ok(TestErrors {
        j,
        n,
        type1: e1.mean,
        type2: e2.mean,
        total: e1.mean + e2.mean,
        se: e1.se.hypot(e2.se),
        floor: 1.0 - cfg.delta,
    })
}

/// `(n/2) ||f - g||^2`.
pub fn kl_divergence(f: &CoeffSeq, g: &CoeffSeq, n: u64) -> Result<f64> {
    Ok(0.5 * n as f64 * f.l2_dist_sq(g)?)
}

/// Binary code with a guaranteed minimum pairwise Hamming distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub block_len: usize,
    pub min_distance: usize,
    pub target_size: usize,
    pub words: Vec<Vec<u8>>,
    /// Set when the candidate budget ran out before `target_size` words.
    pub shortfall: bool,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Smallest pairwise distance by exhaustive comparison.
    pub fn replay_min_distance(&self) -> Option<usize> {
        let mut best = None;
        for (a, u) in self.words.iter().enumerate() {
            for v in &self.words[a + 1..] {
                let d = hamming(u, v);
                best = Some(best.map_or(d, |b: usize| b.min(d)));
            }
        }
        best
    }
}

pub fn hamming(u: &[u8], v: &[u8]) -> usize {
    u.iter().zip(v).filter(|(a, b)| a != b).count()
}

fn pack(bits: &[u8]) -> Vec<u64> {
    bits.chunks(64).map(|c| c.iter().enumerate().fold(0u64, |w, (i, &b)| w | ((b as u64) << i))).collect()
}

fn packed_distance(u: &[u64], v: &[u64]) -> usize {
    u.iter().zip(v).map(|(a, b)| (a ^ b).count_ones() as usize).sum()
}

/// Greedy random code: uniform candidates are kept when at distance at
/// least `min_dist` from every kept word.
pub fn varshamov_gilbert(block_len: usize, min_dist: usize, target_size: usize, rng: &RngStream) -> Result<Codebook> {
    if block_len == 0 || min_dist > block_len {
        return Err(invalid(format!("min distance {min_dist} unreachable with block length {block_len}")));
    }
    if !(2..=MAX_FAMILY).contains(&target_size) {
        return Err(invalid(format!("target size must lie in 2..={MAX_FAMILY}, got {target_size}")));
    }
    let min_dist = min_dist.max(1);
    let mut r = rng.rng();
    let mut words: Vec<Vec<u8>> = Vec::with_capacity(target_size);
    let mut packed: Vec<Vec<u64>> = Vec::with_capacity(target_size);
    let mut tried = 0;
    while words.len() < target_size && tried < VG_BUDGET {
        tried += 1;
        let cand: Vec<u8> = (0..block_len).map(|_| r.random::<bool>() as u8).collect();
        let p = pack(&cand);
        if packed.iter().all(|w| packed_distance(w, &p) >= min_dist) {
            words.push(cand);
            packed.push(p);
        }
    }
    Ok(Codebook { block_len, min_distance: min_dist, target_size, shortfall: words.len() < target_size, words })
}

/// `f_0` and the codebook-indexed perturbations `f_m = f_0 + delta beta_m
/// 2^{-(s+1/2) j}` on `Z_j^1`; members are built on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimaxFamily {
    pub s: f64,
    pub r: f64,
    pub eps: f64,
    pub j: u32,
    pub delta: f64,
    pub k1: f64,
    pub params: SelfSimParams,
    pub f0: CoeffSeq,
    pub codebook: Codebook,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimaxSpec {
    pub s: f64,
    pub r: f64,
    pub eps: f64,
    pub b: f64,
    #[serde(rename = "B")]
    pub big_b: f64,
    pub j: u32,
    pub delta: f64,
    pub levels: u32,
}

impl MinimaxFamily {
    pub fn len(&self) -> usize {
        self.codebook.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codebook.is_empty()
    }

    pub fn perturbation(&self) -> f64 {
        self.delta * (-(self.s + 0.5) * self.j as f64).exp2()
    }

    pub fn member(&self, m: usize) -> CoeffSeq {
        let mut coeffs = self.f0.coeffs().to_vec();
        let (_, z1) = block_partition(self.j).expect("level validated at construction");
        let h = self.perturbation();
        for (k, &b) in z1.zip(&self.codebook.words[m]) {
            coeffs[k - 1] = h * b as f64;
        }
        CoeffSeq::from_vec_unchecked(coeffs)
    }

    /// `(delta^2 / 16) 2^{-2js}`.
    pub fn separation_floor(&self) -> f64 {
        self.delta * self.delta / 16.0 * (-2.0 * self.j as f64 * self.s).exp2()
    }
}

pub fn minimax_family(spec: &MinimaxSpec, rng: &RngStream) -> Result<MinimaxFamily> {
    let MinimaxSpec { s, r, eps, b, big_b, j, delta, levels } = *spec;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    if !(s > 0.0 && s < r && r * (1.0 - eps) < s) {
        return Err(Error::Ordering(format!("need s < r < s/(1-eps), got s = {s}, r = {r}, eps = {eps}")));
    }
    if !(0.0 < b && b < big_b) {
        return Err(invalid(format!("need 0 < b < B, got {b}, {big_b}")));
    }
    let room = (big_b * big_b - b * b) * (1.0 - 2.0 * s).exp2();
    if !(delta > 0.0 && delta * delta < room) {
        return Err(invalid(format!("delta^2 = {} must lie in (0, {room})", delta * delta)));
    }
    if !(1..=MAX_LEVEL).contains(&j) {
        return Err(invalid(format!("level {j} outside 1..={MAX_LEVEL}")));
    }
    if levels <= j || levels > 28 {
        return Err(invalid(format!("levels = {levels} must exceed j = {j} and stay <= 28")));
    }
    let unit = CoeffSeq::from_vec_unchecked(profile_coeffs(r, 1.0, levels));
    let mut k1 = b / unit.sobolev_norm_sq(s)?.sqrt();
    let mut f0 = CoeffSeq::from_vec_unchecked(profile_coeffs(r, k1, levels));
    while f0.sobolev_norm_sq(s)? < b * b {
        k1 = f64::from_bits(k1.to_bits() + 1);
        f0 = CoeffSeq::from_vec_unchecked(profile_coeffs(r, k1, levels));
    }

    let rhs = c_of_s(s) * big_b * big_b;
    let j0 = first_scale_from(|jf| {
        let top = numeric::ceil_snapped((1.0 - eps) * jf);
        k1 * k1 / 2.0 * (-2.0 * r * top).exp2() >= rhs * (-2.0 * s * jf).exp2() && jf >= top + 1.0
    })?;
    let params = SelfSimParams::new(s, eps, b, big_b, j0)?;

    let block_len = dyadic_len(j - 1);
    let min_dist = (pow2(j) / 16.0).ceil() as usize;
    let target = pow2(j) / 16.0;
    if target > 12.0 {
        return Err(invalid(format!("family size 2^{target} exceeds the cap {MAX_FAMILY}")));
    }
    let target = (target.exp2().round() as usize).max(2);
    let codebook = varshamov_gilbert(block_len, min_dist, target, rng)?;
    Ok(MinimaxFamily { s, r, eps, j, delta, k1, params, f0, codebook })
}

/// Fano-type bound `r_n sqrt(M')/(1 + sqrt(M')) (1 - 2 alpha - sqrt(2 alpha / ln M'))`,
/// `M' = max(e, M)`.
pub fn fano_lower_bound(m: usize, alpha_kl: f64, r_n: f64) -> f64 {
    let mbar = (m as f64).max(std::f64::consts::E);
    let root = mbar.sqrt();
    r_n * root / (1.0 + root) * (1.0 - 2.0 * alpha_kl - (2.0 * alpha_kl / mbar.ln()).sqrt())
}
