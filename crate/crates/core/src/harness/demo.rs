//! Lower-bound demonstration: builds both families, checks them, and
//! compares closed forms with Monte Carlo.

use std::path::Path;

use rand::Rng;
use serde::Serialize;

use crate::lowerbound::{
    self, adversary_limit, adversary_step_sq, adversary_tail_bound, build_adversary_sequence,
    chi_sq_divergence_enumerated, chi_sq_divergence_mixture, fano_lower_bound, kl_divergence,
    likelihood_ratio_test_errors, minimax_family, mixture_chi_sq_mc, sample_size_schedule, McEstimate, MixtureChiSq,
    TestErrors,
};
use crate::model::{self, RngStream};
use crate::numeric;
use crate::par;
use crate::selfsim::{check_membership, MembershipReport, SelfSimParams};
use crate::sequences::{dyadic_len, CoeffSeq};

use super::{AdversarySection, ExperimentConfig, HarnessError, MinimaxSection, RunOptions};

const TAG_BETA: u64 = 0x4245_5441;
const TAG_CODE: u64 = 0x434f_4445;
const TAG_RISK: u64 = 0x5249_534b;
const TAG_CHI: u64 = 0x4348_4931;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdversaryMember {
    pub m: usize,
    pub j_m: Option<u32>,
    pub n_m: Option<u64>,
    pub file: String,
    pub params: SelfSimParams,
    pub membership: MembershipReport,
    pub step_dist_sq: Option<f64>,
    pub step_dist_sq_closed: Option<f64>,
    pub limit_dist_sq: f64,
    pub limit_dist_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSqIdentity {
    pub j: u32,
    pub c: f64,
    pub closed_form: f64,
    pub enumerated: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdversaryReport {
    pub section: AdversarySection,
    pub members: Vec<AdversaryMember>,
    pub chi_sq_exact: Vec<ChiSqIdentity>,
    pub chi_sq_mc: Vec<MixtureChiSq>,
    pub test: TestErrors,
    pub all_members_selfsimilar: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimaxMember {
    pub m: usize,
    pub file: String,
    pub membership: MembershipReport,
    pub kl: f64,
    pub kl_closed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimaxReport {
    pub section: MinimaxSection,
    pub k1: f64,
    pub params: SelfSimParams,
    pub n: u64,
    pub f0_membership: MembershipReport,
    pub members: Vec<MinimaxMember>,
    pub codebook_size: usize,
    pub codebook_shortfall: bool,
    pub codebook_min_hamming: Option<usize>,
    pub min_separation_sq: f64,
    pub separation_floor: f64,
    pub max_separation_error: f64,
    pub max_kl_error: f64,
    pub r_n: f64,
    pub alpha_kl: f64,
    pub fano_bound: f64,
    pub risk: McEstimate,
    pub fano_consistent: bool,
    pub all_members_selfsimilar: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundReport {
    pub seed: u64,
    pub adversary: Option<AdversaryReport>,
    pub minimax: Option<MinimaxReport>,
}

fn random_signs(seed: u64, i: usize, len: usize) -> Vec<i8> {
    let mut rng = RngStream::keyed(seed, &[TAG_BETA, i as u64]).rng();
    (0..len).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
}

/// Squared mass of `amp 2^{-(p+1/2) l}` on `Z_l^0` over `l > levels`.
fn profile_tail(p: f64, amp: f64, levels: u32) -> f64 {
    amp * amp * (-(2.0 * p) * (levels + 1) as f64).exp2() / 2.0 / (1.0 - (-2.0 * p).exp2())
}

fn write_seq(dir: Option<&Path>, name: &str, f: &CoeffSeq) -> Result<String, HarnessError> {
    if let Some(d) = dir {
        std::fs::create_dir_all(d)?;
        f.write_file(d.join(name))?;
    }
    Ok(format!("families/{name}"))
}

fn adversary_demo(sec: &AdversarySection, seed: u64, dir: Option<&Path>) -> Result<AdversaryReport, HarnessError> {
    let cfg = &sec.config;
    let betas: Vec<Vec<i8>> =
        sec.j_seq.iter().enumerate().map(|(i, &j)| random_signs(seed, i, dyadic_len(j - 1))).collect();
    let top = sec.j_seq.last().copied().unwrap_or(1);
    let short_levels = top + 1;
    let limit = adversary_limit(cfg, &sec.j_seq, &betas, short_levels)?;

    let mut members = Vec::new();
    let mut prev: Option<CoeffSeq> = None;
    for m in 0..=sec.j_seq.len() {
        let j_m = m.checked_sub(1).map(|i| sec.j_seq[i]);
        let f = build_adversary_sequence(cfg, m, &sec.j_seq, &betas, sec.levels)?;
        let params = cfg.selfsim_params(j_m)?;
        let membership = check_membership(&f, &params)?;
        let step = match &prev {
            Some(p) => Some(f.l2_dist_sq(p)?),
            None => None,
        };
        let short = build_adversary_sequence(cfg, m, &sec.j_seq, &betas, short_levels)?;
        let tail = profile_tail(cfg.s_prime, 1.0, short_levels);
        let file =
            write_seq(dir, &format!("adversary_m{m}.txt"), &CoeffSeq::with_tail(short.coeffs().to_vec(), tail)?)?;
        members.push(AdversaryMember {
            m,
            j_m,
            n_m: j_m.map(|j| sample_size_schedule(cfg, j)).transpose()?,
            file,
            params,
            membership,
            step_dist_sq: step,
            step_dist_sq_closed: j_m.filter(|_| m > 0).map(|j| adversary_step_sq(cfg, j)),
            limit_dist_sq: limit.l2_dist_sq(&short)?,
            limit_dist_bound: j_m.map(|j| adversary_tail_bound(cfg, j)),
        });
        prev = Some(f);
    }
    drop(prev);

    let chi_sq_exact = (2..=5)
        .map(|j| {
            Ok(ChiSqIdentity {
                j,
                c: cfg.c,
                closed_form: chi_sq_divergence_mixture(cfg.c, j),
                enumerated: chi_sq_divergence_enumerated(cfg.c, j)?,
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let chi_sq_mc = sec
        .chi_levels
        .iter()
        .map(|&j| mixture_chi_sq_mc(cfg, j, sec.chi_reps, seed ^ TAG_CHI))
        .collect::<crate::Result<Vec<_>>>()?;
    let test = likelihood_ratio_test_errors(cfg, sec.test_level, sec.test_reps, seed)?;
    let all = members.iter().all(|m| m.membership.is_member);
    Ok(AdversaryReport { section: sec.clone(), members, chi_sq_exact, chi_sq_mc, test, all_members_selfsimilar: all })
}

fn minimax_demo(sec: &MinimaxSection, seed: u64, dir: Option<&Path>) -> Result<MinimaxReport, HarnessError> {
    let spec = &sec.spec;
    let fam = minimax_family(spec, &RngStream::keyed(seed, &[TAG_CODE]))?;
    let j = fam.j;
    let n = (j as f64 * (2.0 * fam.s + 1.0)).exp2().round() as u64;
    let f0_membership = check_membership(&fam.f0, &fam.params)?;
    let short = j + 1;
    let tail = profile_tail(fam.r, fam.k1, short);
    let shorten = |f: &CoeffSeq| CoeffSeq::with_tail(f.truncate(short + 1).into_coeffs(), tail);
    let f0_short = fam.f0.truncate(short + 1);
    write_seq(dir, "minimax_f0.txt", &shorten(&fam.f0)?)?;

    let h2 = fam.perturbation() * fam.perturbation();
    let mut members = Vec::new();
    let mut shorts = vec![f0_short.clone()];
    for m in 0..fam.len() {
        let f = fam.member(m);
        let membership = check_membership(&f, &fam.params)?;
        let fs = f.truncate(short + 1);
        let weight = fam.codebook.words[m].iter().filter(|&&b| b == 1).count() as f64;
        members.push(MinimaxMember {
            m,
            file: write_seq(dir, &format!("minimax_m{m}.txt"), &shorten(&f)?)?,
            membership,
            kl: kl_divergence(&f0_short, &fs, n)?,
            kl_closed: 0.5 * n as f64 * h2 * weight,
        });
        shorts.push(fs);
    }

    let mut min_all = f64::INFINITY;
    let mut min_members = f64::INFINITY;
    let mut max_sep_err: f64 = 0.0;
    for a in 0..shorts.len() {
        for b in a + 1..shorts.len() {
            let d = shorts[a].l2_dist_sq(&shorts[b])?;
            min_all = min_all.min(d);
            if a > 0 {
                min_members = min_members.min(d);
                let ham = lowerbound::hamming(&fam.codebook.words[a - 1], &fam.codebook.words[b - 1]);
                max_sep_err = max_sep_err.max((d - h2 * ham as f64).abs());
            }
        }
    }
    let r_n = 0.5 * min_all.sqrt();
    let mean_kl = numeric::mean(&members.iter().map(|m| m.kl).collect::<Vec<_>>());
    let mbar = (fam.len() as f64).max(std::f64::consts::E);
    let alpha_kl = mean_kl / mbar.ln();
    let fano_bound = fano_lower_bound(fam.len(), alpha_kl, r_n);

    // Projection estimator at level j + 1 under each hypothesis.
    let beyond = fam.f0.index_energy(dyadic_len(short) + 1, fam.f0.len())?;
    let window = dyadic_len(short);
    let mut risk = McEstimate { mean: f64::NEG_INFINITY, se: 0.0, reps: sec.reps };
    for (h, fs) in shorts.iter().enumerate() {
        let head = fs.truncate(short);
        let errs = par::map_reps(sec.reps, |rep| -> crate::Result<f64> {
            let stream = RngStream::keyed(seed, &[TAG_RISK, h as u64, rep as u64]);
            let obs = model::sample_observation_in_window(&head, n, window, &stream)?;
            Ok((obs.y().l2_dist_sq(&head)? + beyond).sqrt())
        })
        .into_iter()
        .collect::<crate::Result<Vec<_>>>()?;
        let est = McEstimate::from_samples(&errs);
        if est.mean > risk.mean {
            risk = est;
        }
    }
    let max_kl_error = members.iter().map(|m| (m.kl - m.kl_closed).abs()).fold(0.0, f64::max);
    let all = f0_membership.is_member && members.iter().all(|m| m.membership.is_member);
    Ok(MinimaxReport {
        section: sec.clone(),
        k1: fam.k1,
        params: fam.params,
        n,
        f0_membership,
        codebook_size: fam.len(),
        codebook_shortfall: fam.codebook.shortfall,
        codebook_min_hamming: fam.codebook.replay_min_distance(),
        members,
        min_separation_sq: min_members,
        separation_floor: fam.separation_floor(),
        max_separation_error: max_sep_err,
        max_kl_error,
        r_n,
        alpha_kl,
        fano_bound,
        fano_consistent: fano_bound <= risk.mean + 3.0 * risk.se,
        risk,
        all_members_selfsimilar: all,
    })
}

/// Runs whichever of the two constructions the config describes. Sequence
/// files go to `out/families/` when `out` is given.
pub fn run_lowerbound_demo(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
    out: Option<&Path>,
) -> Result<LowerBoundReport, HarnessError> {
    if cfg.adversary.is_none() && cfg.minimax.is_none() {
        return Err(HarnessError::Config("lowerbound needs adversary.* or minimax.* keys".into()));
    }
    let dir = out.map(|o| o.join("families"));
    par::with_threads(opts.threads, || {
        let adversary = cfg.adversary.as_ref().map(|a| adversary_demo(a, cfg.seed, dir.as_deref())).transpose()?;
        let minimax = cfg.minimax.as_ref().map(|m| minimax_demo(m, cfg.seed, dir.as_deref())).transpose()?;
        Ok(LowerBoundReport { seed: cfg.seed, adversary, minimax })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub family: &'static str,
    pub m: Option<usize>,
    pub file: String,
    pub is_member: bool,
}

/// Index of the sequence files written by [`run_lowerbound_demo`].
pub fn manifest(report: &LowerBoundReport) -> Vec<ManifestEntry> {
    let mut out = Vec::new();
    if let Some(a) = &report.adversary {
        out.extend(a.members.iter().map(|m| ManifestEntry {
            family: "adversary",
            m: Some(m.m),
            file: m.file.clone(),
            is_member: m.membership.is_member,
        }));
    }
    if let Some(mm) = &report.minimax {
        out.push(ManifestEntry {
            family: "minimax",
            m: None,
            file: "families/minimax_f0.txt".into(),
            is_member: mm.f0_membership.is_member,
        });
        out.extend(mm.members.iter().map(|m| ManifestEntry {
            family: "minimax",
            m: Some(m.m),
            file: m.file.clone(),
            is_member: m.membership.is_member,
        }));
    }
    out
}
