use serde::Serialize;

use crate::ball::{self, ConfidenceBall};
use crate::concentration::lemma1_envelopes;
use crate::lepski::{self, LepskiConfig};
use crate::model::{self, default_window, RngStream};
use crate::numeric::{self, log2_n, quantile_sorted};
use crate::par;
use crate::selfsim::{check_membership, validate_eps, EpsTable, MembershipReport, SelfSimParams};
use crate::sequences::{dyadic_len, CoeffSeq};

use super::{ExperimentConfig, HarnessError};

const TAG_COVERAGE: u64 = 1;
const TAG_DIAMETER: u64 = 2;
const TAG_LEPSKI: u64 = 3;

/// Deepest level the second half-sample may be extended to.
pub const MAX_EXTENDED_LEVEL: u32 = 23;

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub allow_nonselfsim: bool,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateReport {
    pub membership: MembershipReport,
    pub eps_valid: bool,
    pub passed: bool,
}

/// Membership of the truth plus the `eps` restriction on the Lepski window.
pub fn check_selfsim(cfg: &ExperimentConfig, truth: &CoeffSeq) -> Result<GateReport, HarnessError> {
    let p = cfg.require_selfsim()?;
    let membership = check_membership(truth, p)?;
    let eps_valid = match &cfg.lepski {
        Some(l) => {
            let table = EpsTable::constant(p.eps, l.s_min, l.s_max, cfg.eps_grid_points)?;
            validate_eps(&table, l.m, l.s_min, l.s_max)?
        }
        None => true,
    };
    let passed = membership.is_member && eps_valid;
    Ok(GateReport { membership, eps_valid, passed })
}

fn gate(cfg: &ExperimentConfig, truth: &CoeffSeq, opts: &RunOptions) -> Result<GateReport, HarnessError> {
    let report = check_selfsim(cfg, truth)?;
    if !report.passed && !opts.allow_nonselfsim {
        return Err(HarnessError::Gate(format!(
            "member = {}, failing scales {:?}, norm_sq = {}, eps valid = {}",
            report.membership.is_member, report.membership.failures, report.membership.norm_sq, report.eps_valid
        )));
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepOutcome {
    pub covered: bool,
    pub diameter: f64,
    pub jhat: u32,
    pub big_jhat: u32,
    pub empty: bool,
}

/// Everything one replication at a fixed `n` needs.
#[derive(Debug, Clone)]
pub struct CoverageTask {
    truth: CoeffSeq,
    observed: CoeffSeq,
    windowed: CoeffSeq,
    n: u64,
    lepski: LepskiConfig,
    alpha: f64,
    seed: u64,
    tag: u64,
}

impl CoverageTask {
    pub fn new(truth: &CoeffSeq, n: u64, lepski: LepskiConfig, alpha: f64, seed: u64, tag: u64) -> crate::Result<Self> {
        let window = default_window(n);
        let stored = window.min(truth.len());
        let observed = CoeffSeq::new(truth.coeffs()[..stored].to_vec())?;
        let rest = if truth.len() > stored { truth.index_energy(stored + 1, truth.len())? } else { 0.0 };
        let windowed = CoeffSeq::with_tail(observed.coeffs().to_vec(), rest)?;
        Ok(Self { truth: truth.clone(), observed, windowed, n, lepski, alpha, seed, tag })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// The ball of replication `rep`.
    pub fn ball(&self, rep: usize) -> crate::Result<ConfidenceBall> {
        let stream = RngStream::keyed(self.seed, &[self.tag, self.n, rep as u64]);
        let window = default_window(self.n);
        let obs = model::sample_observation_in_window(&self.observed, self.n, window, &stream.child(0))?;
        let split = model::split_sample(&obs, &stream.child(1));
        let (center, sel) = ball::select(&split, &self.lepski)?;
        let need = sel.big_jhat;
        if need > MAX_EXTENDED_LEVEL {
            return Err(crate::Error::WindowOverflow { level: need, len: dyadic_len(MAX_EXTENDED_LEVEL) });
        }
        let ydouble = if dyadic_len(need) > window {
            model::extend_half_sample(&split.ydouble, &self.truth, self.n, dyadic_len(need), &stream.child(2))?
        } else {
            split.ydouble
        };
        ConfidenceBall::from_parts(center, sel, &ydouble, self.n, self.alpha)
    }

    pub fn rep(&self, rep: usize) -> crate::Result<RepOutcome> {
        let ball = self.ball(rep)?;
        Ok(RepOutcome {
            covered: ball.contains(&self.windowed)?,
            diameter: ball.diameter(),
            jhat: ball.selection.jhat,
            big_jhat: ball.big_jhat,
            empty: ball.is_empty(),
        })
    }

    pub fn run(&self, reps: usize) -> crate::Result<Vec<RepOutcome>> {
        par::map_reps(reps, |r| self.rep(r)).into_iter().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverageRow {
    pub n: u64,
    pub reps: usize,
    pub alpha: f64,
    pub coverage: f64,
    pub mc_se: f64,
    pub median_diam: f64,
    pub q10_diam: f64,
    pub q90_diam: f64,
    #[serde(rename = "mean_Jhat")]
    pub mean_big_jhat: f64,
    pub empty_rate: f64,
}

impl CoverageRow {
    fn aggregate(n: u64, alpha: f64, outcomes: &[RepOutcome]) -> Self {
        let reps = outcomes.len();
        let frac = |f: &dyn Fn(&RepOutcome) -> bool| outcomes.iter().filter(|o| f(o)).count() as f64 / reps as f64;
        let coverage = frac(&|o| o.covered);
        let mut diam: Vec<f64> = outcomes.iter().map(|o| o.diameter).collect();
        diam.sort_by(f64::total_cmp);
        Self {
            n,
            reps,
            alpha,
            coverage,
            mc_se: (coverage * (1.0 - coverage) / reps as f64).sqrt(),
            median_diam: quantile_sorted(&diam, 0.5),
            q10_diam: quantile_sorted(&diam, 0.1),
            q90_diam: quantile_sorted(&diam, 0.9),
            mean_big_jhat: numeric::mean(&outcomes.iter().map(|o| o.big_jhat as f64).collect::<Vec<_>>()),
            empty_rate: frac(&|o| o.empty),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageResult {
    pub gate: GateReport,
    pub rows: Vec<CoverageRow>,
}

fn sweep(cfg: &ExperimentConfig, opts: &RunOptions, tag: u64) -> Result<(GateReport, Vec<CoverageRow>), HarnessError> {
    let truth = cfg.require_truth()?.build()?;
    let lepski = *cfg.require_lepski()?;
    let grid = cfg.require_grid()?.to_vec();
    let report = gate(cfg, &truth, opts)?;
    let rows = par::with_threads(opts.threads, || {
        grid.iter()
            .map(|&n| {
                let task = CoverageTask::new(&truth, n, lepski, cfg.alpha, cfg.seed, tag)?;
                Ok(CoverageRow::aggregate(n, cfg.alpha, &task.run(cfg.reps)?))
            })
            .collect::<crate::Result<Vec<_>>>()
    })?;
    Ok((report, rows))
}

pub fn run_coverage(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<CoverageResult, HarnessError> {
    let (gate, rows) = sweep(cfg, opts, TAG_COVERAGE)?;
    Ok(CoverageResult { gate, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiameterReport {
    pub gate: GateReport,
    pub rows: Vec<CoverageRow>,
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
    /// `-s/(2s+1)` for the configured smoothness.
    pub target_slope: f64,
}

/// Least squares of `y` on `x`: `(slope, intercept, residuals)`.
fn ols(x: &[f64], y: &[f64]) -> (f64, f64, Vec<f64>) {
    let mx = numeric::mean(x);
    let my = numeric::mean(y);
    let sxy = numeric::sum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    let sxx = numeric::sum(x.iter().map(|a| (a - mx) * (a - mx)));
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = x.iter().zip(y).map(|(a, b)| b - (intercept + slope * a)).collect();
    (slope, intercept, residuals)
}

pub fn run_diameter_scaling(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<DiameterReport, HarnessError> {
    if cfg.require_grid()?.len() < 3 {
        return Err(HarnessError::Config("diameter scaling needs at least 3 values in n_grid".into()));
    }
    let (gate, rows) = sweep(cfg, opts, TAG_DIAMETER)?;
    if let Some(r) = rows.iter().find(|r| !(r.median_diam > 0.0)) {
        return Err(HarnessError::Numerical(crate::Error::Overflow(format!(
            "median diameter at n = {} is {}, log-log fit undefined",
            r.n, r.median_diam
        ))));
    }
    let x: Vec<f64> = rows.iter().map(|r| log2_n(r.n)).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.median_diam.log2()).collect();
    let (slope, intercept, residuals) = ols(&x, &y);
    let s = cfg.require_selfsim()?.s;
    Ok(DiameterReport { gate, rows, slope, intercept, residuals, target_slope: -s / (2.0 * s + 1.0) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LepskiDiagRow {
    pub n: u64,
    pub reps: usize,
    pub grid: Vec<u32>,
    pub j_star: u32,
    pub j_star_attained: bool,
    /// `(j, count)` over the grid.
    pub histogram: Vec<(u32, usize)>,
    pub freq_sandwich: f64,
    pub freq_over: f64,
    pub se_over: f64,
    pub freq_under: f64,
    pub se_under: f64,
    pub envelope_a: f64,
    pub envelope_b: f64,
    /// Whether `j* >= J0`, the range where the second envelope applies.
    pub envelope_b_applies: bool,
    pub over_dominated: bool,
    pub under_dominated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LepskiDiagnostics {
    pub gate: GateReport,
    pub rows: Vec<LepskiDiagRow>,
}

fn binomial_se(p: f64, reps: usize) -> f64 {
    (p * (1.0 - p) / reps as f64).sqrt()
}

fn lepski_row(
    truth: &CoeffSeq,
    p: &SelfSimParams,
    lepski: &LepskiConfig,
    n: u64,
    reps: usize,
    seed: u64,
) -> crate::Result<LepskiDiagRow> {
    let grid = lepski.grid(n)?;
    let oracle = lepski::oracle_level(truth, p.s, n, &grid)?;
    let window = default_window(n);
    let observed = CoeffSeq::new(truth.coeffs()[..window.min(truth.len())].to_vec())?;
    let jhats = par::map_reps(reps, |rep| -> crate::Result<u32> {
        let stream = RngStream::keyed(seed, &[TAG_LEPSKI, n, rep as u64]);
        let obs = model::sample_observation_in_window(&observed, n, window, &stream.child(0))?;
        let split = model::split_sample(&obs, &stream.child(1));
        lepski::lepski_level(&split.yprime, n, &grid)
    })
    .into_iter()
    .collect::<crate::Result<Vec<_>>>()?;

    let js = oracle.j;
    let lower = (1.0 - p.eps) * js as f64;
    let freq = |f: &dyn Fn(u32) -> bool| jhats.iter().filter(|&&j| f(j)).count() as f64 / reps as f64;
    let freq_over = freq(&|j| j >= js);
    let freq_under = freq(&|j| (j as f64) < lower);
    let (envelope_a, envelope_b) = lemma1_envelopes(js);
    let (se_over, se_under) = (binomial_se(freq_over, reps), binomial_se(freq_under, reps));
    Ok(LepskiDiagRow {
        n,
        reps,
        histogram: grid.iter().map(|&g| (g, jhats.iter().filter(|&&j| j == g).count())).collect(),
        grid,
        j_star: js,
        j_star_attained: oracle.attained,
        freq_sandwich: freq(&|j| (j as f64) >= lower && j <= js),
        freq_over,
        se_over,
        freq_under,
        se_under,
        envelope_a,
        envelope_b,
        envelope_b_applies: js >= p.j0,
        over_dominated: freq_over <= envelope_a + 3.0 * se_over,
        under_dominated: freq_under <= envelope_b + 3.0 * se_under,
    })
}

pub fn run_lepski_diag(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<LepskiDiagnostics, HarnessError> {
    let truth = cfg.require_truth()?.build()?;
    let lepski = *cfg.require_lepski()?;
    let p = *cfg.require_selfsim()?;
    let grid = cfg.require_grid()?.to_vec();
    let report = gate(cfg, &truth, opts)?;
    let rows = par::with_threads(opts.threads, || {
        grid.iter().map(|&n| lepski_row(&truth, &p, &lepski, n, cfg.reps, cfg.seed)).collect::<crate::Result<Vec<_>>>()
    })?;
    Ok(LepskiDiagnostics { gate: report, rows })
}
