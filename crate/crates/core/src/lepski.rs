//! Resolution grid, Lepski level selection and the under-smoothed level.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{ceil_snapped, floor_snapped, log2_n, pow2};
use crate::sequences::{dyadic_len, CoeffSeq};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LepskiConfig {
    pub s_min: f64,
    pub s_max: f64,
    pub s_prime: f64,
    pub m: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

/// Share of the gap `1 - m` left between `m` and the first-chain bound when
/// `kappa1` is chosen automatically.
const KAPPA1_SLACK: f64 = 0.05;

impl LepskiConfig {
    /// Defaults for a given `m`: `s' = s_max + 1/2`, the smallest `kappa1`
    /// clearing the first chain with slack, `kappa2` midway between
    /// `sqrt((1 + kappa1)/2)` and 1.
    pub fn with_m(s_min: f64, s_max: f64, m: f64) -> Result<Self> {
        if !(s_min > 0.0 && s_max > s_min && s_max.is_finite()) {
            return Err(invalid(format!("need 0 < s_min < s_max, got {s_min}, {s_max}")));
        }
        if !(m > 0.0 && m < 1.0) {
            return Err(invalid(format!("m must lie in (0, 1), got {m}")));
        }
        let target = m + KAPPA1_SLACK * (1.0 - m);
        let kappa1 = (s_min + 0.5) / ((2.0 * s_min + 0.5) / target - s_min);
        let kappa2 = 0.5 * (((1.0 + kappa1) / 2.0).sqrt() + 1.0);
        let cfg = Self { s_min, s_max, s_prime: s_max + 0.5, m, kappa1, kappa2 };
        match validate_config(&cfg).first() {
            None => Ok(cfg),
            Some(v) => Err(invalid(format!("default configuration infeasible: {v}"))),
        }
    }

    /// Defaults driven by the largest `eps` in use: `m` is the midpoint of
    /// `(eps_max (2 s_min + 1/2) / s_min, 1)`.
    pub fn from_eps(s_min: f64, s_max: f64, eps_max: f64) -> Result<Self> {
        let lower = eps_max * (2.0 * s_min + 0.5) / s_min;
        if !(lower < 1.0 && eps_max > 0.0) {
            return Err(invalid(format!("eps_max = {eps_max} leaves no room for m at s_min = {s_min}")));
        }
        Self::with_m(s_min, s_max, 0.5 * (lower + 1.0))
    }

    pub fn grid(&self, n: u64) -> Result<Vec<u32>> {
        resolution_grid(n, self.s_prime)
    }
}

/// One violated inequality, `lhs` should be strictly below `rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigViolation {
    pub inequality: String,
    pub lhs: f64,
    pub rhs: f64,
}

impl std::fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} fails: {} vs {}", self.inequality, self.lhs, self.rhs)
    }
}

/// `(2 s_min + 1/2) / (s_min + (s_min + 1/2) / kappa1)`.
pub fn first_chain_bound(s_min: f64, kappa1: f64) -> f64 {
    (2.0 * s_min + 0.5) / (s_min + (s_min + 0.5) / kappa1)
}

pub fn validate_config(cfg: &LepskiConfig) -> Vec<ConfigViolation> {
    let mut out = Vec::new();
    let mut need = |name: &str, lhs: f64, rhs: f64| {
        if !(lhs < rhs) {
            out.push(ConfigViolation { inequality: name.to_string(), lhs, rhs });
        }
    };
    need("0 < s_min", 0.0, cfg.s_min);
    need("s_min < s_max", cfg.s_min, cfg.s_max);
    need("s_max < s_prime", cfg.s_max, cfg.s_prime);
    need("0 < kappa1", 0.0, cfg.kappa1);
    need("kappa1 < 1", cfg.kappa1, 1.0);
    need("0 < m", 0.0, cfg.m);
    let bound = first_chain_bound(cfg.s_min, cfg.kappa1);
    need("m < (2 s_min + 1/2)/(s_min + (s_min + 1/2)/kappa1)", cfg.m, bound);
    need("(2 s_min + 1/2)/(s_min + (s_min + 1/2)/kappa1) < 1", bound, 1.0);
    let ratio = (1.0 + cfg.kappa1) / (2.0 * cfg.kappa2);
    need("0 < (1 + kappa1)/(2 kappa2)", 0.0, ratio);
    need("(1 + kappa1)/(2 kappa2) < kappa2", ratio, cfg.kappa2);
    need("kappa2 < 1", cfg.kappa2, 1.0);
    out
}

/// Integers `j` with `ceil(log2 n / (2s' + 1)) <= j <= floor(log2 n)`, `j >= 1`.
pub fn resolution_grid(n: u64, s_prime: f64) -> Result<Vec<u32>> {
    if n < 4 {
        return Err(invalid(format!("grid needs n >= 4, got {n}")));
    }
    if !(s_prime > 0.0 && s_prime.is_finite()) {
        return Err(invalid(format!("s' must be positive, got {s_prime}")));
    }
    let l = log2_n(n);
    let lo = ceil_snapped(l / (2.0 * s_prime + 1.0)).max(1.0) as u32;
    let hi = floor_snapped(l) as u32;
    if lo > hi {
        return Err(Error::EmptyGrid { n, s_prime });
    }
    Ok((lo..=hi).collect())
}

/// `K_j y'`: the first `2^j` coordinates.
pub fn linear_estimator(yprime: &CoeffSeq, j: u32) -> Result<CoeffSeq> {
    if dyadic_len(j) > yprime.len() {
        return Err(Error::WindowOverflow { level: j, len: yprime.len() });
    }
    Ok(yprime.truncate(j))
}

fn check_grid(grid: &[u32]) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid("resolution grid is empty"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("resolution grid must be strictly ascending"));
    }
    Ok(())
}

/// Smallest grid `j` with `||f(j) - f(l)||^2 <= 4 * 2^{l+1} / n` for every
/// grid `l > j`.
pub fn lepski_level(yprime: &CoeffSeq, n: u64, grid: &[u32]) -> Result<u32> {
    check_grid(grid)?;
    let top = *grid.last().unwrap();
    if dyadic_len(top) > yprime.len() {
        return Err(Error::WindowOverflow { level: top, len: yprime.len() });
    }
    let base = grid[0];
    // energy[i] = sum over k in (2^{base+i}, 2^{base+i+1}]
    let energy: Vec<f64> =
        (base..top).map(|i| yprime.index_energy(dyadic_len(i) + 1, dyadic_len(i + 1))).collect::<Result<_>>()?;
    let nf = n as f64;
    for (a, &j) in grid.iter().enumerate() {
        let mut dist = 0.0;
        let mut level = j;
        let ok = grid[a + 1..].iter().all(|&l| {
            while level < l {
                dist += energy[(level - base) as usize];
                level += 1;
            }
            dist <= 4.0 * pow2(l + 1) / nf
        });
        if ok {
            return Ok(j);
        }
    }
    unreachable!("the top grid level is always accepted")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleLevel {
    pub j: u32,
    /// False when no grid level met the condition and `j` is the grid top.
    pub attained: bool,
}

/// Smallest grid `j` with `||f||_{s,2}^2 2^{-2js} <= 2^{j+1} / n`.
pub fn oracle_level(f: &CoeffSeq, s: f64, n: u64, grid: &[u32]) -> Result<OracleLevel> {
    check_grid(grid)?;
    let norm_sq = f.sobolev_norm_sq(s)?;
    let nf = n as f64;
    Ok(grid
        .iter()
        .find(|&&j| norm_sq * (-2.0 * j as f64 * s).exp2() <= pow2(j + 1) / nf)
        .map(|&j| OracleLevel { j, attained: true })
        .unwrap_or(OracleLevel { j: *grid.last().unwrap(), attained: false }))
}

/// `(bar_s, hat_s) = (log2 n / (2 jhat) - 1/2, bar_s / (2 kappa2))`.
pub fn smoothness_estimates(jhat: u32, n: u64, kappa2: f64) -> (f64, f64) {
    let bar_s = log2_n(n) / (2.0 * jhat as f64) - 0.5;
    (bar_s, bar_s / (2.0 * kappa2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSelection {
    pub jhat: u32,
    #[serde(rename = "Jn_real")]
    pub jn_real: f64,
    #[serde(rename = "Jhat")]
    pub big_jhat: u32,
    pub bar_s: f64,
    pub hat_s: f64,
}

/// `1/J_n = 1/(2 kappa2 jhat) - (1 - kappa2)/(2 kappa2 log2 n)`,
/// `Jhat = ceil(J_n)`.
pub fn undersmoothed_level(jhat: u32, n: u64, kappa2: f64) -> Result<LevelSelection> {
    if jhat < 1 {
        return Err(invalid("jhat must be >= 1"));
    }
    if !(kappa2 > 0.0 && kappa2 <= 1.0) {
        return Err(invalid(format!("kappa2 must lie in (0, 1], got {kappa2}")));
    }
    let l = log2_n(n);
    let inv = 1.0 / (2.0 * kappa2 * jhat as f64) - (1.0 - kappa2) / (2.0 * kappa2 * l);
    if !(inv > 0.0) {
        return Err(Error::UndersmoothingUndefined { jhat, log2n: l });
    }
    let jn_real = 1.0 / inv;
    let big = ceil_snapped(jn_real);
    if big > 62.0 {
        return Err(Error::Overflow(format!("undersmoothed level {jn_real} is not representable")));
    }
    let (bar_s, hat_s) = smoothness_estimates(jhat, n, kappa2);
    Ok(LevelSelection { jhat, jn_real, big_jhat: big as u32, bar_s, hat_s })
}
