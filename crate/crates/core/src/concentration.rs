//! Closed-form tail bounds.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Deviation `t` of `X = sum_{i<=n} (g_i^2 - sigma^2)`, `g_i ~ N(0, sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBoundQuery {
    pub n_terms: u64,
    pub sigma_sq: f64,
    pub t: f64,
}

impl TailBoundQuery {
    pub fn new(n_terms: u64, sigma_sq: f64, t: f64) -> Result<Self> {
        if n_terms == 0 {
            return Err(invalid("n_terms must be positive"));
        }
        if !(sigma_sq > 0.0 && sigma_sq.is_finite()) {
            return Err(invalid(format!("sigma_sq must be positive, got {sigma_sq}")));
        }
        if !(t >= 0.0) {
            return Err(invalid(format!("t must be >= 0, got {t}")));
        }
        Ok(Self { n_terms, sigma_sq, t })
    }
}

/// Bound on both `P(X >= t)` and `P(-X >= t)`:
/// `exp(-(t^2 / sigma^4) / (4 (n + t / sigma^2)))`.
pub fn chisq_tail_bound(q: &TailBoundQuery) -> f64 {
    let u = q.t / q.sigma_sq;
    (-(u * u) / (4.0 * (q.n_terms as f64 + u))).exp()
}

/// `P(|N(0, sigma^2)| >= t) <= 2 sigma / (sqrt(2 pi) t) exp(-t^2 / (2 sigma^2))`.
pub fn gaussian_tail_bound(sigma: f64, t: f64) -> f64 {
    2.0 * sigma / ((2.0 * std::f64::consts::PI).sqrt() * t) * (-t * t / (2.0 * sigma * sigma)).exp()
}

/// `2 / (1 - e^{-1/8})^2`.
pub fn lemma1_constant() -> f64 {
    let d = -(-0.125f64).exp_m1();
    2.0 / (d * d)
}

/// Envelopes on `P(jhat >= j*)` and `P(jhat < (1 - eps) j*)`.
pub fn lemma1_envelopes(j_star: u32) -> (f64, f64) {
    let p = (j_star as f64).exp2();
    (lemma1_constant() * (-p / 8.0).exp(), j_star as f64 * (-1.125 * p).exp())
}
