//! Self-similar Sobolev classes.
//!
//! A sequence is self-similar with parameters `(s, eps, b, B, J0)` when its
//! Sobolev norm lies in `[b, B]` and, for every scale `J >= J0`,
//!
//! ```text
//! sum_{k = 2^{J(1-eps)}}^{2^J} f_k^2 >= c(s) ||f||_{s,2}^2 2^{-2Js}.
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::log2_n;
use crate::sequences::{dyadic_len, CoeffSeq};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfSimParams {
    pub s: f64,
    pub eps: f64,
    pub b: f64,
    #[serde(rename = "B")]
    pub big_b: f64,
    #[serde(rename = "J0")]
    pub j0: u32,
    /// Block constant; `None` means [`c_of_s`].
    pub c: Option<f64>,
}

impl SelfSimParams {
    pub fn new(s: f64, eps: f64, b: f64, big_b: f64, j0: u32) -> Result<Self> {
        let p = Self { s, eps, b, big_b, j0, c: None };
        p.validate()?;
        Ok(p)
    }

    pub fn with_c(mut self, c: f64) -> Result<Self> {
        self.c = Some(c);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(invalid(format!("s must be positive, got {}", self.s)));
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(invalid(format!("eps must lie in (0, 1], got {}", self.eps)));
        }
        if !(self.b > 0.0 && self.b < self.big_b && self.big_b.is_finite()) {
            return Err(invalid(format!("need 0 < b < B, got b = {}, B = {}", self.b, self.big_b)));
        }
        if self.j0 < 1 {
            return Err(invalid("J0 must be >= 1"));
        }
        if let Some(c) = self.c {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(invalid(format!("c must be >= 0, got {c}")));
            }
        }
        Ok(())
    }

    pub fn block_constant(&self) -> f64 {
        self.c.unwrap_or_else(|| c_of_s(self.s))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub is_member: bool,
    pub norm_sq: f64,
    pub failures: Vec<u32>,
    #[serde(rename = "J_checked")]
    pub j_checked: u32,
}

/// `c(s) = 16 * 2^{2s+1}`.
pub fn c_of_s(s: f64) -> f64 {
    16.0 * (2.0 * s + 1.0).exp2()
}

fn checked_range(f: &CoeffSeq, j0: u32) -> Result<u32> {
    if !f.is_finite_support() {
        return Err(Error::SobolevUndefinedForTail);
    }
    let len = f.len();
    if len < dyadic_len(j0) {
        return Err(Error::SupportTooSmall { len, j0 });
    }
    Ok((log2_n(len as u64).floor() as u32).saturating_sub(1))
}

pub fn check_membership(f: &CoeffSeq, p: &SelfSimParams) -> Result<MembershipReport> {
    p.validate()?;
    let j_checked = checked_range(f, p.j0)?;
    let norm_sq = f.sobolev_norm_sq(p.s)?;
    let c = p.block_constant();
    let mut failures = Vec::new();
    for j in p.j0..=j_checked {
        let jf = j as f64;
        let energy = f.block_energy((jf * (1.0 - p.eps)).exp2(), jf.exp2())?;
        if energy < c * norm_sq * (-2.0 * jf * p.s).exp2() {
            failures.push(j);
        }
    }
    let norm_ok = p.b * p.b <= norm_sq && norm_sq <= p.big_b * p.big_b;
    Ok(MembershipReport { is_member: norm_ok && failures.is_empty(), norm_sq, failures, j_checked })
}

/// Comparison condition with window `[2^J / rho, 2^J]` and lower bound
/// `eta B^2 2^{-2Js}`; the norm part checks `||f||_{s,2} <= B`.
pub fn check_bayes_selfsim(f: &CoeffSeq, s: f64, big_b: f64, eta: f64, rho: f64, j0: u32) -> Result<MembershipReport> {
    if !(rho > 1.0) {
        return Err(invalid(format!("rho must exceed 1, got {rho}")));
    }
    if !(eta >= 0.0) {
        return Err(invalid(format!("eta must be >= 0, got {eta}")));
    }
    if j0 < 1 {
        return Err(invalid("J0 must be >= 1"));
    }
    let j_checked = checked_range(f, j0)?;
    let norm_sq = f.sobolev_norm_sq(s)?;
    let mut failures = Vec::new();
    for j in j0..=j_checked {
        let top = (j as f64).exp2();
        let energy = f.block_energy(top / rho, top)?;
        if energy < eta * big_b * big_b * (-2.0 * j as f64 * s).exp2() {
            failures.push(j);
        }
    }
    let is_member = norm_sq <= big_b * big_b && failures.is_empty();
    Ok(MembershipReport { is_member, norm_sq, failures, j_checked })
}

/// `eps(s)` tabulated on an ascending grid of smoothness values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsTable {
    pub points: Vec<(f64, f64)>,
}

impl EpsTable {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("eps table is empty"));
        }
        if let Some(&(s, e)) = points.iter().find(|(s, e)| !(*s > 0.0 && *e > 0.0 && *e < 1.0)) {
            return Err(invalid(format!("eps table entry ({s}, {e}) outside s > 0, 0 < eps < 1")));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self { points })
    }

    /// `count` evenly spaced grid points on `[s_min, s_max]`.
    pub fn from_fn(s_min: f64, s_max: f64, count: usize, eps: impl Fn(f64) -> f64) -> Result<Self> {
        let count = count.max(2);
        let step = (s_max - s_min) / (count - 1) as f64;
        Self::new(
            (0..count)
                .map(|i| {
                    let s = if i + 1 == count { s_max } else { s_min + step * i as f64 };
                    (s, eps(s))
                })
                .collect(),
        )
    }

    pub fn constant(eps: f64, s_min: f64, s_max: f64, count: usize) -> Result<Self> {
        Self::from_fn(s_min, s_max, count, |_| eps)
    }

    pub fn max_eps(&self) -> f64 {
        self.points.iter().map(|p| p.1).fold(0.0, f64::max)
    }
}

/// True iff `eps(s) (2s + 1/2) / s <= m` at every grid point.
pub fn validate_eps(table: &EpsTable, m: f64, s_min: f64, s_max: f64) -> Result<bool> {
    if !(m > 0.0 && m < 1.0) {
        return Err(invalid(format!("m must lie in (0, 1), got {m}")));
    }
    let first = table.points.first().map_or(f64::INFINITY, |p| p.0);
    let last = table.points.last().map_or(f64::NEG_INFINITY, |p| p.0);
    if first > s_min || last < s_max {
        return Err(invalid(format!("eps grid [{first}, {last}] does not cover [{s_min}, {s_max}]")));
    }
    const ROUNDING: f64 = 1e-12;
    Ok(table.points.iter().all(|&(s, e)| e * (2.0 * s + 0.5) / s <= m * (1.0 + ROUNDING)))
}

/// Places `amplitude * 2^{-(s+1/2) l}` on the first half `Z_l^0` of every
/// dyadic block `l = 1..=levels`; length `2^{levels+1} - 1`.
pub fn make_dyadic_selfsim(s: f64, levels: u32, amplitude: f64) -> Result<CoeffSeq> {
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(invalid(format!("amplitude must be positive, got {amplitude}")));
    }
    if !(s.is_finite() && s > -0.5) {
        return Err(invalid(format!("profile exponent must exceed -1/2, got {s}")));
    }
    if !(1..=30).contains(&levels) {
        return Err(invalid(format!("levels must lie in 1..=30, got {levels}")));
    }
    let len = dyadic_len(levels + 1) - 1;
    let mut coeffs = vec![0.0; len];
    for l in 1..=levels {
        let v = amplitude * (-(s + 0.5) * l as f64).exp2();
        let lo = dyadic_len(l);
        coeffs[lo - 1..lo - 1 + lo / 2].fill(v);
    }
    CoeffSeq::new(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert_eq!(c_of_s(1.0), 128.0);
        assert_eq!(c_of_s(0.5), 64.0);
        assert_eq!(c_of_s(2.0), 512.0);
    }

    #[test]
    fn unit_vector_fails_every_scale() {
        let mut v = vec![0.0; 64];
        v[0] = 2.0;
        let f = CoeffSeq::new(v).unwrap();
        let p = SelfSimParams::new(1.0, 0.5, 2.0, 3.0, 1).unwrap();
        let r = check_membership(&f, &p).unwrap();
        assert!(!r.is_member);
        assert_eq!(r.j_checked, 5);
        assert_eq!(r.failures, vec![1, 2, 3, 4, 5]);
        assert_eq!(r.norm_sq, 4.0);
    }

    #[test]
    fn support_gate() {
        let f = CoeffSeq::new(vec![1.0; 7]).unwrap();
        let p = SelfSimParams::new(1.0, 0.5, 0.5, 3.0, 3).unwrap();
        assert_eq!(check_membership(&f, &p), Err(Error::SupportTooSmall { len: 7, j0: 3 }));
    }

    #[test]
    fn bayes_edges() {
        let z = CoeffSeq::zeros(64);
        assert!(!check_bayes_selfsim(&z, 1.0, 1.0, 0.1, 2.0, 1).unwrap().is_member);
        let f = make_dyadic_selfsim(1.0, 5, 1.0).unwrap();
        assert!(check_bayes_selfsim(&f, 1.0, 10.0, 0.0, 2.0, 1).unwrap().is_member);
        assert!(check_bayes_selfsim(&f, 1.0, 10.0, 0.1, 1.0, 1).is_err());
    }

    #[test]
    fn eps_validation() {
        let t = EpsTable::constant(0.2, 1.0, 3.0, 9).unwrap();
        assert!(validate_eps(&t, 0.9, 1.0, 3.0).unwrap());
        let t = EpsTable::constant(0.4, 1.0, 3.0, 9).unwrap();
        assert!(!validate_eps(&t, 0.9, 1.0, 3.0).unwrap());
        let t = EpsTable::from_fn(1.0, 3.0, 17, |s| 0.9 * s / (2.0 * s + 0.5)).unwrap();
        assert!(validate_eps(&t, 0.9, 1.0, 3.0).unwrap());
        assert!(validate_eps(&t, 0.9, 0.5, 3.0).is_err());
    }

    #[test]
    fn dyadic_generator_layout() {
        let f = make_dyadic_selfsim(1.0, 3, 1.0).unwrap();
        assert_eq!(f.len(), 15);
        let v = (-4.5f64).exp2();
        for k in 8..=11 {
            assert_eq!(f.get(k), Some(v));
        }
        for k in 12..=15 {
            assert_eq!(f.get(k), Some(0.0));
        }
        assert_eq!(f.get(1), Some(0.0));
        assert_eq!(f.get(2), Some((-1.5f64).exp2()));
        assert_eq!(f.get(3), Some(0.0));
    }
}
