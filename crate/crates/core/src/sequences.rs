//! Coefficient sequences with l2 and Sobolev geometry.
//!
//! Indexing is 1-based: `get(1)` is the first coefficient. A sequence either
//! has finite support (everything past the stored prefix is zero) or carries
//! a declared tail mass `sum_{k > N} f_k^2` whose individual coefficients are
//! unknown.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numeric::{self, Compensated};

#[derive(Debug, Clone, PartialEq)]
pub struct CoeffSeq {
    coeffs: Vec<f64>,
    tail_norm_sq: f64,
    finite_support: bool,
}

impl CoeffSeq {
    /// Finite-support sequence from its stored coefficients.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        check_finite(&coeffs)?;
        Ok(Self { coeffs, tail_norm_sq: 0.0, finite_support: true })
    }

    /// Sequence whose coefficients past the stored prefix are unknown but
    /// have total squared mass `tail_norm_sq`.
    pub fn with_tail(coeffs: Vec<f64>, tail_norm_sq: f64) -> Result<Self> {
        check_finite(&coeffs)?;
        if !tail_norm_sq.is_finite() || tail_norm_sq < 0.0 {
            return Err(Error::BadTail(tail_norm_sq));
        }
        Ok(Self { coeffs, tail_norm_sq, finite_support: false })
    }

    pub fn zeros(len: usize) -> Self {
        Self { coeffs: vec![0.0; len], tail_norm_sq: 0.0, finite_support: true }
    }

    pub(crate) fn from_vec_unchecked(coeffs: Vec<f64>) -> Self {
        debug_assert!(coeffs.iter().all(|c| c.is_finite()));
        Self { coeffs, tail_norm_sq: 0.0, finite_support: true }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn tail_norm_sq(&self) -> f64 {
        self.tail_norm_sq
    }

    pub fn is_finite_support(&self) -> bool {
        self.finite_support
    }

    /// Coefficient `f_k` for `k >= 1`; zero past the stored prefix of a
    /// finite-support sequence, `None` inside an unstored tail.
    pub fn get(&self, k: usize) -> Option<f64> {
        assert!(k >= 1, "coefficients are 1-based");
        match self.coeffs.get(k - 1) {
            Some(&c) => Some(c),
            None if self.finite_support => Some(0.0),
            None => None,
        }
    }

    /// Largest index holding a non-zero coefficient, 0 for the zero sequence.
    pub fn support_end(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0.0).map_or(0, |i| i + 1)
    }

    pub fn l2_norm_sq(&self) -> f64 {
        let mut acc = Compensated::default();
        for &c in &self.coeffs {
            acc.add(c * c);
        }
        acc.add(self.tail_norm_sq);
        acc.value()
    }

    pub fn sobolev_norm_sq(&self, s: f64) -> Result<f64> {
        if !self.finite_support {
            return Err(Error::SobolevUndefinedForTail);
        }
        if !(s >= 0.0 && s.is_finite()) {
            return Err(crate::error::invalid(format!("smoothness must be >= 0, got {s}")));
        }
        Ok(numeric::sum(self.coeffs.iter().enumerate().map(|(i, &c)| c * c * ((i + 1) as f64).powf(2.0 * s))))
    }

    /// Zeroes every coefficient past `2^j`, keeping the stored length.
    pub fn project(&self, j: u32) -> CoeffSeq {
        let keep = dyadic_len(j).min(self.coeffs.len());
        let mut coeffs = vec![0.0; self.coeffs.len()];
        coeffs[..keep].copy_from_slice(&self.coeffs[..keep]);
        CoeffSeq::from_vec_unchecked(coeffs)
    }

    /// Same sequence as [`project`](Self::project), stored with only the
    /// first `min(N, 2^j)` coefficients.
    pub fn truncate(&self, j: u32) -> CoeffSeq {
        let keep = dyadic_len(j).min(self.coeffs.len());
        CoeffSeq::from_vec_unchecked(self.coeffs[..keep].to_vec())
    }

    /// `sum_{k = ceil(a)}^{floor(b)} f_k^2`, indices below 1 ignored.
    pub fn block_energy(&self, a: f64, b: f64) -> Result<f64> {
        if a.is_nan() || b.is_nan() || a > b {
            return Err(Error::InvalidRange { a, b });
        }
        let lo = numeric::ceil_snapped(a).max(1.0);
        let hi = numeric::floor_snapped(b);
        if hi < lo {
            return Ok(0.0);
        }
        self.index_energy(lo as usize, if hi >= usize::MAX as f64 { usize::MAX } else { hi as usize })
    }

    /// `sum_{k = lo}^{hi} f_k^2` over integer indices, `lo >= 1`.
    pub fn index_energy(&self, lo: usize, hi: usize) -> Result<f64> {
        debug_assert!(lo >= 1);
        if hi < lo {
            return Ok(0.0);
        }
        let len = self.coeffs.len();
        if hi > len && !self.finite_support {
            return Err(Error::RangeIntoTail { index: hi.min(len + 1).max(lo), len });
        }
        let stop = hi.min(len);
        if lo > stop {
            return Ok(0.0);
        }
        Ok(numeric::sum(self.coeffs[lo - 1..stop].iter().map(|c| c * c)))
    }

    pub fn l2_dist_sq(&self, other: &CoeffSeq) -> Result<f64> {
        let (f, g) = (self, other);
        let tail = match (f.finite_support, g.finite_support) {
            (true, true) => 0.0,
            (false, true) if g.support_end() <= f.len() => f.tail_norm_sq,
            (true, false) if f.support_end() <= g.len() => g.tail_norm_sq,
            (false, false) if f.len() == g.len() && f.tail_norm_sq == g.tail_norm_sq => 0.0,
            _ => return Err(Error::IncomparableTails),
        };
        let len = f.len().max(g.len());
        let at = |s: &CoeffSeq, i: usize| s.coeffs.get(i).copied().unwrap_or(0.0);
        let mut acc = Compensated::default();
        for i in 0..len {
            let d = at(f, i) - at(g, i);
            acc.add(d * d);
        }
        acc.add(tail);
        Ok(acc.value())
    }

    /// Text form: optional `tail_norm_sq=<x>` header, then one coefficient
    /// per line. Floats are written in shortest round-trip form.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.coeffs.len() * 24);
        if !self.finite_support {
            let _ = writeln!(out, "tail_norm_sq={}", self.tail_norm_sq);
        }
        for c in &self.coeffs {
            let _ = writeln!(out, "{c}");
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut tail = None;
        let mut coeffs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(v) = line.strip_prefix("tail_norm_sq=") {
                if tail.is_some() || !coeffs.is_empty() {
                    return Err(Error::Parse(format!("line {}: tail header must come first", lineno + 1)));
                }
                tail = Some(parse_f64(v.trim(), lineno)?);
                continue;
            }
            coeffs.push(parse_f64(line, lineno)?);
        }
        match tail {
            Some(t) => Self::with_tail(coeffs, t),
            None => Self::new(coeffs),
        }
    }

    pub fn read_file(path: impl AsRef<Path>) -> std::io::Result<Result<Self>> {
        Ok(Self::parse_text(&std::fs::read_to_string(path)?))
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.to_text())
    }
}

fn parse_f64(s: &str, lineno: usize) -> Result<f64> {
    s.parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}: {s:?}", lineno + 1)))
}

fn check_finite(coeffs: &[f64]) -> Result<()> {
    match coeffs.iter().position(|c| !c.is_finite()) {
        Some(i) => Err(Error::NonFinite { index: i + 1 }),
        None => Ok(()),
    }
}

/// `2^j` saturating at `usize::MAX`.
pub(crate) fn dyadic_len(j: u32) -> usize {
    1usize.checked_shl(j).unwrap_or(usize::MAX)
}
