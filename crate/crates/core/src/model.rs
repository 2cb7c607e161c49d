//! Gaussian sequence model `y_k = f_k + g_k / sqrt(n)`, sample splitting and
//! the exact likelihood ratio against the zero signal.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{self, Compensated};
use crate::sequences::{dyadic_len, CoeffSeq};

/// A reproducible random stream: ChaCha12 keyed by `seed`, positioned on
/// stream `stream_id`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Stream whose id is the hash of `key`, e.g. `[experiment, n, rep]`.
    pub fn keyed(seed: u64, key: &[u64]) -> Self {
        Self { seed, stream_id: stream_hash(key) }
    }

    pub fn child(&self, label: u64) -> Self {
        Self { seed: self.seed, stream_id: stream_hash(&[self.stream_id, label]) }
    }

    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-sensitive hash of a key tuple.
pub fn stream_hash(parts: &[u64]) -> u64 {
    parts.iter().fold(0x6A09_E667_F3BC_C908, |h, &p| splitmix64(h ^ splitmix64(p)))
}

pub(crate) fn normals(rng: &mut ChaCha12Rng, len: usize, scale: f64) -> impl Iterator<Item = f64> + '_ {
    (0..len).map(move |_| scale * rng.sample::<f64, _>(StandardNormal))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    y: CoeffSeq,
    n: u64,
}

impl Observation {
    pub fn new(y: CoeffSeq, n: u64) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("sample size n must be >= 2, got {n}")));
        }
        Ok(Self { y, n })
    }

    pub fn y(&self) -> &CoeffSeq {
        &self.y
    }

    pub fn n(&self) -> u64 {
        self.n
    }
}

/// Default observation window `2^floor(log2 n)`.
pub fn default_window(n: u64) -> usize {
    dyadic_len(63 - n.max(1).leading_zeros())
}

/// Draws `y` over the default window.
pub fn sample_observation(f: &CoeffSeq, n: u64, rng: &RngStream) -> Result<Observation> {
    sample_observation_in_window(f, n, default_window(n), rng)
}

pub fn sample_observation_in_window(f: &CoeffSeq, n: u64, window: usize, rng: &RngStream) -> Result<Observation> {
    if n < 2 {
        return Err(invalid(format!("sample size n must be >= 2, got {n}")));
    }
    check_window(f, window)?;
    let sd = 1.0 / (n as f64).sqrt();
    let mut r = rng.rng();
    let fs = f.coeffs();
    let y: Vec<f64> =
        normals(&mut r, window, sd).enumerate().map(|(i, g)| fs.get(i).copied().unwrap_or(0.0) + g).collect();
    Ok(Observation { y: CoeffSeq::from_vec_unchecked(y), n })
}

fn check_window(f: &CoeffSeq, window: usize) -> Result<()> {
    let end = f.support_end();
    if end > window {
        return Err(Error::TruthExceedsWindow { index: end, window });
    }
    if !f.is_finite_support() && f.len() < window {
        return Err(Error::TruthExceedsWindow { index: f.len() + 1, window });
    }
    Ok(())
}

/// The two half-samples `y' = y + w`, `y'' = y - w` with `w ~ N(0, 1/n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSample {
    pub yprime: CoeffSeq,
    pub ydouble: CoeffSeq,
    pub n: u64,
}

pub fn split_sample(obs: &Observation, rng: &RngStream) -> SplitSample {
    let sd = 1.0 / (obs.n as f64).sqrt();
    let mut r = rng.rng();
    let ys = obs.y.coeffs();
    let mut yp = Vec::with_capacity(ys.len());
    let mut yd = Vec::with_capacity(ys.len());
    for (&y, w) in ys.iter().zip(normals(&mut r, ys.len(), sd)) {
        yp.push(y + w);
        yd.push(y - w);
    }
    SplitSample { yprime: CoeffSeq::from_vec_unchecked(yp), ydouble: CoeffSeq::from_vec_unchecked(yd), n: obs.n }
}

/// Appends fresh coordinates `f_k + sqrt(2/n) g_k` to a half-sample until it
/// holds `new_len` coordinates. These have exactly the law the half-sample
/// would have had under a wider observation window.
pub fn extend_half_sample(half: &CoeffSeq, f: &CoeffSeq, n: u64, new_len: usize, rng: &RngStream) -> Result<CoeffSeq> {
    let start = half.len();
    if new_len <= start {
        return Ok(half.clone());
    }
    if !f.is_finite_support() && f.len() < new_len {
        return Err(Error::TruthExceedsWindow { index: f.len() + 1, window: new_len });
    }
    let sd = (2.0 / n as f64).sqrt();
    let mut r = rng.rng();
    let fs = f.coeffs();
    let mut out = Vec::with_capacity(new_len);
    out.extend_from_slice(half.coeffs());
    out.extend(
        normals(&mut r, new_len - start, sd).enumerate().map(|(i, g)| fs.get(start + i).copied().unwrap_or(0.0) + g),
    );
    Ok(CoeffSeq::from_vec_unchecked(out))
}

/// `log dP_f/dP_0 (y) = n sum_k f_k y_k - (n/2) ||f||^2`.
pub fn log_likelihood_ratio(f: &CoeffSeq, obs: &Observation) -> Result<f64> {
    if !f.is_finite_support() {
        return Err(Error::TruthExceedsWindow { index: f.len() + 1, window: obs.y.len() });
    }
    check_window(f, obs.y.len())?;
    let n = obs.n as f64;
    let mut cross = Compensated::default();
    for (fk, yk) in f.coeffs().iter().zip(obs.y.coeffs()) {
        cross.add(fk * yk);
    }
    Ok(n * cross.value() - 0.5 * n * numeric::sum(f.coeffs().iter().map(|c| c * c)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows() {
        assert_eq!(default_window(2), 2);
        assert_eq!(default_window(1024), 1024);
        assert_eq!(default_window(1500), 1024);
    }

    #[test]
    fn deterministic_per_stream() {
        let f = CoeffSeq::new(vec![1.0, 2.0]).unwrap();
        let s = RngStream::keyed(7, &[1, 64, 3]);
        let a = sample_observation(&f, 64, &s).unwrap();
        let b = sample_observation(&f, 64, &s).unwrap();
        assert_eq!(a, b);
        let c = sample_observation(&f, 64, &s.child(1)).unwrap();
        assert_ne!(a, c);
        assert_ne!(stream_hash(&[1, 2]), stream_hash(&[2, 1]));
    }

    #[test]
    fn window_errors() {
        let f = CoeffSeq::new(vec![0.0; 9].into_iter().chain([1.0]).collect()).unwrap();
        let s = RngStream::new(1, 1);
        assert_eq!(sample_observation(&f, 8, &s), Err(Error::TruthExceedsWindow { index: 10, window: 8 }));
        assert!(sample_observation(&f, 16, &s).is_ok());
        let t = CoeffSeq::with_tail(vec![1.0; 4], 0.1).unwrap();
        assert!(sample_observation(&t, 16, &s).is_err());
        assert!(sample_observation(&f, 1, &s).is_err());
    }

    #[test]
    fn split_reconstructs_observation() {
        let f = CoeffSeq::new(vec![0.3; 16]).unwrap();
        let obs = sample_observation(&f, 16, &RngStream::new(3, 0)).unwrap();
        let sp = split_sample(&obs, &RngStream::new(3, 1));
        for ((a, b), y) in sp.yprime.coeffs().iter().zip(sp.ydouble.coeffs()).zip(obs.y().coeffs()) {
            assert!(((a + b) / 2.0 - y).abs() <= 4.0 * f64::EPSILON * y.abs().max(1.0));
        }
    }

    #[test]
    fn llr_examples() {
        let obs = Observation::new(CoeffSeq::new(vec![1.0, 0.0]).unwrap(), 2).unwrap();
        assert_eq!(log_likelihood_ratio(&CoeffSeq::zeros(2), &obs).unwrap(), 0.0);
        assert_eq!(log_likelihood_ratio(&CoeffSeq::new(vec![1.0]).unwrap(), &obs).unwrap(), 1.0);
        assert!(log_likelihood_ratio(&CoeffSeq::new(vec![0.0, 0.0, 1.0]).unwrap(), &obs).is_err());
    }

    #[test]
    fn extension_keeps_prefix() {
        let f = CoeffSeq::new(vec![1.0; 32]).unwrap();
        let half = CoeffSeq::new(vec![5.0; 8]).unwrap();
        let ext = extend_half_sample(&half, &f, 1 << 20, 32, &RngStream::new(0, 9)).unwrap();
        assert_eq!(&ext.coeffs()[..8], half.coeffs());
        assert_eq!(ext.len(), 32);
        assert!(ext.coeffs()[8..].iter().all(|c| (c - 1.0).abs() < 0.01));
    }
}
