//! The adaptive l2 confidence ball
//!
//! ```text
//! C_n = { f : ||f - fhat_n||^2 <= U_n + sqrt(8) gamma_alpha 2^{Jhat/2} / n }
//! ```
//!
//! where `fhat_n` is the projection estimator at the Lepski level computed
//! from `y'`, and `U_n` is the unbiased risk estimate computed from `y''` up
//! to the under-smoothed level `Jhat`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lepski::{self, LepskiConfig, LevelSelection};
use crate::model::SplitSample;
use crate::numeric::{pow2, Compensated};
use crate::sequences::{dyadic_len, CoeffSeq};

/// Projection estimator at the Lepski level, and that level.
pub fn adaptive_estimator(yprime: &CoeffSeq, n: u64, cfg: &LepskiConfig) -> Result<(CoeffSeq, u32)> {
    let grid = cfg.grid(n)?;
    let jhat = lepski::lepski_level(yprime, n, &grid)?;
    Ok((lepski::linear_estimator(yprime, jhat)?, jhat))
}

/// `sum_{k <= 2^Jhat} (y''_k - fhat_k)^2 - 2^{Jhat+1} / n`.
pub fn risk_estimate(ydouble: &CoeffSeq, fhat: &CoeffSeq, big_jhat: u32, n: u64) -> Result<f64> {
    let len = dyadic_len(big_jhat);
    if len > ydouble.len() {
        return Err(Error::WindowOverflow { level: big_jhat, len: ydouble.len() });
    }
    let f = fhat.coeffs();
    let mut acc = Compensated::default();
    for (i, &y) in ydouble.coeffs()[..len].iter().enumerate() {
        let d = y - f.get(i).copied().unwrap_or(0.0);
        acc.add(d * d);
    }
    Ok(acc.value() - pow2(big_jhat + 1) / n as f64)
}

/// Upper `alpha` quantile of the standard normal.
pub fn normal_quantile(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(-ppnd16(alpha))
}

fn poly(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn ppnd16(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_5,
        1.331_416_678_917_843_8e2,
        1.971_590_950_306_551_3e3,
        1.373_169_376_550_946e4,
        4.592_195_393_154_987e4,
        6.726_577_092_700_87e4,
        3.343_057_558_358_813e4,
        2.509_080_928_730_122_7e3,
    ];
    const B: [f64; 8] = [
        1.0,
        4.231_333_070_160_091e1,
        6.871_870_074_920_579e2,
        5.394_196_021_424_751e3,
        2.121_379_430_158_659_7e4,
        3.930_789_580_009_271e4,
        2.872_908_573_572_194_3e4,
        5.226_495_278_852_545e3,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_5,
        4.630_337_846_156_546,
        5.769_497_221_460_691,
        3.647_848_324_763_204_5,
        1.270_458_252_452_368_4,
        2.417_807_251_774_506e-1,
        2.272_384_498_926_918_4e-2,
        7.745_450_142_783_414e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_759,
        1.676_384_830_183_803_8,
        6.897_673_349_851e-1,
        1.481_039_764_274_800_8e-1,
        1.519_866_656_361_645_7e-2,
        5.475_938_084_995_345e-4,
        1.050_750_071_644_416_9e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103,
        5.463_784_911_164_114,
        1.784_826_539_917_291_3,
        2.965_605_718_285_048_7e-1,
        2.653_218_952_657_612_4e-2,
        1.242_660_947_388_078_4e-3,
        2.711_555_568_743_487_6e-5,
        2.010_334_399_292_288_1e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        5.998_322_065_558_88e-1,
        1.369_298_809_227_358e-1,
        1.487_536_129_085_061_5e-2,
        7.868_691_311_456_133e-4,
        1.846_318_317_510_054_8e-5,
        1.421_511_758_316_446e-7,
        2.044_263_103_389_939_8e-15,
    ];

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let r = (-tail.ln()).sqrt();
    let z = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -z
    } else {
        z
    }
}

/// `sqrt(8) gamma_alpha 2^{Jhat/2} / n`.
pub fn radius_margin(big_jhat: u32, n: u64, alpha: f64) -> Result<f64> {
    Ok(8f64.sqrt() * normal_quantile(alpha)? * (big_jhat as f64 / 2.0).exp2() / n as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceBall {
    pub center: CoeffSeq,
    pub sq_radius_raw: f64,
    pub big_jhat: u32,
    pub n: u64,
    pub alpha: f64,
    pub selection: LevelSelection,
    pub risk_estimate: f64,
}

impl ConfidenceBall {
    /// Ball from an already selected center and level; `ydouble` must cover
    /// `2^Jhat` coordinates.
    pub fn from_parts(
        center: CoeffSeq,
        selection: LevelSelection,
        ydouble: &CoeffSeq,
        n: u64,
        alpha: f64,
    ) -> Result<Self> {
        let risk = risk_estimate(ydouble, &center, selection.big_jhat, n)?;
        let sq_radius_raw = risk + radius_margin(selection.big_jhat, n, alpha)?;
        Ok(Self { center, sq_radius_raw, big_jhat: selection.big_jhat, n, alpha, selection, risk_estimate: risk })
    }

    /// Closed ball membership against the raw squared radius.
    pub fn contains(&self, f: &CoeffSeq) -> Result<bool> {
        Ok(f.l2_dist_sq(&self.center)? <= self.sq_radius_raw)
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.sq_radius_raw.max(0.0).sqrt()
    }

    pub fn is_empty(&self) -> bool {
        self.sq_radius_raw < 0.0
    }

    pub fn record(&self, center_file: impl Into<String>) -> BallRecord {
        BallRecord {
            center_file: center_file.into(),
            sq_radius_raw: self.sq_radius_raw,
            big_jhat: self.big_jhat,
            n: self.n,
            alpha: self.alpha,
        }
    }
}

/// JSON form of a ball; the center lives in a separate sequence file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallRecord {
    pub center_file: String,
    pub sq_radius_raw: f64,
    #[serde(rename = "Jhat")]
    pub big_jhat: u32,
    pub n: u64,
    pub alpha: f64,
}

/// Level selection and center from `y'`, undersmoothed level, then the
/// radius from `y''`.
pub fn select(split: &SplitSample, cfg: &LepskiConfig) -> Result<(CoeffSeq, LevelSelection)> {
    let (center, jhat) = adaptive_estimator(&split.yprime, split.n, cfg)?;
    let sel = lepski::undersmoothed_level(jhat, split.n, cfg.kappa2)?;
    Ok((center, sel))
}

pub fn confidence_ball(split: &SplitSample, alpha: f64, cfg: &LepskiConfig) -> Result<ConfidenceBall> {
    let (center, sel) = select(split, cfg)?;
    ConfidenceBall::from_parts(center, sel, &split.ydouble, split.n, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
        assert!((normal_quantile(0.05).unwrap() - 1.644_853_626_951_472_7).abs() < 1e-12);
        assert!((normal_quantile(0.025).unwrap() - 1.959_963_984_540_054).abs() < 1e-12);
        assert!((normal_quantile(0.975).unwrap() + 1.959_963_984_540_054).abs() < 1e-12);
        assert!((normal_quantile(1e-300).unwrap() - 37.047_096_499_542_1).abs() < 1e-6);
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
    }

    #[test]
    fn margin_example() {
        let m = radius_margin(10, 1024, 0.05).unwrap();
        assert!((m - 0.145_38).abs() < 1e-4);
    }

    #[test]
    fn risk_of_exact_fit() {
        let f = CoeffSeq::new(vec![0.5; 8]).unwrap();
        assert_eq!(risk_estimate(&f, &f, 3, 64).unwrap(), -16.0 / 64.0);
        assert!(risk_estimate(&f, &f, 4, 64).is_err());
    }

    fn ball(r: f64) -> ConfidenceBall {
        let sel = LevelSelection { jhat: 1, jn_real: 2.0, big_jhat: 2, bar_s: 0.5, hat_s: 0.25 };
        ConfidenceBall {
            center: CoeffSeq::zeros(2),
            sq_radius_raw: r,
            big_jhat: 2,
            n: 16,
            alpha: 0.05,
            selection: sel,
            risk_estimate: 0.0,
        }
    }

    #[test]
    fn membership_and_diameter() {
        assert!(ball(0.0).contains(&CoeffSeq::zeros(2)).unwrap());
        assert!(ball(0.25).contains(&CoeffSeq::new(vec![0.5]).unwrap()).unwrap());
        assert!(!ball(0.25).contains(&CoeffSeq::new(vec![0.5, 0.001]).unwrap()).unwrap());
        assert!(!ball(-0.1).contains(&CoeffSeq::zeros(2)).unwrap());
        assert_eq!(ball(1.0).diameter(), 2.0);
        assert_eq!(ball(-0.3).diameter(), 0.0);
    }
}
