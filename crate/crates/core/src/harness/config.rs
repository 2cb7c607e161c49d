//! Flat `key = value` experiment configuration.
//!
//! Blank lines and `#` comments are ignored. Lists are comma separated.
//! Unknown keys are rejected so that typos surface as configuration errors.
//!
//! ```text
//! truth = dyadic              # or: file
//! truth.s = 1
//! truth.levels = 20
//! truth.amplitude = 40
//! truth.file = truth.txt      # with truth = file
//! truth.hidden_level = 18     # optional extra block on Z^0 of that level
//! truth.hidden_energy = 1.0
//! n_grid = 4096, 16384, 65536
//! reps = 1000
//! alpha = 0.05
//! seed = 1
//! selfsim.s = 1
//! selfsim.eps = 0.2
//! selfsim.b = 100
//! selfsim.B = 200
//! selfsim.J0 = 5
//! selfsim.c = 0.1             # optional, defaults to c(s)
//! lepski.s_min = 1
//! lepski.s_max = 3
//! lepski.m = 0.9              # optional; kappa1, kappa2, s_prime likewise
//! ```
//!
//! The `lowerbound` subcommand reads `adversary.*` and `minimax.*` keys
//! instead of the truth and grid keys; see [`AdversarySection`] and
//! [`MinimaxSpec`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::lepski::{validate_config, LepskiConfig};
use crate::lowerbound::{AdversaryConfig, MinimaxSpec};
use crate::selfsim::{make_dyadic_selfsim, SelfSimParams};
use crate::sequences::{dyadic_len, CoeffSeq};

use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TruthSpec {
    Dyadic { s: f64, levels: u32, amplitude: f64, hidden: Option<HiddenBlock> },
    File { path: PathBuf },
}

/// Constant block on `Z_level^0` with total squared mass `energy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HiddenBlock {
    pub level: u32,
    pub energy: f64,
}

impl TruthSpec {
    pub fn build(&self) -> Result<CoeffSeq, HarnessError> {
        match self {
            TruthSpec::Dyadic { s, levels, amplitude, hidden } => {
                let f = make_dyadic_selfsim(*s, *levels, *amplitude)?;
                let Some(h) = hidden else { return Ok(f) };
                let top = h.level.max(*levels);
                let mut coeffs = f.into_coeffs();
                coeffs.resize(dyadic_len(top + 1) - 1, 0.0);
                let lo = dyadic_len(h.level);
                let width = lo / 2;
                let v = (h.energy / width as f64).sqrt();
                coeffs[lo - 1..lo - 1 + width].fill(v);
                Ok(CoeffSeq::new(coeffs)?)
            }
            TruthSpec::File { path } => {
                let f = CoeffSeq::read_file(path)
                    .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?
                    .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
                if !f.is_finite_support() {
                    return Err(HarnessError::Config(format!("{}: truths must have finite support", path.display())));
                }
                Ok(f)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdversarySection {
    pub config: AdversaryConfig,
    pub j_seq: Vec<u32>,
    /// Storage depth used for membership checks.
    pub levels: u32,
    /// Levels for the mixture `E Z^2` Monte Carlo.
    pub chi_levels: Vec<u32>,
    pub chi_reps: usize,
    /// Level and replications of the likelihood-ratio test demo.
    pub test_level: u32,
    pub test_reps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimaxSection {
    pub spec: MinimaxSpec,
    pub reps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub truth: Option<TruthSpec>,
    pub n_grid: Vec<u64>,
    pub reps: usize,
    pub alpha: f64,
    pub seed: u64,
    pub selfsim: Option<SelfSimParams>,
    pub lepski: Option<LepskiConfig>,
    pub eps_grid_points: usize,
    pub adversary: Option<AdversarySection>,
    pub minimax: Option<MinimaxSection>,
}

struct Keys {
    map: BTreeMap<String, String>,
    base: PathBuf,
}

impl Keys {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, HarnessError>
    where
        T::Err: std::fmt::Display,
    {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|e| HarnessError::Config(format!("{key} = {v:?}: {e}"))),
        }
    }

    fn need<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, HarnessError>
    where
        T::Err: std::fmt::Display,
    {
        self.parse(key)?.ok_or_else(|| HarnessError::Config(format!("missing key {key}")))
    }

    fn list<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>, HarnessError>
    where
        T::Err: std::fmt::Display,
    {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<T>().map_err(|e| HarnessError::Config(format!("{key}: {s:?}: {e}"))))
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
        }
    }

    fn has_prefix(&self, prefix: &str) -> bool {
        self.map.keys().any(|k| k.starts_with(prefix))
    }
}

fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, HarnessError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| HarnessError::Config(format!("line {}: expected key = value", i + 1)))?;
        let key = k.trim().to_string();
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(HarnessError::Config(format!("line {}: duplicate key {key}", i + 1)));
        }
    }
    Ok(map)
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base)
    }

    /// Parses config text; relative file paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, HarnessError> {
        let mut keys = Keys { map: parse_pairs(text)?, base: base.to_path_buf() };
        let cfg = Self::from_keys(&mut keys)?;
        if let Some(k) = keys.map.keys().next() {
            return Err(HarnessError::Config(format!("unknown key {k}")));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn from_keys(keys: &mut Keys) -> Result<Self, HarnessError> {
        let truth = match keys.take("truth").as_deref() {
            None => None,
            Some("dyadic") => {
                let hidden = match keys.parse::<u32>("truth.hidden_level")? {
                    None => None,
                    Some(level) => Some(HiddenBlock { level, energy: keys.need("truth.hidden_energy")? }),
                };
                Some(TruthSpec::Dyadic {
                    s: keys.need("truth.s")?,
                    levels: keys.need("truth.levels")?,
                    amplitude: keys.need("truth.amplitude")?,
                    hidden,
                })
            }
            Some("file") => {
                let p: String = keys.need("truth.file")?;
                Some(TruthSpec::File { path: keys.base.join(p) })
            }
            Some(other) => return Err(HarnessError::Config(format!("unknown truth generator {other:?}"))),
        };

        let selfsim = if keys.has_prefix("selfsim.") {
            let mut p = SelfSimParams {
                s: keys.need("selfsim.s")?,
                eps: keys.need("selfsim.eps")?,
                b: keys.need("selfsim.b")?,
                big_b: keys.need("selfsim.B")?,
                j0: keys.need("selfsim.J0")?,
                c: None,
            };
            p.c = keys.parse("selfsim.c")?;
            p.validate()?;
            Some(p)
        } else {
            None
        };

        let lepski = if keys.has_prefix("lepski.") {
            let s_min: f64 = keys.need("lepski.s_min")?;
            let s_max: f64 = keys.need("lepski.s_max")?;
            let mut cfg = match keys.parse::<f64>("lepski.m")? {
                Some(m) => LepskiConfig::with_m(s_min, s_max, m)?,
                None => {
                    let eps = selfsim
                        .as_ref()
                        .map(|p| p.eps)
                        .ok_or_else(|| HarnessError::Config("lepski.m is required without selfsim.eps".into()))?;
                    LepskiConfig::from_eps(s_min, s_max, eps)?
                }
            };
            if let Some(v) = keys.parse("lepski.s_prime")? {
                cfg.s_prime = v;
            }
            if let Some(v) = keys.parse("lepski.kappa1")? {
                cfg.kappa1 = v;
            }
            if let Some(v) = keys.parse("lepski.kappa2")? {
                cfg.kappa2 = v;
            }
            let violations = validate_config(&cfg);
            if !violations.is_empty() {
                return Err(HarnessError::Config(format!(
                    "lepski configuration infeasible: {}",
                    serde_json::to_string(&violations).unwrap_or_default()
                )));
            }
            Some(cfg)
        } else {
            None
        };

        let adversary = if keys.has_prefix("adversary.") {
            let config = AdversaryConfig::new(
                keys.need("adversary.r")?,
                keys.need("adversary.r_prime")?,
                keys.need("adversary.s")?,
                keys.need("adversary.s_prime")?,
                keys.need("adversary.eps")?,
                keys.need("adversary.delta")?,
            )?;
            let j_seq = keys.list("adversary.j_seq")?.unwrap_or_else(|| vec![2, 4, 8]);
            crate::lowerbound::check_level_sequence(&config, &j_seq)?;
            Some(AdversarySection {
                config,
                j_seq,
                levels: keys.parse("adversary.levels")?.unwrap_or(21),
                chi_levels: keys.list("adversary.chi_levels")?.unwrap_or_else(|| vec![6, 7, 8]),
                chi_reps: keys.parse("adversary.chi_reps")?.unwrap_or(20_000),
                test_level: keys.parse("adversary.test_level")?.unwrap_or(6),
                test_reps: keys.parse("adversary.test_reps")?.unwrap_or(20_000),
            })
        } else {
            None
        };

        let minimax = if keys.has_prefix("minimax.") {
            Some(MinimaxSection {
                spec: MinimaxSpec {
                    s: keys.need("minimax.s")?,
                    r: keys.need("minimax.r")?,
                    eps: keys.need("minimax.eps")?,
                    b: keys.need("minimax.b")?,
                    big_b: keys.need("minimax.B")?,
                    j: keys.need("minimax.j")?,
                    delta: keys.need("minimax.delta")?,
                    levels: keys.parse("minimax.levels")?.unwrap_or(21),
                },
                reps: keys.parse("minimax.reps")?.unwrap_or(2000),
            })
        } else {
            None
        };

        Ok(Self {
            truth,
            n_grid: keys.list("n_grid")?.unwrap_or_default(),
            reps: keys.parse("reps")?.unwrap_or(1000),
            alpha: keys.parse("alpha")?.unwrap_or(0.05),
            seed: keys.parse("seed")?.unwrap_or(0),
            selfsim,
            lepski,
            eps_grid_points: keys.parse("eps.grid_points")?.unwrap_or(9),
            adversary,
            minimax,
        })
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.reps < 1 {
            return Err(HarnessError::Config("reps must be >= 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(HarnessError::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HarnessError::Config("n_grid must be strictly ascending".into()));
        }
        if let Some(&n) = self.n_grid.first() {
            if n < 4 {
                return Err(HarnessError::Config(format!("n must be >= 4, got {n}")));
            }
        }
        Ok(())
    }

    pub(crate) fn require_truth(&self) -> Result<&TruthSpec, HarnessError> {
        self.truth.as_ref().ok_or_else(|| HarnessError::Config("missing key truth".into()))
    }

    pub(crate) fn require_selfsim(&self) -> Result<&SelfSimParams, HarnessError> {
        self.selfsim.as_ref().ok_or_else(|| HarnessError::Config("missing selfsim.* keys".into()))
    }

    pub(crate) fn require_lepski(&self) -> Result<&LepskiConfig, HarnessError> {
        self.lepski.as_ref().ok_or_else(|| HarnessError::Config("missing lepski.* keys".into()))
    }

    pub(crate) fn require_grid(&self) -> Result<&[u64], HarnessError> {
        if self.n_grid.is_empty() {
            return Err(HarnessError::Config("missing key n_grid".into()));
        }
        Ok(&self.n_grid)
    }
}
