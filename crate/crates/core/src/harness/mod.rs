//! Config-driven Monte Carlo experiments and their CSV/JSON outputs.
//!
//! Replication `rep` of experiment `e` at sample size `n` draws from the
//! substream keyed by `(e, n, rep)`, and aggregation happens after all
//! replications are collected in order, so results do not depend on the
//! number of worker threads.

mod config;
mod demo;
mod experiments;
mod output;

use thiserror::Error;

pub use config::{AdversarySection, ExperimentConfig, HiddenBlock, MinimaxSection, TruthSpec};
pub use demo::{manifest, run_lowerbound_demo, AdversaryReport, LowerBoundReport, ManifestEntry, MinimaxReport};
pub use experiments::{
    check_selfsim, run_coverage, run_diameter_scaling, run_lepski_diag, CoverageResult, CoverageRow, CoverageTask,
    DiameterReport, GateReport, LepskiDiagRow, LepskiDiagnostics, RepOutcome, RunOptions, MAX_EXTENDED_LEVEL,
};
pub use output::{coverage_csv, diameter_csv, lepski_csv, to_json};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("self-similarity gate failed: {0}")]
    Gate(String),
    #[error("numerical error: {0}")]
    Numerical(crate::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<crate::Error> for HarnessError {
    fn from(e: crate::Error) -> Self {
        use crate::Error::*;
        match e {
            InvalidParameter(_) | Ordering(_) | Parse(_) | BadTail(_) | NonFinite { .. } => {
                HarnessError::Config(e.to_string())
            }
            other => HarnessError::Numerical(other),
        }
    }
}

impl HarnessError {
    /// Process exit status: 2 configuration, 3 gate, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Io(_) => 2,
            HarnessError::Gate(_) => 3,
            HarnessError::Numerical(_) => 4,
        }
    }
}
