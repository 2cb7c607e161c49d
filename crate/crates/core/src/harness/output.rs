//! CSV and JSON rendering. Floats use Rust's shortest round-trip form so
//! identical results always produce identical bytes.

use std::fmt::Write as _;

use serde::Serialize;

use super::experiments::{CoverageRow, LepskiDiagRow};
use super::HarnessError;

pub fn coverage_csv(rows: &[CoverageRow]) -> String {
    let mut out = String::from("n,reps,alpha,coverage,mc_se,median_diam,q10_diam,q90_diam,mean_Jhat,empty_rate\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.reps,
            r.alpha,
            r.coverage,
            r.mc_se,
            r.median_diam,
            r.q10_diam,
            r.q90_diam,
            r.mean_big_jhat,
            r.empty_rate
        );
    }
    out
}

pub fn diameter_csv(rows: &[CoverageRow]) -> String {
    let mut out = String::from("n,median_diam\n");
    for r in rows {
        let _ = writeln!(out, "{},{}", r.n, r.median_diam);
    }
    out
}

pub fn lepski_csv(rows: &[LepskiDiagRow]) -> String {
    let mut out = String::from("n,j_star,jhat,count\n");
    for r in rows {
        for (j, count) in &r.histogram {
            let _ = writeln!(out, "{},{},{},{}", r.n, r.j_star, j, count);
        }
    }
    out
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, HarnessError> {
    let mut s =
        serde_json::to_string_pretty(value).map_err(|e| HarnessError::Config(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}
