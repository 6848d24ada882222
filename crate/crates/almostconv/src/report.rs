//! JSON reports. Each report echoes every effective parameter and lists the
//! ones that came from defaults, so a run can be reproduced from it alone.

use std::path::PathBuf;

use almostconv_core::detect::{CandidateWindow, CauchyReport};
use almostconv_core::{FeketeViolation, GeneratorSpec, Norm, Status, Verdict};
use serde::Serialize;

/// Where the analysed data came from.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Input(PathBuf),
    Spec { path: PathBuf, spec: GeneratorSpec },
    Curve(PathBuf),
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PSummary {
    pub c_at_n: f64,
    pub running_min: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct QSummary {
    pub tail_max: f64,
}

/// Report of `analyze` and `check`. The top-level verdict is the strong one.
#[derive(Debug, Clone, Serialize)]
pub struct VerdictReport {
    pub command: &'static str,
    #[serde(flatten)]
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve_file: Option<PathBuf>,
    /// Samples behind the estimated limit; absent when the limit was given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidate_window: Option<CandidateWindow>,
    pub norm: Norm,
    pub seed: u64,
    pub dim: usize,
    pub bound: f64,
    pub source: Source,
    pub defaulted: Vec<&'static str>,
    pub threads: usize,
    pub quasi: Verdict,
    pub weak: Verdict,
    pub probes: usize,
    pub p: PSummary,
    pub q: QSummary,
    /// Distance from the candidate to the sample hull (`d <= 2` only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hull_distance: Option<f64>,
    pub cauchy: CauchyReport,
}

/// Report of `continuous`; `window` and `horizon` count grid steps.
#[derive(Debug, Clone, Serialize)]
pub struct ContinuousReport {
    pub command: &'static str,
    #[serde(flatten)]
    pub verdict: Verdict,
    pub time_window: f64,
    pub step: f64,
    pub duration: f64,
    pub norm: Norm,
    pub dim: usize,
    pub bound: f64,
    pub source: Source,
    pub defaulted: Vec<&'static str>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FeketeReport {
    pub command: &'static str,
    pub status: FeketeStatus,
    pub violations: Vec<FeketeViolation>,
    /// Pair with the largest slack, violating or not.
    pub worst_pair: Option<FeketeViolation>,
    pub tolerance: f64,
    pub window: usize,
    /// Unknown when the curve was read from a CSV file.
    pub horizon: Option<usize>,
    pub bound: f64,
    pub norm: Option<Norm>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve_file: Option<PathBuf>,
    pub source: Source,
    pub defaulted: Vec<&'static str>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FeketeStatus {
    Holds,
    Violated,
}

#[derive(Debug, Clone, Serialize)]
pub struct GenerateReport {
    pub command: &'static str,
    pub spec: GeneratorSpec,
    pub kind: &'static str,
    pub samples: usize,
    pub dim: usize,
    pub bound: f64,
    pub truth: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

/// Process exit code for a verdict status.
pub fn exit_code(status: Status) -> u8 {
    match status {
        Status::Converges => 0,
        Status::Diverges => 1,
        Status::Inconclusive => 2,
    }
}

/// Exit code for any failure before a verdict.
pub const ERROR_EXIT: u8 = 3;
