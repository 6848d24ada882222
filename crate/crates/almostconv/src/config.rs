//! Run parameters: an optional JSON config file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use almostconv_core::detect::CandidateWindow;
use almostconv_core::{Norm, Tolerance};
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_SEED: u64 = 0;
/// Cap on the default window `⌊M/2⌋`.
pub const MAX_DEFAULT_WINDOW: usize = 4096;

/// Every setting a run can take. All fields are optional; unset ones fall back
/// to defaults, and the report lists which ones did.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub spec: Option<PathBuf>,
    pub window: Option<usize>,
    pub tol: Option<f64>,
    pub floor: Option<f64>,
    pub norm: Option<Norm>,
    pub check_limit: Option<Vec<f64>>,
    pub candidate_window: Option<CandidateWindow>,
    pub out_report: Option<PathBuf>,
    pub out_curve: Option<PathBuf>,
    pub seed: Option<u64>,
    pub continuous_step: Option<f64>,
    pub curve: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fields set in `flags` win over fields set here.
    pub fn overlay(self, flags: RunConfig) -> RunConfig {
        RunConfig {
            input: flags.input.or(self.input),
            spec: flags.spec.or(self.spec),
            window: flags.window.or(self.window),
            tol: flags.tol.or(self.tol),
            floor: flags.floor.or(self.floor),
            norm: flags.norm.or(self.norm),
            check_limit: flags.check_limit.or(self.check_limit),
            candidate_window: flags.candidate_window.or(self.candidate_window),
            out_report: flags.out_report.or(self.out_report),
            out_curve: flags.out_curve.or(self.out_curve),
            seed: flags.seed.or(self.seed),
            continuous_step: flags.continuous_step.or(self.continuous_step),
            curve: flags.curve.or(self.curve),
            output: flags.output.or(self.output),
        }
    }
}

/// `⌊M/2⌋` capped at [`MAX_DEFAULT_WINDOW`].
pub fn default_window(horizon: usize) -> usize {
    (horizon / 2).min(MAX_DEFAULT_WINDOW)
}

/// Records which effective parameters came from defaults.
#[derive(Debug, Default)]
pub struct Defaults(Vec<&'static str>);

impl Defaults {
    pub fn pick<T>(
        &mut self,
        name: &'static str,
        value: Option<T>,
        default: impl FnOnce() -> T,
    ) -> T {
        value.unwrap_or_else(|| {
            self.0.push(name);
            default()
        })
    }

    pub fn into_names(self) -> Vec<&'static str> {
        self.0
    }
}

/// Tolerance from `tol`/`floor`, defaulting to `ε = 1e-3` and floor `10ε`.
pub fn tolerance(config: &RunConfig, defaults: &mut Defaults) -> Result<Tolerance> {
    let eps = defaults.pick("tol", config.tol, || DEFAULT_TOL);
    let floor = defaults.pick("floor", config.floor, || Tolerance::FLOOR_FACTOR * eps);
    Tolerance::with_floor(eps, floor)
        .with_context(|| format!("tolerance {eps} with divergence floor {floor}"))
}

/// Parses a limit vector: `0.5`, `1,-1` or `[1,-1]`.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let inner = text.trim().trim_start_matches('[').trim_end_matches(']');
    let comps = inner
        .split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .with_context(|| format!("bad component {c:?} in {text:?}"))
        })
        .collect::<Result<Vec<f64>>>()?;
    if comps.iter().any(|c| !c.is_finite()) {
        bail!("limit {text:?} has a non-finite component");
    }
    Ok(comps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let file: RunConfig = serde_json::from_str(
            r#"{"window": 64, "tol": 0.01, "norm": "l1", "check_limit": [0.5]}"#,
        )
        .unwrap();
        let flags = RunConfig {
            window: Some(128),
            norm: Some(Norm::Linf),
            ..Default::default()
        };
        let merged = file.overlay(flags);
        assert_eq!(merged.window, Some(128));
        assert_eq!(merged.norm, Some(Norm::Linf));
        assert_eq!(merged.tol, Some(0.01));
        assert_eq!(merged.check_limit, Some(vec![0.5]));
        assert!(serde_json::from_str::<RunConfig>(r#"{"windw": 3}"#).is_err());
    }

    #[test]
    fn default_window_caps() {
        assert_eq!(default_window(10), 5);
        assert_eq!(default_window(9), 4);
        assert_eq!(default_window(100_000), 4096);
    }

    #[test]
    fn defaults_are_recorded() {
        let mut d = Defaults::default();
        let tol = tolerance(
            &RunConfig {
                floor: Some(0.5),
                ..Default::default()
            },
            &mut d,
        )
        .unwrap();
        assert_eq!((tol.eps, tol.floor), (1e-3, 0.5));
        assert_eq!(d.into_names(), vec!["tol"]);
        let mut d = Defaults::default();
        let tol = tolerance(&RunConfig::default(), &mut d).unwrap();
        assert_eq!(tol.floor, 10.0 * tol.eps);
        assert_eq!(d.into_names(), vec!["tol", "floor"]);
        assert!(tolerance(
            &RunConfig {
                tol: Some(-1.0),
                ..Default::default()
            },
            &mut Defaults::default()
        )
        .is_err());
    }

    #[test]
    fn vectors() {
        assert_eq!(parse_vector("0.5").unwrap(), vec![0.5]);
        assert_eq!(parse_vector(" [1, -1] ").unwrap(), vec![1.0, -1.0]);
        assert_eq!(parse_vector("1,2,3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(parse_vector("a").is_err());
        assert!(parse_vector("").is_err());
        assert!(parse_vector("inf").is_err());
    }
}
