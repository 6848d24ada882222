//! The five subcommands. Each returns an [`Outcome`]; writing it out is left
//! to the caller.

use std::path::Path;

use almostconv_core::continuous::candidate_limit_cont;
use almostconv_core::corpus::generate;
use almostconv_core::detect::{candidate_limit_with, CandidateWindow};
use almostconv_core::{
    check_quasi, check_strong, check_strong_cont, check_weak, convex_hull_audit, fekete_audit,
    fekete_worst_pair, sa_cauchy_check, CesaroCurve, CurveMode, GeneratorSpec, Norm, PEstimate,
    ProbeSet, Sample, SampledFunction, SequenceSample, Vector, BOUND_TOLERANCE,
};
use anyhow::{bail, Context, Result};
use rayon::ThreadPool;

use crate::config::{self, default_window, Defaults, RunConfig, DEFAULT_SEED};
use crate::io::{self, write_atomic};
use crate::parallel::{self, Curves};
use crate::report::{
    exit_code, ContinuousReport, FeketeReport, FeketeStatus, GenerateReport, PSummary, QSummary,
    Source, VerdictReport,
};

/// Result of a command: exit code, JSON report and a one-line summary.
#[derive(Debug)]
pub struct Outcome {
    pub code: u8,
    pub report: String,
    pub summary: String,
    /// False when stdout carries data, so the report must not go there.
    pub report_to_stdout: bool,
}

impl Outcome {
    fn new(code: u8, report: &impl serde::Serialize, summary: String) -> Result<Self> {
        let report = serde_json::to_string_pretty(report).context("serializing the report")?;
        Ok(Outcome {
            code,
            report,
            summary,
            report_to_stdout: true,
        })
    }
}

fn load_spec(path: &Path, config: &RunConfig) -> Result<GeneratorSpec> {
    let mut spec =
        io::read_spec(io::open(path).with_context(|| format!("opening spec {}", path.display()))?)
            .with_context(|| format!("reading spec {}", path.display()))?;
    if let Some(seed) = config.seed {
        spec = spec.with_seed(seed);
    }
    if let Some(step) = config.continuous_step {
        spec = spec.with_step(step);
    }
    Ok(spec)
}

fn single_source(config: &RunConfig) -> Result<()> {
    match (&config.input, &config.spec) {
        (Some(_), Some(_)) => bail!("give either --input or --spec, not both"),
        (None, None) => bail!("no data: pass --input FILE or --spec FILE"),
        _ => Ok(()),
    }
}

/// The sequence named by `--input` or `--spec`, re-declared under `--norm`.
fn load_sequence(config: &RunConfig, defaults: &mut Defaults) -> Result<(SequenceSample, Source)> {
    single_source(config)?;
    let (x, declared, source) = if let Some(path) = &config.input {
        let file = io::read_sequence(
            io::open(path).with_context(|| format!("opening {}", path.display()))?,
        )
        .with_context(|| format!("reading sequence {}", path.display()))?;
        (file.sample, file.header.norm, Source::Input(path.clone()))
    } else {
        let path = config.spec.as_ref().expect("one source checked");
        let spec = load_spec(path, config)?;
        let generated =
            generate(&spec).with_context(|| format!("generating {}", path.display()))?;
        let Sample::Sequence(x) = generated.sample else {
            bail!(
                "spec {} describes a function; use the continuous command",
                path.display()
            );
        };
        let norm = x.norm();
        (
            x,
            Some(norm),
            Source::Spec {
                path: path.clone(),
                spec,
            },
        )
    };
    let norm = defaults.pick("norm", config.norm.or(declared), Norm::default);
    let x = if norm == x.norm() {
        x
    } else {
        x.with_norm(norm).context("re-declaring the norm")?
    };
    Ok((x, source))
}

fn load_function(config: &RunConfig, defaults: &mut Defaults) -> Result<(SampledFunction, Source)> {
    single_source(config)?;
    let (f, declared, source) = if let Some(path) = &config.input {
        let file = io::read_function(
            io::open(path).with_context(|| format!("opening {}", path.display()))?,
            config.continuous_step,
        )
        .with_context(|| format!("reading function {}", path.display()))?;
        (file.function, file.header.norm, Source::Input(path.clone()))
    } else {
        let path = config.spec.as_ref().expect("one source checked");
        let spec = load_spec(path, config)?;
        let generated =
            generate(&spec).with_context(|| format!("generating {}", path.display()))?;
        let Sample::Function(f) = generated.sample else {
            bail!(
                "spec {} describes a sequence; use analyze or check",
                path.display()
            );
        };
        let norm = f.norm();
        (
            f,
            Some(norm),
            Source::Spec {
                path: path.clone(),
                spec,
            },
        )
    };
    let norm = defaults.pick("norm", config.norm.or(declared), Norm::default);
    let f = if norm == f.norm() {
        f
    } else {
        SampledFunction::from_flat(f.step(), f.dim(), f.as_flat().to_vec(), f.bound(), norm)
            .context("re-declaring the norm")?
    };
    Ok((f, source))
}

fn save_curve(path: &Path, curves: &Curves) -> Result<()> {
    let rows = curves.rows();
    write_atomic(path, |w| io::write_curve(w, &rows))
        .with_context(|| format!("writing curve {}", path.display()))
}

/// `analyze` (limit estimated from the data) and `check` (limit from
/// `--check-limit`): strong, quasi and weak verdicts plus curve summaries.
pub fn verdict(config: &RunConfig, pool: &ThreadPool, check: bool) -> Result<Outcome> {
    let mut defaults = Defaults::default();
    let (x, source) = load_sequence(config, &mut defaults)?;
    let tol = config::tolerance(config, &mut defaults)?;
    let window = defaults.pick("window", config.window, || default_window(x.len()));
    let seed = defaults.pick("seed", config.seed, || DEFAULT_SEED);

    let (v, candidate_window) = match (check, &config.check_limit) {
        (true, Some(v)) => (Vector::new(v.clone()).context("--check-limit")?, None),
        (true, None) => bail!("check needs a limit: pass --check-limit"),
        (false, Some(_)) => {
            bail!("analyze estimates the limit itself; use check to test a given one")
        }
        (false, None) => {
            let which = defaults.pick("candidate_window", config.candidate_window, || {
                CandidateWindow::default()
            });
            let v = candidate_limit_with(&x, which).context("estimating the candidate limit")?;
            (v, Some(which))
        }
    };
    if v.dim() != x.dim() {
        bail!(
            "limit has {} components, the sequence has dimension {}",
            v.dim(),
            x.dim()
        );
    }

    let curves = Curves::compute(pool, &x, &v, window).context("computing curves")?;
    let strong = check_strong(&x, &v, window, tol)?;
    let quasi = check_quasi(&x, &v, window, tol)?;
    let probes = ProbeSet::default_for(x.dim(), x.norm(), seed)?;
    let weak = check_weak(&x, &v, &probes, window, tol)?;
    let p = PEstimate::from_curve(curves.sliding.clone())?;
    let hull_distance = if x.dim() <= 2 {
        Some(convex_hull_audit(&x, &v)?)
    } else {
        None
    };
    let cauchy = sa_cauchy_check(&x, window / 2, tol.eps)?;

    if let Some(path) = &config.out_curve {
        save_curve(path, &curves)?;
    }

    let summary = format!(
        "{}: strong {} (residual {:.3e}, tol {:.1e}, floor {:.1e}), quasi {}, weak {}; candidate {:?}, N = {}, M = {}",
        if check { "check" } else { "analyze" },
        strong.status,
        strong.residual,
        tol.eps,
        tol.floor,
        quasi.status,
        weak.status,
        v.components(),
        window,
        x.len(),
    );
    let report = VerdictReport {
        command: if check { "check" } else { "analyze" },
        curve_file: config.out_curve.clone(),
        candidate_window,
        norm: x.norm(),
        seed,
        dim: x.dim(),
        bound: x.bound(),
        source,
        defaulted: defaults.into_names(),
        threads: pool.current_num_threads(),
        quasi,
        weak,
        probes: probes.probes().len(),
        p: PSummary {
            c_at_n: p.c_at_n,
            running_min: p.running_min,
        },
        q: QSummary {
            tail_max: curves.block.tail_max(),
        },
        hull_distance,
        cauchy,
        verdict: strong,
    };
    Outcome::new(exit_code(report.verdict.status), &report, summary)
}

/// Strong almost convergence of a sampled function; the window counts grid
/// steps and defaults to half the sampled domain.
pub fn continuous(config: &RunConfig) -> Result<Outcome> {
    if config.out_curve.is_some() {
        bail!("--out-curve applies to sequences only");
    }
    let mut defaults = Defaults::default();
    let (f, source) = load_function(config, &mut defaults)?;
    let tol = config::tolerance(config, &mut defaults)?;
    let window = defaults.pick("window", config.window, || f.panels() / 2);
    if window == 0 || window > f.panels() {
        bail!(
            "window {window} must be between 1 and the {} grid steps",
            f.panels()
        );
    }
    let v = match &config.check_limit {
        Some(v) => Vector::new(v.clone()).context("--check-limit")?,
        None => candidate_limit_cont(&f).context("estimating the candidate limit")?,
    };
    let t = window as f64 * f.step();
    let verdict = check_strong_cont(&f, &v, t, tol)?;
    let summary = format!(
        "continuous: {} (residual {:.3e}, tol {:.1e}) at t = {t}, candidate {:?}, duration {}",
        verdict.status,
        verdict.residual,
        tol.eps,
        v.components(),
        f.duration(),
    );
    let report = ContinuousReport {
        command: "continuous",
        time_window: t,
        step: f.step(),
        duration: f.duration(),
        norm: f.norm(),
        dim: f.dim(),
        bound: f.bound(),
        source,
        defaulted: defaults.into_names(),
        verdict,
    };
    Outcome::new(exit_code(report.verdict.status), &report, summary)
}

/// Subadditivity audit of the sliding curve, computed from a sequence or read
/// from a curve CSV. Exit 0 iff no pair is violated.
pub fn fekete(config: &RunConfig, pool: &ThreadPool) -> Result<Outcome> {
    let mut defaults = Defaults::default();
    let (curve, horizon, norm, source) = if let Some(path) = &config.curve {
        if config.input.is_some() || config.spec.is_some() {
            bail!("give either --curve or a sequence (--input/--spec), not both");
        }
        if config.out_curve.is_some() {
            bail!("--out-curve needs a sequence input");
        }
        let rows =
            io::read_curve(io::open(path).with_context(|| format!("opening {}", path.display()))?)
                .with_context(|| format!("reading curve {}", path.display()))?;
        let values: Vec<f64> = rows.iter().map(|r| r.c_sliding).collect();
        // The CSV carries no bound; the curve's own maximum stands in for it.
        let bound = values.iter().copied().fold(0.0, f64::max);
        let n = values.len();
        let curve =
            CesaroCurve::from_values(CurveMode::Sliding, values, 2 * n, bound, Norm::default())
                .with_context(|| format!("curve {}", path.display()))?;
        (curve, None, None, Source::Curve(path.clone()))
    } else {
        let (x, source) = load_sequence(config, &mut defaults)?;
        let window = defaults.pick("window", config.window, || default_window(x.len()));
        let curve = if let Some(path) = &config.out_curve {
            let which = defaults.pick("candidate_window", config.candidate_window, || {
                CandidateWindow::default()
            });
            let v = candidate_limit_with(&x, which).context("estimating the candidate limit")?;
            let curves = Curves::compute(pool, &x, &v, window).context("computing curves")?;
            save_curve(path, &curves)?;
            curves.sliding
        } else {
            parallel::sliding_curve(pool, &x, window).context("computing the sliding curve")?
        };
        (curve, Some(x.len()), Some(x.norm()), source)
    };

    let violations = fekete_audit(&curve)?;
    let worst_pair = fekete_worst_pair(&curve)?;
    let status = if violations.is_empty() {
        FeketeStatus::Holds
    } else {
        FeketeStatus::Violated
    };
    let mut summary = match status {
        FeketeStatus::Holds => format!(
            "fekete: holds for N = {} (worst slack {:.3e})",
            curve.max_window(),
            worst_pair.map_or(0.0, |w| w.slack)
        ),
        FeketeStatus::Violated => format!(
            "fekete: {} violated pairs for N = {}",
            violations.len(),
            curve.max_window()
        ),
    };
    for v in violations.iter().take(20) {
        summary.push_str(&format!(
            "\n  m = {}, n = {}: slack {:.6e}",
            v.m, v.n, v.slack
        ));
    }
    if violations.len() > 20 {
        summary.push_str(&format!(
            "\n  … {} more in the report",
            violations.len() - 20
        ));
    }
    let report = FeketeReport {
        command: "fekete",
        status,
        tolerance: BOUND_TOLERANCE * curve.bound,
        window: curve.max_window(),
        horizon,
        bound: curve.bound,
        norm,
        curve_file: config.out_curve.clone(),
        source,
        defaulted: defaults.into_names(),
        violations,
        worst_pair,
    };
    let code = if status == FeketeStatus::Holds { 0 } else { 1 };
    Outcome::new(code, &report, summary)
}

/// Writes the samples of `--spec` to `--output` (stdout when absent).
pub fn generate_cmd(config: &RunConfig) -> Result<Outcome> {
    let path = config.spec.as_ref().context("generate needs --spec FILE")?;
    if config.input.is_some() {
        bail!("generate reads a spec, not --input");
    }
    let spec = load_spec(path, config)?;
    let generated = generate(&spec).with_context(|| format!("generating {}", path.display()))?;
    let (samples, dim, bound) = match &generated.sample {
        Sample::Sequence(x) => (x.len(), x.dim(), x.bound()),
        Sample::Function(f) => (f.panels() + 1, f.dim(), f.bound()),
    };
    let write = |w: &mut dyn std::io::Write| match &generated.sample {
        Sample::Sequence(x) => io::write_sequence(w, x),
        Sample::Function(f) => io::write_function(w, f),
    };
    match &config.output {
        Some(out) => write_atomic(out, |w| Ok(write(w)?))
            .with_context(|| format!("writing {}", out.display()))?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = std::io::BufWriter::new(stdout.lock());
            write(&mut lock).context("writing to stdout")?;
            std::io::Write::flush(&mut lock)?;
        }
    }
    let summary = format!(
        "generate: {} with {samples} samples of dimension {dim} to {}",
        spec.kind_name(),
        config
            .output
            .as_deref()
            .map_or("stdout".into(), |p: &Path| p.display().to_string())
    );
    let report = GenerateReport {
        command: "generate",
        kind: spec.kind_name(),
        samples,
        dim,
        bound,
        truth: generated.truth.map(Vector::into_components),
        output: config.output.clone(),
        spec,
    };
    let mut outcome = Outcome::new(0, &report, summary)?;
    outcome.report_to_stdout = config.output.is_some();
    Ok(outcome)
}
