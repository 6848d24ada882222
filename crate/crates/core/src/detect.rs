//! Convergence verdicts at a finite horizon.
//!
//! * strong: residual `ĉ_N(x - ṽ)` on the sliding curve, which is exactly
//!   `max_j ||mean(j, N) - v||`, the uniform-in-start Cesàro criterion;
//! * quasi: tail maximum of the block curve of `x - ṽ`;
//! * weak: the strong residual of every scalar sequence `f(x_n)` for `f` in a
//!   set of unit-dual-norm probes.
//!
//! A verdict converges when the residual is below `ε`, diverges when it
//! reaches the divergence floor (default `10ε`) and is inconclusive in
//! between.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::hull::{convex_hull, distance_to_hull, distance_to_interval, Point};
use crate::rng::SplitMix64;
use crate::seminorms::{block_curve_from, check_max_window, QEstimate};
use crate::sequence::SequenceSample;
use crate::sum::NeumaierSum;
use crate::vector::{Norm, Vector};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Converges,
    Diverges,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Strong,
    Quasi,
    Weak,
}

impl core::fmt::Display for Status {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Status::Converges => "converges",
            Status::Diverges => "diverges",
            Status::Inconclusive => "inconclusive",
        })
    }
}

impl core::fmt::Display for Mode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Mode::Strong => "strong",
            Mode::Quasi => "quasi",
            Mode::Weak => "weak",
        })
    }
}

/// Decision thresholds: converges below `eps`, diverges at or above `floor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub eps: f64,
    pub floor: f64,
}

impl Tolerance {
    pub const FLOOR_FACTOR: f64 = 10.0;

    pub fn new(eps: f64) -> Result<Self> {
        Tolerance::with_floor(eps, Self::FLOOR_FACTOR * eps)
    }

    pub fn with_floor(eps: f64, floor: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "tolerance {eps} must be positive"
            )));
        }
        if !(floor.is_finite() && floor >= eps) {
            return Err(Error::InvalidParameter(alloc::format!(
                "divergence floor {floor} must be at least the tolerance {eps}"
            )));
        }
        Ok(Tolerance { eps, floor })
    }

    pub fn classify(&self, residual: f64) -> Status {
        if residual < self.eps {
            Status::Converges
        } else if residual >= self.floor {
            Status::Diverges
        } else {
            Status::Inconclusive
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub candidate: Vector,
    pub residual: f64,
    pub tolerance: f64,
    pub divergence_floor: f64,
    pub window: usize,
    pub horizon: usize,
    pub mode: Mode,
}

impl Verdict {
    pub(crate) fn new(
        mode: Mode,
        candidate: Vector,
        residual: f64,
        tol: Tolerance,
        window: usize,
        horizon: usize,
    ) -> Self {
        Verdict {
            status: tol.classify(residual),
            candidate,
            residual,
            tolerance: tol.eps,
            divergence_floor: tol.floor,
            window,
            horizon,
            mode,
        }
    }
}

/// Which samples enter the grand mean of [`candidate_limit_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateWindow {
    /// The last `⌈3M/4⌉` samples.
    #[default]
    Suffix,
    /// All `M` samples.
    Full,
}

/// Grand Cesàro mean of the last `⌈3M/4⌉` samples. Requires `M >= 4`.
pub fn candidate_limit(x: &SequenceSample) -> Result<Vector> {
    candidate_limit_with(x, CandidateWindow::Suffix)
}

pub fn candidate_limit_with(x: &SequenceSample, window: CandidateWindow) -> Result<Vector> {
    let m = x.len();
    if m < 4 {
        return Err(Error::InvalidParameter(alloc::format!(
            "candidate limit needs at least 4 samples, got {m}"
        )));
    }
    let keep = match window {
        CandidateWindow::Suffix => (3 * m).div_ceil(4),
        CandidateWindow::Full => m,
    };
    let mut acc = vec![NeumaierSum::new(); x.dim()];
    for s in x.iter().skip(m - keep) {
        for (a, v) in acc.iter_mut().zip(s) {
            a.add(*v);
        }
    }
    Vector::new(acc.iter().map(|a| a.value() / keep as f64).collect())
}

/// Strong almost convergence test: residual `ĉ_N(x - ṽ)`. Requires `1 <= N <= M/2`.
pub fn check_strong(
    x: &SequenceSample,
    v: &Vector,
    window: usize,
    tol: Tolerance,
) -> Result<Verdict> {
    let residual = strong_residual(x, v, window)?;
    Ok(Verdict::new(
        Mode::Strong,
        v.clone(),
        residual,
        tol,
        window,
        x.len(),
    ))
}

fn strong_residual(x: &SequenceSample, v: &Vector, window: usize) -> Result<f64> {
    v.check_dim(x.dim())?;
    check_max_window(x.len(), window)?;
    let y = x.sub_constant(v)?;
    Ok(y.prefix_sums()
        .sup_sliding(window, y.norm())
        .expect("window checked"))
}

/// Quasi almost convergence test: residual is the block-curve tail maximum of `x - ṽ`.
pub fn check_quasi(
    x: &SequenceSample,
    v: &Vector,
    window: usize,
    tol: Tolerance,
) -> Result<Verdict> {
    let q = quasi_estimate(x, v, window)?;
    Ok(Verdict::new(
        Mode::Quasi,
        v.clone(),
        q.tail_max,
        tol,
        window,
        x.len(),
    ))
}

fn quasi_estimate(x: &SequenceSample, v: &Vector, window: usize) -> Result<QEstimate> {
    v.check_dim(x.dim())?;
    check_max_window(x.len(), window)?;
    let y = x.sub_constant(v)?;
    QEstimate::from_curve(block_curve_from(
        &y.prefix_sums(),
        y.norm(),
        y.bound(),
        window,
    ))
}

/// Weak almost convergence test: worst strong residual of `f(x_n)` against
/// `f(v)` over the probes.
pub fn check_weak(
    x: &SequenceSample,
    v: &Vector,
    probes: &ProbeSet,
    window: usize,
    tol: Tolerance,
) -> Result<Verdict> {
    v.check_dim(x.dim())?;
    let mut residual = 0.0f64;
    for f in probes.probes() {
        let fx = x.pair_with(f)?;
        let fv = Vector::scalar(f.dot(v)?)?;
        residual = residual.max(strong_residual(&fx, &fv, window)?);
    }
    Ok(Verdict::new(
        Mode::Weak,
        v.clone(),
        residual,
        tol,
        window,
        x.len(),
    ))
}

/// Bounded linear functionals on `V` given by inner-product pairing, each
/// scaled to unit norm in the dual of the space's norm (l1 ↔ linf, l2 ↔ l2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSet {
    probes: Vec<Vector>,
    norm: Norm,
}

impl ProbeSet {
    pub const DEFAULT_RANDOM_PROBES: usize = 8;

    /// Rescales every probe to unit dual norm.
    pub fn new(probes: Vec<Vector>, norm: Norm) -> Result<Self> {
        let first = probes
            .first()
            .ok_or_else(|| Error::InvalidParameter("probe set must not be empty".into()))?;
        let dim = first.dim();
        let dual = norm.dual();
        let mut scaled = Vec::with_capacity(probes.len());
        for f in &probes {
            f.check_dim(dim).map_err(|_| Error::DimensionMismatch {
                expected: dim,
                found: f.dim(),
            })?;
            let n = f.norm(dual);
            if n == 0.0 {
                return Err(Error::InvalidParameter("probe must be nonzero".into()));
            }
            scaled.push(f.scale(1.0 / n));
        }
        Ok(ProbeSet {
            probes: scaled,
            norm,
        })
    }

    /// The `d` coordinate functionals.
    pub fn coordinates(dim: usize, norm: Norm) -> Result<Self> {
        let probes = (0..dim)
            .map(|i| {
                let mut e = vec![0.0; dim];
                e[i] = 1.0;
                Vector::new(e)
            })
            .collect::<Result<Vec<_>>>()?;
        ProbeSet::new(probes, norm)
    }

    /// Coordinates plus [`Self::DEFAULT_RANDOM_PROBES`] seeded random directions.
    pub fn default_for(dim: usize, norm: Norm, seed: u64) -> Result<Self> {
        let mut set = ProbeSet::coordinates(dim, norm)?;
        let mut rng = SplitMix64::new(seed);
        for _ in 0..Self::DEFAULT_RANDOM_PROBES {
            let f = loop {
                let c: Vec<f64> = (0..dim).map(|_| rng.symmetric(1.0)).collect();
                if c.iter().any(|&a| a != 0.0) {
                    break Vector::new(c)?;
                }
            };
            let n = f.norm(norm.dual());
            set.probes.push(f.scale(1.0 / n));
        }
        Ok(set)
    }

    pub fn probes(&self) -> &[Vector] {
        &self.probes
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn dim(&self) -> usize {
        self.probes[0].dim()
    }

    /// Checks `|f(v)| <= ||v||` on `trials` random points per probe.
    pub fn operator_norm_check(&self, trials: usize, seed: u64) -> bool {
        let mut rng = SplitMix64::new(seed);
        let dim = self.dim();
        (0..trials).all(|_| {
            let comps: Vec<f64> = (0..dim).map(|_| rng.symmetric(10.0)).collect();
            let v = Vector::from_slice_unchecked(&comps);
            let nv = v.norm(self.norm);
            self.probes.iter().all(|f| {
                f.dot(&v)
                    .map(|p| p.abs() <= nv * (1.0 + 1e-12))
                    .unwrap_or(false)
            })
        })
    }
}

/// Outcome of [`sa_cauchy_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyReport {
    pub is_cauchy: bool,
    /// Largest `||mean(j, n) - mean(j, m)||` seen.
    pub worst_gap: f64,
    /// `(n, m, j)` attaining `worst_gap`; `None` when the grid has one length.
    pub worst: Option<(usize, usize, usize)>,
    /// Window lengths examined.
    pub windows: Vec<usize>,
    pub tolerance: f64,
}

/// Up to `max_len` distinct integers spread geometrically over `lo..=hi`,
/// endpoints included.
pub fn log_grid(lo: usize, hi: usize, max_len: usize) -> Vec<usize> {
    if lo > hi || max_len == 0 {
        return Vec::new();
    }
    if hi - lo < max_len {
        return (lo..=hi).collect();
    }
    let ratio = libm::log(hi as f64 / lo as f64);
    let steps = (max_len - 1) as f64;
    let mut grid: Vec<usize> = (0..max_len)
        .map(|i| libm::round(lo as f64 * libm::exp(ratio * i as f64 / steps)) as usize)
        .map(|n| n.clamp(lo, hi))
        .collect();
    grid[0] = lo;
    grid[max_len - 1] = hi;
    grid.dedup();
    grid
}

/// Max number of window lengths in the s.a.-Cauchy grid.
pub const CAUCHY_GRID: usize = 32;

/// Finite s.a.-Cauchy test: for all window lengths `n, m` on a logarithmic
/// grid over `(N0, M/2]` and every start `j` where both windows fit,
/// `||mean(j, n) - mean(j, m)|| < ε`.
pub fn sa_cauchy_check(x: &SequenceSample, threshold: usize, eps: f64) -> Result<CauchyReport> {
    let half = x.len() / 2;
    if threshold >= half {
        return Err(Error::InvalidParameter(alloc::format!(
            "threshold {threshold} must be below M/2 = {half}"
        )));
    }
    let windows = log_grid(threshold + 1, half, CAUCHY_GRID);
    let p = x.prefix_sums();
    let norm = x.norm();
    let dim = x.dim();
    let (mut a, mut b) = (vec![0.0; dim], vec![0.0; dim]);
    let mut worst_gap = 0.0f64;
    let mut worst = None;
    for (i, &n) in windows.iter().enumerate() {
        for &m in &windows[i + 1..] {
            for j in 1..=x.len() - m + 1 {
                p.window_mean_into(j, n, &mut a);
                p.window_mean_into(j, m, &mut b);
                for (u, w) in a.iter_mut().zip(&b) {
                    *u -= w;
                }
                let gap = norm.of_slice(&a);
                if worst.is_none() || gap > worst_gap {
                    worst_gap = gap;
                    worst = Some((n, m, j));
                }
            }
        }
    }
    Ok(CauchyReport {
        is_cauchy: worst_gap < eps,
        worst_gap,
        worst,
        windows,
        tolerance: eps,
    })
}

/// Euclidean distance from `candidate` to the convex hull of the samples
/// (an interval for `d = 1`, a polygon for `d = 2`).
pub fn convex_hull_audit(x: &SequenceSample, candidate: &Vector) -> Result<f64> {
    candidate.check_dim(x.dim())?;
    match x.dim() {
        1 => Ok(distance_to_interval(
            x.as_flat().iter().copied(),
            candidate.components()[0],
        )),
        2 => {
            let pts: Vec<Point> = x.iter().map(|s| [s[0], s[1]]).collect();
            let c = candidate.components();
            Ok(distance_to_hull(&convex_hull(&pts), [c[0], c[1]]))
        }
        d => Err(Error::HullDimension(d)),
    }
}

/// `L_f(x) = f(v)` for a sequence whose strong almost limit is `v`.
pub fn induced_functional(f: &Vector, v: &Vector) -> Result<f64> {
    f.dot(v)
}

/// Comparison of `|L_f(x)|` with the sliding estimate `ĉ_N(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalAudit {
    pub value: f64,
    pub c_at_n: f64,
    pub slack: f64,
    pub holds: bool,
}

/// Audits `|f(v)| <= ĉ_N(x) + slack` for a unit-dual-norm probe `f`.
pub fn audit_induced_functional(
    f: &Vector,
    x: &SequenceSample,
    v: &Vector,
    window: usize,
    slack: f64,
) -> Result<FunctionalAudit> {
    v.check_dim(x.dim())?;
    check_max_window(x.len(), window)?;
    let value = induced_functional(f, v)?;
    let c_at_n = x
        .prefix_sums()
        .sup_sliding(window, x.norm())
        .expect("window checked");
    Ok(FunctionalAudit {
        value,
        c_at_n,
        slack,
        holds: value.abs() <= c_at_n + slack,
    })
}
