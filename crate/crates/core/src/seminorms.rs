//! Finite-horizon estimators of the sliding seminorm `p` and the block
//! seminorm `q`.
//!
//! Both are built on the window-supremum curve
//!
//! ```text
//! ĉ_n = max_j || (1/n) Σ_{i=0}^{n-1} x_{i+j} ||
//! ```
//!
//! where `j` runs over every sliding start that fits in the horizon
//! (sliding mode) or over the stride starts `j·n`, `j >= 1` (block mode).
//!
//! In sliding mode the curve is subadditive in the sense
//! `(m+n) ĉ_{m+n} <= m ĉ_m + n ĉ_n` even after truncation: every fitting
//! window of length `m+n` splits into a fitting length-`m` window followed by
//! a fitting length-`n` window. That makes [`fekete_audit`] an exact check and
//! justifies reporting `min_{n<=N} ĉ_n` next to `ĉ_N` as the limit estimate.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::sequence::{PrefixSums, SequenceSample};
use crate::vector::Norm;
use crate::{Error, Result, BOUND_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveMode {
    Sliding,
    Block,
}

/// Estimates `ĉ_1..ĉ_N` of one window-supremum curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CesaroCurve {
    pub mode: CurveMode,
    values: Vec<f64>,
    pub horizon: usize,
    pub bound: f64,
    pub norm: Norm,
}

impl CesaroCurve {
    /// Wraps externally supplied values (e.g. a curve read back from disk).
    pub fn from_values(
        mode: CurveMode,
        values: Vec<f64>,
        horizon: usize,
        bound: f64,
        norm: Norm,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter(
                "curve must have at least one value".into(),
            ));
        }
        if !bound.is_finite() || bound < 0.0 {
            return Err(Error::InvalidBound(bound));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "curve value at n = {} is not a finite nonnegative number",
                index + 1
            )));
        }
        Ok(CesaroCurve {
            mode,
            values,
            horizon,
            bound,
            norm,
        })
    }

    /// Largest window length `N`.
    pub fn max_window(&self) -> usize {
        self.values.len()
    }

    /// `ĉ_n` for `1 <= n <= N`.
    pub fn value(&self, n: usize) -> Option<f64> {
        n.checked_sub(1).and_then(|i| self.values.get(i).copied())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `max ĉ_n` over `⌈N/2⌉ <= n <= N`.
    pub fn tail_max(&self) -> f64 {
        let n = self.values.len();
        let start = n.div_ceil(2).max(1);
        self.values[start - 1..].iter().copied().fold(0.0, f64::max)
    }

    pub fn running_min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Finite-horizon estimate of the sliding seminorm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PEstimate {
    /// `ĉ_N`.
    pub c_at_n: f64,
    /// `min_{n <= N} ĉ_n`.
    pub running_min: f64,
    pub curve: CesaroCurve,
}

/// Finite-horizon estimate of the block seminorm; the limsup is proxied by the
/// maximum over the tail `⌈N/2⌉ <= n <= N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QEstimate {
    pub tail_max: f64,
    pub curve: CesaroCurve,
}

/// One pair `(m, n)` with `(m+n) ĉ_{m+n} > m ĉ_m + n ĉ_n + tol`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeketeViolation {
    pub m: usize,
    pub n: usize,
    /// `(m+n) ĉ_{m+n} - m ĉ_m - n ĉ_n`, positive for a violation.
    pub slack: f64,
}

/// `ĉ_n` in sliding mode: the sup over `j = 1..=M-n+1`.
pub fn c_sliding(x: &SequenceSample, n: usize) -> Result<f64> {
    x.prefix_sums()
        .sup_sliding(n, x.norm())
        .ok_or(Error::WindowOutOfRange {
            start: 1,
            len: n,
            horizon: x.len(),
        })
}

/// `ĉ_n` in block mode: the sup over starts `j·n` with `j >= 1`.
pub fn c_block(x: &SequenceSample, n: usize) -> Result<f64> {
    x.prefix_sums()
        .sup_block(n, x.norm())
        .ok_or(Error::NoBlockFits {
            len: n,
            horizon: x.len(),
        })
}

/// Checks `1 <= N <= M/2`.
pub(crate) fn check_max_window(horizon: usize, window: usize) -> Result<()> {
    let max = horizon / 2;
    if window == 0 || window > max {
        return Err(Error::MaxWindowOutOfRange { window, max });
    }
    Ok(())
}

pub fn sliding_curve(x: &SequenceSample, max_window: usize) -> Result<CesaroCurve> {
    check_max_window(x.len(), max_window)?;
    Ok(sliding_curve_from(
        &x.prefix_sums(),
        x.norm(),
        x.bound(),
        max_window,
    ))
}

pub fn block_curve(x: &SequenceSample, max_window: usize) -> Result<CesaroCurve> {
    check_max_window(x.len(), max_window)?;
    Ok(block_curve_from(
        &x.prefix_sums(),
        x.norm(),
        x.bound(),
        max_window,
    ))
}

pub(crate) fn sliding_curve_from(
    p: &PrefixSums,
    norm: Norm,
    bound: f64,
    max_window: usize,
) -> CesaroCurve {
    let values = (1..=max_window)
        .map(|n| {
            p.sup_sliding(n, norm)
                .expect("window checked against horizon")
        })
        .collect();
    CesaroCurve {
        mode: CurveMode::Sliding,
        values,
        horizon: p.len(),
        bound,
        norm,
    }
}

pub(crate) fn block_curve_from(
    p: &PrefixSums,
    norm: Norm,
    bound: f64,
    max_window: usize,
) -> CesaroCurve {
    let values = (1..=max_window)
        .map(|n| {
            p.sup_block(n, norm)
                .expect("window checked against horizon")
        })
        .collect();
    CesaroCurve {
        mode: CurveMode::Block,
        values,
        horizon: p.len(),
        bound,
        norm,
    }
}

impl PEstimate {
    /// Summarizes a sliding-mode curve.
    pub fn from_curve(curve: CesaroCurve) -> Result<Self> {
        if curve.mode != CurveMode::Sliding {
            return Err(Error::InvalidParameter(
                "p estimate needs a sliding curve".into(),
            ));
        }
        let c_at_n = *curve.values.last().expect("curves are nonempty");
        Ok(PEstimate {
            c_at_n,
            running_min: curve.running_min(),
            curve,
        })
    }
}

impl QEstimate {
    pub fn from_curve(curve: CesaroCurve) -> Result<Self> {
        if curve.mode != CurveMode::Block {
            return Err(Error::InvalidParameter(
                "q estimate needs a block curve".into(),
            ));
        }
        Ok(QEstimate {
            tail_max: curve.tail_max(),
            curve,
        })
    }
}

/// Sliding curve `ĉ_1..ĉ_N` with `ĉ_N` and its running minimum.
/// Requires `1 <= N <= M/2`.
pub fn estimate_p(x: &SequenceSample, max_window: usize) -> Result<PEstimate> {
    PEstimate::from_curve(sliding_curve(x, max_window)?)
}

/// Block curve `ĉ_1..ĉ_N` with its tail maximum. Requires `1 <= N <= M/2`.
pub fn estimate_q(x: &SequenceSample, max_window: usize) -> Result<QEstimate> {
    QEstimate::from_curve(block_curve(x, max_window)?)
}

/// Every pair `m <= n`, `m + n <= N`, whose subadditivity slack exceeds
/// `1e-9 · B`.
pub fn fekete_audit(curve: &CesaroCurve) -> Result<Vec<FeketeViolation>> {
    let tol = BOUND_TOLERANCE * curve.bound;
    let mut violations = Vec::new();
    for_each_pair(curve, |pair| {
        if pair.slack > tol {
            violations.push(pair);
        }
    })?;
    Ok(violations)
}

/// The audited pair with the largest slack (often negative); `None` when
/// `N < 2` leaves no pair.
pub fn fekete_worst_pair(curve: &CesaroCurve) -> Result<Option<FeketeViolation>> {
    let mut worst: Option<FeketeViolation> = None;
    for_each_pair(curve, |pair| {
        if worst.is_none_or(|w| pair.slack > w.slack) {
            worst = Some(pair);
        }
    })?;
    Ok(worst)
}

fn for_each_pair(curve: &CesaroCurve, mut visit: impl FnMut(FeketeViolation)) -> Result<()> {
    if curve.mode != CurveMode::Sliding {
        return Err(Error::BlockModeCurve);
    }
    let c = &curve.values;
    let big_n = c.len();
    for m in 1..=big_n / 2 {
        let mc = m as f64 * c[m - 1];
        for n in m..=big_n - m {
            let slack = (m + n) as f64 * c[m + n - 1] - mc - n as f64 * c[n - 1];
            visit(FeketeViolation { m, n, slack });
        }
    }
    Ok(())
}
