//! Windowed integral means of sampled bounded functions `f: [0, ∞) → V`.
//!
//! The function is known on the uniform grid `t_k = k·h`, `k = 0..=K`.
//! Integrals use the composite trapezoid rule; the panel averages
//! `(f(t_k) + f(t_{k+1})) / 2` are fed through the same compensated prefix
//! sums as discrete sequences, so the integral mean over `[a, a+t]` is the
//! sliding mean of `t/h` consecutive panels. Offsets `a` range over the grid
//! only.

use alloc::vec::Vec;

use crate::detect::{Mode, Tolerance, Verdict};
use crate::sequence::{PrefixSums, SequenceSample};
use crate::sum::NeumaierSum;
use crate::vector::{Norm, Vector};
use crate::{Error, Result};

const BOUND_SLACK: f64 = 1e-12;
/// Relative distance from an integer multiple of `h` still accepted as on-grid.
const GRID_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    step: f64,
    dim: usize,
    data: Vec<f64>,
    bound: f64,
    norm: Norm,
}

impl SampledFunction {
    /// `values` holds `f(t_0), …, f(t_K)` as `(K+1)·dim` contiguous scalars.
    pub fn from_flat(
        step: f64,
        dim: usize,
        data: Vec<f64>,
        bound: f64,
        norm: Norm,
    ) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "step {step} must be positive"
            )));
        }
        if dim == 0 {
            return Err(Error::EmptyVector);
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: data.len() % dim,
            });
        }
        if data.len() / dim < 3 {
            return Err(Error::InvalidParameter(
                "a sampled function needs K >= 2 panels".into(),
            ));
        }
        if !bound.is_finite() || bound < 0.0 {
            return Err(Error::InvalidBound(bound));
        }
        if let Some(index) = data.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index: index % dim });
        }
        let limit = bound * (1.0 + BOUND_SLACK);
        for (k, x) in data.chunks_exact(dim).enumerate() {
            let n = norm.of_slice(x);
            if n > limit {
                return Err(Error::BoundExceeded {
                    index: k,
                    norm: n,
                    bound,
                });
            }
        }
        Ok(SampledFunction {
            step,
            dim,
            data,
            bound,
            norm,
        })
    }

    pub fn new(step: f64, values: &[Vector], bound: f64, norm: Norm) -> Result<Self> {
        let first = values.first().ok_or(Error::EmptySequence)?;
        let mut data = Vec::with_capacity(values.len() * first.dim());
        for v in values {
            first.check_dim(v.dim())?;
            data.extend_from_slice(v.components());
        }
        SampledFunction::from_flat(step, first.dim(), data, bound, norm)
    }

    /// Samples `f` at `t_k = k·h` for `k = 0..=panels`; `f` writes `dim` components.
    pub fn from_fn(
        step: f64,
        panels: usize,
        dim: usize,
        bound: f64,
        norm: Norm,
        mut f: impl FnMut(f64, &mut [f64]),
    ) -> Result<Self> {
        let mut data = alloc::vec![0.0; (panels + 1) * dim];
        for (k, out) in data.chunks_exact_mut(dim.max(1)).enumerate() {
            f(k as f64 * step, out);
        }
        SampledFunction::from_flat(step, dim, data, bound, norm)
    }

    /// The step function `f(s) = x_{⌊s⌋+1}` on `[0, M]` with `h = 1`; the last
    /// grid value repeats `x_M`.
    pub fn from_sequence_steps(x: &SequenceSample) -> Result<Self> {
        let mut data = x.as_flat().to_vec();
        data.extend_from_slice(x.get(x.len()).expect("sequences are nonempty"));
        SampledFunction::from_flat(1.0, x.dim(), data, x.bound(), x.norm())
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of panels `K`.
    pub fn panels(&self) -> usize {
        self.data.len() / self.dim - 1
    }

    pub fn duration(&self) -> f64 {
        self.panels() as f64 * self.step
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// `f(t_k)` for `0 <= k <= K`.
    pub fn value(&self, k: usize) -> Option<&[f64]> {
        self.data.get(k * self.dim..(k + 1) * self.dim)
    }

    pub fn sup_norm(&self) -> f64 {
        self.data
            .chunks_exact(self.dim)
            .fold(0.0, |m, x| m.max(self.norm.of_slice(x)))
    }

    /// `f - v`, with bound `B + ||v||`.
    pub fn sub_constant(&self, v: &Vector) -> Result<Self> {
        v.check_dim(self.dim)?;
        let vc = v.components();
        let data = self
            .data
            .chunks_exact(self.dim)
            .flat_map(|x| x.iter().zip(vc).map(|(a, b)| a - b))
            .collect();
        Ok(SampledFunction {
            data,
            bound: self.bound + v.norm(self.norm),
            ..self.clone()
        })
    }

    /// `λf + μg` on a common grid.
    pub fn linear_combination(lambda: f64, f: &Self, mu: f64, g: &Self) -> Result<Self> {
        if f.dim != g.dim {
            return Err(Error::DimensionMismatch {
                expected: f.dim,
                found: g.dim,
            });
        }
        if f.step != g.step || f.data.len() != g.data.len() || f.norm != g.norm {
            return Err(Error::InvalidParameter(
                "functions must share grid and norm".into(),
            ));
        }
        let data = f
            .data
            .iter()
            .zip(&g.data)
            .map(|(a, b)| lambda * a + mu * b)
            .collect();
        let bound = lambda.abs() * f.bound + mu.abs() * g.bound;
        Ok(SampledFunction {
            data,
            bound,
            ..f.clone()
        })
    }

    /// Grid index of a time `s = k·h`.
    pub fn grid_index(&self, time: f64) -> Result<usize> {
        let q = time / self.step;
        let k = libm::round(q);
        if !(time.is_finite() && time >= 0.0) || libm::fabs(q - k) > GRID_TOLERANCE * q.max(1.0) {
            return Err(Error::OffGrid {
                time,
                step: self.step,
            });
        }
        Ok(k as usize)
    }

    /// Compensated prefix sums of the trapezoid panel averages.
    pub fn panel_sums(&self) -> PrefixSums {
        let d = self.dim;
        let panels: Vec<f64> = self.data[..self.data.len() - d]
            .iter()
            .zip(&self.data[d..])
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        PrefixSums::from_flat(d, &panels)
    }

    fn check_window(&self, offset: usize, len: usize) -> Result<()> {
        if len == 0 || offset + len > self.panels() {
            return Err(Error::WindowOutOfRange {
                start: offset,
                len,
                horizon: self.panels(),
            });
        }
        Ok(())
    }
}

/// `(1/t) ∫_a^{a+t} f(s) ds` by the composite trapezoid rule. `a` and `t` must
/// be multiples of `h` with `t >= h` and `a + t <= K·h`.
pub fn integral_mean(f: &SampledFunction, a: f64, t: f64) -> Result<Vector> {
    let (offset, len) = (f.grid_index(a)?, f.grid_index(t)?);
    f.check_window(offset, len)?;
    f.panel_sums().window_mean(offset + 1, len)
}

/// `max_a ||integral_mean(f, a, t)||` over grid offsets with `a + t <= K·h`.
pub fn c_cont(f: &SampledFunction, t: f64) -> Result<f64> {
    let len = f.grid_index(t)?;
    f.check_window(0, len)?;
    Ok(f.panel_sums()
        .sup_sliding(len, f.norm)
        .expect("window checked"))
}

/// Strong test for functions: residual `c_cont(f - v, t)`. The verdict's
/// `window` and `horizon` are in grid steps (`t/h` and `K`).
pub fn check_strong_cont(
    f: &SampledFunction,
    v: &Vector,
    t: f64,
    tol: Tolerance,
) -> Result<Verdict> {
    let g = f.sub_constant(v)?;
    let residual = c_cont(&g, t)?;
    Ok(Verdict::new(
        Mode::Strong,
        v.clone(),
        residual,
        tol,
        f.grid_index(t)?,
        f.panels(),
    ))
}

/// Trapezoid mean over the last `⌈3K/4⌉` panels.
pub fn candidate_limit_cont(f: &SampledFunction) -> Result<Vector> {
    let k = f.panels();
    let keep = (3 * k).div_ceil(4);
    let d = f.dim;
    let mut acc = alloc::vec![NeumaierSum::new(); d];
    for p in k - keep..k {
        let (a, b) = (f.value(p).unwrap(), f.value(p + 1).unwrap());
        for (s, (u, w)) in acc.iter_mut().zip(a.iter().zip(b)) {
            s.add(0.5 * (u + w));
        }
    }
    Vector::new(acc.iter().map(|s| s.value() / keep as f64).collect())
}
