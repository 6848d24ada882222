//! Bounded sequence samples and the exact windowed-sum machinery.
//!
//! Indices follow the 1-based convention `x_1, …, x_M`; a window of length
//! `n` starting at `j` covers `x_j, …, x_{j+n-1}` and fits iff
//! `j >= 1 && j + n - 1 <= M`.

use alloc::vec;
use alloc::vec::Vec;

use crate::sum::{pair_difference, NeumaierSum};
use crate::vector::{Norm, Vector};
use crate::{Error, Result};

/// Rounding slack accepted when validating a declared bound.
const BOUND_SLACK: f64 = 1e-12;

/// Truncation `x_1..x_M` of a bounded `V`-valued sequence.
///
/// Samples are stored contiguously (`M * dim` scalars). Every sample has
/// `norm(x_k) <= bound`; this is checked on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSample {
    dim: usize,
    data: Vec<f64>,
    bound: f64,
    norm: Norm,
}

impl SequenceSample {
    pub fn new(samples: &[Vector], bound: f64, norm: Norm) -> Result<Self> {
        let first = samples.first().ok_or(Error::EmptySequence)?;
        let dim = first.dim();
        let mut data = Vec::with_capacity(samples.len() * dim);
        for s in samples {
            first.check_dim(s.dim())?;
            data.extend_from_slice(s.components());
        }
        SequenceSample::from_flat(dim, data, bound, norm)
    }

    /// Builds a sample from `M * dim` contiguous components.
    pub fn from_flat(dim: usize, data: Vec<f64>, bound: f64, norm: Norm) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyVector);
        }
        if data.is_empty() {
            return Err(Error::EmptySequence);
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: data.len() % dim,
            });
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
                    index: k + 1,
                    norm: n,
                    bound,
                });
            }
        }
        Ok(SequenceSample {
            dim,
            data,
            bound,
            norm,
        })
    }

    pub fn from_scalars(values: &[f64], bound: f64) -> Result<Self> {
        SequenceSample::from_flat(1, values.to_vec(), bound, Norm::L2)
    }

    /// For sequences derived from validated ones where `bound` holds by
    /// construction (differences, combinations, functional images).
    pub(crate) fn derived(dim: usize, data: Vec<f64>, bound: f64, norm: Norm) -> Self {
        debug_assert!(dim > 0 && !data.is_empty() && data.len().is_multiple_of(dim));
        SequenceSample {
            dim,
            data,
            bound,
            norm,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Horizon `M`.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
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

    /// `x_k` for `1 <= k <= M`.
    pub fn get(&self, k: usize) -> Option<&[f64]> {
        if k == 0 || k > self.len() {
            return None;
        }
        Some(&self.data[(k - 1) * self.dim..k * self.dim])
    }

    pub fn iter(&self) -> core::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn to_vectors(&self) -> Vec<Vector> {
        self.iter().map(Vector::from_slice_unchecked).collect()
    }

    /// `max_k ||x_k||`.
    pub fn sup_norm(&self) -> f64 {
        self.iter().fold(0.0, |m, x| m.max(self.norm.of_slice(x)))
    }

    /// Re-declares the norm, validating the bound under the new norm.
    pub fn with_norm(self, norm: Norm) -> Result<Self> {
        SequenceSample::from_flat(self.dim, self.data, self.bound, norm)
    }

    /// Left shift by `k`: `x_{k+1}, …, x_M`, same bound.
    pub fn shift(&self, k: usize) -> Result<Self> {
        let horizon = self.len();
        if k >= horizon {
            return Err(Error::ShiftOutOfRange { shift: k, horizon });
        }
        Ok(SequenceSample::derived(
            self.dim,
            self.data[k * self.dim..].to_vec(),
            self.bound,
            self.norm,
        ))
    }

    /// `Tx - x` truncated to the `M - 1` terms it is defined on.
    pub fn shift_difference(&self) -> Result<Self> {
        let horizon = self.len();
        if horizon < 2 {
            return Err(Error::ShiftOutOfRange { shift: 1, horizon });
        }
        let d = self.dim;
        let data = self.data[d..]
            .iter()
            .zip(&self.data[..self.data.len() - d])
            .map(|(a, b)| a - b);
        Ok(SequenceSample::derived(
            d,
            data.collect(),
            2.0 * self.bound,
            self.norm,
        ))
    }

    /// Terms `x_{offset}, x_{offset+stride}, …` (1-based offset).
    pub fn subsequence(&self, offset: usize, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::InvalidParameter("stride must be at least 1".into()));
        }
        let horizon = self.len();
        if offset == 0 || offset > horizon {
            return Err(Error::ShiftOutOfRange {
                shift: offset,
                horizon,
            });
        }
        let mut data = Vec::new();
        let mut k = offset;
        while k <= horizon {
            data.extend_from_slice(&self.data[(k - 1) * self.dim..k * self.dim]);
            k += stride;
        }
        Ok(SequenceSample::derived(
            self.dim, data, self.bound, self.norm,
        ))
    }

    /// `x - ṽ`, with bound `B + ||v||`.
    pub fn sub_constant(&self, v: &Vector) -> Result<Self> {
        v.check_dim(self.dim)?;
        let vc = v.components();
        let data = self
            .iter()
            .flat_map(|x| x.iter().zip(vc).map(|(a, b)| a - b))
            .collect();
        Ok(SequenceSample::derived(
            self.dim,
            data,
            self.bound + v.norm(self.norm),
            self.norm,
        ))
    }

    /// `λx`, with bound `|λ| B`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter(
                "scale factor must be finite".into(),
            ));
        }
        let data = self.data.iter().map(|c| lambda * c).collect();
        Ok(SequenceSample::derived(
            self.dim,
            data,
            lambda.abs() * self.bound,
            self.norm,
        ))
    }

    /// `λx + μy` over the common horizon `min(M_x, M_y)`.
    pub fn linear_combination(lambda: f64, x: &Self, mu: f64, y: &Self) -> Result<Self> {
        if x.dim != y.dim {
            return Err(Error::DimensionMismatch {
                expected: x.dim,
                found: y.dim,
            });
        }
        if x.norm != y.norm {
            return Err(Error::InvalidParameter(
                "norms of combined sequences differ".into(),
            ));
        }
        if !lambda.is_finite() || !mu.is_finite() {
            return Err(Error::InvalidParameter(
                "coefficients must be finite".into(),
            ));
        }
        let m = x.len().min(y.len()) * x.dim;
        let data = x.data[..m]
            .iter()
            .zip(&y.data[..m])
            .map(|(a, b)| lambda * a + mu * b)
            .collect();
        let bound = lambda.abs() * x.bound + mu.abs() * y.bound;
        Ok(SequenceSample::derived(x.dim, data, bound, x.norm))
    }

    /// The scalar sequence `f(x_n) = <f, x_n>`. Its bound is `||f||_* B`.
    pub fn pair_with(&self, f: &Vector) -> Result<Self> {
        f.check_dim(self.dim)?;
        let fc = f.components();
        let data = self
            .iter()
            .map(|x| x.iter().zip(fc).map(|(a, b)| a * b).sum())
            .collect();
        let bound = f.norm(self.norm.dual()) * self.bound;
        Ok(SequenceSample::derived(1, data, bound, Norm::L2))
    }

    /// First `m` samples.
    pub fn truncate(&self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::EmptySequence);
        }
        let m = m.min(self.len());
        Ok(SequenceSample::derived(
            self.dim,
            self.data[..m * self.dim].to_vec(),
            self.bound,
            self.norm,
        ))
    }

    pub fn prefix_sums(&self) -> PrefixSums {
        PrefixSums::new(self)
    }

    /// `(1/n) Σ_{i=0}^{n-1} x_{i+j}` through the compensated prefix sums.
    ///
    /// Builds the prefix table on every call; use [`PrefixSums`] directly when
    /// evaluating many windows.
    pub fn sliding_mean(&self, n: usize, j: usize) -> Result<Vector> {
        self.prefix_sums().window_mean(j, n)
    }
}

/// `ṽ` truncated to `m` terms, declared bound `||v||`.
pub fn constant_sequence(v: &Vector, m: usize, norm: Norm) -> Result<SequenceSample> {
    if m == 0 {
        return Err(Error::EmptySequence);
    }
    let data = v.components().repeat(m);
    Ok(SequenceSample::derived(v.dim(), data, v.norm(norm), norm))
}

/// Compensated prefix sums `P_0 = 0, P_k = P_{k-1} + x_k`, stored as
/// unevaluated `(hi, lo)` pairs per component so that any window sum
/// `P_{j+n-1} - P_{j-1}` costs O(d) and keeps the accuracy of a compensated
/// sum over the window.
#[derive(Debug, Clone)]
pub struct PrefixSums {
    dim: usize,
    len: usize,
    hi: Vec<f64>,
    lo: Vec<f64>,
}

impl PrefixSums {
    pub fn new(x: &SequenceSample) -> Self {
        PrefixSums::from_flat(x.dim, &x.data)
    }

    pub(crate) fn from_flat(dim: usize, data: &[f64]) -> Self {
        let len = data.len() / dim;
        let mut hi = vec![0.0; (len + 1) * dim];
        let mut lo = vec![0.0; (len + 1) * dim];
        let mut acc = vec![NeumaierSum::new(); dim];
        for (k, x) in data.chunks_exact(dim).enumerate() {
            let base = (k + 1) * dim;
            for (c, (a, v)) in acc.iter_mut().zip(x).enumerate() {
                a.add(*v);
                hi[base + c] = a.hi();
                lo[base + c] = a.lo();
            }
        }
        PrefixSums { dim, len, hi, lo }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Horizon `M`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `P_k` (evaluated) for `0 <= k <= M`.
    pub fn prefix(&self, k: usize) -> Vector {
        let base = k * self.dim;
        let v: Vec<f64> = (0..self.dim)
            .map(|c| self.hi[base + c] + self.lo[base + c])
            .collect();
        Vector::from_slice_unchecked(&v)
    }

    pub fn fits(&self, j: usize, n: usize) -> bool {
        n >= 1 && j >= 1 && j + n - 1 <= self.len
    }

    /// Writes `Σ_{i=0}^{n-1} x_{i+j}` into `out`. Panics if the window does not fit.
    #[inline]
    pub fn window_sum_into(&self, j: usize, n: usize, out: &mut [f64]) {
        assert!(
            self.fits(j, n),
            "window ({j}, {n}) outside horizon {}",
            self.len
        );
        let a = (j - 1) * self.dim;
        let b = (j + n - 1) * self.dim;
        for (c, o) in out.iter_mut().enumerate() {
            *o = pair_difference(
                self.hi[b + c],
                self.lo[b + c],
                self.hi[a + c],
                self.lo[a + c],
            );
        }
    }

    /// Writes the window mean into `out`. Panics if the window does not fit.
    #[inline]
    pub fn window_mean_into(&self, j: usize, n: usize, out: &mut [f64]) {
        self.window_sum_into(j, n, out);
        let inv = n as f64;
        for o in out.iter_mut() {
            *o /= inv;
        }
    }

    pub fn window_mean(&self, j: usize, n: usize) -> Result<Vector> {
        if !self.fits(j, n) {
            return Err(Error::WindowOutOfRange {
                start: j,
                len: n,
                horizon: self.len,
            });
        }
        let mut out = vec![0.0; self.dim];
        self.window_mean_into(j, n, &mut out);
        Ok(Vector::from_slice_unchecked(&out))
    }

    /// `||mean(j, n) - v||` for a fitting window, `v` given as a component slice.
    #[inline]
    pub fn window_deviation(
        &self,
        j: usize,
        n: usize,
        v: &[f64],
        norm: Norm,
        buf: &mut [f64],
    ) -> f64 {
        self.window_mean_into(j, n, buf);
        for (o, c) in buf.iter_mut().zip(v) {
            *o -= c;
        }
        norm.of_slice(buf)
    }

    /// `max_j ||mean(j, n)||` over the sliding starts `j = 1..=M-n+1`;
    /// `None` when `n` is 0 or exceeds `M`.
    pub fn sup_sliding(&self, n: usize, norm: Norm) -> Option<f64> {
        if n == 0 || n > self.len {
            return None;
        }
        Some(self.sup_over_starts(n, norm, 1..=self.len - n + 1, 1))
    }

    /// `max_j ||mean(jn, n)||` over the block starts `jn`, `j >= 1`,
    /// `jn + n - 1 <= M`; `None` when no block fits.
    pub fn sup_block(&self, n: usize, norm: Norm) -> Option<f64> {
        if n == 0 || 2 * n - 1 > self.len {
            return None;
        }
        Some(self.sup_over_starts(n, norm, n..=self.len - n + 1, n))
    }

    // Sliding and block suprema share this loop so that a block window and the
    // sliding window at the same start evaluate to bit-identical norms.
    fn sup_over_starts(
        &self,
        n: usize,
        norm: Norm,
        starts: core::ops::RangeInclusive<usize>,
        stride: usize,
    ) -> f64 {
        let mut buf = vec![0.0; self.dim];
        let mut best = 0.0f64;
        for j in starts.step_by(stride) {
            self.window_mean_into(j, n, &mut buf);
            best = best.max(norm.of_slice(&buf));
        }
        best
    }
}
