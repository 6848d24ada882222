//! Window-supremum curves computed across a rayon pool. Each `ĉ_n` is an
//! independent scan over the shared prefix sums, so the parallel curves are
//! bit-identical to the sequential ones.

use almostconv_core::{CesaroCurve, CurveMode, Error, PrefixSums, SequenceSample, Vector};
use anyhow::{Context, Result};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::io::CurveRow;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "ALMOSTCONV_THREADS";

/// Worker cap from [`THREADS_ENV`]; `None` when unset or empty.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .with_context(|| format!("{THREADS_ENV}={v:?} is not a thread count"))?;
            anyhow::ensure!(n >= 1, "{THREADS_ENV} must be at least 1");
            Ok(Some(n))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(e).context(THREADS_ENV),
    }
}

/// A pool of `threads` workers, or rayon's default size when `None`.
pub fn pool(threads: Option<usize>) -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .context("building the worker pool")
}

fn check_window(x: &SequenceSample, window: usize) -> almostconv_core::Result<()> {
    let max = x.len() / 2;
    if window == 0 || window > max {
        return Err(Error::MaxWindowOutOfRange { window, max });
    }
    Ok(())
}

fn curve_on(
    pool: &ThreadPool,
    x: &SequenceSample,
    p: &PrefixSums,
    mode: CurveMode,
    window: usize,
) -> almostconv_core::Result<CesaroCurve> {
    let norm = x.norm();
    let values: Vec<f64> = pool.install(|| {
        (1..=window)
            .into_par_iter()
            .map(|n| {
                match mode {
                    CurveMode::Sliding => p.sup_sliding(n, norm),
                    CurveMode::Block => p.sup_block(n, norm),
                }
                .expect("window checked against horizon")
            })
            .collect()
    });
    CesaroCurve::from_values(mode, values, x.len(), x.bound(), norm)
}

/// Sliding curve `ĉ_1..ĉ_N` on `pool`. Requires `1 <= N <= M/2`.
pub fn sliding_curve(
    pool: &ThreadPool,
    x: &SequenceSample,
    window: usize,
) -> almostconv_core::Result<CesaroCurve> {
    check_window(x, window)?;
    curve_on(pool, x, &x.prefix_sums(), CurveMode::Sliding, window)
}

/// Block curve `ĉ_1..ĉ_N` on `pool`. Requires `1 <= N <= M/2`.
pub fn block_curve(
    pool: &ThreadPool,
    x: &SequenceSample,
    window: usize,
) -> almostconv_core::Result<CesaroCurve> {
    check_window(x, window)?;
    curve_on(pool, x, &x.prefix_sums(), CurveMode::Block, window)
}

/// Both curves of `x` and of the residual sequence `x - v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Curves {
    pub sliding: CesaroCurve,
    pub block: CesaroCurve,
    pub residual_sliding: CesaroCurve,
    pub residual_block: CesaroCurve,
}

impl Curves {
    pub fn compute(
        pool: &ThreadPool,
        x: &SequenceSample,
        v: &Vector,
        window: usize,
    ) -> almostconv_core::Result<Self> {
        check_window(x, window)?;
        let z = x.sub_constant(v)?;
        let (px, pz) = (x.prefix_sums(), z.prefix_sums());
        Ok(Curves {
            sliding: curve_on(pool, x, &px, CurveMode::Sliding, window)?,
            block: curve_on(pool, x, &px, CurveMode::Block, window)?,
            residual_sliding: curve_on(pool, &z, &pz, CurveMode::Sliding, window)?,
            residual_block: curve_on(pool, &z, &pz, CurveMode::Block, window)?,
        })
    }

    pub fn rows(&self) -> Vec<CurveRow> {
        (0..self.sliding.values().len())
            .map(|i| CurveRow {
                n: i + 1,
                c_sliding: self.sliding.values()[i],
                c_block: self.block.values()[i],
                residual_sliding: self.residual_sliding.values()[i],
                residual_block: self.residual_block.values()[i],
            })
            .collect()
    }
}
