//! Seeded test sequences and functions with known ground truth, plus naive
//! oracles for the residuals.
//!
//! Every [`GeneratorSpec`] is plain serde data and regenerates identical
//! samples; the only randomness is [`SplitMix64`](crate::rng::SplitMix64).

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::continuous::SampledFunction;
use crate::rng::SplitMix64;
use crate::sequence::SequenceSample;
use crate::sum::NeumaierSum;
use crate::vector::{Norm, Vector};
use crate::{Error, Result};

fn default_frequency() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// `1, 0, 1, 0, …`
    Alternating { length: usize },
    /// `pattern[0], pattern[1], …` repeated.
    Periodic {
        pattern: Vec<Vector>,
        length: usize,
        #[serde(default)]
        norm: Norm,
    },
    /// `x_n = limit + decay / n`.
    Convergent {
        limit: Vector,
        decay: Vector,
        length: usize,
        #[serde(default)]
        norm: Norm,
    },
    /// Constant blocks of lengths `1, 2, 4, …` alternating between 0 and 1,
    /// starting with a 0-block of length 1.
    DoublingBlocks { length: usize },
    /// `x_n = (cos nθ, sin nθ)`: the complex sequence `e^{inθ}` in doubled form.
    Rotation {
        angle: f64,
        length: usize,
        #[serde(default)]
        norm: Norm,
    },
    /// i.i.d. uniform components on the cube `[-r, r]^dim`, `r` chosen so the
    /// cube fits in the `bound`-ball of `norm`.
    RandomBounded {
        dim: usize,
        bound: f64,
        seed: u64,
        length: usize,
        #[serde(default)]
        norm: Norm,
    },
    /// `1` on `[kT, kT + T/2)`, `0` elsewhere; sampled with `step` over `duration`.
    SquareWave {
        period: f64,
        step: f64,
        duration: f64,
    },
    /// `sin(ω t)` sampled with `step` over `duration`.
    Sine {
        step: f64,
        duration: f64,
        #[serde(default = "default_frequency")]
        frequency: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sample {
    Sequence(SequenceSample),
    Function(SampledFunction),
}

impl Sample {
    pub fn as_sequence(&self) -> Option<&SequenceSample> {
        match self {
            Sample::Sequence(x) => Some(x),
            Sample::Function(_) => None,
        }
    }

    pub fn as_function(&self) -> Option<&SampledFunction> {
        match self {
            Sample::Function(f) => Some(f),
            Sample::Sequence(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub sample: Sample,
    /// Expected strong almost limit, `None` when the sequence has none.
    pub truth: Option<Vector>,
}

impl GeneratorSpec {
    /// Replaces the seed of seeded kinds; other kinds are returned unchanged.
    pub fn with_seed(self, new_seed: u64) -> Self {
        match self {
            GeneratorSpec::RandomBounded {
                dim,
                bound,
                length,
                norm,
                ..
            } => GeneratorSpec::RandomBounded {
                dim,
                bound,
                seed: new_seed,
                length,
                norm,
            },
            other => other,
        }
    }

    /// Replaces the grid step of function kinds; sequence kinds are returned
    /// unchanged.
    pub fn with_step(self, new_step: f64) -> Self {
        match self {
            GeneratorSpec::SquareWave {
                period, duration, ..
            } => GeneratorSpec::SquareWave {
                period,
                step: new_step,
                duration,
            },
            GeneratorSpec::Sine {
                duration,
                frequency,
                ..
            } => GeneratorSpec::Sine {
                step: new_step,
                duration,
                frequency,
            },
            other => other,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            GeneratorSpec::RandomBounded { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            GeneratorSpec::Alternating { .. } => "alternating",
            GeneratorSpec::Periodic { .. } => "periodic",
            GeneratorSpec::Convergent { .. } => "convergent",
            GeneratorSpec::DoublingBlocks { .. } => "doubling_blocks",
            GeneratorSpec::Rotation { .. } => "rotation",
            GeneratorSpec::RandomBounded { .. } => "random_bounded",
            GeneratorSpec::SquareWave { .. } => "square_wave",
            GeneratorSpec::Sine { .. } => "sine",
        }
    }
}

fn check_length(length: usize) -> Result<()> {
    if length == 0 {
        return Err(Error::EmptySequence);
    }
    Ok(())
}

fn panels_for(step: f64, duration: f64) -> Result<usize> {
    if !(step.is_finite() && step > 0.0 && duration.is_finite() && duration > 0.0) {
        return Err(Error::InvalidParameter(
            "step and duration must be positive".into(),
        ));
    }
    let k = libm::round(duration / step);
    if k < 2.0 {
        return Err(Error::InvalidParameter(
            "duration must cover at least two steps".into(),
        ));
    }
    Ok(k as usize)
}

fn max_norm(data: &[f64], dim: usize, norm: Norm) -> f64 {
    data.chunks_exact(dim)
        .fold(0.0, |m, x| m.max(norm.of_slice(x)))
}

pub fn generate(spec: &GeneratorSpec) -> Result<Generated> {
    match spec {
        GeneratorSpec::Alternating { length } => {
            check_length(*length)?;
            let data: Vec<f64> = (1..=*length)
                .map(|n| if n % 2 == 1 { 1.0 } else { 0.0 })
                .collect();
            Ok(sequence(
                SequenceSample::from_flat(1, data, 1.0, Norm::L2)?,
                Some(Vector::scalar(0.5)?),
            ))
        }
        GeneratorSpec::Periodic {
            pattern,
            length,
            norm,
        } => {
            check_length(*length)?;
            let first = pattern.first().ok_or_else(|| {
                Error::InvalidParameter("periodic pattern must not be empty".into())
            })?;
            let dim = first.dim();
            for p in pattern {
                first.check_dim(p.dim())?;
            }
            let mut data = Vec::with_capacity(length * dim);
            for n in 0..*length {
                data.extend_from_slice(pattern[n % pattern.len()].components());
            }
            let flat: Vec<f64> = pattern
                .iter()
                .flat_map(|p| p.components().iter().copied())
                .collect();
            let bound = max_norm(&flat, dim, *norm);
            let mean = (0..dim)
                .map(|c| {
                    let s: NeumaierSum = pattern.iter().map(|p| p.components()[c]).collect();
                    s.value() / pattern.len() as f64
                })
                .collect();
            Ok(sequence(
                SequenceSample::from_flat(dim, data, bound, *norm)?,
                Some(Vector::new(mean)?),
            ))
        }
        GeneratorSpec::Convergent {
            limit,
            decay,
            length,
            norm,
        } => {
            check_length(*length)?;
            limit.check_dim(decay.dim())?;
            let (v, u) = (limit.components(), decay.components());
            let data: Vec<f64> = (1..=*length)
                .flat_map(|n| v.iter().zip(u).map(move |(a, b)| a + b / n as f64))
                .collect();
            let bound = max_norm(&data, v.len(), *norm).max(limit.norm(*norm));
            Ok(sequence(
                SequenceSample::from_flat(v.len(), data, bound, *norm)?,
                Some(limit.clone()),
            ))
        }
        GeneratorSpec::DoublingBlocks { length } => {
            check_length(*length)?;
            let mut data = Vec::with_capacity(*length);
            let (mut block, mut value) = (1usize, 0.0);
            while data.len() < *length {
                let take = block.min(*length - data.len());
                data.extend(core::iter::repeat_n(value, take));
                block *= 2;
                value = 1.0 - value;
            }
            Ok(sequence(
                SequenceSample::from_flat(1, data, 1.0, Norm::L2)?,
                None,
            ))
        }
        GeneratorSpec::Rotation {
            angle,
            length,
            norm,
        } => {
            check_length(*length)?;
            if !angle.is_finite() {
                return Err(Error::InvalidParameter("angle must be finite".into()));
            }
            let data: Vec<f64> = (1..=*length)
                .flat_map(|n| {
                    let a = n as f64 * angle;
                    [libm::cos(a), libm::sin(a)]
                })
                .collect();
            let bound = match norm {
                Norm::L1 => libm::sqrt(2.0),
                Norm::L2 | Norm::Linf => 1.0,
            };
            let turns = angle / (2.0 * PI);
            let truth = if libm::fabs(turns - libm::round(turns)) < 1e-12 {
                Vector::new(vec![1.0, 0.0])?
            } else {
                Vector::zeros(2)?
            };
            Ok(sequence(
                SequenceSample::from_flat(2, data, bound, *norm)?,
                Some(truth),
            ))
        }
        GeneratorSpec::RandomBounded {
            dim,
            bound,
            seed,
            length,
            norm,
        } => {
            check_length(*length)?;
            if *dim == 0 {
                return Err(Error::EmptyVector);
            }
            if !(bound.is_finite() && *bound > 0.0) {
                return Err(Error::InvalidBound(*bound));
            }
            let r = norm.cube_radius(*dim, *bound);
            let mut rng = SplitMix64::new(*seed);
            let data = (0..length * dim).map(|_| rng.symmetric(r)).collect();
            Ok(sequence(
                SequenceSample::from_flat(*dim, data, *bound, *norm)?,
                None,
            ))
        }
        GeneratorSpec::SquareWave {
            period,
            step,
            duration,
        } => {
            if !(period.is_finite() && *period > 0.0) {
                return Err(Error::InvalidParameter("period must be positive".into()));
            }
            let panels = panels_for(*step, *duration)?;
            let half = period / 2.0;
            let f = SampledFunction::from_fn(*step, panels, 1, 1.0, Norm::L2, |t, out| {
                out[0] = if libm::fmod(t, *period) < half {
                    1.0
                } else {
                    0.0
                };
            })?;
            Ok(Generated {
                sample: Sample::Function(f),
                truth: Some(Vector::scalar(0.5)?),
            })
        }
        GeneratorSpec::Sine {
            step,
            duration,
            frequency,
        } => {
            let panels = panels_for(*step, *duration)?;
            if !frequency.is_finite() {
                return Err(Error::InvalidParameter("frequency must be finite".into()));
            }
            let f = SampledFunction::from_fn(*step, panels, 1, 1.0, Norm::L2, |t, out| {
                out[0] = libm::sin(frequency * t);
            })?;
            Ok(Generated {
                sample: Sample::Function(f),
                truth: Some(Vector::scalar(0.0)?),
            })
        }
    }
}

fn sequence(x: SequenceSample, truth: Option<Vector>) -> Generated {
    Generated {
        sample: Sample::Sequence(x),
        truth,
    }
}

/// Generates a spec that must yield a sequence.
pub fn generate_sequence(spec: &GeneratorSpec) -> Result<(SequenceSample, Option<Vector>)> {
    let g = generate(spec)?;
    match g.sample {
        Sample::Sequence(x) => Ok((x, g.truth)),
        Sample::Function(_) => Err(Error::InvalidParameter(alloc::format!(
            "generator `{}` produces a function, not a sequence",
            spec.kind_name()
        ))),
    }
}

/// `max_j ||(1/n) Σ_{i=0}^{n-1} x_{i+j} - v||` straight from the definition:
/// every start `j = 1..=M-n+1`, plain left-to-right sums, no prefix table.
pub fn oracle_residual(x: &SequenceSample, v: &Vector, n: usize) -> Result<f64> {
    naive_residual(x, v, n, 1, 1)
}

/// Block variant of [`oracle_residual`]: starts `j·n`, `j >= 1`.
pub fn oracle_block_residual(x: &SequenceSample, v: &Vector, n: usize) -> Result<f64> {
    if n == 0 || 2 * n - 1 > x.len() {
        return Err(Error::NoBlockFits {
            len: n,
            horizon: x.len(),
        });
    }
    naive_residual(x, v, n, n, n)
}

fn naive_residual(
    x: &SequenceSample,
    v: &Vector,
    n: usize,
    first: usize,
    stride: usize,
) -> Result<f64> {
    v.check_dim(x.dim())?;
    let m = x.len();
    if n == 0 || n > m {
        return Err(Error::WindowOutOfRange {
            start: first,
            len: n,
            horizon: m,
        });
    }
    let mut sum = vec![0.0; x.dim()];
    let mut best = 0.0f64;
    let mut j = first;
    while j + n - 1 <= m {
        sum.iter_mut().for_each(|s| *s = 0.0);
        for i in 0..n {
            for (s, c) in sum.iter_mut().zip(x.get(i + j).expect("window fits")) {
                *s += c;
            }
        }
        let dev: Vec<f64> = sum
            .iter()
            .zip(v.components())
            .map(|(s, c)| s / n as f64 - c)
            .collect();
        best = best.max(x.norm().of_slice(&dev));
        j += stride;
    }
    Ok(best)
}

fn vec_of(c: &[f64]) -> Vector {
    Vector::new(c.to_vec()).expect("literal vectors are valid")
}

/// Fixed sequence corpus in dimensions 1–3 covering every sequence kind.
///
/// Convergent instances keep `||decay|| <= 1/2` and random instances use
/// bound 4, so that at `M = 10^4`, `N = 1024` their residuals fall clearly on
/// one side of the default decision band.
pub fn reference_corpus(length: usize) -> Vec<GeneratorSpec> {
    use GeneratorSpec::*;
    vec![
        Alternating { length },
        Periodic {
            pattern: vec![vec_of(&[1.0]), vec_of(&[0.0]), vec_of(&[0.0])],
            length,
            norm: Norm::L2,
        },
        Periodic {
            pattern: vec![
                vec_of(&[1.0, 0.0]),
                vec_of(&[0.0, 1.0]),
                vec_of(&[-1.0, -1.0]),
                vec_of(&[0.5, 0.5]),
            ],
            length,
            norm: Norm::L2,
        },
        Periodic {
            pattern: vec![
                vec_of(&[1.0, 0.0, 0.0]),
                vec_of(&[0.0, 1.0, 0.0]),
                vec_of(&[0.0, 0.0, -1.0]),
                vec_of(&[-0.5, 0.5, 0.5]),
            ],
            length,
            norm: Norm::L1,
        },
        Convergent {
            limit: vec_of(&[0.3]),
            decay: vec_of(&[0.5]),
            length,
            norm: Norm::L2,
        },
        Convergent {
            limit: vec_of(&[1.0, -1.0]),
            decay: vec_of(&[0.3, -0.4]),
            length,
            norm: Norm::L2,
        },
        Convergent {
            limit: vec_of(&[0.2, 0.4, -0.6]),
            decay: vec_of(&[0.1, 0.2, -0.2]),
            length,
            norm: Norm::Linf,
        },
        DoublingBlocks { length },
        Rotation {
            angle: 2.0 * PI / 3.0,
            length,
            norm: Norm::L2,
        },
        Rotation {
            angle: 2.5,
            length,
            norm: Norm::L2,
        },
        Rotation {
            angle: 2.0 * PI / 5.0,
            length,
            norm: Norm::Linf,
        },
        RandomBounded {
            dim: 1,
            bound: 4.0,
            seed: 1,
            length,
            norm: Norm::L2,
        },
        RandomBounded {
            dim: 2,
            bound: 4.0,
            seed: 2,
            length,
            norm: Norm::L2,
        },
        RandomBounded {
            dim: 3,
            bound: 4.0,
            seed: 3,
            length,
            norm: Norm::L1,
        },
    ]
}

/// A pseudo-random sequence spec drawn from every sequence kind, for
/// cross-checking estimators against the oracles.
pub fn random_instance(seed: u64, length: usize) -> GeneratorSpec {
    let mut rng = SplitMix64::new(seed);
    let norm = [Norm::L1, Norm::L2, Norm::Linf][rng.range(0, 2)];
    let dim = rng.range(1, 3);
    let point = |rng: &mut SplitMix64, r: f64| {
        Vector::new((0..dim).map(|_| rng.symmetric(r)).collect()).expect("finite components")
    };
    match rng.range(0, 5) {
        0 => GeneratorSpec::Alternating { length },
        1 => {
            let p = rng.range(1, 7);
            let pattern = (0..p).map(|_| point(&mut rng, 1.0)).collect();
            GeneratorSpec::Periodic {
                pattern,
                length,
                norm,
            }
        }
        2 => {
            let limit = point(&mut rng, 1.0);
            let decay = point(&mut rng, 1.0);
            GeneratorSpec::Convergent {
                limit,
                decay,
                length,
                norm,
            }
        }
        3 => GeneratorSpec::DoublingBlocks { length },
        4 => GeneratorSpec::Rotation {
            angle: rng.symmetric(PI),
            length,
            norm,
        },
        _ => GeneratorSpec::RandomBounded {
            dim,
            bound: 0.5 + 3.0 * rng.next_f64(),
            seed: rng.next_u64(),
            length,
            norm,
        },
    }
}
