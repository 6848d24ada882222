//! Finite-horizon analysis of almost convergence for bounded sequences in a
//! finite-dimensional normed space.
//!
//! The crate estimates the two shift-invariant seminorms built from Cesàro
//! window means (sliding windows `p`, stride blocks `q`), turns them into
//! convergence verdicts, and audits the exact finite inequalities behind them
//! (subadditivity of the window-supremum curve, block ≤ sliding, seminorm
//! axioms). Everything here is pure computation over `alloc` collections; file
//! formats and the command-line driver live in the `almostconv` crate.
#![no_std]
#![deny(rust_2018_idioms)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod continuous;
pub mod corpus;
pub mod detect;
mod error;
pub mod hull;
pub mod rng;
pub mod seminorms;
pub mod sequence;
pub mod sum;
pub mod vector;

pub use continuous::{c_cont, check_strong_cont, integral_mean, SampledFunction};
pub use corpus::{generate, Generated, GeneratorSpec, Sample};
pub use detect::{
    candidate_limit, check_quasi, check_strong, check_weak, convex_hull_audit, induced_functional,
    sa_cauchy_check, Mode, ProbeSet, Status, Tolerance, Verdict,
};
pub use error::Error;
pub use seminorms::{
    c_block, c_sliding, estimate_p, estimate_q, fekete_audit, fekete_worst_pair, CesaroCurve,
    CurveMode, FeketeViolation, PEstimate, QEstimate,
};
pub use sequence::{constant_sequence, PrefixSums, SequenceSample};
pub use vector::{Norm, Vector};

pub type Result<T> = core::result::Result<T, Error>;

/// Relative floor applied to every absolute tolerance that scales with the
/// declared bound `B` (window-sum drift, Fekete slack, residual identities).
pub const BOUND_TOLERANCE: f64 = 1e-9;
