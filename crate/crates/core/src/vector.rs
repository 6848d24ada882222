//! Points of the ambient space `V = R^d` and the three built-in norms.
//!
//! Complex spaces are handled by doubling the dimension: `C^k` becomes
//! `R^{2k}` with interleaved `(re, im)` pairs, and the l2 norm of the doubled
//! vector is the usual complex modulus norm.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Norm placed on `V`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    #[default]
    L2,
    Linf,
}

impl Norm {
    /// Norm of a raw component slice. An empty slice has norm 0.
    pub fn of_slice(self, v: &[f64]) -> f64 {
        match self {
            Norm::L1 => v.iter().map(|c| c.abs()).sum(),
            Norm::L2 => match v {
                [c] => c.abs(),
                _ => libm::sqrt(v.iter().map(|c| c * c).sum()),
            },
            Norm::Linf => v.iter().fold(0.0, |m, c| m.max(c.abs())),
        }
    }

    pub fn of(self, v: &Vector) -> f64 {
        self.of_slice(&v.0)
    }

    /// Norm of the dual space under the inner-product pairing.
    pub fn dual(self) -> Norm {
        match self {
            Norm::L1 => Norm::Linf,
            Norm::L2 => Norm::L2,
            Norm::Linf => Norm::L1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
            Norm::Linf => "linf",
        }
    }

    /// Largest per-component magnitude `r` such that every point of the cube
    /// `[-r, r]^d` has norm at most `bound`.
    pub fn cube_radius(self, dim: usize, bound: f64) -> f64 {
        match self {
            Norm::L1 => bound / dim as f64,
            Norm::L2 => bound / libm::sqrt(dim as f64),
            Norm::Linf => bound,
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            "linf" => Ok(Norm::Linf),
            other => Err(Error::InvalidParameter(alloc::format!(
                "unknown norm `{other}`"
            ))),
        }
    }
}

/// A point of `V`: at least one component, all finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(index) = components.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Vector(components))
    }

    pub fn scalar(value: f64) -> Result<Self> {
        Vector::new(vec![value])
    }

    /// Builds the dimension-doubled real representation of a complex vector.
    pub fn from_complex(pairs: &[(f64, f64)]) -> Result<Self> {
        Vector::new(pairs.iter().flat_map(|&(re, im)| [re, im]).collect())
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Vector::new(vec![0.0; dim])
    }

    /// Caller guarantees a nonempty slice of finite values.
    pub(crate) fn from_slice_unchecked(components: &[f64]) -> Self {
        debug_assert!(!components.is_empty());
        Vector(components.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn into_components(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self, norm: Norm) -> f64 {
        norm.of(self)
    }

    pub fn dot(&self, other: &Vector) -> Result<f64> {
        self.check_dim(other.dim())?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum())
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> Vector {
        Vector(self.0.iter().map(|c| c * factor).collect())
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<()> {
        if self.dim() == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found,
            })
        }
    }

    fn zip_with(&self, other: &Vector, op: impl Fn(f64, f64) -> f64) -> Result<Vector> {
        self.check_dim(other.dim())?;
        Vector::new(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        )
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(components: Vec<f64>) -> Result<Self> {
        Vector::new(components)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const NORMS: [Norm; 3] = [Norm::L1, Norm::L2, Norm::Linf];

    #[test]
    fn pythagorean_and_max_examples() {
        let v = Vector::new(vec![3.0, 4.0]).unwrap();
        assert_eq!(v.norm(Norm::L2), 5.0);
        let w = Vector::new(vec![1.0, -2.0]).unwrap();
        assert_eq!(w.norm(Norm::Linf), 2.0);
        assert_eq!(w.norm(Norm::L1), 3.0);
        for norm in NORMS {
            assert_eq!(Vector::zeros(4).unwrap().norm(norm), 0.0);
        }
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert_eq!(Vector::new(vec![]), Err(Error::EmptyVector));
        assert_eq!(
            Vector::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        );
        assert_eq!(
            Vector::new(vec![f64::INFINITY]),
            Err(Error::NonFinite { index: 0 })
        );
    }

    #[test]
    fn complex_modulus_via_doubled_l2() {
        let z = Vector::from_complex(&[(3.0, 4.0)]).unwrap();
        assert_eq!(z.dim(), 2);
        assert_eq!(z.norm(Norm::L2), 5.0);
    }

    #[test]
    fn serde_rejects_invalid_vectors() {
        let v: Vector = serde_json::from_str("[1.0, 2.5]").unwrap();
        assert_eq!(v.components(), &[1.0, 2.5]);
        assert!(serde_json::from_str::<Vector>("[]").is_err());
        let n: Norm = serde_json::from_str("\"linf\"").unwrap();
        assert_eq!(n, Norm::Linf);
    }

    #[test]
    fn cube_radius_keeps_corners_inside() {
        for norm in NORMS {
            for dim in 1..6 {
                let r = norm.cube_radius(dim, 2.0);
                let corner = Vector::new(vec![r; dim]).unwrap();
                assert!(corner.norm(norm) <= 2.0 * (1.0 + 1e-15));
            }
        }
    }

    fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..6).prop_flat_map(|d| {
            (
                proptest::collection::vec(-1e3..1e3f64, d),
                proptest::collection::vec(-1e3..1e3f64, d),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn norm_axioms((a, b) in pair(), lambda in -50.0..50.0f64) {
            let a = Vector::new(a).unwrap();
            let b = Vector::new(b).unwrap();
            for norm in NORMS {
                let na = a.norm(norm);
                let nb = b.norm(norm);
                prop_assert!(na >= 0.0);
                let scaled = a.scale(lambda).norm(norm);
                prop_assert!((scaled - lambda.abs() * na).abs() <= 1e-12 * (lambda.abs() * na).max(1e-300));
                let sum = a.add(&b).unwrap().norm(norm);
                prop_assert!(sum <= (na + nb) * (1.0 + 1e-12));
                // Hölder: the dual norm bounds the pairing.
                prop_assert!(a.dot(&b).unwrap().abs() <= na * b.norm(norm.dual()) * (1.0 + 1e-12));
            }
        }
    }
}
