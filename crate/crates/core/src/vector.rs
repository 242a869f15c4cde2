use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense feature vector with a strictly positive norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector<S> {
    values: Vec<S>,
}

impl<S: Scalar> FeatureVector<S> {
    /// Rejects empty vectors, non-finite coordinates, and zero vectors.
    pub fn new(values: Vec<S>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Usage("feature vector must have dimension > 0".into()));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::Usage(
                "feature vector coordinates must be finite".into(),
            ));
        }
        let v = FeatureVector { values };
        if v.norm() <= S::zero() {
            return Err(Error::Usage("zero feature vectors are rejected".into()));
        }
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn dot(&self, other: &Self) -> S {
        debug_assert_eq!(self.dim(), other.dim());
        self.values
            .iter()
            .zip(&other.values)
            .fold(S::zero(), |acc, (a, b)| acc + *a * *b)
    }

    pub fn norm(&self) -> S {
        self.dot(self).sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        FeatureVector {
            values: self.values.iter().map(|x| *x / n).collect(),
        }
    }
}

/// 1 - cos(a, b), clamped into [0, 2] against rounding spill. Equal
/// inputs are exactly 0, so an exact duplicate always outranks any
/// merely-similar match.
pub fn cosine_distance<S: Scalar>(a: &FeatureVector<S>, b: &FeatureVector<S>) -> Result<S> {
    if a.dim() != b.dim() {
        return Err(Error::Usage(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let (na, nb) = (a.norm(), b.norm());
    if na <= S::zero() || nb <= S::zero() {
        return Err(Error::Usage(
            "cosine distance is undefined for zero vectors".into(),
        ));
    }
    if a.values == b.values {
        return Ok(S::zero());
    }
    let cos = a.dot(b) / (na * nb);
    let d = S::one() - cos;
    Ok(d.max(S::zero()).min(S::from_f64(2.0).unwrap()))
}

/// Samples an isotropic direction and normalizes it to unit length.
pub fn random_unit_vector<S: Scalar>(dim: usize, rng: &mut impl Rng) -> FeatureVector<S> {
    loop {
        let values: Vec<S> = (0..dim)
            .map(|_| {
                let x: f64 = StandardNormal.sample(rng);
                S::from_f64(x).unwrap()
            })
            .collect();
        let v = FeatureVector { values };
        if v.norm() > S::from_f64(1e-9).unwrap() {
            return v.normalized();
        }
    }
}
