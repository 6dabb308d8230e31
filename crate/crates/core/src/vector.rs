//! Dense feature vectors and linear utilities.
//!
//! Weights, joint features and the hidden ground-truth parameter all live in
//! [`FeatureVector`]. Every arithmetic operation checks dimensions and refuses
//! to produce non-finite entries.

use std::fmt;
use std::ops::Index;

use crate::error::{Error, Result};

/// Dense real vector with finite entries.
#[derive(Clone, PartialEq, Default)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("vector entry {v}")));
        }
        Ok(FeatureVector(values))
    }

    pub fn zeros(dim: usize) -> Self {
        FeatureVector(vec![0.0; dim])
    }

    /// Standard basis vector `e_index` of the given dimension.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[index] = 1.0;
        FeatureVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn dot(&self, other: &FeatureVector) -> Result<f64> {
        dot(self, other)
    }

    /// `self * factor`, rejecting non-finite factors.
    pub fn scaled(&self, factor: f64) -> Result<FeatureVector> {
        if !factor.is_finite() {
            return Err(Error::NonFinite(format!("scale factor {factor}")));
        }
        FeatureVector::new(self.0.iter().map(|v| v * factor).collect())
    }

    pub fn sub(&self, other: &FeatureVector) -> Result<FeatureVector> {
        scale_add(self, -1.0, other)
    }

    pub fn add(&self, other: &FeatureVector) -> Result<FeatureVector> {
        scale_add(self, 1.0, other)
    }

    /// In-place `self += coeff * d`, used in hot accumulation loops.
    pub(crate) fn axpy(&mut self, coeff: f64, d: &FeatureVector) -> Result<()> {
        check_dims(self, d)?;
        for (a, b) in self.0.iter_mut().zip(&d.0) {
            *a += coeff * b;
        }
        if self.0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("accumulated vector overflowed".into()));
        }
        Ok(())
    }
}

impl From<FeatureVector> for Vec<f64> {
    fn from(v: FeatureVector) -> Self {
        v.0
    }
}

impl Index<usize> for FeatureVector {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.0[index]
    }
}

impl fmt::Debug for FeatureVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

fn check_dims(a: &FeatureVector, b: &FeatureVector) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(())
}

/// Inner product, accumulated left to right.
pub fn dot(a: &FeatureVector, b: &FeatureVector) -> Result<f64> {
    check_dims(a, b)?;
    Ok(a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum())
}

/// Returns `w + coeff * d` without touching either input.
pub fn scale_add(w: &FeatureVector, coeff: f64, d: &FeatureVector) -> Result<FeatureVector> {
    if !coeff.is_finite() {
        return Err(Error::NonFinite(format!("coefficient {coeff}")));
    }
    check_dims(w, d)?;
    FeatureVector::new(w.0.iter().zip(&d.0).map(|(a, b)| a + coeff * b).collect())
}

/// The hidden utility parameter `w_*`. Only simulators and metrics hold one;
/// learners never see it.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruthUtility {
    w_star: FeatureVector,
}

impl GroundTruthUtility {
    pub fn new(w_star: FeatureVector) -> Self {
        GroundTruthUtility { w_star }
    }

    pub fn weights(&self) -> &FeatureVector {
        &self.w_star
    }

    pub fn norm(&self) -> f64 {
        self.w_star.norm()
    }

    /// `U(x, y) = w_*ᵀ φ(x, y)`.
    pub fn utility<T: Task>(&self, task: &T, ctx: &T::Context, y: &T::Object) -> Result<f64> {
        utility(&self.w_star, task, ctx, y)
    }

    /// The optimal object `y*` for this context.
    pub fn best<T: Task>(&self, task: &T, ctx: &T::Context) -> Result<T::Object> {
        task.argmax(&self.w_star, ctx)
    }
}

/// A joint feature map together with the ability to maximize a linear score
/// over its admissible objects.
///
/// Implementations declare `norm_bound` (the `R` with `‖φ(x, y)‖ ≤ R`) rather
/// than computing it per call.
pub trait Task {
    type Context;
    type Object: Clone + PartialEq + fmt::Debug;

    fn dimension(&self) -> usize;

    fn norm_bound(&self) -> f64;

    /// `φ(x, y)`; errors when `y` is not admissible for `x`.
    fn features(&self, ctx: &Self::Context, y: &Self::Object) -> Result<FeatureVector>;

    /// `argmax_y wᵀφ(x, y)`, ties broken by lowest canonical index.
    fn argmax(&self, w: &FeatureVector, ctx: &Self::Context) -> Result<Self::Object>;
}

/// Linear utility `wᵀφ(x, y)` for an arbitrary weight vector.
pub fn utility<T: Task>(w: &FeatureVector, task: &T, ctx: &T::Context, y: &T::Object) -> Result<f64> {
    dot(w, &task.features(ctx, y)?)
}
