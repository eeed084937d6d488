//! Atomic models: `λ`-scaled convex combinations of sign vertices.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::shape::{EntryIndex, Shape};
use crate::vertex::SignVertex;

/// Slack allowed on `Σ weights ≤ 1`.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// `ψ = λ Σ_v a_v v` with `a ≥ 0` and `Σ a ≤ 1`.
///
/// The weights are a constructive certificate that `ψ` lies in the gauge-norm
/// ball of radius `λ`. This is the solver's output format and the ground-truth
/// format used by the experiment harness.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicModel {
    shape: Shape,
    lambda: f64,
    terms: Vec<(f64, SignVertex)>,
}

impl AtomicModel {
    pub fn new(shape: Shape, lambda: f64, terms: Vec<(f64, SignVertex)>) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        let mut total = 0.0;
        let mut seen = BTreeSet::new();
        for (w, v) in &terms {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::InvalidParameter(format!("weight {w} is not a nonnegative number")));
            }
            if !v.matches(&shape) {
                return Err(Error::ShapeMismatch);
            }
            if !seen.insert(v.canonicalize()) {
                return Err(Error::InvalidParameter("duplicate vertex among terms".into()));
            }
            total += w;
        }
        if total > 1.0 + WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidParameter(format!("weights sum to {total} > 1")));
        }
        Ok(AtomicModel { shape, lambda, terms })
    }

    /// The model with no terms (the zero tensor).
    pub fn zero(shape: Shape, lambda: f64) -> Self {
        AtomicModel { shape, lambda, terms: Vec::new() }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn terms(&self) -> &[(f64, SignVertex)] {
        &self.terms
    }

    pub fn weight_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.0).sum()
    }

    /// `λ Σ_v a_v v(x)`.
    pub fn entry(&self, x: &EntryIndex) -> f64 {
        self.entry_at(x.coords())
    }

    pub(crate) fn entry_at(&self, coords: &[usize]) -> f64 {
        self.lambda
            * self
                .terms
                .iter()
                .map(|(a, v)| a * v.entry_at(coords) as f64)
                .sum::<f64>()
    }

    /// Frobenius inner product computed from the factors, in
    /// `O(|terms| · |other.terms| · ρ)` time.
    pub fn inner_product(&self, other: &AtomicModel) -> Result<f64> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch);
        }
        let mut acc = 0.0;
        for (a, v) in &self.terms {
            for (b, w) in &other.terms {
                acc += a * b * v.tensor_inner(w);
            }
        }
        Ok(self.lambda * other.lambda * acc)
    }

    /// Squared Frobenius norm.
    pub fn norm_sq(&self) -> f64 {
        self.inner_product(self).expect("same shape")
    }
}
