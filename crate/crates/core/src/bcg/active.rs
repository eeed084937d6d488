use alloc::vec::Vec;

use crate::shape::EntryIndex;
use crate::vertex::SignVertex;

/// Weights at or below this are dropped from the active set.
pub const WEIGHT_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct ActiveVertex {
    /// Canonical form.
    pub vertex: SignVertex,
    /// `vertex` evaluated over the observed unique indices.
    pub projection: Vec<i8>,
    pub weight: f64,
}

/// Convex combination of canonical vertices; weights sum to one.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ActiveSet {
    entries: Vec<ActiveVertex>,
}

impl ActiveSet {
    pub fn entries(&self) -> &[ActiveVertex] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn position(&self, v: &SignVertex) -> Option<usize> {
        self.entries.iter().position(|e| e.vertex == *v)
    }

    /// Adds `weight` to `v`, inserting it if absent. `v` must be canonical.
    pub fn add(&mut self, v: SignVertex, weight: f64, indices: &[EntryIndex]) -> usize {
        debug_assert!(v.is_canonical());
        match self.position(&v) {
            Some(i) => {
                self.entries[i].weight += weight;
                i
            }
            None => {
                let projection = v.project(indices);
                self.entries.push(ActiveVertex { vertex: v, projection, weight });
                self.entries.len() - 1
            }
        }
    }

    pub fn scale_weights(&mut self, factor: f64) {
        for e in &mut self.entries {
            e.weight *= factor;
        }
    }

    pub(crate) fn weight_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.entries[i].weight
    }

    /// Drops weights at or below [`WEIGHT_FLOOR`] and rescales the rest to sum
    /// to one.
    pub fn prune_and_normalize(&mut self) {
        self.entries.retain(|e| e.weight > WEIGHT_FLOOR);
        let total: f64 = self.entries.iter().map(|e| e.weight).sum();
        if total > 0.0 {
            for e in &mut self.entries {
                e.weight /= total;
            }
        }
    }

    pub fn weight_sum(&self) -> f64 {
        self.entries.iter().map(|e| e.weight).sum()
    }

    /// `λ Σ_v a_v · projection_v`.
    pub fn iterate(&self, lambda: f64, len: usize) -> Vec<f64> {
        let mut psi = alloc::vec![0.0; len];
        for e in &self.entries {
            let w = lambda * e.weight;
            for (p, &s) in psi.iter_mut().zip(&e.projection) {
                *p += w * s as f64;
            }
        }
        psi
    }
}
