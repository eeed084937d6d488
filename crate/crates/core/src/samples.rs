//! Observation sets and their per-index aggregates.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::shape::{EntryIndex, Shape};

/// `n` observed `(index, value)` pairs together with the aggregates the
/// least-squares objective depends on: for every distinct index `x`, the
/// multiplicity `m_x` and the mean observation `ybar_x`.
///
/// Unique indices are kept in lexicographic order. Every per-index vector in
/// this crate (iterates, gradients, vertex projections) uses that order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    shape: Shape,
    rows: Vec<(EntryIndex, f64)>,
    unique: Vec<EntryIndex>,
    multiplicity: Vec<u64>,
    mean: Vec<f64>,
    within_ss: f64,
}

impl SampleSet {
    /// Ingests raw rows of zero-based coordinates and values.
    ///
    /// Duplicate observations are kept as separate rows so that `n` counts
    /// every observation. Aggregates are independent of row order.
    pub fn ingest<C, I>(shape: Shape, rows: I) -> Result<Self>
    where
        C: AsRef<[usize]>,
        I: IntoIterator<Item = (C, f64)>,
    {
        let mut checked = Vec::new();
        for (i, (coords, y)) in rows.into_iter().enumerate() {
            let coords = coords.as_ref();
            shape.check(coords, Some(i + 1))?;
            if !y.is_finite() {
                return Err(Error::NonFiniteValue { row: i + 1 });
            }
            checked.push((EntryIndex::from_vec_unchecked(coords.to_vec()), y));
        }
        if checked.is_empty() {
            return Err(Error::EmptySamples);
        }

        let mut order: Vec<usize> = (0..checked.len()).collect();
        order.sort_by(|&a, &b| {
            checked[a]
                .0
                .cmp(&checked[b].0)
                .then(checked[a].1.total_cmp(&checked[b].1))
        });

        let mut unique = Vec::new();
        let mut multiplicity = Vec::new();
        let mut mean = Vec::new();
        let mut within_ss = 0.0;
        let mut start = 0;
        while start < order.len() {
            let key = &checked[order[start]].0;
            let mut end = start + 1;
            while end < order.len() && checked[order[end]].0 == *key {
                end += 1;
            }
            // Values inside a group are sorted, so the sums below do not
            // depend on the input order.
            let group = || order[start..end].iter().map(|&r| checked[r].1);
            let m = (end - start) as u64;
            let (lo, hi) = (checked[order[start]].1, checked[order[end - 1]].1);
            // Repeated identical observations average to themselves exactly.
            let ybar = if lo == hi { lo } else { compensated_sum(group()) / m as f64 };
            within_ss += compensated_sum(group().map(|y| (y - ybar) * (y - ybar)));
            unique.push(key.clone());
            multiplicity.push(m);
            mean.push(ybar);
            start = end;
        }

        Ok(SampleSet {
            shape,
            rows: checked,
            unique,
            multiplicity,
            mean,
            within_ss,
        })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// Number of observations, duplicates included.
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[(EntryIndex, f64)] {
        &self.rows
    }

    /// Distinct observed indices in lexicographic order.
    pub fn unique(&self) -> &[EntryIndex] {
        &self.unique
    }

    pub fn multiplicities(&self) -> &[u64] {
        &self.multiplicity
    }

    pub fn means(&self) -> &[f64] {
        &self.mean
    }

    /// `Σ_i (y_i − ybar_{x_i})²`, the part of the squared error no iterate
    /// can remove.
    pub fn within_index_ss(&self) -> f64 {
        self.within_ss
    }

    /// Position of `x` in [`SampleSet::unique`].
    pub fn position(&self, x: &EntryIndex) -> Option<usize> {
        self.unique.binary_search(x).ok()
    }

    /// Mean of all observed values.
    pub fn overall_mean(&self) -> f64 {
        compensated_sum(self.rows.iter().map(|r| r.1)) / self.rows.len() as f64
    }
}

/// Neumaier summation.
pub(crate) fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
