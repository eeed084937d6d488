//! Dense materialization for small shapes. Only tests and verification
//! tooling use this; the solver never builds a full tensor.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::shape::{EntryIndex, Shape};

/// Default cap on the number of materialized entries.
pub const DEFAULT_DENSE_LIMIT: u64 = 1_000_000;

/// Evaluates `f` at every index of `shape` in row-major order (last mode
/// fastest). `limit` defaults to [`DEFAULT_DENSE_LIMIT`].
pub fn materialize_dense<F>(shape: &Shape, mut f: F, limit: Option<u64>) -> Result<Vec<f64>>
where
    F: FnMut(&EntryIndex) -> f64,
{
    let limit = limit.unwrap_or(DEFAULT_DENSE_LIMIT);
    if shape.pi() > limit {
        return Err(Error::DenseGuard { required: shape.pi(), limit });
    }
    Ok(shape.indices().map(|x| f(&x)).collect())
}
