//! Tensor completion under a sign-tensor gauge-norm constraint.
//!
//! The feasible set is the convex hull of rank-1 tensors whose entries are all
//! `±λ`. Points of that set are stored implicitly as convex combinations of
//! [`SignVertex`] values, so nothing here ever materializes a full tensor
//! except the explicitly guarded test helpers in [`dense`] and
//! [`norm_oracle`].
//!
//! The crate is `no_std` (with `alloc`). File formats, experiments and the
//! command-line tool live in the companion `tensor-gauge` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bcg;
pub mod dense;
pub mod error;
pub mod model;
pub mod norm_oracle;
pub mod samples;
pub mod separation;
pub mod shape;
pub mod vertex;

pub use error::{Error, Result};
pub use model::AtomicModel;
pub use samples::SampleSet;
pub use shape::{EntryIndex, Shape};
pub use vertex::SignVertex;

/// Wall-clock source used for diagnostics. The core has no clock of its own.
pub trait Clock {
    /// Seconds since an arbitrary fixed origin.
    fn now_seconds(&self) -> f64;
}

/// A clock that always reads zero; timing fields come out as `0.0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now_seconds(&self) -> f64 {
        0.0
    }
}
