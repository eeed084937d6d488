//! Tensor shapes and entry indices.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Mode sizes of an order-`p` tensor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Shape {
    dims: Vec<usize>,
    rho: usize,
    pi: u64,
}

impl Shape {
    /// Builds a shape, rejecting empty shapes, zero-sized modes and shapes
    /// whose entry count does not fit in a signed 64-bit integer.
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape("order must be at least 1".into()));
        }
        let mut pi: u64 = 1;
        let mut rho: usize = 0;
        for (k, &r) in dims.iter().enumerate() {
            if r == 0 {
                return Err(Error::InvalidShape(format!("mode {} has size 0", k + 1)));
            }
            pi = pi
                .checked_mul(r as u64)
                .filter(|&v| v <= i64::MAX as u64)
                .ok_or(Error::ShapeOverflow)?;
            rho = rho.checked_add(r).ok_or(Error::ShapeOverflow)?;
        }
        Ok(Shape { dims, rho, pi })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Tensor order `p`.
    pub fn order(&self) -> usize {
        self.dims.len()
    }

    /// Sum of mode sizes.
    pub fn rho(&self) -> usize {
        self.rho
    }

    /// Product of mode sizes (number of entries).
    pub fn pi(&self) -> u64 {
        self.pi
    }

    /// Validates raw zero-based coordinates against this shape.
    pub fn index(&self, coords: &[usize]) -> Result<EntryIndex> {
        self.check(coords, None)?;
        Ok(EntryIndex(coords.to_vec()))
    }

    pub(crate) fn check(&self, coords: &[usize], row: Option<usize>) -> Result<()> {
        if coords.len() != self.dims.len() {
            return Err(Error::WrongOrder {
                expected: self.dims.len(),
                got: coords.len(),
            });
        }
        for (mode, (&c, &r)) in coords.iter().zip(&self.dims).enumerate() {
            if c >= r {
                return Err(Error::CoordinateOutOfRange {
                    row,
                    mode,
                    coord: c,
                    size: r,
                });
            }
        }
        Ok(())
    }

    /// Row-major flat position of `x` (last mode varies fastest).
    pub fn flat(&self, x: &EntryIndex) -> u64 {
        x.0.iter()
            .zip(&self.dims)
            .fold(0u64, |acc, (&c, &r)| acc * r as u64 + c as u64)
    }

    /// Inverse of [`Shape::flat`].
    pub fn unflat(&self, mut flat: u64) -> EntryIndex {
        let mut coords = alloc::vec![0usize; self.dims.len()];
        for (slot, &r) in coords.iter_mut().zip(&self.dims).rev() {
            *slot = (flat % r as u64) as usize;
            flat /= r as u64;
        }
        EntryIndex(coords)
    }

    /// Iterates over every entry index in row-major order.
    pub fn indices(&self) -> impl Iterator<Item = EntryIndex> + '_ {
        (0..self.pi).map(move |f| self.unflat(f))
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, r) in self.dims.iter().enumerate() {
            if k > 0 {
                f.write_str("x")?;
            }
            write!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Zero-based coordinates of one tensor entry.
///
/// Ordering is lexicographic, which fixes the iteration order of the unique
/// index set everywhere in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntryIndex(Vec<usize>);

impl EntryIndex {
    pub fn coords(&self) -> &[usize] {
        &self.0
    }

    pub(crate) fn from_vec_unchecked(coords: Vec<usize>) -> Self {
        EntryIndex(coords)
    }
}
