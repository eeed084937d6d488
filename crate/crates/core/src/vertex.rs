//! Sign vertices: rank-1 tensors whose entries are all `±1`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::shape::{EntryIndex, Shape};

/// One sign vector per mode. The induced tensor has entry
/// `Π_k signs[k][x_k]` at index `x`, so a vertex costs `ρ` bytes rather than
/// `π` entries.
///
/// The derived ordering is lexicographic over modes and is used for
/// deterministic tie-breaking.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignVertex {
    signs: Vec<Vec<i8>>,
}

impl SignVertex {
    pub fn new(shape: &Shape, signs: Vec<Vec<i8>>) -> Result<Self> {
        if signs.len() != shape.order()
            || signs.iter().zip(shape.dims()).any(|(s, &r)| s.len() != r)
        {
            return Err(Error::ShapeMismatch);
        }
        if signs.iter().flatten().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidSign);
        }
        Ok(SignVertex { signs })
    }

    /// The all-ones vertex.
    pub fn ones(shape: &Shape) -> Self {
        SignVertex {
            signs: shape.dims().iter().map(|&r| alloc::vec![1; r]).collect(),
        }
    }

    pub(crate) fn from_signs_unchecked(signs: Vec<Vec<i8>>) -> Self {
        SignVertex { signs }
    }

    pub fn signs(&self) -> &[Vec<i8>] {
        &self.signs
    }

    pub fn order(&self) -> usize {
        self.signs.len()
    }

    pub fn dims(&self) -> impl Iterator<Item = usize> + '_ {
        self.signs.iter().map(Vec::len)
    }

    pub fn matches(&self, shape: &Shape) -> bool {
        self.signs.len() == shape.order() && self.dims().eq(shape.dims().iter().copied())
    }

    /// Flips one sign in place.
    pub fn flip(&mut self, mode: usize, coord: usize) {
        self.signs[mode][coord] = -self.signs[mode][coord];
    }

    /// Unit tensor entry at `x`: the product of the selected signs.
    pub fn entry(&self, x: &EntryIndex) -> i8 {
        self.entry_at(x.coords())
    }

    pub(crate) fn entry_at(&self, coords: &[usize]) -> i8 {
        coords
            .iter()
            .zip(&self.signs)
            .fold(1i8, |acc, (&c, s)| acc * s[c])
    }

    /// [`SignVertex::entry`] evaluated over `indices`, in order.
    pub fn project(&self, indices: &[EntryIndex]) -> Vec<i8> {
        indices.iter().map(|x| self.entry(x)).collect()
    }

    /// Equivalent vertex with the leading sign of every mode after the first
    /// fixed to `+1`.
    ///
    /// Negating two whole modes leaves every entry unchanged, so each
    /// non-canonical mode is negated together with the first mode.
    pub fn canonicalize(&self) -> SignVertex {
        let mut out = self.clone();
        let mut first_flips = false;
        for mode in out.signs.iter_mut().skip(1) {
            if mode[0] == -1 {
                mode.iter_mut().for_each(|s| *s = -*s);
                first_flips = !first_flips;
            }
        }
        if first_flips {
            out.signs[0].iter_mut().for_each(|s| *s = -*s);
        }
        out
    }

    pub fn is_canonical(&self) -> bool {
        self.signs.iter().skip(1).all(|m| m[0] == 1)
    }

    /// The vertex inducing the negated tensor (first mode flipped).
    pub fn negated(&self) -> SignVertex {
        let mut out = self.clone();
        out.signs[0].iter_mut().for_each(|s| *s = -*s);
        out
    }

    /// `⟨θ_self^(k), θ_other^(k)⟩` multiplied over modes: the Frobenius inner
    /// product of the two induced tensors.
    pub fn tensor_inner(&self, other: &SignVertex) -> f64 {
        self.signs
            .iter()
            .zip(&other.signs)
            .map(|(a, b)| a.iter().zip(b).map(|(&u, &v)| (u * v) as i64).sum::<i64>() as f64)
            .product()
    }
}

/// Every canonical vertex of `shape`, `2^(ρ−p+1)` of them, in a fixed order.
pub fn canonical_vertices(shape: &Shape) -> impl Iterator<Item = SignVertex> + '_ {
    let free: usize = shape.rho() - shape.order() + 1;
    assert!(free < 64, "too many canonical vertices to enumerate");
    (0u64..1u64 << free).map(move |bits| {
        let mut bit = 0;
        let signs = shape
            .dims()
            .iter()
            .enumerate()
            .map(|(k, &r)| {
                (0..r)
                    .map(|j| {
                        if k > 0 && j == 0 {
                            1
                        } else {
                            let s = if bits >> bit & 1 == 1 { -1 } else { 1 };
                            bit += 1;
                            s
                        }
                    })
                    .collect()
            })
            .collect();
        SignVertex { signs }
    })
}
