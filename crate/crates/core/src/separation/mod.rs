//! Weak separation over the sign vertices.
//!
//! For a gradient `c` supported on the observed indices and the current
//! iterate `ψ`, the gap of a vertex `v` is `⟨c, ψ − λv⟩ = ⟨c, ψ⟩ − λ S(v)` with
//! `S(v) = Σ_x c_x Π_k θ^(k)_{x_k}`. The oracle either finds a vertex whose gap
//! reaches `Φ/K` or certifies that no vertex has gap above `Φ`.

mod am;
mod bnb;
mod milp;
mod oracle;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::shape::{EntryIndex, Shape};
use crate::vertex::SignVertex;

pub use am::{alternating_max, alternating_max_observed, AmOutcome, DEFAULT_PASS_CAP};
pub use bnb::{exact_branch_and_bound, BnbOptions, BnbOutcome, BnbStatus};
pub use milp::{export_milp, write_milp};
pub(crate) use oracle::best_heuristic;
pub use oracle::{
    weak_separation_oracle, CertificateMode, OracleConfig, OracleReport, Resolution,
    SeparationResult,
};

/// Input of one separation call. Compiles the nonzero gradient entries into
/// flat term arrays and per-coordinate incidence lists on construction.
#[derive(Debug, Clone)]
pub struct SeparationRequest {
    shape: Shape,
    lambda: f64,
    phi: f64,
    accuracy: f64,
    indices: Vec<EntryIndex>,
    c: Vec<f64>,
    psi: Vec<f64>,
    terms: Terms,
}

/// Nonzero-coefficient terms of `S`.
#[derive(Debug, Clone)]
pub(crate) struct Terms {
    pub order: usize,
    pub dims: Vec<usize>,
    /// First variable id of each mode; variable `(k, j)` is `offset[k] + j`.
    pub offset: Vec<usize>,
    /// Term-major coordinates, `order` per term.
    pub coords: Vec<u32>,
    pub coef: Vec<f64>,
    /// Positions in the request's index list, one per term.
    pub source: Vec<usize>,
    /// Terms touching each variable.
    pub incidence: Vec<Vec<u32>>,
    /// `Σ |c|` over the terms touching each variable.
    pub mass: Vec<f64>,
    /// `⟨c, ψ⟩`.
    pub inner: f64,
}

impl Terms {
    pub fn len(&self) -> usize {
        self.coef.len()
    }

    pub fn n_vars(&self) -> usize {
        *self.offset.last().unwrap() + *self.dims.last().unwrap()
    }

    pub fn term_coords(&self, t: usize) -> &[u32] {
        &self.coords[t * self.order..(t + 1) * self.order]
    }

    /// `S(v)`, summed in term order.
    pub fn s_value(&self, v: &SignVertex) -> f64 {
        let signs = v.signs();
        let mut s = 0.0;
        for (t, &c) in self.coef.iter().enumerate() {
            let prod = self
                .term_coords(t)
                .iter()
                .zip(signs)
                .fold(1i8, |acc, (&j, m)| acc * m[j as usize]);
            s += c * prod as f64;
        }
        s
    }

    /// `S` from a flat sign assignment indexed by variable id.
    pub fn s_value_flat(&self, signs: &[i8]) -> f64 {
        let mut s = 0.0;
        for (t, &c) in self.coef.iter().enumerate() {
            let prod = self
                .term_coords(t)
                .iter()
                .zip(&self.offset)
                .fold(1i8, |acc, (&j, &off)| acc * signs[off + j as usize]);
            s += c * prod as f64;
        }
        s
    }

    pub fn vertex_from_flat(&self, signs: &[i8]) -> SignVertex {
        SignVertex::from_signs_unchecked(
            self.offset
                .iter()
                .zip(&self.dims)
                .map(|(&off, &r)| signs[off..off + r].to_vec())
                .collect(),
        )
    }

    pub fn flat_from_vertex(&self, v: &SignVertex) -> Vec<i8> {
        v.signs().iter().flatten().copied().collect()
    }

    /// `Σ|c|`.
    pub fn abs_mass(&self) -> f64 {
        self.coef.iter().map(|c| c.abs()).sum()
    }
}

impl SeparationRequest {
    /// `indices`, `c` and `psi` are aligned: `c[i]` and `psi[i]` belong to
    /// `indices[i]`. Indices must be distinct.
    pub fn new(
        shape: Shape,
        lambda: f64,
        indices: Vec<EntryIndex>,
        c: Vec<f64>,
        psi: Vec<f64>,
        phi: f64,
        accuracy: f64,
    ) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
        }
        if !(phi.is_finite() && phi > 0.0) {
            return Err(Error::InvalidParameter(format!("Phi must be > 0, got {phi}")));
        }
        if !(accuracy.is_finite() && accuracy >= 1.0) {
            return Err(Error::InvalidParameter(format!("K must be >= 1, got {accuracy}")));
        }
        if c.len() != indices.len() || psi.len() != indices.len() {
            return Err(Error::InvalidParameter(
                "gradient, iterate and index lists differ in length".into(),
            ));
        }
        if c.iter().chain(&psi).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite gradient or iterate entry".into()));
        }
        let mut seen = BTreeMap::new();
        for x in &indices {
            shape.check(x.coords(), None)?;
            if seen.insert(x, ()).is_some() {
                return Err(Error::InvalidParameter("duplicate index in separation request".into()));
            }
        }
        let terms = compile(&shape, &indices, &c, &psi);
        Ok(SeparationRequest {
            shape,
            lambda,
            phi,
            accuracy,
            indices,
            c,
            psi,
            terms,
        })
    }

    /// Builds a request from `(index, c, ψ)` triples.
    pub fn from_entries(
        shape: Shape,
        lambda: f64,
        entries: impl IntoIterator<Item = (EntryIndex, f64, f64)>,
        phi: f64,
        accuracy: f64,
    ) -> Result<Self> {
        let (mut indices, mut c, mut psi) = (Vec::new(), Vec::new(), Vec::new());
        for (x, cx, px) in entries {
            indices.push(x);
            c.push(cx);
            psi.push(px);
        }
        Self::new(shape, lambda, indices, c, psi, phi, accuracy)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }

    /// `Φ / K`, the gap a separating vertex must reach.
    pub fn target(&self) -> f64 {
        self.phi / self.accuracy
    }

    pub fn indices(&self) -> &[EntryIndex] {
        &self.indices
    }

    pub fn gradient(&self) -> &[f64] {
        &self.c
    }

    pub fn iterate(&self) -> &[f64] {
        &self.psi
    }

    /// Number of indices with a nonzero gradient entry.
    pub fn support_len(&self) -> usize {
        self.terms.len()
    }

    /// `⟨c, ψ⟩`.
    pub fn inner(&self) -> f64 {
        self.terms.inner
    }

    /// A bound on every vertex's gap that needs no search:
    /// `⟨c, ψ⟩ + λ Σ|c|`.
    pub fn trivial_bound(&self) -> f64 {
        self.terms.inner + self.lambda * self.terms.abs_mass()
    }

    pub(crate) fn terms(&self) -> &Terms {
        &self.terms
    }
}

/// `Σ_{x ∈ support(c)} c_x (ψ_x − λ v(x))`, evaluated as `⟨c, ψ⟩ − λ S(v)`.
///
/// Every gap reported by the oracle is computed by this function, so results
/// can be compared exactly against brute-force enumeration.
pub fn separation_gap(req: &SeparationRequest, v: &SignVertex) -> f64 {
    debug_assert!(v.matches(&req.shape));
    req.terms.inner - req.lambda * req.terms.s_value(v)
}

fn compile(shape: &Shape, indices: &[EntryIndex], c: &[f64], psi: &[f64]) -> Terms {
    let order = shape.order();
    let dims = shape.dims().to_vec();
    let mut offset = Vec::with_capacity(order);
    let mut acc = 0;
    for &r in &dims {
        offset.push(acc);
        acc += r;
    }
    let n_vars = acc;

    let mut coords = Vec::new();
    let mut coef = Vec::new();
    let mut source = Vec::new();
    let mut incidence = vec![Vec::new(); n_vars];
    let mut mass = vec![0.0; n_vars];
    let mut inner = 0.0;
    for (i, x) in indices.iter().enumerate() {
        inner += c[i] * psi[i];
        if c[i] == 0.0 {
            continue;
        }
        let t = coef.len() as u32;
        for (k, &j) in x.coords().iter().enumerate() {
            coords.push(j as u32);
            incidence[offset[k] + j].push(t);
            mass[offset[k] + j] += c[i].abs();
        }
        coef.push(c[i]);
        source.push(i);
    }
    Terms {
        order,
        dims,
        offset,
        coords,
        coef,
        source,
        incidence,
        mass,
        inner,
    }
}


#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;

    #[test]
    fn gap_examples() {
        let req = request(&[2, 2], &[(&[0, 0], 1.0)], 1.0, 1.0, 2.0);
        let s = req.shape().clone();
        let v = SignVertex::new(&s, vec![vec![-1, 1], vec![1, 1]]).unwrap();
        assert_eq!(separation_gap(&req, &v), 1.0);

        let zero = request(&[2, 2], &[(&[0, 0], 0.0), (&[1, 0], 0.0)], 1.0, 1.0, 2.0);
        assert_eq!(separation_gap(&zero, &SignVertex::ones(&s)), 0.0);
        assert_eq!(zero.support_len(), 0);

        let two = request(&[2, 2], &[(&[0, 0], 2.0), (&[1, 1], -3.0)], 1.0, 1.0, 2.0);
        assert_eq!(separation_gap(&two, &SignVertex::ones(&s)), 1.0);
    }

    #[test]
    fn gap_matches_definition_with_iterate() {
        let mut rng = XorShift(7);
        for _ in 0..20 {
            let req = random_request(&[3, 2, 2], 0.6, &mut rng, true);
            for v in crate::vertex::canonical_vertices(req.shape()).take(16) {
                let direct: f64 = req
                    .indices()
                    .iter()
                    .zip(req.gradient().iter().zip(req.iterate()))
                    .map(|(x, (c, p))| c * (p - req.lambda() * v.entry(x) as f64))
                    .sum();
                let g = separation_gap(&req, &v);
                assert!((direct - g).abs() <= 1e-12 * (1.0 + direct.abs()));
            }
        }
    }

    #[test]
    fn request_validation() {
        let s = Shape::new(vec![2, 2]).unwrap();
        let x = s.index(&[0, 0]).unwrap();
        let bad = |lambda, phi, k| {
            SeparationRequest::from_entries(s.clone(), lambda, vec![(x.clone(), 1.0, 0.0)], phi, k).is_err()
        };
        assert!(bad(0.0, 1.0, 2.0));
        assert!(bad(1.0, 0.0, 2.0));
        assert!(bad(1.0, 1.0, 0.5));
        assert!(SeparationRequest::from_entries(
            s.clone(),
            1.0,
            vec![(x.clone(), 1.0, 0.0), (x.clone(), 2.0, 0.0)],
            1.0,
            2.0
        )
        .is_err());
        assert!(SeparationRequest::from_entries(s, 1.0, vec![(x, f64::INFINITY, 0.0)], 1.0, 2.0).is_err());
    }
}
