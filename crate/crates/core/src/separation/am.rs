//! Alternating maximization: coordinate sign flips accepted on strict gap
//! improvement.

use alloc::vec::Vec;

use super::{separation_gap, SeparationRequest};
use crate::vertex::SignVertex;

pub const DEFAULT_PASS_CAP: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct AmOutcome {
    pub vertex: SignVertex,
    /// Gap of `vertex`, recomputed with [`separation_gap`].
    pub gap: f64,
    /// Passes over all coordinates, including the final no-flip pass.
    pub passes: usize,
    pub flips_evaluated: usize,
    pub flips_accepted: usize,
}

/// Runs passes over every mode and coordinate, keeping a sign flip iff it
/// strictly increases the gap, until a pass makes no flip or `pass_cap`
/// passes have run. `pass_cap = 1` is the single-sweep variant.
pub fn alternating_max(req: &SeparationRequest, start: &SignVertex, pass_cap: usize) -> AmOutcome {
    alternating_max_observed(req, start, pass_cap, |_| {})
}

/// [`alternating_max`] calling `observe` with the running gap after every
/// accepted flip.
pub fn alternating_max_observed(
    req: &SeparationRequest,
    start: &SignVertex,
    pass_cap: usize,
    mut observe: impl FnMut(f64),
) -> AmOutcome {
    let terms = req.terms();
    let lambda = req.lambda();
    let mut signs = terms.flat_from_vertex(start);
    let mut prod: Vec<i8> = (0..terms.len())
        .map(|t| {
            terms
                .term_coords(t)
                .iter()
                .zip(&terms.offset)
                .fold(1i8, |acc, (&j, &off)| acc * signs[off + j as usize])
        })
        .collect();
    let mut gap = separation_gap(req, start);

    let mut passes = 0;
    let mut evaluated = 0;
    let mut accepted = 0;
    while passes < pass_cap {
        passes += 1;
        let mut flipped = false;
        for var in 0..terms.n_vars() {
            evaluated += 1;
            let incident = &terms.incidence[var];
            if incident.is_empty() {
                continue;
            }
            // Flipping this sign negates every incident product, changing
            // the gap by 2λ Σ c_t prod_t.
            let gain: f64 = incident
                .iter()
                .map(|&t| terms.coef[t as usize] * prod[t as usize] as f64)
                .sum();
            if gain > 0.0 {
                signs[var] = -signs[var];
                for &t in incident {
                    prod[t as usize] = -prod[t as usize];
                }
                gap += 2.0 * lambda * gain;
                accepted += 1;
                flipped = true;
                observe(gap);
            }
        }
        if !flipped {
            break;
        }
    }

    let vertex = terms.vertex_from_flat(&signs);
    let gap = separation_gap(req, &vertex);
    AmOutcome {
        vertex,
        gap,
        passes,
        flips_evaluated: evaluated,
        flips_accepted: accepted,
    }
}
