//! The weak separation oracle: randomized alternating maximization first,
//! exact branch-and-bound only when the heuristic cannot reach `Φ/K`.

use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    alternating_max, exact_branch_and_bound, separation_gap, BnbOptions, BnbStatus,
    SeparationRequest, DEFAULT_PASS_CAP,
};
use crate::error::{Error, Result};
use crate::vertex::SignVertex;

#[derive(Debug, Clone, PartialEq)]
pub enum SeparationResult {
    /// `gap = ⟨c, ψ − λ·vertex⟩ ≥ Φ/K`.
    Separated { vertex: SignVertex, gap: f64 },
    /// Every vertex has gap at most `certified_bound`, and
    /// `certified_bound ≤ Φ`.
    NoSeparation { certified_bound: f64 },
}

/// Which stage settled an oracle call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    /// Zero gradient; no search needed.
    Trivial,
    Heuristic,
    Exact,
}

/// How the exact stage certifies "no separation".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CertificateMode {
    /// Run the search to the exact optimum; the certificate is that optimum.
    #[default]
    Optimum,
    /// Prune every node whose bound is already at most `Φ`; the certificate
    /// is the largest pruned bound (still `≤ Φ`).
    Threshold,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    /// Random alternating-maximization starts (the caller's incumbent, when
    /// supplied, is tried in addition).
    pub restarts: usize,
    pub pass_cap: usize,
    pub node_budget: Option<u64>,
    pub seed: u64,
    pub certificate: CertificateMode,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            restarts: 5,
            pass_cap: DEFAULT_PASS_CAP,
            node_budget: None,
            seed: 0,
            certificate: CertificateMode::Optimum,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub result: SeparationResult,
    pub resolution: Resolution,
    /// Branch-and-bound nodes visited (0 when the heuristic sufficed).
    pub nodes: u64,
}

/// Returns a vertex with gap `≥ Φ/K`, or certifies that all gaps are `≤ Φ`.
///
/// An exhausted node budget is an error, never a certificate.
pub fn weak_separation_oracle(
    req: &SeparationRequest,
    cfg: &OracleConfig,
    incumbent: Option<&SignVertex>,
) -> Result<OracleReport> {
    let target = req.target();
    if req.support_len() == 0 {
        // Every vertex has gap ⟨c, ψ⟩ = 0.
        return Ok(OracleReport {
            result: SeparationResult::NoSeparation { certified_bound: req.inner() },
            resolution: Resolution::Trivial,
            nodes: 0,
        });
    }

    let best = best_heuristic(req, cfg, incumbent);
    if best.0 >= target {
        return Ok(OracleReport {
            result: SeparationResult::Separated { vertex: best.1, gap: best.0 },
            resolution: Resolution::Heuristic,
            nodes: 0,
        });
    }

    let opts = BnbOptions {
        target,
        node_budget: cfg.node_budget,
        prune_floor: match cfg.certificate {
            CertificateMode::Optimum => None,
            CertificateMode::Threshold => Some(req.phi()),
        },
    };
    let out = exact_branch_and_bound(req, &opts, Some(&best.1));
    let result = match out.status {
        BnbStatus::BudgetExhausted => return Err(Error::OracleInconclusive { nodes: out.nodes }),
        _ if out.gap >= target => SeparationResult::Separated { vertex: out.vertex, gap: out.gap },
        BnbStatus::Exhausted => {
            debug_assert!(out.dual_bound <= req.phi());
            SeparationResult::NoSeparation { certified_bound: out.dual_bound }
        }
        BnbStatus::TargetReached => unreachable!("target reached implies gap >= target"),
    };
    Ok(OracleReport { result, resolution: Resolution::Exact, nodes: out.nodes })
}

/// Best alternating-maximization result over the incumbent and `restarts`
/// random starts, ordered by gap then by lexicographic vertex.
pub(crate) fn best_heuristic(
    req: &SeparationRequest,
    cfg: &OracleConfig,
    incumbent: Option<&SignVertex>,
) -> (f64, SignVertex) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts: Vec<SignVertex> = Vec::with_capacity(cfg.restarts + 1);
    if let Some(v) = incumbent {
        starts.push(v.clone());
    }
    for _ in 0..cfg.restarts {
        starts.push(random_vertex(req, &mut rng));
    }
    if starts.is_empty() {
        starts.push(SignVertex::ones(req.shape()));
    }
    starts
        .iter()
        .map(|s| {
            let out = alternating_max(req, s, cfg.pass_cap);
            (out.gap, out.vertex.canonicalize())
        })
        .reduce(|a, b| match b.0.total_cmp(&a.0) {
            core::cmp::Ordering::Greater => b,
            core::cmp::Ordering::Equal if b.1 < a.1 => b,
            _ => a,
        })
        .expect("at least one start")
}

fn random_vertex(req: &SeparationRequest, rng: &mut ChaCha8Rng) -> SignVertex {
    let signs = req
        .shape()
        .dims()
        .iter()
        .map(|&r| {
            let mut out = Vec::with_capacity(r);
            let mut bits = 0u64;
            for j in 0..r {
                if j % 64 == 0 {
                    bits = rng.next_u64();
                }
                out.push(if bits >> (j % 64) & 1 == 1 { 1 } else { -1 });
            }
            out
        })
        .collect();
    let v = SignVertex::from_signs_unchecked(signs);
    debug_assert!(separation_gap(req, &v).is_finite());
    v
}
