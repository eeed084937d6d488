use alloc::format;
use alloc::vec::Vec;

use super::active::{ActiveSet, WEIGHT_FLOOR};
use super::objective::{gradient, line_search, objective, unconstrained_step};
use crate::error::{Error, Result};
use crate::model::AtomicModel;
use crate::samples::SampleSet;
use crate::separation::{
    best_heuristic, exact_branch_and_bound, weak_separation_oracle, BnbOptions, BnbStatus,
    CertificateMode, OracleConfig, Resolution, SeparationRequest, SeparationResult,
    DEFAULT_PASS_CAP,
};
use crate::vertex::SignVertex;
use crate::{Clock, NoClock};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Radius of the gauge-norm ball.
    pub lambda: f64,
    /// Target Frank-Wolfe gap (absolute). The solver stops once
    /// `Φ ≤ epsilon / 2`.
    pub epsilon: f64,
    /// Oracle accuracy `K ≥ 1`.
    pub accuracy: f64,
    pub max_iterations: usize,
    pub am_restarts: usize,
    pub am_pass_cap: usize,
    /// Node budget of each exact separation; `None` is unlimited.
    pub bnb_node_budget: Option<u64>,
    pub seed: u64,
    pub certificate: CertificateMode,
}

impl SolverConfig {
    pub fn new(lambda: f64) -> Self {
        SolverConfig {
            lambda,
            epsilon: 1e-4,
            accuracy: 2.0,
            max_iterations: 100_000,
            am_restarts: 5,
            am_pass_cap: DEFAULT_PASS_CAP,
            bnb_node_budget: None,
            seed: 0,
            certificate: CertificateMode::Optimum,
        }
    }

    pub fn phi_floor(&self) -> f64 {
        self.epsilon / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("lambda must be > 0, got {}", self.lambda)));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if !(self.accuracy.is_finite() && self.accuracy >= 1.0) {
            return Err(Error::InvalidParameter(format!("K must be >= 1, got {}", self.accuracy)));
        }
        if self.am_pass_cap == 0 {
            return Err(Error::InvalidParameter("AM pass cap must be >= 1".into()));
        }
        Ok(())
    }

    fn oracle_config(&self, call: u64) -> OracleConfig {
        OracleConfig {
            restarts: self.am_restarts,
            pass_cap: self.am_pass_cap,
            node_budget: self.bnb_node_budget,
            seed: splitmix64(self.seed ^ splitmix64(call)),
            certificate: self.certificate,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Iterate over the observed unique indices plus its active-set
/// representation.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    lambda: f64,
    psi: Vec<f64>,
    phi: f64,
    active: ActiveSet,
    objective: f64,
}

impl SolverState {
    /// State at `λ Σ a_v v` for the given vertices. Weights must be
    /// nonnegative and sum to one.
    pub fn from_vertices(samples: &SampleSet, lambda: f64, vertices: Vec<(SignVertex, f64)>) -> Result<Self> {
        let mut active = ActiveSet::default();
        for (v, w) in vertices {
            if !v.matches(samples.shape()) {
                return Err(Error::ShapeMismatch);
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidParameter(format!("weight {w} is not a nonnegative number")));
            }
            active.add(v.canonicalize(), w, samples.unique());
        }
        if (active.weight_sum() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter("active weights must sum to 1".into()));
        }
        active.prune_and_normalize();
        let mut state = SolverState {
            lambda,
            psi: Vec::new(),
            phi: f64::INFINITY,
            active,
            objective: 0.0,
        };
        state.refresh(samples);
        Ok(state)
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn active(&self) -> &ActiveSet {
        &self.active
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn refresh(&mut self, samples: &SampleSet) {
        self.psi = self.active.iterate(self.lambda, samples.unique().len());
        self.objective = objective(&self.psi, samples);
    }

    /// The iterate as a model over the full tensor. Antipodal pairs
    /// `a·v + b·(−v)` are merged into `(a − b)·v`, so the weight sum may drop
    /// below one.
    pub fn to_model(&self, samples: &SampleSet) -> AtomicModel {
        let mut merged: Vec<(SignVertex, f64)> = Vec::new();
        for e in self.active.entries() {
            let neg = e.vertex.negated();
            let (key, w) = if neg < e.vertex { (neg, -e.weight) } else { (e.vertex.clone(), e.weight) };
            match merged.iter_mut().find(|m| m.0 == key) {
                Some(m) => m.1 += w,
                None => merged.push((key, w)),
            }
        }
        let terms = merged
            .into_iter()
            .filter(|(_, w)| w.abs() > WEIGHT_FLOOR)
            .map(|(v, w)| if w < 0.0 { (-w, v.negated()) } else { (w, v) })
            .collect();
        AtomicModel::new(samples.shape().clone(), self.lambda, terms)
            .expect("active set is a valid convex combination")
    }

    /// `⟨g, projection⟩` for every active vertex, then the toward
    /// (smallest score) and away (largest score) positions; ties go to the
    /// lexicographically smaller vertex.
    fn toward_away(&self, g: &[f64]) -> Option<(usize, usize, f64, f64)> {
        let entries = self.active.entries();
        if entries.is_empty() {
            return None;
        }
        let scores: Vec<f64> = entries
            .iter()
            .map(|e| e.projection.iter().zip(g).map(|(&s, &gx)| s as f64 * gx).sum())
            .collect();
        let (mut s, mut u) = (0, 0);
        for i in 1..entries.len() {
            let better_toward = scores[i] < scores[s] || (scores[i] == scores[s] && entries[i].vertex < entries[s].vertex);
            if better_toward {
                s = i;
            }
            let better_away = scores[i] > scores[u] || (scores[i] == scores[u] && entries[i].vertex < entries[u].vertex);
            if better_away {
                u = i;
            }
        }
        Some((s, u, scores[s], scores[u]))
    }

    fn frank_wolfe_step(&mut self, v: SignVertex, samples: &SampleSet) {
        let projection = v.project(samples.unique());
        let d: Vec<f64> = projection
            .iter()
            .zip(&self.psi)
            .map(|(&s, &p)| self.lambda * s as f64 - p)
            .collect();
        let Ok(t) = line_search(&self.psi, &d, samples) else {
            return;
        };
        if t == 0.0 {
            return;
        }
        self.active.scale_weights(1.0 - t);
        self.active.add(v, t, samples.unique());
        self.active.prune_and_normalize();
        self.refresh(samples);
    }
}

/// Pairwise gap `⟨g, λ u_away − λ s_toward⟩` over the active set.
pub fn local_gap(state: &SolverState, samples: &SampleSet) -> f64 {
    local_gap_with(state, &gradient(&state.psi, samples))
}

fn local_gap_with(state: &SolverState, g: &[f64]) -> f64 {
    match state.toward_away(g) {
        Some((_, _, toward, away)) => state.lambda * (away - toward),
        None => 0.0,
    }
}

/// One pairwise step moving weight from the away vertex to the toward vertex
/// with exact line search, capped by the away vertex's weight. Returns
/// whether the state changed.
pub fn local_step(state: &mut SolverState, samples: &SampleSet) -> bool {
    if state.active.len() < 2 {
        return false;
    }
    let g = gradient(&state.psi, samples);
    let Some((s, u, _, _)) = state.toward_away(&g) else {
        return false;
    };
    if s == u {
        return false;
    }
    let entries = state.active.entries();
    let lambda = state.lambda;
    let d: Vec<f64> = entries[s]
        .projection
        .iter()
        .zip(&entries[u].projection)
        .map(|(&a, &b)| lambda * (a - b) as f64)
        .collect();
    let cap = entries[u].weight;
    let t = match unconstrained_step(&state.psi, &d, samples) {
        Ok(t) => t.clamp(0.0, cap),
        // Identical on the observed indices: the away vertex is redundant.
        Err(_) => cap,
    };
    if t == 0.0 {
        return false;
    }
    *state.active.weight_mut(s) += t;
    *state.active.weight_mut(u) -= t;
    state.active.prune_and_normalize();
    state.refresh(samples);
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Init,
    Local,
    Global,
    Halve,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Init => "init",
            Phase::Local => "local",
            Phase::Global => "global",
            Phase::Halve => "halve",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub phase: Phase,
    pub objective: f64,
    pub phi: f64,
    pub active_size: usize,
    pub oracle_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// `Φ ≤ ε/2`.
    Converged,
    MaxIterations,
    /// An exact separation ran out of nodes.
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    pub iterations: usize,
    pub oracle_calls: usize,
    pub heuristic_resolved: usize,
    pub exact_resolved: usize,
    pub trivial_resolved: usize,
    pub local_steps: usize,
    pub global_steps: usize,
    pub halvings: usize,
    pub bnb_nodes: u64,
    pub initial_gap: f64,
    pub phi_trajectory: Vec<f64>,
    pub objective_trajectory: Vec<f64>,
    pub trace: Vec<TraceRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub model: AtomicModel,
    pub state: SolverState,
    pub status: SolveStatus,
    pub diagnostics: Diagnostics,
}

/// [`solve_with_clock`] without timing.
pub fn solve(samples: &SampleSet, config: &SolverConfig) -> Result<SolveOutcome> {
    solve_with_clock(samples, config, &NoClock)
}

/// Runs blended conditional gradients.
///
/// Start: the exact best vertex `v0` for the gradient at `ψ = 0`, then a line
/// search along `λ v0`; `Φ = max(gap0, ε)/2`. Each iteration takes a pairwise
/// step while the pairwise gap is at least `Φ`, otherwise queries the weak
/// separation oracle: a separating vertex gives a Frank-Wolfe step, a
/// certificate halves `Φ`.
pub fn solve_with_clock(samples: &SampleSet, config: &SolverConfig, clock: &dyn Clock) -> Result<SolveOutcome> {
    config.validate()?;
    let lambda = config.lambda;
    let unique = samples.unique();
    let mut diag = Diagnostics::default();

    // Initial vertex: exact separation at ψ = 0.
    let zero = alloc::vec![0.0; unique.len()];
    let g0 = gradient(&zero, samples);
    let req = SeparationRequest::new(samples.shape().clone(), lambda, unique.to_vec(), g0, zero.clone(), 1.0, 1.0)?;
    let t0 = clock.now_seconds();
    let ocfg = config.oracle_config(0);
    let (_, start) = best_heuristic(&req, &ocfg, None);
    let init = exact_branch_and_bound(
        &req,
        &BnbOptions { target: f64::INFINITY, node_budget: config.bnb_node_budget, prune_floor: None },
        Some(&start),
    );
    diag.bnb_nodes += init.nodes;
    diag.oracle_calls += 1;
    diag.exact_resolved += 1;
    let oracle_seconds = clock.now_seconds() - t0;
    let gap_bound = if init.status == BnbStatus::Exhausted { init.dual_bound } else { req.trivial_bound() };
    diag.initial_gap = init.gap;

    let v0 = init.vertex.canonicalize();
    let proj0 = v0.project(unique);
    let d0: Vec<f64> = proj0.iter().map(|&s| lambda * s as f64).collect();
    let t = line_search(&zero, &d0, samples).unwrap_or(0.0);
    // ψ = t λ v0 = λ[(1+t)/2 · v0 + (1−t)/2 · (−v0)].
    let mut state = SolverState::from_vertices(
        samples,
        lambda,
        alloc::vec![(v0.clone(), (1.0 + t) / 2.0), (v0.negated(), (1.0 - t) / 2.0)],
    )?;
    state.phi = gap_bound.max(config.epsilon) / 2.0;
    record(&mut diag, &state, 0, Phase::Init, oracle_seconds);

    let mut status = SolveStatus::MaxIterations;
    let mut iteration = 0;
    loop {
        if state.phi <= config.phi_floor() {
            status = SolveStatus::Converged;
            break;
        }
        if iteration >= config.max_iterations {
            break;
        }
        iteration += 1;
        let g = gradient(&state.psi, samples);
        if state.active.len() >= 2 && local_gap_with(&state, &g) >= state.phi {
            local_step(&mut state, samples);
            diag.local_steps += 1;
            record(&mut diag, &state, iteration, Phase::Local, 0.0);
            continue;
        }

        let incumbent = state.toward_away(&g).map(|(s, ..)| state.active.entries()[s].vertex.clone());
        let req = SeparationRequest::new(
            samples.shape().clone(),
            lambda,
            unique.to_vec(),
            g,
            state.psi.clone(),
            state.phi,
            config.accuracy,
        )?;
        let t0 = clock.now_seconds();
        let report = weak_separation_oracle(&req, &config.oracle_config(diag.oracle_calls as u64), incumbent.as_ref());
        let seconds = clock.now_seconds() - t0;
        diag.oracle_calls += 1;
        let report = match report {
            Ok(r) => r,
            Err(Error::OracleInconclusive { nodes }) => {
                diag.bnb_nodes += nodes;
                status = SolveStatus::Aborted;
                break;
            }
            Err(e) => return Err(e),
        };
        diag.bnb_nodes += report.nodes;
        match report.resolution {
            Resolution::Trivial => diag.trivial_resolved += 1,
            Resolution::Heuristic => diag.heuristic_resolved += 1,
            Resolution::Exact => diag.exact_resolved += 1,
        }
        match report.result {
            SeparationResult::Separated { vertex, .. } => {
                state.frank_wolfe_step(vertex.canonicalize(), samples);
                diag.global_steps += 1;
                record(&mut diag, &state, iteration, Phase::Global, seconds);
            }
            SeparationResult::NoSeparation { .. } => {
                state.phi /= 2.0;
                diag.halvings += 1;
                record(&mut diag, &state, iteration, Phase::Halve, seconds);
            }
        }
    }
    diag.iterations = iteration;

    Ok(SolveOutcome {
        model: state.to_model(samples),
        state,
        status,
        diagnostics: diag,
    })
}

fn record(diag: &mut Diagnostics, state: &SolverState, iteration: usize, phase: Phase, oracle_seconds: f64) {
    diag.phi_trajectory.push(state.phi);
    diag.objective_trajectory.push(state.objective);
    diag.trace.push(TraceRecord {
        iteration,
        phase,
        objective: state.objective,
        phi: state.phi,
        active_size: state.active.len(),
        oracle_seconds,
    });
}
