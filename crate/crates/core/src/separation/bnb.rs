//! Exact maximization of the separation gap by depth-first branch-and-bound
//! over sign assignments.
//!
//! Variables are branched mode by mode (coordinates within a mode by
//! descending `Σ|c|` mass, `+1` first). The last mode is never branched: once
//! every other mode is fixed, `S` separates over the last mode's coordinates
//! and is minimized in closed form.
//!
//! Node bound: with some signs fixed, group the terms by the coordinates they
//! still have unassigned. Each group contributes `(Σ c_x · fixed part) ·
//! (common unassigned product)`, so `S ≥ −Σ_groups |Σ c_x · fixed part|`.
//! This is never weaker than charging `−|c_x|` per open term, and it is exact
//! at the completion step.
//!
//! Whole-mode sign symmetry is broken by fixing the first branched
//! coordinate of every mode except the last to `+1`; the last mode absorbs
//! the compensating flip. Returned vertices are canonicalized.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::{separation_gap, SeparationRequest, Terms};
use crate::vertex::SignVertex;

#[derive(Debug, Clone, PartialEq)]
pub struct BnbOptions {
    /// Stop as soon as the incumbent gap reaches this value.
    /// `f64::INFINITY` runs to exhaustion.
    pub target: f64,
    pub node_budget: Option<u64>,
    /// Prune nodes whose gap bound is at most this value and fold their
    /// bound into the reported dual bound. `None` keeps the search exact.
    pub prune_floor: Option<f64>,
}

impl BnbOptions {
    /// Full search for the exact optimum.
    pub fn exhaustive() -> Self {
        BnbOptions { target: f64::INFINITY, node_budget: None, prune_floor: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BnbStatus {
    /// Search finished; `dual_bound` is valid and, without a prune floor,
    /// equals `gap`.
    Exhausted,
    /// Stopped early with `gap >= target`.
    TargetReached,
    /// Node budget ran out before either of the above. Inconclusive.
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnbOutcome {
    pub vertex: SignVertex,
    /// Exact gap of `vertex` (via [`separation_gap`]).
    pub gap: f64,
    /// Upper bound on every vertex's gap.
    pub dual_bound: f64,
    pub status: BnbStatus,
    pub nodes: u64,
}

/// Maximizes `⟨c, ψ⟩ − λ S(θ)` over all sign assignments.
pub fn exact_branch_and_bound(
    req: &SeparationRequest,
    opts: &BnbOptions,
    warm_start: Option<&SignVertex>,
) -> BnbOutcome {
    let terms = req.terms();
    let root_bound = req.trivial_bound();
    let mut search = Search::new(terms, req.lambda(), opts);

    // Without a warm start the all-ones vertex seeds the incumbent.
    let ones = SignVertex::ones(req.shape());
    {
        let v = warm_start.unwrap_or(&ones);
        let g = separation_gap(req, v);
        search.best = Some((g, terms.flat_from_vertex(v)));
        if g >= opts.target {
            return BnbOutcome {
                vertex: v.canonicalize(),
                gap: g,
                dual_bound: root_bound,
                status: BnbStatus::TargetReached,
                nodes: 0,
            };
        }
    }

    search.visit(0);

    let status = search.stop.unwrap_or(BnbStatus::Exhausted);
    let (gap, signs) = search.best.take().expect("incumbent is seeded before the search");
    let vertex = terms.vertex_from_flat(&signs).canonicalize();
    let dual_bound = match status {
        BnbStatus::Exhausted => gap.max(search.pruned_max),
        _ => root_bound,
    };
    BnbOutcome { vertex, gap, dual_bound, status, nodes: search.nodes }
}

struct Search<'a> {
    terms: &'a Terms,
    lambda: f64,
    target: f64,
    budget: Option<u64>,
    floor: Option<f64>,
    margin: f64,
    last: usize,
    /// (variable, forced to +1)
    branch: Vec<(usize, bool)>,
    var_mode: Vec<usize>,
    /// Group of each term at each level (level = number of leading modes
    /// assigned for that term).
    gid: Vec<Vec<u32>>,
    gsum: Vec<Vec<f64>>,
    gcount: Vec<Vec<u32>>,
    partial: Vec<i8>,
    signs: Vec<i8>,
    abs_total: f64,
    undo: Vec<(u32, u32, f64, u32)>,
    best: Option<(f64, Vec<i8>)>,
    pruned_max: f64,
    nodes: u64,
    stop: Option<BnbStatus>,
}

impl<'a> Search<'a> {
    fn new(terms: &'a Terms, lambda: f64, opts: &BnbOptions) -> Self {
        let p = terms.order;
        let last = p - 1;
        let n_terms = terms.len();

        let mut var_mode = vec![0; terms.n_vars()];
        for k in 0..p {
            for j in 0..terms.dims[k] {
                var_mode[terms.offset[k] + j] = k;
            }
        }

        let mut branch = Vec::new();
        for k in 0..last {
            let mut vars: Vec<usize> = (0..terms.dims[k])
                .map(|j| terms.offset[k] + j)
                .filter(|&v| !terms.incidence[v].is_empty())
                .collect();
            vars.sort_by(|&a, &b| terms.mass[b].total_cmp(&terms.mass[a]).then(a.cmp(&b)));
            branch.extend(vars.into_iter().enumerate().map(|(i, v)| (v, i == 0)));
        }

        let mut gid = Vec::with_capacity(p);
        let mut gsum = Vec::with_capacity(p);
        let mut gcount = Vec::with_capacity(p);
        for level in 0..p {
            let (ids, n_groups) = if level == last {
                let ids: Vec<u32> = (0..n_terms).map(|t| terms.term_coords(t)[last]).collect();
                (ids, terms.dims[last])
            } else {
                let mut map: BTreeMap<&[u32], u32> = BTreeMap::new();
                let ids: Vec<u32> = (0..n_terms)
                    .map(|t| {
                        let key = &terms.term_coords(t)[level..];
                        let next = map.len() as u32;
                        *map.entry(key).or_insert(next)
                    })
                    .collect();
                (ids, map.len())
            };
            gid.push(ids);
            gsum.push(vec![0.0; n_groups]);
            gcount.push(vec![0u32; n_groups]);
        }
        let mut abs_total = 0.0;
        for t in 0..n_terms {
            let g = gid[0][t] as usize;
            gsum[0][g] += terms.coef[t];
            gcount[0][g] += 1;
        }
        for s in &gsum[0] {
            abs_total += f64::abs(*s);
        }

        let scale = terms.inner.abs() + lambda * terms.abs_mass();
        Search {
            terms,
            lambda,
            target: opts.target,
            budget: opts.node_budget,
            floor: opts.prune_floor,
            margin: 1e-11 * scale + f64::MIN_POSITIVE,
            last,
            branch,
            var_mode,
            gid,
            gsum,
            gcount,
            partial: vec![1; n_terms],
            signs: vec![1; terms.n_vars()],
            abs_total,
            undo: Vec::new(),
            best: None,
            pruned_max: f64::NEG_INFINITY,
            nodes: 0,
            stop: None,
        }
    }

    fn best_gap(&self) -> f64 {
        self.best.as_ref().map_or(f64::NEG_INFINITY, |b| b.0)
    }

    fn visit(&mut self, pos: usize) {
        let bound = self.terms.inner + self.lambda * self.abs_total;
        if bound < self.best_gap() - self.margin {
            return;
        }
        if let Some(floor) = self.floor {
            if bound + self.margin <= floor {
                self.pruned_max = self.pruned_max.max(bound + self.margin);
                return;
            }
        }
        if pos == self.branch.len() {
            self.complete();
            return;
        }
        let (var, forced) = self.branch[pos];
        let choices: &[i8] = if forced { &[1] } else { &[1, -1] };
        for &s in choices {
            self.nodes += 1;
            if self.budget.is_some_and(|b| self.nodes > b) {
                self.stop = Some(BnbStatus::BudgetExhausted);
                return;
            }
            let mark = self.undo.len();
            let saved_abs = self.abs_total;
            self.assign(var, s);
            self.visit(pos + 1);
            self.unassign(var, s, mark, saved_abs);
            if self.stop.is_some() {
                return;
            }
        }
    }

    fn update_group(&mut self, level: usize, t: usize, delta: f64, count_delta: i32) {
        let g = self.gid[level][t] as usize;
        let old = self.gsum[level][g];
        let count = self.gcount[level][g];
        self.undo.push((level as u32, g as u32, old, count));
        let count = (count as i32 + count_delta) as u32;
        let new = if count == 0 { 0.0 } else { old + delta };
        self.gsum[level][g] = new;
        self.gcount[level][g] = count;
        self.abs_total += new.abs() - old.abs();
    }

    fn assign(&mut self, var: usize, s: i8) {
        let level = self.var_mode[var];
        self.signs[var] = s;
        let terms = self.terms;
        for &t in &terms.incidence[var] {
            let t = t as usize;
            let before = terms.coef[t] * self.partial[t] as f64;
            self.update_group(level, t, -before, -1);
            self.partial[t] *= s;
            self.update_group(level + 1, t, before * s as f64, 1);
        }
    }

    fn unassign(&mut self, var: usize, s: i8, mark: usize, saved_abs: f64) {
        while self.undo.len() > mark {
            let (level, g, old, count) = self.undo.pop().unwrap();
            self.gsum[level as usize][g as usize] = old;
            self.gcount[level as usize][g as usize] = count;
        }
        for &t in &self.terms.incidence[var] {
            self.partial[t as usize] *= s;
        }
        self.abs_total = saved_abs;
        self.signs[var] = 1;
    }

    /// Every mode but the last is fixed: choose each last-mode sign against
    /// its group sum.
    fn complete(&mut self) {
        let last_sums = &self.gsum[self.last];
        let candidate = self.terms.inner + self.lambda * last_sums.iter().map(|s| s.abs()).sum::<f64>();
        if candidate < self.best_gap() - self.margin {
            return;
        }
        let off = self.terms.offset[self.last];
        let mut signs = self.signs.clone();
        for (j, &s) in last_sums.iter().enumerate() {
            signs[off + j] = if s > 0.0 { -1 } else { 1 };
        }
        let gap = self.terms.inner - self.lambda * self.terms.s_value_flat(&signs);
        if self.best.as_ref().is_none_or(|b| gap > b.0) {
            self.best = Some((gap, signs));
            if gap >= self.target {
                self.stop = Some(BnbStatus::TargetReached);
            }
        }
    }
}
