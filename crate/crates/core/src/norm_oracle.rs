//! Exact gauge norm of small dense tensors.
//!
//! `‖ψ‖ = min Σ_v a_v  s.t.  Σ_v a_v v = ψ, a ≥ 0` over all canonical sign
//! vertices `v` (both signs of every tensor appear, since negating the first
//! mode keeps a vertex canonical). The linear program is solved with a dense
//! two-phase simplex. Computing the norm is NP-hard in general, so this is a
//! verification tool guarded to `ρ ≤ 16`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::shape::Shape;
use crate::vertex::canonical_vertices;

pub const MAX_RHO: usize = 16;

const PIVOT_TOL: f64 = 1e-11;

/// Exact gauge norm of the row-major dense tensor `psi`.
pub fn tiny_norm_oracle(psi: &[f64], shape: &Shape) -> Result<f64> {
    if shape.rho() > MAX_RHO {
        return Err(Error::NormOracleGuard { rho: shape.rho(), limit: MAX_RHO });
    }
    if psi.len() as u64 != shape.pi() {
        return Err(Error::ShapeMismatch);
    }
    if psi.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let indices: Vec<_> = shape.indices().collect();
    let columns: Vec<Vec<f64>> = canonical_vertices(shape)
        .map(|v| indices.iter().map(|x| v.entry(x) as f64).collect())
        .collect();
    let value = min_l1_representation(&columns, psi)
        .expect("sign vertices span the tensor space");
    Ok(value)
}

/// Solves `min 1ᵀa  s.t.  Σ_j a_j columns[j] = target, a ≥ 0`.
/// Returns `None` when the system is infeasible.
pub fn min_l1_representation(columns: &[Vec<f64>], target: &[f64]) -> Option<f64> {
    let m = target.len();
    let n = columns.len();
    let width = n + m + 1;
    let rhs = width - 1;

    let mut tab = vec![0.0f64; m * width];
    for i in 0..m {
        let sign = if target[i] < 0.0 { -1.0 } else { 1.0 };
        let row = &mut tab[i * width..(i + 1) * width];
        for (j, col) in columns.iter().enumerate() {
            row[j] = sign * col[i];
        }
        row[n + i] = 1.0;
        row[rhs] = sign * target[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut active_row = vec![true; m];

    // Phase 1: minimize the sum of artificials.
    let phase1: Vec<f64> = (0..n + m).map(|j| if j >= n { 1.0 } else { 0.0 }).collect();
    let obj = simplex(&mut tab, width, &mut basis, &active_row, &phase1, n + m)?;
    if obj > 1e-9 * (1.0 + target.iter().map(|v| v.abs()).sum::<f64>()) {
        return None;
    }
    // Drive zero-valued artificials out of the basis; drop redundant rows.
    for i in 0..m {
        if basis[i] < n {
            continue;
        }
        let row = &tab[i * width..(i + 1) * width];
        match (0..n).find(|&j| row[j].abs() > PIVOT_TOL) {
            Some(j) => {
                pivot(&mut tab, width, i, j, &active_row);
                basis[i] = j;
            }
            None => active_row[i] = false,
        }
    }

    // Phase 2 over structural columns only.
    let phase2: Vec<f64> = (0..n + m).map(|j| if j < n { 1.0 } else { f64::INFINITY }).collect();
    simplex(&mut tab, width, &mut basis, &active_row, &phase2, n)
}

fn pivot(tab: &mut [f64], width: usize, prow: usize, pcol: usize, active: &[bool]) {
    let m = tab.len() / width;
    let p = tab[prow * width + pcol];
    for v in &mut tab[prow * width..(prow + 1) * width] {
        *v /= p;
    }
    let pivot_row: Vec<f64> = tab[prow * width..(prow + 1) * width].to_vec();
    for i in 0..m {
        if i == prow || !active[i] {
            continue;
        }
        let f = tab[i * width + pcol];
        if f == 0.0 {
            continue;
        }
        let row = &mut tab[i * width..(i + 1) * width];
        for (v, &pv) in row.iter_mut().zip(&pivot_row) {
            *v -= f * pv;
        }
        row[pcol] = 0.0;
    }
}

/// Primal simplex on a tableau already in canonical form for `basis`.
/// Columns `>= allowed` never enter. Dantzig pricing, switching to Bland's
/// rule after a run of degenerate pivots.
fn simplex(
    tab: &mut [f64],
    width: usize,
    basis: &mut [usize],
    active: &[bool],
    cost: &[f64],
    allowed: usize,
) -> Option<f64> {
    let m = basis.len();
    let rhs = width - 1;
    let mut degenerate_run = 0usize;
    loop {
        // Reduced costs: c_j − c_Bᵀ B⁻¹ A_j.
        let mut entering = None;
        let mut best = -1e-10;
        for j in 0..allowed {
            if basis.contains(&j) {
                continue;
            }
            let mut rc = cost[j];
            for i in 0..m {
                if active[i] {
                    rc -= cost[basis[i]] * tab[i * width + j];
                }
            }
            if rc < best {
                entering = Some(j);
                if degenerate_run > 50 {
                    break;
                }
                best = rc;
            }
        }
        let Some(col) = entering else {
            let obj = (0..m)
                .filter(|&i| active[i])
                .map(|i| cost[basis[i]] * tab[i * width + rhs])
                .sum();
            return Some(obj);
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if !active[i] {
                continue;
            }
            let a = tab[i * width + col];
            if a > PIVOT_TOL {
                let ratio = tab[i * width + rhs] / a;
                let better = match leave {
                    None => true,
                    Some((li, lr)) => ratio < lr - 1e-15 || (ratio <= lr + 1e-15 && basis[i] < basis[li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (row, ratio) = leave?;
        degenerate_run = if ratio.abs() < 1e-15 { degenerate_run + 1 } else { 0 };
        pivot(tab, width, row, col, active);
        basis[row] = col;
    }
}
