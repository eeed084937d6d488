use gauge_core::{EntryIndex, Error, Result, SampleSet, Shape};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::Rank1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlsConfig {
    pub rank: usize,
    pub l2_reg: f64,
    /// Full cycles over the modes.
    pub iterations: usize,
}

impl Default for AlsConfig {
    fn default() -> Self {
        AlsConfig { rank: 10, l2_reg: 1e-3, iterations: 100 }
    }
}

/// CP factors, one `r_k × rank` matrix per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct CpModel {
    shape: Shape,
    factors: Vec<DMatrix<f64>>,
}

impl CpModel {
    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.factors[0].ncols()
    }

    pub fn factors(&self) -> &[DMatrix<f64>] {
        &self.factors
    }

    pub fn entry(&self, x: &EntryIndex) -> f64 {
        self.entry_at(x.coords())
    }

    fn entry_at(&self, coords: &[usize]) -> f64 {
        (0..self.rank())
            .map(|r| coords.iter().zip(&self.factors).map(|(&i, f)| f[(i, r)]).product::<f64>())
            .sum()
    }

    pub fn to_rank1(&self) -> Vec<Rank1> {
        (0..self.rank())
            .map(|r| Rank1 { scale: 1.0, factors: self.factors.iter().map(|f| f.column(r).iter().copied().collect()).collect() })
            .collect()
    }

    /// `Σ_rows (y − ŷ)² + l2_reg · Σ_k ‖A_k‖²_F`.
    pub fn objective(&self, samples: &SampleSet, l2_reg: f64) -> f64 {
        let fit: f64 = samples
            .unique()
            .iter()
            .zip(samples.means())
            .zip(samples.multiplicities())
            .map(|((x, &y), &m)| {
                let r = y - self.entry(x);
                m as f64 * r * r
            })
            .sum();
        let reg: f64 = self.factors.iter().map(|f| f.norm_squared()).sum();
        fit + samples.within_index_ss() + l2_reg * reg
    }
}

/// Ridge-regularized alternating least squares over the observed entries.
///
/// Each mode update solves one `rank × rank` system per factor row, which is
/// the exact minimizer of the objective in that row, so the objective never
/// increases.
pub fn als_baseline(samples: &SampleSet, cfg: &AlsConfig, seed: u64) -> Result<CpModel> {
    als_observed(samples, cfg, seed, |_| {})
}

pub(crate) fn als_observed(
    samples: &SampleSet,
    cfg: &AlsConfig,
    seed: u64,
    mut after_cycle: impl FnMut(&CpModel),
) -> Result<CpModel> {
    if cfg.rank == 0 {
        return Err(Error::InvalidParameter("ALS rank must be at least 1".into()));
    }
    if !(cfg.l2_reg.is_finite() && cfg.l2_reg > 0.0) {
        return Err(Error::InvalidParameter(format!("ALS l2_reg must be > 0, got {}", cfg.l2_reg)));
    }
    let shape = samples.shape().clone();
    let rank = cfg.rank;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (rank as f64).sqrt();
    let factors = shape
        .dims()
        .iter()
        .map(|&r| {
            DMatrix::from_fn(r, rank, |_, _| {
                let g: f64 = StandardNormal.sample(&mut rng);
                g * scale
            })
        })
        .collect();
    let mut model = CpModel { shape: shape.clone(), factors };

    // Unique-entry positions grouped by coordinate, per mode.
    let groups: Vec<Vec<Vec<usize>>> = (0..shape.order())
        .map(|k| {
            let mut g = vec![Vec::new(); shape.dims()[k]];
            for (u, x) in samples.unique().iter().enumerate() {
                g[x.coords()[k]].push(u);
            }
            g
        })
        .collect();

    let mut z = DVector::<f64>::zeros(rank);
    for _ in 0..cfg.iterations {
        for k in 0..shape.order() {
            for (row, members) in groups[k].iter().enumerate() {
                let mut gram = DMatrix::<f64>::identity(rank, rank) * cfg.l2_reg;
                let mut rhs = DVector::<f64>::zeros(rank);
                for &u in members {
                    let x = samples.unique()[u].coords();
                    for r in 0..rank {
                        z[r] = (0..shape.order())
                            .filter(|&j| j != k)
                            .map(|j| model.factors[j][(x[j], r)])
                            .product();
                    }
                    let m = samples.multiplicities()[u] as f64;
                    gram.ger(m, &z, &z, 1.0);
                    rhs.axpy(m * samples.means()[u], &z, 1.0);
                }
                let sol = gram
                    .cholesky()
                    .ok_or_else(|| Error::InvalidParameter("ALS subproblem not positive definite".into()))?
                    .solve(&rhs);
                model.factors[k].row_mut(row).copy_from(&sol.transpose());
            }
        }
        after_cycle(&model);
    }
    Ok(model)
}
