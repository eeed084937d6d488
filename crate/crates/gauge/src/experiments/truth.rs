use gauge_core::{AtomicModel, Error, Result, SampleSet, Shape, SignVertex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Normal};

/// Random convex combination of `terms` distinct sign vertices, `λ = 1`.
///
/// Vertices have i.i.d. uniform signs (canonicalized, duplicates resampled);
/// weights are normalized standard exponentials, i.e. uniform on the
/// simplex.
pub fn generate_truth(shape: &Shape, terms: usize, seed: u64) -> Result<AtomicModel> {
    if terms == 0 {
        return Err(Error::InvalidParameter("term count must be at least 1".into()));
    }
    let free = shape.rho() - shape.order() + 1;
    if free < 64 && (terms as u64) > (1u64 << free) {
        return Err(Error::InvalidParameter(format!(
            "shape {shape} has only {} distinct sign vertices",
            1u64 << free
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vertices: Vec<SignVertex> = Vec::with_capacity(terms);
    while vertices.len() < terms {
        let signs = shape
            .dims()
            .iter()
            .map(|&r| (0..r).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect())
            .collect();
        let v = SignVertex::new(shape, signs)?.canonicalize();
        if !vertices.contains(&v) {
            vertices.push(v);
        }
    }
    let raw: Vec<f64> = (0..terms).map(|_| Exp1.sample(&mut rng)).collect();
    let total: f64 = raw.iter().sum();
    let model_terms = raw.into_iter().map(|w| w / total).zip(vertices).collect();
    AtomicModel::new(shape.clone(), 1.0, model_terms)
}

/// `n` observations at i.i.d. uniform indices (with replacement), each equal
/// to the model entry plus `N(0, noise_std²)` noise.
pub fn sample_observations(truth: &AtomicModel, n: usize, noise_std: f64, seed: u64) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(noise_std.is_finite() && noise_std >= 0.0) {
        return Err(Error::InvalidParameter(format!("noise std must be >= 0, got {noise_std}")));
    }
    let shape = truth.shape();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_std).expect("validated std");
    let rows: Vec<(Vec<usize>, f64)> = (0..n)
        .map(|_| {
            let coords: Vec<usize> = shape.dims().iter().map(|&r| rng.random_range(0..r)).collect();
            let clean = truth.entry(&shape.index(&coords).expect("in range"));
            let y = if noise_std > 0.0 { clean + noise.sample(&mut rng) } else { clean };
            (coords, y)
        })
        .collect();
    SampleSet::ingest(shape.clone(), rows)
}

/// `‖e − t‖²_F / ‖t‖²_F` from factored inner products.
pub fn nmse(estimate: &AtomicModel, truth: &AtomicModel) -> Result<f64> {
    let tt = truth.norm_sq();
    if tt == 0.0 {
        return Err(Error::InvalidParameter("truth is identically zero".into()));
    }
    let ee = estimate.norm_sq();
    let et = estimate.inner_product(truth)?;
    Ok(((ee - 2.0 * et + tt) / tt).max(0.0))
}

/// The constant tensor equal to the mean observation.
pub fn naive_model(samples: &SampleSet) -> AtomicModel {
    let mean = samples.overall_mean();
    let shape = samples.shape().clone();
    let ones = SignVertex::ones(&shape);
    let v = if mean < 0.0 { ones.negated() } else { ones };
    AtomicModel::new(shape, mean.abs(), vec![(1.0, v)]).expect("single unit term")
}

/// A scaled rank-1 tensor with real factors, for inner products between
/// models of different kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank1 {
    pub scale: f64,
    pub factors: Vec<Vec<f64>>,
}

impl Rank1 {
    pub fn from_model(model: &AtomicModel) -> Vec<Rank1> {
        model
            .terms()
            .iter()
            .map(|(w, v)| Rank1 {
                scale: model.lambda() * w,
                factors: v.signs().iter().map(|s| s.iter().map(|&x| x as f64).collect()).collect(),
            })
            .collect()
    }

    /// `Σ_i Σ_j s_i s_j Π_k ⟨u_ik, w_jk⟩`.
    pub fn inner(a: &[Rank1], b: &[Rank1]) -> f64 {
        let mut acc = 0.0;
        for u in a {
            for w in b {
                let prod: f64 = u
                    .factors
                    .iter()
                    .zip(&w.factors)
                    .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
                    .product();
                acc += u.scale * w.scale * prod;
            }
        }
        acc
    }

    /// NMSE of an arbitrary sum of rank-1 terms against `truth`.
    pub fn nmse(estimate: &[Rank1], truth: &AtomicModel) -> Result<f64> {
        let t = Rank1::from_model(truth);
        let tt = Rank1::inner(&t, &t);
        if tt == 0.0 {
            return Err(Error::InvalidParameter("truth is identically zero".into()));
        }
        let ee = Rank1::inner(estimate, estimate);
        let et = Rank1::inner(estimate, &t);
        Ok(((ee - 2.0 * et + tt) / tt).max(0.0))
    }
}
