use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::samples::SampleSet;

/// Mean squared error of `psi` (aligned with `samples.unique()`), computed
/// from the per-index aggregates:
/// `(1/n)[Σ_x m_x (ψ_x − ybar_x)² + Σ_i (y_i − ybar_{x_i})²]`.
pub fn objective(psi: &[f64], samples: &SampleSet) -> f64 {
    let fit: f64 = psi
        .iter()
        .zip(samples.means())
        .zip(samples.multiplicities())
        .map(|((p, y), &m)| m as f64 * (p - y) * (p - y))
        .sum();
    (fit + samples.within_index_ss()) / samples.n() as f64
}

/// `g_x = (2/n) m_x (ψ_x − ybar_x)`; zero off the observed indices.
pub fn gradient(psi: &[f64], samples: &SampleSet) -> Vec<f64> {
    let scale = 2.0 / samples.n() as f64;
    psi.iter()
        .zip(samples.means())
        .zip(samples.multiplicities())
        .map(|((p, y), &m)| scale * m as f64 * (p - y))
        .collect()
}

/// Exact minimizer of `objective(ψ + t d)` over `t ∈ [0, 1]`.
pub fn line_search(psi: &[f64], direction: &[f64], samples: &SampleSet) -> Result<f64> {
    let t = unconstrained_step(psi, direction, samples)?;
    Ok(t.clamp(0.0, 1.0))
}

/// `−Σ m_x (ψ_x − ybar_x) d_x / Σ m_x d_x²`.
pub(crate) fn unconstrained_step(psi: &[f64], direction: &[f64], samples: &SampleSet) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (((p, y), &m), d) in psi
        .iter()
        .zip(samples.means())
        .zip(samples.multiplicities())
        .zip(direction)
    {
        let m = m as f64;
        num += m * (p - y) * d;
        den += m * d * d;
    }
    if den == 0.0 {
        return Err(Error::InvalidParameter("line search direction vanishes on the observed indices".into()));
    }
    Ok(-num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::Shape;
    use alloc::vec;

    fn set(rows: Vec<(Vec<usize>, f64)>, dims: Vec<usize>) -> SampleSet {
        SampleSet::ingest(Shape::new(dims).unwrap(), rows).unwrap()
    }

    #[test]
    fn objective_examples() {
        let s = set(vec![(vec![0, 0], 1.0), (vec![1, 1], -0.5)], vec![2, 2]);
        assert_eq!(objective(s.means(), &s), 0.0);
        let one = set(vec![(vec![0, 1], 2.0)], vec![2, 2]);
        assert_eq!(objective(&[0.0], &one), 4.0);
        let dup = set(vec![(vec![0, 0], 1.0), (vec![0, 0], 3.0)], vec![2, 2]);
        assert_eq!(objective(&[2.0], &dup), 1.0);
    }

    #[test]
    fn gradient_examples() {
        let s = set(vec![(vec![0, 0], 1.0), (vec![1, 0], 3.0)], vec![2, 2]);
        assert!(gradient(s.means(), &s).iter().all(|&g| g == 0.0));
        let one = set(vec![(vec![0, 1], 2.0)], vec![2, 2]);
        assert_eq!(gradient(&[0.0], &one), vec![-4.0]);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut state = 12345u64;
        let mut unit = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..10 {
            let rows: Vec<(Vec<usize>, f64)> = (0..30)
                .map(|_| (vec![(unit() * 3.0) as usize, (unit() * 4.0) as usize], unit() * 4.0 - 2.0))
                .collect();
            let s = set(rows, vec![3, 4]);
            let psi: Vec<f64> = (0..s.unique().len()).map(|_| unit() * 2.0 - 1.0).collect();
            let g = gradient(&psi, &s);
            let h = 1e-6;
            for i in 0..psi.len() {
                let mut up = psi.clone();
                let mut dn = psi.clone();
                up[i] += h;
                dn[i] -= h;
                let fd = (objective(&up, &s) - objective(&dn, &s)) / (2.0 * h);
                assert!((fd - g[i]).abs() <= 1e-5 * g[i].abs().max(1e-3), "{fd} vs {}", g[i]);
            }
        }
    }

    #[test]
    fn line_search_examples() {
        let s = set(vec![(vec![0, 0], 1.0), (vec![1, 1], -3.0)], vec![2, 2]);
        let psi = [0.25, 0.5];
        let d: Vec<f64> = s.means().iter().zip(&psi).map(|(y, p)| y - p).collect();
        assert_eq!(line_search(&psi, &d, &s).unwrap(), 1.0);

        let one = set(vec![(vec![0, 0], 1.0)], vec![2, 2]);
        assert_eq!(line_search(&[0.0], &[2.0], &one).unwrap(), 0.5);
        assert_eq!(line_search(&[0.0], &[-2.0], &one).unwrap(), 0.0);
        assert!(line_search(&[0.0], &[0.0], &one).is_err());
    }

    #[test]
    fn line_search_is_exact_on_the_unit_interval() {
        let s = set(vec![(vec![0, 0], 1.0), (vec![0, 1], -2.0), (vec![0, 1], 0.5)], vec![1, 2]);
        let psi = [0.3, 0.9];
        for d in [[1.0, -1.0], [-0.2, 0.1], [3.0, 0.0], [0.5, -4.0]] {
            let t = line_search(&psi, &d, &s).unwrap();
            let at = |t: f64| objective(&[psi[0] + t * d[0], psi[1] + t * d[1]], &s);
            for k in 0..=100 {
                assert!(at(t) <= at(k as f64 / 100.0) + 1e-15);
            }
        }
    }
}
