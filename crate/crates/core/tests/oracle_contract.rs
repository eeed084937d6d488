use gauge_core::separation::{
    exact_branch_and_bound, separation_gap, weak_separation_oracle, BnbOptions, CertificateMode, OracleConfig,
    SeparationRequest, SeparationResult,
};
use gauge_core::vertex::canonical_vertices;
use gauge_core::{EntryIndex, Shape};
use proptest::prelude::*;

fn shapes() -> impl Strategy<Value = Vec<usize>> {
    prop_oneof![
        Just(vec![4]),
        Just(vec![3, 3]),
        Just(vec![2, 3]),
        Just(vec![2, 2, 2]),
        Just(vec![3, 2, 2]),
        Just(vec![2, 2, 2, 2]),
    ]
}

/// Shape plus per-entry (keep, c, ψ).
fn instances() -> impl Strategy<Value = (Vec<usize>, Vec<(bool, f64, f64)>)> {
    shapes().prop_flat_map(|dims| {
        let pi: usize = dims.iter().product();
        (Just(dims), prop::collection::vec((any::<bool>(), -3.0..3.0f64, -1.0..1.0f64), pi))
    })
}

fn build(dims: &[usize], cells: &[(bool, f64, f64)], phi: f64, k: f64) -> Option<SeparationRequest> {
    let shape = Shape::new(dims.to_vec()).unwrap();
    let entries: Vec<(EntryIndex, f64, f64)> = shape
        .indices()
        .zip(cells)
        .filter(|(_, c)| c.0)
        .map(|(x, c)| (x, c.1, c.2))
        .collect();
    if entries.is_empty() {
        return None;
    }
    Some(SeparationRequest::from_entries(shape, 1.25, entries, phi, k).unwrap())
}

fn brute_max(req: &SeparationRequest) -> f64 {
    canonical_vertices(req.shape())
        .flat_map(|v| [separation_gap(req, &v), separation_gap(req, &v.negated())])
        .fold(f64::NEG_INFINITY, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn oracle_answers_are_valid((dims, cells) in instances(), phi in 0.01..20.0f64, k in 1.0..4.0f64, threshold in any::<bool>()) {
        let Some(req) = build(&dims, &cells, phi, k) else { return Ok(()) };
        let cfg = OracleConfig {
            certificate: if threshold { CertificateMode::Threshold } else { CertificateMode::Optimum },
            ..OracleConfig::default()
        };
        let best = brute_max(&req);
        match weak_separation_oracle(&req, &cfg, None).unwrap().result {
            SeparationResult::Separated { vertex, gap } => {
                prop_assert_eq!(gap, separation_gap(&req, &vertex));
                prop_assert!(gap >= phi / k);
            }
            SeparationResult::NoSeparation { certified_bound } => {
                prop_assert!(certified_bound <= phi);
                prop_assert!(certified_bound >= best - 1e-12 * (1.0 + best.abs()));
                // The exact optimum is only required below Φ/K when the search
                // runs to optimality; threshold pruning may stop anywhere ≤ Φ.
                if !threshold {
                    prop_assert!(best < phi / k);
                }
            }
        }
    }

    #[test]
    fn negating_c_mirrors_the_optimum((dims, cells) in instances()) {
        // With ψ = 0 the gap is −λ S(θ), so max over c and max over −c
        // are the negated minimum and maximum of S.
        let cells: Vec<(bool, f64, f64)> = cells.iter().map(|c| (c.0, c.1, 0.0)).collect();
        let flipped: Vec<(bool, f64, f64)> = cells.iter().map(|c| (c.0, -c.1, 0.0)).collect();
        let (Some(a), Some(b)) = (build(&dims, &cells, 1.0, 1.0), build(&dims, &flipped, 1.0, 1.0)) else { return Ok(()) };
        let max_a = exact_branch_and_bound(&a, &BnbOptions::exhaustive(), None);
        let max_b = exact_branch_and_bound(&b, &BnbOptions::exhaustive(), None);
        let s_min = -max_a.gap / 1.25;
        let s_max = max_b.gap / 1.25;
        let all: Vec<f64> = canonical_vertices(a.shape())
            .flat_map(|v| [v.clone(), v.negated()])
            .map(|v| -separation_gap(&a, &v) / 1.25)
            .collect();
        let lo = all.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = all.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((s_min - lo).abs() <= 1e-12 * (1.0 + lo.abs()));
        prop_assert!((s_max - hi).abs() <= 1e-12 * (1.0 + hi.abs()));
        // Under c the maximizer of S is the negated minimizer under −c.
        prop_assert!((separation_gap(&a, &max_b.vertex.negated()) - max_b.gap).abs() <= 1e-12 * (1.0 + max_b.gap.abs()));
    }
}
