use std::sync::Arc;

use entropy_ipp::{batch_regress, BeliefState, Dataset, InducingSet, KernelSpec, SquaredExponential, Variant};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..1.0f64, 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn recursive_filter_matches_batch_regression(
        xs in prop::collection::vec(point(), 1..15),
        seed_ys in prop::collection::vec(-2.0..2.0f64, 15),
        probes in prop::collection::vec(point(), 1..6),
        fic in any::<bool>(),
        noise in 0.02..0.3f64,
    ) {
        let variant = if fic { Variant::Fic } else { Variant::Sor };
        let base = SquaredExponential::new(2, 0.35, 1.3).unwrap();
        let z = Arc::new(InducingSet::interior_grid(base, &[(0.0, 1.0), (0.0, 1.0)], &[3, 3]).unwrap());
        let kernel = KernelSpec::approximate(variant, z.clone());
        let ys = seed_ys[..xs.len()].to_vec();

        let mut belief = BeliefState::new(z);
        for (x, y) in xs.iter().zip(&ys) {
            belief = belief.observe(x, *y, variant, noise).unwrap();
        }
        let post = batch_regress(&Dataset::new(xs.clone(), ys, noise).unwrap(), &kernel, true).unwrap();
        for p in &probes {
            let (mean, var) = belief.predict_field(p, p, variant).unwrap();
            prop_assert!((mean - post.mean(p).unwrap()).abs() < 1e-8, "mean {} vs {}", mean, post.mean(p).unwrap());
            prop_assert!((var - post.variance(p).unwrap()).abs() < 1e-8, "variance {} vs {}", var, post.variance(p).unwrap());
            prop_assert!((belief.field_mean(p) - mean).abs() < 1e-12);
        }
        prop_assert_eq!(belief.steps(), xs.len());
    }
}
