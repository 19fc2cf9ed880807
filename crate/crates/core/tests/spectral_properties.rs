mod common;

use common::{instance, pair};
use gibbs_ineq::scalar::C;
use gibbs_ineq::spectral::{decompose, gibbs_weights, max_abs, HermitianOperator};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decompose_reconstructs((dim, seed, beta) in instance()) {
        let p = pair(dim, seed);
        let ens = decompose(&p.t, beta).unwrap();
        let err = max_abs(&(ens.reconstruct() - p.t.matrix()));
        prop_assert!(err <= 1e-10 * max_abs(p.t.matrix()).max(1.0));
        prop_assert!(ens.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn weights_exactly_shift_invariant(
        (dim, seed, beta) in instance(),
        shift in prop::sample::select(vec![-8.0, -0.5, 0.25, 3.0, 1024.0]),
    ) {
        // on a 2^-20 grid every shift below is exact, so differences are preserved
        let e: Vec<f64> = pair(dim, seed)
            .t
            .eigenvalues()
            .unwrap()
            .iter()
            .map(|x| (x * 1_048_576.0).round() / 1_048_576.0)
            .collect();
        let moved: Vec<f64> = e.iter().map(|x| x + shift).collect();
        let a = gibbs_weights(&e, beta).unwrap();
        let b = gibbs_weights(&moved, beta).unwrap();
        prop_assert_eq!(&a, &b);
        let total: f64 = a.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ensemble_is_overflow_safe((dim, seed, _b) in instance(), beta in 100.0f64..1000.0) {
        let ens = decompose(&pair(dim, seed).t, beta).unwrap();
        prop_assert!(ens.weights().iter().all(|w| w.is_finite() && *w >= 0.0));
        prop_assert!(ens.log_partition().is_finite());
        prop_assert!(ens.weights()[0] > 0.0);
    }
}

#[test]
fn f32_ensemble_matches_f64() {
    let p64 = pair(4, 9);
    let t32 =
        HermitianOperator::<f32>::new(p64.t.matrix().map(|z| C::new(z.re as f32, z.im as f32)))
            .unwrap();
    let w64 = decompose(&p64.t, 1.0).unwrap().weights().to_vec();
    let w32 = decompose(&t32, 1.0f32).unwrap().weights().to_vec();
    for (a, b) in w64.iter().zip(&w32) {
        assert!((a - *b as f64).abs() < 1e-5);
    }
}
