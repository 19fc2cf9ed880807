use gibbs_ineq::fidelity::fidelity_report;
use gibbs_ineq::inequalities::{evaluate_grid, ParamGrid};
use gibbs_ineq::models::{
    catalogue, dicke_truncated, ising_chain, random_pair, single_spin, ModelPair, ModelSpec,
    MAX_DICKE_BOSONS, MAX_DICKE_SPINS, MAX_ISING_SITES, MAX_RANDOM_DIM,
};
use gibbs_ineq::spectral::{decompose, max_abs, CMatrix};
use proptest::prelude::*;

fn defect(m: &CMatrix<f64>) -> f64 {
    max_abs(&(m - m.adjoint()))
}

fn assert_valid(p: &ModelPair<f64>, dim: usize) {
    for op in [&p.t, &p.s] {
        assert_eq!(op.matrix().nrows(), dim);
        assert_eq!(op.matrix().ncols(), dim);
        assert!(defect(op.matrix()) == 0.0);
        assert!(op
            .matrix()
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite()));
    }
}

fn spec_strategy() -> impl Strategy<Value = ModelSpec> {
    prop_oneof![
        (0.01f64..10.0).prop_map(|delta| ModelSpec::SingleSpin { delta }),
        (2usize..=6, -2.0f64..2.0, -2.0f64..2.0).prop_map(|(n_sites, coupling, field)| {
            ModelSpec::IsingChain {
                n_sites,
                coupling,
                field,
            }
        }),
        (
            1usize..=6,
            1usize..=3,
            0.1f64..2.0,
            0.1f64..2.0,
            -1.0f64..1.0
        )
            .prop_map(|(n_max, n_spins, omega, omega0, lambda)| ModelSpec::Dicke {
                n_max,
                n_spins,
                omega,
                omega0,
                lambda,
            }),
        (2usize..=16).prop_map(|dim| ModelSpec::Random { dim }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn factories_build_hermitian_pairs_of_declared_dim(spec in spec_strategy(), seed in any::<u64>()) {
        let p = spec.build::<f64>(seed, 3).unwrap();
        assert_valid(&p, spec.dim());
    }

    #[test]
    fn builds_are_bit_identical(spec in spec_strategy(), seed in any::<u64>(), index in any::<u64>()) {
        let a = spec.build::<f64>(seed, index).unwrap();
        let b = spec.build::<f64>(seed, index).unwrap();
        prop_assert_eq!(a.t.matrix(), b.t.matrix());
        prop_assert_eq!(a.s.matrix(), b.s.matrix());
    }

    #[test]
    fn random_indices_are_independent_streams(dim in 2usize..=8, seed in any::<u64>(), index in 0u64..1000) {
        let a = random_pair::<f64>(dim, seed, index).unwrap();
        let b = random_pair::<f64>(dim, seed, index + 1).unwrap();
        prop_assert_ne!(a.t.matrix(), b.t.matrix());
        prop_assert_ne!(a.t.matrix(), a.s.matrix());
    }

    #[test]
    fn nonrandom_models_ignore_seed(spec in spec_strategy(), s1 in any::<u64>(), s2 in any::<u64>()) {
        prop_assume!(!spec.is_random());
        let a = spec.build::<f64>(s1, 0).unwrap();
        let b = spec.build::<f64>(s2, 7).unwrap();
        prop_assert_eq!(a.t.matrix(), b.t.matrix());
        prop_assert_eq!(a.s.matrix(), b.s.matrix());
    }
}

#[test]
fn single_spin_has_split_levels_and_involutive_perturbation() {
    let p = single_spin(2.0f64).unwrap();
    let e = p.t.eigenvalues().unwrap();
    assert!((e[0] + 1.0).abs() < 1e-15 && (e[1] - 1.0).abs() < 1e-15);
    let sq = p.s.matrix() * p.s.matrix();
    assert!(max_abs(&(sq - CMatrix::identity(2, 2))) == 0.0);
    let r = fidelity_report(&p.t, &p.s, 1.0, 0.0).unwrap();
    let exact = 1f64.tanh().powi(2) / 4.0;
    assert!((r.chi() - exact).abs() < 1e-12);
    assert!((r.chi() - 0.145006).abs() < 1e-6);
}

#[test]
fn ising_chain_without_couplings_is_zero() {
    let p = ising_chain(2, 0.0f64, 0.0).unwrap();
    assert_valid(&p, 4);
    assert_eq!(max_abs(p.t.matrix()), 0.0);
    // S = (σ_x¹ + σ_x²)/2 has spectrum {−1, 0, 0, 1}
    let e = p.s.eigenvalues().unwrap();
    for (a, b) in e.iter().zip([-1.0, 0.0, 0.0, 1.0]) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn ising_chain_passes_every_check() {
    let p = ising_chain(4, 1.0f64, 1.0).unwrap();
    for beta in [0.5, 1.0, 2.0] {
        let ens = decompose(&p.t, beta).unwrap();
        let sb = ens.to_eigenbasis(p.s.matrix()).unwrap();
        for r in evaluate_grid(&sb, &ens, &ParamGrid::default(), 1e-10).unwrap() {
            assert!(r.pass, "{r:?}");
        }
        assert!(fidelity_report(&p.t, &p.s, beta, 0.0)
            .unwrap()
            .sandwich_holds(1e-10)
            .unwrap());
    }
}

#[test]
fn dicke_energy_is_coupling_independent() {
    let a = dicke_truncated(1, 1, 1.0f64, 1.0, 0.3).unwrap();
    let b = dicke_truncated(1, 1, 1.0f64, 1.0, 2.0).unwrap();
    assert_valid(&a, 4);
    assert_eq!(a.t.matrix(), b.t.matrix());
    let p = dicke_truncated(6, 2, 1.0f64, 1.0, 0.5).unwrap();
    for beta in [0.5, 1.0, 2.0] {
        assert!(fidelity_report(&p.t, &p.s, beta, 0.0)
            .unwrap()
            .sandwich_holds(1e-10)
            .unwrap());
    }
}

#[test]
fn random_draws_at_dim_eight_are_finite() {
    for index in 0..1000 {
        let p = random_pair::<f64>(8, 99, index).unwrap();
        let e = p.t.eigenvalues().unwrap();
        assert!(e.iter().all(|x| x.is_finite()));
    }
}

#[test]
fn size_caps_are_enforced() {
    assert!(single_spin(0.0f64).is_err());
    assert!(single_spin(-1.0f64).is_err());
    assert!(single_spin(f64::NAN).is_err());
    assert!(ising_chain(1, 1.0f64, 1.0).is_err());
    assert!(ising_chain(MAX_ISING_SITES + 1, 1.0f64, 1.0).is_err());
    assert!(dicke_truncated(0, 1, 1.0f64, 1.0, 1.0).is_err());
    assert!(dicke_truncated(MAX_DICKE_BOSONS + 1, 1, 1.0f64, 1.0, 1.0).is_err());
    assert!(dicke_truncated(1, 0, 1.0f64, 1.0, 1.0).is_err());
    assert!(dicke_truncated(1, MAX_DICKE_SPINS + 1, 1.0f64, 1.0, 1.0).is_err());
    assert!(random_pair::<f64>(1, 0, 0).is_err());
    assert!(random_pair::<f64>(MAX_RANDOM_DIM + 1, 0, 0).is_err());
    assert!(random_pair::<f64>(MAX_RANDOM_DIM, 0, 0).is_ok());
}

#[test]
fn catalogue_builds_in_both_precisions() {
    for spec in catalogue() {
        let p = spec.build::<f64>(1, 0).unwrap();
        assert_valid(&p, spec.dim());
        let q = spec.build::<f32>(1, 0).unwrap();
        assert_eq!(q.t.matrix().nrows(), spec.dim());
        assert!(!spec.convention().is_empty());
    }
}
