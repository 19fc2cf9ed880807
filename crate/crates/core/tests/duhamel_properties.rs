mod common;

use common::{commuting_partner, complex_matrix, ensemble, in_basis, instance, pair, rel};
use gibbs_ineq::duhamel::{
    bd_inner, bd_inner_quadrature, coth_identity, fluctuation, functional_even, functional_odd,
    susceptibility_fd, MAX_FUNCTIONAL_ORDER,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn inner_product_axioms((dim, seed, beta) in instance()) {
        let p = pair(dim, seed);
        let ens = ensemble(&p.t, beta);
        let a = in_basis(&ens, &complex_matrix(dim, seed));
        let b = in_basis(&ens, p.s.matrix());
        let aa = bd_inner(&a, &a, &ens).unwrap();
        prop_assert!(aa.re >= 0.0);
        prop_assert!(aa.im.abs() <= 1e-14 * aa.re.max(1.0));
        let ab = bd_inner(&a, &b, &ens).unwrap();
        let ba = bd_inner(&b, &a, &ens).unwrap();
        prop_assert!((ab - ba.conj()).norm() <= 1e-13 * ab.norm().max(1e-300));
    }

    #[test]
    fn quadrature_route_agrees((dim, seed, beta) in instance()) {
        let p = pair(dim, seed);
        let ens = ensemble(&p.t, beta);
        let j = complex_matrix(dim, seed);
        let jb = in_basis(&ens, &j);
        let spectral = bd_inner(&jb, &jb, &ens).unwrap().re;
        let quad = bd_inner_quadrature(&j, &j, &p.t, beta, 64).unwrap().re;
        prop_assert!(rel(spectral, quad) <= 1e-10, "{spectral} vs {quad}");
    }

    #[test]
    fn functional_routes_agree((dim, seed, beta) in instance(), hermitian in any::<bool>()) {
        let p = pair(dim, seed);
        let ens = ensemble(&p.t, beta);
        let j = if hermitian { p.s.matrix().clone() } else { complex_matrix(dim, seed) };
        let jb = in_basis(&ens, &j);
        for n in 0..=MAX_FUNCTIONAL_ORDER {
            for v in [functional_even(&jb, &ens, n).unwrap(), functional_odd(&jb, &ens, n).unwrap()] {
                prop_assert!(v.route_discrepancy() <= 1e-8, "F_{}: {v:?}", v.index());
                prop_assert!(v.value_direct >= 0.0);
            }
        }
    }

    #[test]
    fn coth_identity_holds((dim, seed, beta) in instance()) {
        let p = pair(dim, seed);
        let ens = ensemble(&p.t, beta);
        let jb = in_basis(&ens, &complex_matrix(dim, seed));
        let (left, right) = coth_identity(&jb, &ens).unwrap();
        prop_assert!(rel(left, right) <= 1e-10, "{left} vs {right}");
    }

    #[test]
    fn susceptibility_is_beta_times_duhamel_variance((dim, seed, beta) in instance()) {
        let p = pair(dim, seed);
        let ens = ensemble(&p.t, beta);
        let s = in_basis(&ens, p.s.matrix());
        let ds = s.minus_scalar(ens.expectation(&s));
        let exact = beta * bd_inner(&ds, &ds, &ens).unwrap().re;
        let fd = susceptibility_fd(&p.t, &p.s, beta, None).unwrap();
        prop_assert!(rel(fd, exact) <= 1e-5, "{fd} vs {exact}");
    }

    #[test]
    fn commuting_observable_collapses_fluctuations((dim, seed, beta) in instance()) {
        let p = pair(dim, seed);
        let a = commuting_partner(&p.t);
        let ens = ensemble(&p.t, beta);
        let f = fluctuation(&in_basis(&ens, a.matrix()), &ens).unwrap();
        prop_assert!(rel(f.raw, f.symmetrized) <= 1e-12);
        prop_assert!(rel(f.raw, f.duhamel) <= 1e-12, "{f:?}");
    }

    #[test]
    fn fluctuations_are_ordered((dim, seed, beta) in instance()) {
        let p = pair(dim, seed);
        let ens = ensemble(&p.t, beta);
        let f = fluctuation(&in_basis(&ens, p.s.matrix()), &ens).unwrap();
        // Duhamel variance never exceeds the symmetrized one
        prop_assert!(f.duhamel <= f.symmetrized * (1.0 + 1e-12));
    }
}
