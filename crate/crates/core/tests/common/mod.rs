//! Shared instance generators for the property suites.
#![allow(dead_code)]

use gibbs_ineq::models::{complex_gaussian, instance_rng, random_pair, ModelPair};
use gibbs_ineq::spectral::{
    decompose, CMatrix, GibbsEnsemble, HermitianOperator, ObservableInBasis,
};
use proptest::prelude::*;

/// Seeded random pair: `(dim, seed, beta)`.
pub fn instance() -> impl Strategy<Value = (usize, u64, f64)> {
    (2usize..=8, any::<u64>(), -1.0f64..=1.0).prop_map(|(d, s, e)| (d, s, 10f64.powf(e)))
}

pub fn pair(dim: usize, seed: u64) -> ModelPair<f64> {
    random_pair(dim, seed, 0).unwrap()
}

pub fn ensemble(t: &HermitianOperator<f64>, beta: f64) -> GibbsEnsemble<f64> {
    decompose(t, beta).unwrap()
}

pub fn in_basis(ens: &GibbsEnsemble<f64>, a: &CMatrix<f64>) -> ObservableInBasis<f64> {
    ens.to_eigenbasis(a).unwrap()
}

/// Non-Hermitian complex matrix drawn from a stream distinct from `random_pair`.
pub fn complex_matrix(dim: usize, seed: u64) -> CMatrix<f64> {
    let mut rng = instance_rng(seed, u64::MAX);
    complex_gaussian(dim, &mut rng)
}

/// `S = T² − T/2`, which commutes with `T`.
pub fn commuting_partner(t: &HermitianOperator<f64>) -> HermitianOperator<f64> {
    let m = t.matrix();
    HermitianOperator::new(m * m - m.map(|z| z * 0.5)).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}
