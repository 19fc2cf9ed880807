//! Exact-diagonalization toolkit for Bogoliubov–Duhamel inequalities and the
//! thermal fidelity susceptibility of Gibbs states.
//!
//! Every routine is generic over the [`Real`] scalar (`f32` or `f64`); the
//! `f64` aliases below are what the CLI and the acceptance suite use.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod duhamel;
pub mod error;
pub mod fidelity;
pub mod inequalities;
pub mod models;
pub mod quadrature;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Real;

pub type HermitianOperatorF64 = spectral::HermitianOperator<f64>;
pub type GibbsEnsembleF64 = spectral::GibbsEnsemble<f64>;
pub type ObservableInBasisF64 = spectral::ObservableInBasis<f64>;
pub type CMatrixF64 = spectral::CMatrix<f64>;
pub type DensityMatrixF64 = fidelity::DensityMatrix<f64>;
pub type FidelityReportF64 = fidelity::FidelityReport<f64>;
pub type InequalityReportF64 = inequalities::InequalityReport<f64>;
pub type SuiteReportF64 = inequalities::SuiteReport<f64>;
pub type ModelPairF64 = models::ModelPair<f64>;
