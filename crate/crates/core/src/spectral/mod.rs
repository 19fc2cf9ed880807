//! Hermitian operators, Gibbs ensembles and the scalar kernels reused by the
//! spectral sums.

mod ensemble;
mod kernel;
mod operator;

pub(crate) use ensemble::check_beta;
pub use ensemble::{decompose, gibbs_weights, to_eigenbasis, GibbsEnsemble, ObservableInBasis};
pub(crate) use kernel::relaxation;
pub use kernel::{coincident, degeneracy_threshold, duhamel_kernel, xcothx};
pub(crate) use operator::{check_dim, hermitian_defect, symmetrize};
pub use operator::{commutator, frobenius, max_abs, CMatrix, HermitianOperator};
