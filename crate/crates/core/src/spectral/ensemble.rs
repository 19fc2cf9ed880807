use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::operator::{check_dim, CMatrix, HermitianOperator, EIGEN_MAX_ITER};
use crate::error::{param, Error, Result};
use crate::scalar::{cplx, ksum, Real, C};

/// Normalized Boltzmann weights `exp(−β(E_n − E_min)) / Σ_m exp(−β(E_m − E_min))`.
///
/// Invariant under a uniform shift of the spectrum because the minimum is
/// subtracted before exponentiation.
pub fn gibbs_weights<T: Real>(eigenvalues: &[T], beta: T) -> Result<Vec<T>> {
    check_beta(beta)?;
    if eigenvalues.is_empty() {
        return Err(Error::Empty);
    }
    if eigenvalues.iter().any(|e| !e.is_finite_val()) {
        return Err(Error::NonFinite("eigenvalues"));
    }
    let (factors, z) = shifted_factors(eigenvalues, beta);
    Ok(factors.into_iter().map(|b| b / z).collect())
}

fn shifted_factors<T: Real>(eigenvalues: &[T], beta: T) -> (Vec<T>, T) {
    let e_min = eigenvalues
        .iter()
        .copied()
        .fold(eigenvalues[0], |a, b| a.min(b));
    let factors: Vec<T> = eigenvalues
        .iter()
        .map(|&e| (-beta * (e - e_min)).exp())
        .collect();
    let z = ksum(factors.iter().copied());
    (factors, z)
}

pub(crate) fn check_beta<T: Real>(beta: T) -> Result<()> {
    if !beta.is_finite_val() || beta <= T::zero() {
        return Err(param(
            "beta",
            format!("must be positive and finite, got {beta}"),
        ));
    }
    Ok(())
}

/// Eigendecomposition of a Hamiltonian together with its Gibbs weights at
/// inverse temperature `beta`.
#[derive(Clone, Debug)]
pub struct GibbsEnsemble<T: Real> {
    eigenvalues: Vec<T>,
    eigenvectors: CMatrix<T>,
    beta: T,
    weights: Vec<T>,
    /// `exp(−β(E_n − E_min))`
    factors: Vec<T>,
    z_shifted: T,
}

/// Diagonalizes `h` and builds its Gibbs ensemble at inverse temperature `beta`.
pub fn decompose<T: Real>(h: &HermitianOperator<T>, beta: T) -> Result<GibbsEnsemble<T>> {
    check_beta(beta)?;
    let dim = h.dim();
    let eig = SymmetricEigen::try_new(h.matrix().clone(), T::default_epsilon(), EIGEN_MAX_ITER)
        .ok_or(Error::NoConvergence(dim))?;
    let mut order: Vec<usize> = (0..dim).collect();
    // stable sort keeps the solver's order among exact ties
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues: Vec<T> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if eigenvalues.iter().any(|e| !e.is_finite_val()) {
        return Err(Error::NonFinite("eigenvalues"));
    }
    let eigenvectors = CMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
    let (factors, z_shifted) = shifted_factors(&eigenvalues, beta);
    let weights = factors.iter().map(|&b| b / z_shifted).collect();
    Ok(GibbsEnsemble {
        eigenvalues,
        eigenvectors,
        beta,
        weights,
        factors,
        z_shifted,
    })
}

impl<T: Real> GibbsEnsemble<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// Columns are the eigenvectors `|n⟩`.
    pub fn eigenvectors(&self) -> &CMatrix<T> {
        &self.eigenvectors
    }

    /// Normalized Gibbs weights `ρ_n`.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn min_energy(&self) -> T {
        self.eigenvalues[0]
    }

    /// Shifted Boltzmann factors `exp(−β(E_n − E_min))`.
    pub fn shifted_factors(&self) -> &[T] {
        &self.factors
    }

    /// `Σ_n exp(−β(E_n − E_min))`.
    pub fn z_shifted(&self) -> T {
        self.z_shifted
    }

    pub fn log_z_shifted(&self) -> T {
        self.z_shifted.ln()
    }

    /// `ln Z = ln Z_shifted − β E_min`.
    pub fn log_partition(&self) -> T {
        self.log_z_shifted() - self.beta * self.min_energy()
    }

    /// Energies measured from the ground state.
    pub fn shifted_energy(&self, n: usize) -> T {
        self.eigenvalues[n] - self.eigenvalues[0]
    }

    /// `U diag(E) U†`.
    pub fn reconstruct(&self) -> CMatrix<T> {
        let diag = DVector::from_iterator(self.dim(), self.eigenvalues.iter().map(|&e| cplx(e)));
        &self.eigenvectors * DMatrix::from_diagonal(&diag) * self.eigenvectors.adjoint()
    }

    /// Gibbs state `Σ_n ρ_n |n⟩⟨n|` in the original basis.
    pub fn density_matrix(&self) -> CMatrix<T> {
        self.diagonal_function(|n| self.weights[n])
    }

    /// `ρ^{1/2}` built from the exact half-temperature factors, avoiding the
    /// square root of rounded weights.
    pub fn sqrt_density_matrix(&self) -> CMatrix<T> {
        let half = T::lit(0.5);
        let norm = self.z_shifted.sqrt();
        self.diagonal_function(|n| (-half * self.beta * self.shifted_energy(n)).exp() / norm)
    }

    /// `U diag(f(n)) U†`.
    pub fn diagonal_function(&self, f: impl Fn(usize) -> T) -> CMatrix<T> {
        let dim = self.dim();
        let scaled = CMatrix::from_fn(dim, dim, |r, c| self.eigenvectors[(r, c)] * f(c));
        scaled * self.eigenvectors.adjoint()
    }

    /// Gibbs average `Σ_n ρ_n A_nn` of an observable expressed in this basis.
    pub fn expectation(&self, a: &ObservableInBasis<T>) -> C<T> {
        let re = ksum((0..self.dim()).map(|n| self.weights[n] * a.elements[(n, n)].re));
        let im = ksum((0..self.dim()).map(|n| self.weights[n] * a.elements[(n, n)].im));
        C::new(re, im)
    }

    /// `A_{mn} = ⟨m|A|n⟩`, i.e. `U† A U`.
    pub fn to_eigenbasis(&self, a: &CMatrix<T>) -> Result<ObservableInBasis<T>> {
        to_eigenbasis(a, self)
    }

    /// Maps an eigenbasis matrix back to the original basis, `U X U†`.
    pub fn from_eigenbasis(&self, x: &CMatrix<T>) -> CMatrix<T> {
        &self.eigenvectors * x * self.eigenvectors.adjoint()
    }

    pub fn is_degenerate(&self) -> bool {
        self.eigenvalues
            .windows(2)
            .any(|w| super::kernel::coincident(w[0], w[1]))
    }
}

/// Matrix elements `⟨m|A|n⟩` of an observable in an ensemble's eigenbasis.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableInBasis<T: Real> {
    elements: CMatrix<T>,
}

impl<T: Real> ObservableInBasis<T> {
    /// Wraps matrix elements that are already expressed in an eigenbasis.
    pub fn from_elements(elements: CMatrix<T>) -> Result<Self> {
        let (rows, cols) = elements.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        Ok(Self { elements })
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn elements(&self) -> &CMatrix<T> {
        &self.elements
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize) -> C<T> {
        self.elements[(m, n)]
    }

    #[inline]
    pub fn abs2(&self, m: usize, n: usize) -> T {
        self.elements[(m, n)].norm_sqr()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            elements: self.elements.adjoint(),
        }
    }

    /// `A − c·I`.
    pub fn minus_scalar(&self, c: C<T>) -> Self {
        let mut elements = self.elements.clone();
        for i in 0..self.dim() {
            elements[(i, i)] -= c;
        }
        Self { elements }
    }

    pub fn scaled(&self, c: C<T>) -> Self {
        Self {
            elements: self.elements.map(|z| z * c),
        }
    }

    pub fn is_hermitian(&self) -> bool {
        let tol = T::validation_tol() * super::operator::max_abs(&self.elements);
        super::operator::hermitian_defect(&self.elements) <= tol
    }
}

/// Expresses `a` in the eigenbasis of `ens`: `U† A U`.
pub fn to_eigenbasis<T: Real>(
    a: &CMatrix<T>,
    ens: &GibbsEnsemble<T>,
) -> Result<ObservableInBasis<T>> {
    let (rows, cols) = a.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    check_dim(ens.dim(), rows)?;
    let u = ens.eigenvectors();
    Ok(ObservableInBasis {
        elements: u.adjoint() * a * u,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::operator::frobenius;
    use nalgebra::Complex;

    fn pauli_x() -> HermitianOperator<f64> {
        let o = Complex::new(0.0, 0.0);
        let l = Complex::new(1.0, 0.0);
        HermitianOperator::new(DMatrix::from_row_slice(2, 2, &[o, l, l, o])).unwrap()
    }

    #[test]
    fn identity_is_uniform() {
        let ens = decompose(&HermitianOperator::<f64>::identity(2).unwrap(), 1.0).unwrap();
        assert_eq!(ens.eigenvalues(), &[1.0, 1.0]);
        assert!((ens.weights()[0] - 0.5).abs() < 1e-15);
        assert!((ens.weights()[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pauli_x_spectrum() {
        let ens = decompose(&pauli_x(), 1.0).unwrap();
        assert!((ens.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!((ens.eigenvalues()[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn weights_two_level_closed_form() {
        let (delta, beta) = (1.3f64, 0.8);
        let x = beta * delta / 2.0;
        let w = gibbs_weights(&[-delta / 2.0, delta / 2.0], beta).unwrap();
        let norm = 2.0 * x.cosh();
        assert!((w[0] - x.exp() / norm).abs() < 1e-15);
        assert!((w[1] - (-x).exp() / norm).abs() < 1e-15);
    }

    #[test]
    fn weights_limits_and_errors() {
        assert_eq!(gibbs_weights(&[0.0f64, 0.0], 3.0).unwrap(), vec![0.5, 0.5]);
        let w = gibbs_weights(&[-2.0f64, 0.5, 4.0], 1e-14).unwrap();
        for v in w {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!(gibbs_weights(&[f64::NAN, 0.0], 1.0).is_err());
        assert!(gibbs_weights(&[0.0f64], 0.0).is_err());
        assert!(gibbs_weights(&[0.0f64], f64::INFINITY).is_err());
        // β = 10³ with an O(10) spread must not overflow
        let w = gibbs_weights(&[-10.0f64, 0.0, 10.0], 1e3).unwrap();
        assert_eq!(w[0], 1.0);
    }

    #[test]
    fn weights_shift_invariant() {
        let e = [0.3f64, -1.2, 2.5, 0.0];
        let w1 = gibbs_weights(&e, 1.7).unwrap();
        let shifted: Vec<f64> = e.iter().map(|x| x + 1000.0).collect();
        let w2 = gibbs_weights(&shifted, 1.7).unwrap();
        for (a, b) in w1.iter().zip(&w2) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn eigenbasis_of_h_is_diagonal() {
        let h = pauli_x();
        let ens = decompose(&h, 2.0).unwrap();
        let hb = ens.to_eigenbasis(h.matrix()).unwrap();
        assert!((hb.get(0, 0).re + 1.0).abs() < 1e-14);
        assert!(crate::scalar::modulus(hb.get(0, 1)) < 1e-14);
        let id = ens.to_eigenbasis(&CMatrix::identity(2, 2)).unwrap();
        assert!((frobenius(id.elements()) - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let ens = decompose(&pauli_x(), 1.0).unwrap();
        let a = CMatrix::<f64>::identity(3, 3);
        assert!(matches!(
            ens.to_eigenbasis(&a),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sqrt_density_squares_to_density() {
        let ens = decompose(&pauli_x(), 3.0).unwrap();
        let r = ens.sqrt_density_matrix();
        let diff = &r * &r - ens.density_matrix();
        assert!(frobenius(&diff) < 1e-15);
    }
}
