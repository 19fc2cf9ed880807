use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::{cplx, modulus, Real, C};

/// Dense complex matrix, the working representation for every operator.
pub type CMatrix<T> = DMatrix<C<T>>;

pub(crate) const EIGEN_MAX_ITER: usize = 100_000;

/// A dense Hermitian operator on a finite-dimensional Hilbert space.
///
/// Construction validates Hermiticity against `validation_tol · maxabs(entries)`
/// and stores the exactly-Hermitian part `(A + A†)/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator<T: Real> {
    entries: CMatrix<T>,
}

impl<T: Real> HermitianOperator<T> {
    pub fn new(entries: CMatrix<T>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(Error::Empty);
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite_val() || !z.im.is_finite_val())
        {
            return Err(Error::NonFinite("operator entries"));
        }
        let asymmetry = hermitian_defect(&entries);
        let tol = T::validation_tol() * max_abs(&entries);
        if asymmetry > tol {
            return Err(Error::NotHermitian {
                asymmetry: asymmetry.as_f64(),
                tol: tol.as_f64(),
            });
        }
        Ok(Self {
            entries: symmetrize(&entries),
        })
    }

    /// Real diagonal operator.
    pub fn diagonal(values: &[T]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        let diag = DVector::from_iterator(values.len(), values.iter().map(|&v| cplx(v)));
        Self::new(DMatrix::from_diagonal(&diag))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty);
        }
        Ok(Self {
            entries: CMatrix::identity(dim, dim),
        })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty);
        }
        Ok(Self {
            entries: CMatrix::zeros(dim, dim),
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.entries
    }

    /// `self + c·other`; both operands Hermitian, so the result is too.
    pub fn add_scaled(&self, other: &Self, c: T) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        let entries = &self.entries + other.entries.map(|z| z * c);
        Ok(Self {
            entries: symmetrize(&entries),
        })
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            entries: self.entries.map(|z| z * c),
        }
    }

    /// `self + c·I`.
    pub fn shifted(&self, c: T) -> Self {
        let mut entries = self.entries.clone();
        for i in 0..self.dim() {
            entries[(i, i)] += cplx(c);
        }
        Self { entries }
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        let eig =
            SymmetricEigen::try_new(self.entries.clone(), T::default_epsilon(), EIGEN_MAX_ITER)
                .ok_or(Error::NoConvergence(self.dim()))?;
        let mut values: Vec<T> = eig.eigenvalues.iter().copied().collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        Ok(values)
    }

    /// Operator 2-norm, i.e. the largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> Result<T> {
        Ok(self
            .eigenvalues()?
            .into_iter()
            .fold(T::zero(), |acc, e| acc.max(e.abs())))
    }

    pub fn commutes_with(&self, other: &Self, rtol: T) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let comm = commutator(&self.entries, &other.entries);
        let scale = max_abs(&self.entries) * max_abs(&other.entries);
        max_abs(&comm) <= rtol * scale
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// `[a, b] = ab − ba`.
pub fn commutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b - b * a
}

pub fn max_abs<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(modulus(*z)))
}

pub(crate) fn hermitian_defect<T: Real>(m: &CMatrix<T>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in i..n {
            worst = worst.max(modulus(m[(i, j)] - m[(j, i)].conj()));
        }
    }
    worst
}

pub(crate) fn symmetrize<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let half = T::lit(0.5);
    (m + m.adjoint()).map(|z| z * half)
}

/// Frobenius norm.
pub fn frobenius<T: Real>(m: &CMatrix<T>) -> T {
    m.iter()
        .map(|z| z.norm_sqr())
        .fold(T::zero(), |a, b| a + b)
        .sqrt()
}
