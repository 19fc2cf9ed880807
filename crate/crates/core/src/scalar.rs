//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra::{Complex, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
///
/// The thresholds below are precision-dependent; the `f64` values are the
/// ones every documented tolerance refers to.
pub trait Real:
    RealField
    + Copy
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + std::fmt::Display
    + serde::Serialize
    + 'static
{
    /// Relative threshold below which two eigenvalues are treated as coincident.
    fn degeneracy_rtol() -> Self;
    /// Absolute Hermiticity/trace tolerance, relative to the matrix scale.
    fn validation_tol() -> Self;

    /// Converts a literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn is_finite_val(self) -> bool {
        self.as_f64().is_finite()
    }
}

impl Real for f64 {
    fn degeneracy_rtol() -> Self {
        1e-12
    }
    fn validation_tol() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn degeneracy_rtol() -> Self {
        1e-6
    }
    fn validation_tol() -> Self {
        1e-5
    }
}

/// Complex scalar over a [`Real`] field.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn cplx<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub fn modulus<T: Real>(z: C<T>) -> T {
    z.re.hypot(z.im)
}

/// Neumaier-compensated sum, so reported digits do not depend on summation order
/// beyond the last few ulps.
#[derive(Clone, Copy, Debug)]
pub(crate) struct KahanSum<T> {
    sum: T,
    comp: T,
}

impl<T: Real> KahanSum<T> {
    pub(crate) fn new() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    pub(crate) fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> T {
        self.sum + self.comp
    }
}

impl<T: Real> std::iter::FromIterator<T> for KahanSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub(crate) fn ksum<T: Real, I: IntoIterator<Item = T>>(iter: I) -> T {
    iter.into_iter().collect::<KahanSum<T>>().value()
}
