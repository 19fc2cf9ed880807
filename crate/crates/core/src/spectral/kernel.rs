//! Scalar kernels shared by the spectral sums.

use crate::scalar::Real;

/// Threshold under which two energies count as coincident.
#[inline]
pub fn degeneracy_threshold<T: Real>(a: T, b: T) -> T {
    T::degeneracy_rtol() * T::one().max(a.abs()).max(b.abs())
}

#[inline]
pub fn coincident<T: Real>(a: T, b: T) -> bool {
    (a - b).abs() <= degeneracy_threshold(a, b)
}

/// `(1 − e^{−d})/d` for `d ≥ 0`, equal to 1 at `d = 0`.
#[inline]
pub(crate) fn relaxation<T: Real>(d: T) -> T {
    if d == T::zero() {
        T::one()
    } else {
        -(-d).exp_m1() / d
    }
}

/// Duhamel difference quotient `(e^{−βa} − e^{−βb}) / (β(b − a))`.
///
/// Symmetric in `(a, b)`, strictly positive, and equal to `e^{−βa}` when the
/// energies coincide. Not normalized by the partition function.
pub fn duhamel_kernel<T: Real>(a: T, b: T, beta: T) -> T {
    if coincident(a, b) {
        let mid = (a + b) * T::lit(0.5);
        return (-beta * mid).exp();
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    (-beta * lo).exp() * relaxation(beta * (hi - lo))
}

/// `x coth x`, extended to 1 at the origin.
pub fn xcothx<T: Real>(x: T) -> T {
    let ax = x.abs();
    if ax < T::lit(1e-4) {
        let x2 = x * x;
        T::one() + x2 / T::lit(3.0) - x2 * x2 / T::lit(45.0)
    } else {
        ax / ax.tanh()
    }
}
