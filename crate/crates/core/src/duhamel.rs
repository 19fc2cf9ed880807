//! The Bogoliubov–Duhamel inner product and the spectral functionals built
//! on it.
//!
//! Every double sum here has the shape `Z⁻¹ Σ_{m,l} |J_{ml}|² w(E_m, E_l, β)`;
//! the weight `w` is drawn from [`SpectralWeight`]. Boltzmann factors are
//! always taken relative to the ground state so that `β` up to `10³` is safe.

use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::quadrature::GaussLegendre;
use crate::scalar::{cplx, ksum, modulus, Real, C};
use crate::spectral::{
    check_beta, check_dim, coincident, commutator, decompose, duhamel_kernel, relaxation, xcothx,
    CMatrix, GibbsEnsemble, HermitianOperator, ObservableInBasis,
};

/// Largest commutator depth accepted by [`commutator_chain`].
pub const MAX_CHAIN_DEPTH: usize = 8;
/// Largest `n` accepted by the `F_{2n}` / `F_{2n+1}` evaluators.
pub const MAX_FUNCTIONAL_ORDER: usize = 4;
/// Default Gauss–Legendre order for the imaginary-time integral.
pub const DEFAULT_QUADRATURE_NODES: usize = 64;

/// Boltzmann-factor part of a spectral weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightBase {
    /// `(e^{−βE_m} − e^{−βE_l}) / (β(E_l − E_m))`, limit `e^{−βE}`.
    Duhamel,
    /// `e^{−βE_m} + e^{−βE_l}`.
    SymmetricSum,
    /// `|e^{−βE_l} − e^{−βE_m}|`.
    AbsDifference,
}

/// Optional power of the scaled gap `β(E_m − E_l)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GapPower<T> {
    None,
    /// `(β(E_m − E_l))^{2n}`, with `0^0 = 1`.
    Even(u32),
    /// `|β(E_m − E_l)|^s`, `s > 0`; vanishes at coincident energies.
    Abs(T),
}

/// A weight from the fixed catalogue: a Boltzmann base times a gap power.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralWeight<T> {
    pub base: WeightBase,
    pub power: GapPower<T>,
}

impl<T: Real> SpectralWeight<T> {
    pub fn new(base: WeightBase, power: GapPower<T>) -> Self {
        Self { base, power }
    }

    pub fn duhamel() -> Self {
        Self::new(WeightBase::Duhamel, GapPower::None)
    }

    /// Weight for shifted energies `em`, `el` (ground state at zero).
    pub fn eval(&self, em: T, el: T, beta: T) -> T {
        let same = coincident(em, el);
        let base = match self.base {
            WeightBase::Duhamel => duhamel_kernel(em, el, beta),
            WeightBase::SymmetricSum => (-beta * em).exp() + (-beta * el).exp(),
            WeightBase::AbsDifference => {
                if same {
                    T::zero()
                } else {
                    let (lo, hi) = if em < el { (em, el) } else { (el, em) };
                    let d = beta * (hi - lo);
                    (-beta * lo).exp() * d * relaxation(d)
                }
            }
        };
        let gap = if same { T::zero() } else { beta * (em - el) };
        let factor = match self.power {
            GapPower::None | GapPower::Even(0) => T::one(),
            GapPower::Even(n) => (gap * gap).powi(n as i32),
            GapPower::Abs(s) => {
                if s == T::zero() {
                    T::one()
                } else if gap == T::zero() {
                    T::zero()
                } else {
                    gap.abs().powf(s)
                }
            }
        };
        base * factor
    }
}

/// `Z⁻¹ Σ_{m,l} |J_{ml}|² w(E_m, E_l, β)`.
pub fn spectral_sum<T: Real>(
    j: &ObservableInBasis<T>,
    ens: &GibbsEnsemble<T>,
    w: &SpectralWeight<T>,
) -> Result<T> {
    check_dim(ens.dim(), j.dim())?;
    Ok(weighted_sum(
        ens,
        |m, l| j.abs2(m, l),
        |em, el, beta| w.eval(em, el, beta),
    ))
}

/// Compensated `Z⁻¹ Σ_{m,l} a(m,l) w(E_m − E_0, E_l − E_0, β)`.
pub(crate) fn weighted_sum<T: Real>(
    ens: &GibbsEnsemble<T>,
    amp: impl Fn(usize, usize) -> T,
    w: impl Fn(T, T, T) -> T,
) -> T {
    let dim = ens.dim();
    let beta = ens.beta();
    let total = ksum((0..dim).flat_map(|m| {
        let amp = &amp;
        let w = &w;
        (0..dim).map(move |l| {
            let a = amp(m, l);
            if a == T::zero() {
                T::zero()
            } else {
                a * w(ens.shifted_energy(m), ens.shifted_energy(l), beta)
            }
        })
    }));
    total / ens.z_shifted()
}

/// Spectral form of `(A;B) = Z⁻¹ ∫₀¹ dτ Tr[e^{−β(1−τ)H} A† e^{−βτH} B]`.
pub fn bd_inner<T: Real>(
    a: &ObservableInBasis<T>,
    b: &ObservableInBasis<T>,
    ens: &GibbsEnsemble<T>,
) -> Result<C<T>> {
    check_dim(ens.dim(), a.dim())?;
    check_dim(ens.dim(), b.dim())?;
    let dim = ens.dim();
    let beta = ens.beta();
    let mut re = Vec::with_capacity(dim * dim);
    let mut im = Vec::with_capacity(dim * dim);
    for m in 0..dim {
        for n in 0..dim {
            let k = duhamel_kernel(ens.shifted_energy(m), ens.shifted_energy(n), beta);
            let z = a.get(m, n).conj() * b.get(m, n) * k;
            re.push(z.re);
            im.push(z.im);
        }
    }
    let z = ens.z_shifted();
    Ok(C::new(ksum(re) / z, ksum(im) / z))
}

/// The same inner product by Gauss–Legendre quadrature of the imaginary-time
/// integral, with `e^{−sβH}` assembled in the original basis.
pub fn bd_inner_quadrature<T: Real>(
    a: &CMatrix<T>,
    b: &CMatrix<T>,
    h: &HermitianOperator<T>,
    beta: T,
    nodes: usize,
) -> Result<C<T>> {
    if nodes < 8 {
        return Err(param("nodes", format!("need at least 8, got {nodes}")));
    }
    check_dim(h.dim(), a.nrows())?;
    check_dim(h.dim(), a.ncols())?;
    check_dim(h.dim(), b.nrows())?;
    check_dim(h.dim(), b.ncols())?;
    let ens = decompose(h, beta)?;
    let gl = GaussLegendre::<T>::new(nodes)?;
    let a_dag = a.adjoint();
    let propagator = |s: T| ens.diagonal_function(|n| (-s * beta * ens.shifted_energy(n)).exp());
    let mut re = Vec::with_capacity(nodes);
    let mut im = Vec::with_capacity(nodes);
    for (&tau, &w) in gl.nodes.iter().zip(&gl.weights) {
        let left = propagator(T::one() - tau) * &a_dag;
        let right = propagator(tau) * b;
        let tr = (left * right).trace();
        re.push(w * tr.re);
        im.push(w * tr.im);
    }
    let z = ens.z_shifted();
    Ok(C::new(ksum(re) / z, ksum(im) / z))
}

/// The three quadratic-fluctuation measures of an observable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Fluctuation<T> {
    /// `⟨δA†δA⟩`
    pub raw: T,
    /// `½⟨δAδA† + δA†δA⟩`
    pub symmetrized: T,
    /// `(δA;δA)`
    pub duhamel: T,
}

pub fn fluctuation<T: Real>(
    a: &ObservableInBasis<T>,
    ens: &GibbsEnsemble<T>,
) -> Result<Fluctuation<T>> {
    check_dim(ens.dim(), a.dim())?;
    let delta = a.minus_scalar(ens.expectation(a));
    let dim = ens.dim();
    let rho = ens.weights();
    // ⟨δA†δA⟩ = Σ_m ρ_m Σ_n |δA_nm|², ⟨δAδA†⟩ = Σ_m ρ_m Σ_n |δA_mn|²
    let raw = ksum(
        (0..dim)
            .flat_map(|m| (0..dim).map(move |n| (m, n)))
            .map(|(m, n)| rho[m] * delta.abs2(n, m)),
    );
    let other = ksum(
        (0..dim)
            .flat_map(|m| (0..dim).map(move |n| (m, n)))
            .map(|(m, n)| rho[m] * delta.abs2(m, n)),
    );
    let duhamel = bd_inner(&delta, &delta, ens)?.re;
    Ok(Fluctuation {
        raw,
        symmetrized: T::lit(0.5) * (raw + other),
        duhamel,
    })
}

/// `R_0 = J`, `R_k = [H, R_{k−1}]`, by explicit matrix commutators.
pub fn commutator_chain<T: Real>(
    j: &CMatrix<T>,
    h: &HermitianOperator<T>,
    k: usize,
) -> Result<CMatrix<T>> {
    if k > MAX_CHAIN_DEPTH {
        return Err(param(
            "k",
            format!("must be at most {MAX_CHAIN_DEPTH}, got {k}"),
        ));
    }
    check_dim(h.dim(), j.nrows())?;
    check_dim(h.dim(), j.ncols())?;
    let mut r = j.clone();
    for _ in 0..k {
        r = commutator(h.matrix(), &r);
    }
    Ok(r)
}

/// Closed form of the chain in the eigenbasis: `(R_k)_{mn} = (E_m − E_n)^k J_{mn}`.
pub fn commutator_chain_in_basis<T: Real>(
    j: &ObservableInBasis<T>,
    ens: &GibbsEnsemble<T>,
    k: usize,
) -> Result<ObservableInBasis<T>> {
    check_dim(ens.dim(), j.dim())?;
    let e = ens.eigenvalues();
    let elements = CMatrix::from_fn(j.dim(), j.dim(), |m, n| {
        j.get(m, n) * (e[m] - e[n]).powi(k as i32)
    });
    ObservableInBasis::from_elements(elements)
}

/// Solves `[H, X] = J` in the eigenbasis: `X_{mn} = J_{mn} / (E_m − E_n)`,
/// `X_{nn} = 0`. This `X` extends the chain downwards, `R_{−1} = X`.
///
/// Fails when `J` has a diagonal element or couples a degenerate pair, since
/// neither lies in the range of `ad_H`.
pub fn solve_adjoint<T: Real>(
    j: &ObservableInBasis<T>,
    ens: &GibbsEnsemble<T>,
) -> Result<ObservableInBasis<T>> {
    check_dim(ens.dim(), j.dim())?;
    let dim = j.dim();
    let e = ens.eigenvalues();
    let scale = crate::spectral::max_abs(j.elements()).max(T::one());
    let atol = T::lit(1e-12) * scale;
    for n in 0..dim {
        if modulus(j.get(n, n)) > atol {
            return Err(Error::Unsolvable(format!(
                "diagonal element J[{n},{n}] is nonzero"
            )));
        }
    }
    for m in 0..dim {
        for n in 0..dim {
            if m != n && coincident(e[m], e[n]) && modulus(j.get(m, n)) > atol {
                return Err(Error::Unsolvable(format!(
                    "degenerate pair ({m},{n}) carries weight"
                )));
            }
        }
    }
    let x = CMatrix::from_fn(dim, dim, |m, n| {
        if m == n || coincident(e[m], e[n]) {
            cplx(T::zero())
        } else {
            j.get(m, n) / cplx(e[m] - e[n])
        }
    });
    // self-check: [diag(E), X] must reproduce J
    let residual = (0..dim)
        .flat_map(|m| (0..dim).map(move |n| (m, n)))
        .map(|(m, n)| modulus(x[(m, n)] * (e[m] - e[n]) - j.get(m, n)))
        .fold(T::zero(), |a, b| a.max(b));
    if residual > T::lit(1e-10) * scale {
        return Err(Error::Unsolvable(format!(
            "reconstruction residual {residual}"
        )));
    }
    ObservableInBasis::from_elements(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

/// `F_{2n}` or `F_{2n+1}` evaluated along each available route.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FunctionalValue<T> {
    pub n: usize,
    pub parity: Parity,
    /// Spectral double sum.
    pub value_direct: T,
    /// Trace of commutator products; `None` where the route is not applicable.
    pub value_commutator: Option<T>,
    /// `β^{2n}(R_n;R_n)`, even functionals only.
    pub value_rk: Option<T>,
    /// Imaginary part left over by the commutator route (zero in exact arithmetic).
    pub commutator_imag: T,
}

impl<T: Real> FunctionalValue<T> {
    /// Functional index: `2n` or `2n+1`.
    pub fn index(&self) -> usize {
        match self.parity {
            Parity::Even => 2 * self.n,
            Parity::Odd => 2 * self.n + 1,
        }
    }

    /// Largest relative disagreement between the available routes.
    pub fn route_discrepancy(&self) -> T {
        [self.value_commutator, self.value_rk]
            .into_iter()
            .flatten()
            .map(|v| rel_diff(v, self.value_direct))
            .fold(T::zero(), |a, b| a.max(b))
    }
}

pub(crate) fn rel_diff<T: Real>(a: T, b: T) -> T {
    let d = (a - b).abs();
    let s = a.abs().max(b.abs());
    if s == T::zero() {
        d
    } else {
        d / s
    }
}

fn check_order(n: usize) -> Result<()> {
    if n > MAX_FUNCTIONAL_ORDER {
        return Err(param(
            "n",
            format!("must be at most {MAX_FUNCTIONAL_ORDER}, got {n}"),
        ));
    }
    Ok(())
}

fn energy_operator<T: Real>(ens: &GibbsEnsemble<T>) -> Result<HermitianOperator<T>> {
    HermitianOperator::diagonal(ens.eigenvalues())
}

/// `⟨M⟩` for an eigenbasis matrix.
fn expectation_of<T: Real>(m: &CMatrix<T>, ens: &GibbsEnsemble<T>) -> C<T> {
    let rho = ens.weights();
    let re = ksum((0..ens.dim()).map(|n| rho[n] * m[(n, n)].re));
    let im = ksum((0..ens.dim()).map(|n| rho[n] * m[(n, n)].im));
    C::new(re, im)
}

/// `F_{2n}(J;J)`: spectral sum, `β^{2n}(R_n;R_n)`, and the commutator trace
/// `β^{2n−1}⟨R_n†R_{n−1} − R_{n−1}R_n†⟩`.
pub fn functional_even<T: Real>(
    j: &ObservableInBasis<T>,
    ens: &GibbsEnsemble<T>,
    n: usize,
) -> Result<FunctionalValue<T>> {
    check_order(n)?;
    check_dim(ens.dim(), j.dim())?;
    let beta = ens.beta();
    let direct = if n == 0 {
        spectral_sum(j, ens, &SpectralWeight::duhamel())?
    } else {
        let w = SpectralWeight::new(
            WeightBase::AbsDifference,
            GapPower::Abs(T::lit((2 * n - 1) as f64)),
        );
        spectral_sum(j, ens, &w)?
    };

    let energy = energy_operator(ens)?;
    let r_n = ObservableInBasis::from_elements(commutator_chain(j.elements(), &energy, n)?)?;
    let value_rk = beta.powi(2 * n as i32) * bd_inner(&r_n, &r_n, ens)?.re;

    let lower = if n == 0 {
        solve_adjoint(j, ens).ok().map(|x| x.elements().clone())
    } else {
        Some(commutator_chain(j.elements(), &energy, n - 1)?)
    };
    let (value_commutator, commutator_imag) = match lower {
        Some(r_lower) => {
            let r_dag = r_n.elements().adjoint();
            let m = &r_dag * &r_lower - &r_lower * &r_dag;
            let z = expectation_of(&m, ens) * beta.powi(2 * n as i32 - 1);
            (Some(z.re), z.im)
        }
        None => (None, T::zero()),
    };
    Ok(FunctionalValue {
        n,
        parity: Parity::Even,
        value_direct: direct,
        value_commutator,
        value_rk: Some(value_rk),
        commutator_imag,
    })
}

/// `F_{2n+1}(J;J)`: spectral sum and `β^{2n}⟨R_nR_n† + R_n†R_n⟩`.
pub fn functional_odd<T: Real>(
    j: &ObservableInBasis<T>,
    ens: &GibbsEnsemble<T>,
    n: usize,
) -> Result<FunctionalValue<T>> {
    check_order(n)?;
    check_dim(ens.dim(), j.dim())?;
    let beta = ens.beta();
    let w = SpectralWeight::new(WeightBase::SymmetricSum, GapPower::Even(n as u32));
    let direct = spectral_sum(j, ens, &w)?;
    let energy = energy_operator(ens)?;
    let r_n = commutator_chain(j.elements(), &energy, n)?;
    let r_dag = r_n.adjoint();
    let m = &r_n * &r_dag + &r_dag * &r_n;
    let z = expectation_of(&m, ens) * beta.powi(2 * n as i32);
    Ok(FunctionalValue {
        n,
        parity: Parity::Odd,
        value_direct: direct,
        value_commutator: Some(z.re),
        value_rk: None,
        commutator_imag: z.im,
    })
}

/// `F_k(J;J)` by its spectral sum only (any index `k`, either parity).
pub fn functional_direct<T: Real>(
    j: &ObservableInBasis<T>,
    ens: &GibbsEnsemble<T>,
    index: usize,
) -> Result<T> {
    let n = index / 2;
    let w = if index % 2 == 1 {
        SpectralWeight::new(WeightBase::SymmetricSum, GapPower::Even(n as u32))
    } else if n == 0 {
        SpectralWeight::duhamel()
    } else {
        SpectralWeight::new(
            WeightBase::AbsDifference,
            GapPower::Abs(T::lit((2 * n - 1) as f64)),
        )
    };
    spectral_sum(j, ens, &w)
}

/// Both sides of `½⟨J†J + JJ†⟩ − (J;J) = Z⁻¹ Σ' |J_{mn}|² K_{mn} (X_{mn} coth X_{mn} − 1)`:
/// returns `(left, right)`.
pub fn coth_identity<T: Real>(j: &ObservableInBasis<T>, ens: &GibbsEnsemble<T>) -> Result<(T, T)> {
    check_dim(ens.dim(), j.dim())?;
    let f1 = functional_odd(j, ens, 0)?;
    let jj = bd_inner(j, j, ens)?.re;
    let left = T::lit(0.5) * f1.value_commutator.unwrap_or(f1.value_direct) - jj;
    let half = T::lit(0.5);
    let right = weighted_sum(
        ens,
        |m, l| if m == l { T::zero() } else { j.abs2(m, l) },
        |em, el, beta| duhamel_kernel(em, el, beta) * (xcothx(half * beta * (em - el)) - T::one()),
    );
    Ok((left, right))
}

/// `f = −β⁻¹ ln Z`, assembled from the shifted partition function.
pub fn free_energy<T: Real>(h: &HermitianOperator<T>, beta: T) -> Result<T> {
    let ens = decompose(h, beta)?;
    Ok(ens.min_energy() - ens.log_z_shifted() / beta)
}

/// Default central-difference step for [`susceptibility_fd`].
pub fn default_susceptibility_step<T: Real>(s: &HermitianOperator<T>, beta: T) -> Result<T> {
    Ok(T::lit(1e-2) / (T::one() + beta * s.spectral_norm()?))
}

/// `−∂²f/∂h²` of `T − hS` at `h = 0` by central differences with one
/// Richardson level; equals `β(δS;δS)`.
pub fn susceptibility_fd<T: Real>(
    t: &HermitianOperator<T>,
    s: &HermitianOperator<T>,
    beta: T,
    step: Option<T>,
) -> Result<T> {
    check_beta(beta)?;
    check_dim(t.dim(), s.dim())?;
    let step = match step {
        Some(h) if h > T::zero() && h.is_finite_val() => h,
        Some(h) => return Err(param("step", format!("must be positive, got {h}"))),
        None => default_susceptibility_step(s, beta)?,
    };
    let f = |h: T| -> Result<T> { free_energy(&t.add_scaled(s, -h)?, beta) };
    let f0 = f(T::zero())?;
    let second = |h: T| -> Result<T> { Ok(-(f(h)? - T::lit(2.0) * f0 + f(-h)?) / (h * h)) };
    let coarse = second(step)?;
    let fine = second(step * T::lit(0.5))?;
    Ok((T::lit(4.0) * fine - coarse) / T::lit(3.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{pauli_x, pauli_y, pauli_z, random_pair, single_spin};
    use crate::spectral::frobenius;

    fn two_level(
        delta: f64,
        beta: f64,
    ) -> (
        HermitianOperator<f64>,
        GibbsEnsemble<f64>,
        ObservableInBasis<f64>,
    ) {
        let pair = single_spin(delta).unwrap();
        let ens = decompose(&pair.t, beta).unwrap();
        let j = ens.to_eigenbasis(pair.s.matrix()).unwrap();
        (pair.t, ens, j)
    }

    #[test]
    fn inner_product_of_identity_is_one() {
        let (_, ens, _) = two_level(2.0, 1.3);
        let id = ens.to_eigenbasis(&CMatrix::identity(2, 2)).unwrap();
        assert!((bd_inner(&id, &id, &ens).unwrap().re - 1.0).abs() < 1e-15);
        let w = SpectralWeight::duhamel();
        assert!((spectral_sum(&id, &ens, &w).unwrap() - 1.0).abs() < 1e-15);
        let zero = ObservableInBasis::from_elements(CMatrix::zeros(2, 2)).unwrap();
        assert_eq!(spectral_sum(&zero, &ens, &w).unwrap(), 0.0);
    }

    #[test]
    fn two_level_inner_product_closed_form() {
        let (delta, beta) = (2.0, 1.0);
        let x: f64 = beta * delta / 2.0;
        let (t, ens, j) = two_level(delta, beta);
        let v = bd_inner(&j, &j, &ens).unwrap();
        assert!((v.re - x.tanh() / x).abs() < 1e-15);
        let q = bd_inner_quadrature(&pauli_x::<f64>(), &pauli_x::<f64>(), &t, beta, 64).unwrap();
        assert!((q.re - x.tanh() / x).abs() < 1e-14);
    }

    #[test]
    fn commuting_observable_reduces_to_plain_average() {
        let (_, ens, _) = two_level(1.5, 0.7);
        let a = ens.to_eigenbasis(&pauli_z::<f64>()).unwrap();
        let (bd, plain) = (bd_inner(&a, &a, &ens).unwrap().re, 1.0);
        assert!((bd - plain).abs() < 1e-15);
        let t = single_spin(1.5).unwrap().t;
        let q = bd_inner_quadrature(&pauli_z::<f64>(), &pauli_z::<f64>(), &t, 0.7, 8).unwrap();
        assert!((q.re - 1.0).abs() < 1e-14);
        assert!(bd_inner_quadrature(&pauli_z::<f64>(), &pauli_z::<f64>(), &t, 0.7, 4).is_err());
    }

    #[test]
    fn fluctuations_of_pauli_x() {
        let (delta, beta) = (2.0, 1.0);
        let x: f64 = beta * delta / 2.0;
        let (_, ens, j) = two_level(delta, beta);
        let f = fluctuation(&j, &ens).unwrap();
        assert!((f.raw - 1.0).abs() < 1e-15);
        assert!((f.symmetrized - 1.0).abs() < 1e-15);
        assert!((f.duhamel - x.tanh() / x).abs() < 1e-15);
        let id = ens.to_eigenbasis(&CMatrix::identity(2, 2)).unwrap();
        let f = fluctuation(&id, &ens).unwrap();
        assert!(f.raw.abs() < 1e-15 && f.symmetrized.abs() < 1e-15 && f.duhamel.abs() < 1e-15);
    }

    #[test]
    fn chain_on_pauli_algebra() {
        let delta = 1.7;
        let t = single_spin(delta).unwrap().t;
        let r1 = commutator_chain(&pauli_x::<f64>(), &t, 1).unwrap();
        let expected = pauli_y::<f64>().map(|z| z * C::new(0.0, delta));
        assert!(frobenius(&(r1 - expected)) < 1e-15);
        assert_eq!(
            commutator_chain(&pauli_x::<f64>(), &t, 0).unwrap(),
            pauli_x::<f64>()
        );
        let rz = commutator_chain(&pauli_z::<f64>(), &t, 3).unwrap();
        assert_eq!(frobenius(&rz), 0.0);
        assert!(commutator_chain(&pauli_x::<f64>(), &t, 9).is_err());
    }

    #[test]
    fn adjoint_solution_two_level() {
        let (t, ens, j) = two_level(2.0, 1.0);
        let x = solve_adjoint(&j, &ens).unwrap();
        let e = ens.eigenvalues();
        let expected = j.get(0, 1) / (e[0] - e[1]);
        assert!(modulus(x.get(0, 1) - expected) < 1e-15);
        // [T, X] = J in the original basis
        let x_orig = ens.from_eigenbasis(x.elements());
        let back = commutator(t.matrix(), &x_orig);
        assert!(frobenius(&(back - pauli_x::<f64>())) < 1e-12);

        let zero = ObservableInBasis::from_elements(CMatrix::zeros(2, 2)).unwrap();
        assert_eq!(
            frobenius(solve_adjoint(&zero, &ens).unwrap().elements()),
            0.0
        );
        let diag = ens.to_eigenbasis(&pauli_z::<f64>()).unwrap();
        assert!(matches!(
            solve_adjoint(&diag, &ens),
            Err(Error::Unsolvable(_))
        ));
    }

    #[test]
    fn functionals_two_level_closed_forms() {
        let (delta, beta) = (2.0, 1.0);
        let x: f64 = beta * delta / 2.0;
        let (_, ens, j) = two_level(delta, beta);
        let f0 = functional_even(&j, &ens, 0).unwrap();
        assert!((f0.value_direct - x.tanh() / x).abs() < 1e-15);
        assert!(f0.route_discrepancy() < 1e-12);
        assert!(f0.value_commutator.is_some());
        let f1 = functional_odd(&j, &ens, 0).unwrap();
        assert!((f1.value_direct - 2.0).abs() < 1e-15);
        let f2 = functional_even(&j, &ens, 1).unwrap();
        assert!((f2.value_direct - 2.0 * beta * delta * x.tanh()).abs() < 1e-14);
        assert!(f2.route_discrepancy() < 1e-13);
        let f3 = functional_odd(&j, &ens, 1).unwrap();
        assert!((f3.value_direct - 2.0 * (beta * delta).powi(2)).abs() < 1e-13);
        assert!(f3.route_discrepancy() < 1e-13);
    }

    #[test]
    fn commuting_functionals_vanish() {
        let (_, ens, _) = two_level(2.0, 1.0);
        let j = ens.to_eigenbasis(&pauli_z::<f64>()).unwrap();
        for n in 1..=3 {
            assert_eq!(functional_even(&j, &ens, n).unwrap().value_direct, 0.0);
            assert_eq!(functional_odd(&j, &ens, n).unwrap().value_direct, 0.0);
        }
        // F_0 commutator route needs a diagonal-free J
        assert!(functional_even(&j, &ens, 0)
            .unwrap()
            .value_commutator
            .is_none());
        assert!(functional_even(&j, &ens, 5).is_err());
    }

    #[test]
    fn free_energy_closed_forms() {
        let h = HermitianOperator::<f64>::zeros(3).unwrap();
        assert!((free_energy(&h, 2.0).unwrap() + 3f64.ln() / 2.0).abs() < 1e-15);
        let (delta, beta) = (1.4, 0.9);
        let x: f64 = beta * delta / 2.0;
        let t = single_spin(delta).unwrap().t;
        let f = free_energy(&t, beta).unwrap();
        assert!((f + (2.0 * x.cosh()).ln() / beta).abs() < 1e-15);
        let pair = random_pair::<f64>(5, 3, 0).unwrap();
        let shifted = free_energy(&pair.t.shifted(2.5), 1.1).unwrap();
        assert!((shifted - free_energy(&pair.t, 1.1).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn susceptibility_two_level_and_identity() {
        let (delta, beta) = (2.0, 1.0);
        let x: f64 = beta * delta / 2.0;
        let pair = single_spin(delta).unwrap();
        let chi = susceptibility_fd(&pair.t, &pair.s, beta, None).unwrap();
        assert!((chi - beta * x.tanh() / x).abs() / chi < 1e-7);
        let id = HermitianOperator::identity(2).unwrap();
        assert!(susceptibility_fd(&pair.t, &id, beta, None).unwrap().abs() < 1e-8);
    }

    #[test]
    fn coth_identity_two_level() {
        let (_, ens, j) = two_level(2.0, 1.0);
        let (l, r) = coth_identity(&j, &ens).unwrap();
        assert!((l - r).abs() < 1e-14);
        assert!((l - (1.0 - 1f64.tanh())).abs() < 1e-14);
    }
}
