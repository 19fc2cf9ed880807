//! Uhlmann fidelity of Gibbs states `ρ(x) ∝ exp(−β(T − xS))` and the thermal
//! fidelity susceptibility: spectral forms, finite-difference oracles, the
//! second-order expansion of the symmetric fidelity, and the Duhamel bounds.

use nalgebra::{DVector, SymmetricEigen};
use serde::Serialize;

use crate::duhamel::bd_inner;
use crate::error::{param, Error, Result};
use crate::scalar::{cplx, ksum, modulus, Real};
use crate::spectral::{
    check_beta, check_dim, coincident, commutator, decompose, duhamel_kernel, xcothx, CMatrix,
    GibbsEnsemble, HermitianOperator, ObservableInBasis,
};

const SVD_MAX_ITER: usize = 100_000;

/// A Hermitian, positive semidefinite, unit-trace matrix together with its
/// square root.
#[derive(Clone, Debug)]
pub struct DensityMatrix<T: Real> {
    entries: CMatrix<T>,
    root: CMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates Hermiticity, unit trace and positivity (all to
    /// `validation_tol`), then stores the state and its PSD square root.
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
            return Err(Error::NonFinite("density matrix"));
        }
        let tol = T::validation_tol();
        let asymmetry = crate::spectral::hermitian_defect(&entries);
        if asymmetry > tol {
            return Err(Error::NotHermitian {
                asymmetry: asymmetry.as_f64(),
                tol: tol.as_f64(),
            });
        }
        let trace = entries.trace();
        if (trace.re - T::one()).abs() > tol || trace.im.abs() > tol {
            return Err(Error::NotAState(format!(
                "trace {} + {}i",
                trace.re, trace.im
            )));
        }
        let root = psd_sqrt_with_floor(&entries, tol)?;
        Ok(Self {
            entries: crate::spectral::symmetrize(&entries),
            root,
        })
    }

    /// The Gibbs state of an ensemble; the root comes from the half-temperature
    /// factors rather than from a second eigensolve.
    pub fn from_ensemble(ens: &GibbsEnsemble<T>) -> Self {
        Self {
            entries: ens.density_matrix(),
            root: ens.sqrt_density_matrix(),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty);
        }
        let p = T::one() / T::lit(dim as f64);
        Ok(Self {
            entries: CMatrix::identity(dim, dim) * cplx(p),
            root: CMatrix::identity(dim, dim) * cplx(p.sqrt()),
        })
    }

    /// `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩`.
    pub fn pure(psi: &DVector<crate::scalar::C<T>>) -> Result<Self> {
        let norm2 = ksum(psi.iter().map(|z| z.norm_sqr()));
        if psi.is_empty() {
            return Err(Error::Empty);
        }
        if !(norm2 > T::zero()) || !norm2.is_finite_val() {
            return Err(Error::NotAState("zero or non-finite state vector".into()));
        }
        let unit = psi / cplx(norm2.sqrt());
        let proj = &unit * unit.adjoint();
        Ok(Self {
            root: proj.clone(),
            entries: proj,
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.entries
    }

    /// `ρ^{1/2}`.
    pub fn sqrt(&self) -> &CMatrix<T> {
        &self.root
    }
}

/// PSD square root by eigendecomposition of `(M + M†)/2`; eigenvalues in
/// `[−1e-8, 0)` (relative to `max(1, ‖M‖)`) are clamped to zero.
pub fn psd_sqrt<T: Real>(m: &CMatrix<T>) -> Result<CMatrix<T>> {
    psd_sqrt_with_floor(m, T::lit(1e-8).max(T::validation_tol()))
}

fn psd_sqrt_with_floor<T: Real>(m: &CMatrix<T>, floor: T) -> Result<CMatrix<T>> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let dim = rows;
    let eig = SymmetricEigen::try_new(
        crate::spectral::symmetrize(m),
        T::default_epsilon(),
        100_000,
    )
    .ok_or(Error::NoConvergence(dim))?;
    let scale = T::one().max(
        eig.eigenvalues
            .iter()
            .fold(T::zero(), |a, e| a.max(e.abs())),
    );
    let lowest = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(T::zero(), |a, e| a.min(e));
    if lowest < -floor * scale {
        return Err(Error::NotAState(format!("eigenvalue {lowest} is negative")));
    }
    let u = &eig.eigenvectors;
    let scaled = CMatrix::from_fn(dim, dim, |r, c| {
        u[(r, c)] * eig.eigenvalues[c].max(T::zero()).sqrt()
    });
    Ok(scaled * u.adjoint())
}

/// `F(ρ₁, ρ₂) = Tr √(ρ₁^{1/2} ρ₂ ρ₁^{1/2})`, evaluated as the trace norm
/// `‖ρ₁^{1/2} ρ₂^{1/2}‖₁` (sum of singular values).
pub fn uhlmann_fidelity<T: Real>(a: &DensityMatrix<T>, b: &DensityMatrix<T>) -> Result<T> {
    check_dim(a.dim(), b.dim())?;
    let m = a.sqrt() * b.sqrt();
    let svd = m
        .try_svd(false, false, T::default_epsilon(), SVD_MAX_ITER)
        .ok_or(Error::NoConvergence(a.dim()))?;
    Ok(ksum(svd.singular_values.iter().copied()))
}

/// The same fidelity through the PSD root of the symmetrized
/// `ρ₁^{1/2} ρ₂ ρ₁^{1/2}`. Loses accuracy when the product has eigenvalues
/// near the rounding floor; kept as an independent route.
pub fn uhlmann_fidelity_via_root<T: Real>(a: &DensityMatrix<T>, b: &DensityMatrix<T>) -> Result<T> {
    check_dim(a.dim(), b.dim())?;
    let m = a.sqrt() * b.matrix() * a.sqrt();
    Ok(psd_sqrt(&m)?.trace().re)
}

/// Gibbs ensemble of `H(x) = T − xS`.
pub fn ensemble_at<T: Real>(
    t: &HermitianOperator<T>,
    s: &HermitianOperator<T>,
    x: T,
    beta: T,
) -> Result<GibbsEnsemble<T>> {
    check_dim(t.dim(), s.dim())?;
    decompose(&t.add_scaled(s, -x)?, beta)
}

/// `ρ(h) = Z(h)⁻¹ exp(−β(T − hS))`.
pub fn gibbs_state<T: Real>(
    t: &HermitianOperator<T>,
    s: &HermitianOperator<T>,
    h: T,
    beta: T,
) -> Result<DensityMatrix<T>> {
    Ok(DensityMatrix::from_ensemble(&ensemble_at(t, s, h, beta)?))
}

/// `ρ′(x) = dρ/dx` in the eigenbasis of `H(x)`, with the ensemble and `S`
/// in that basis.
#[derive(Clone, Debug)]
pub struct RhoPrime<T: Real> {
    pub ensemble: GibbsEnsemble<T>,
    pub s: ObservableInBasis<T>,
    pub elements: CMatrix<T>,
}

impl<T: Real> RhoPrime<T> {
    pub fn in_original_basis(&self) -> CMatrix<T> {
        self.ensemble.from_eigenbasis(&self.elements)
    }

    pub fn trace(&self) -> T {
        ksum((0..self.elements.nrows()).map(|n| self.elements[(n, n)].re))
    }
}

/// Off-diagonal `S_{mn}(ρ_n − ρ_m)/(E_m − E_n)` (limit `βρS_{mn}`),
/// diagonal `βρ_n(S_{nn} − ⟨S⟩)`.
pub fn rho_prime<T: Real>(
    t: &HermitianOperator<T>,
    s: &HermitianOperator<T>,
    beta: T,
    x: T,
) -> Result<RhoPrime<T>> {
    let ens = ensemble_at(t, s, x, beta)?;
    let sb = ens.to_eigenbasis(s.matrix())?;
    let mean = ens.expectation(&sb).re;
    let dim = ens.dim();
    let z = ens.z_shifted();
    let rho = ens.weights();
    let elements = CMatrix::from_fn(dim, dim, |m, n| {
        if m == n {
            cplx(beta * rho[n] * (sb.get(n, n).re - mean))
        } else {
            // (ρ_n − ρ_m)/(E_m − E_n) = β K(E_m, E_n)/Z
            let k = duhamel_kernel(ens.shifted_energy(m), ens.shifted_energy(n), beta) / z;
            sb.get(m, n) * (beta * k)
        }
    });
    Ok(RhoPrime {
        ensemble: ens,
        s: sb,
        elements,
    })
}

/// Spectral and (optionally) finite-difference values of `χ_F` at one point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FidelityReport<T> {
    pub beta: T,
    pub x: T,
    /// `½ Σ |ρ′_{mn}|² / (ρ_m + ρ_n)`
    pub chi_spectral_form1: T,
    /// `chi_quantum_term + chi_classical_term`
    pub chi_spectral_form2: T,
    pub chi_quantum_term: T,
    pub chi_classical_term: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi_fd_one_sided: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi_fd_two_sided: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_lower: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_upper: Option<T>,
    /// Some pair `m ≠ n` with `E_m = E_n` carried weight and was folded into
    /// the classical term.
    pub degenerate_limit_applied: bool,
    /// Some Boltzmann weight fell below 1e-300; form2 is authoritative.
    pub ill_conditioned: bool,
}

impl<T: Real> FidelityReport<T> {
    /// The value to quote: form2, which stays finite where form1's
    /// denominators underflow.
    pub fn chi(&self) -> T {
        self.chi_spectral_form2
    }

    /// `|form1 − form2| / max(|form2|, tiny)`.
    pub fn route_discrepancy(&self) -> T {
        crate::duhamel::rel_diff(self.chi_spectral_form1, self.chi_spectral_form2)
    }

    pub fn sandwich_holds(&self, tol: T) -> Option<bool> {
        let (lo, hi) = (self.bound_lower?, self.bound_upper?);
        let chi = self.chi();
        let scale = T::one().max(lo.abs()).max(hi.abs()).max(chi.abs());
        Some(chi - lo >= -tol * scale && hi - chi >= -tol * scale)
    }
}

/// Both spectral representations of `χ_F` at `x`; finite-difference and bound
/// fields are left empty.
pub fn chi_f_spectral<T: Real>(
    t: &HermitianOperator<T>,
    s: &HermitianOperator<T>,
    beta: T,
    x: T,
) -> Result<FidelityReport<T>> {
    let rp = rho_prime(t, s, beta, x)?;
    let ens = &rp.ensemble;
    let sb = &rp.s;
    let dim = ens.dim();
    let rho = ens.weights();
    let half = T::lit(0.5);

    let form1 = half
        * ksum((0..dim).flat_map(|m| {
            let rp = &rp;
            (0..dim).map(move |n| {
                let denom = rho[m] + rho[n];
                let num = rp.elements[(m, n)].norm_sqr();
                if denom > T::zero() {
                    num / denom
                } else {
                    T::zero()
                }
            })
        }));

    let mean = ens.expectation(sb).re;
    let mut degenerate = false;
    let mut quantum = Vec::with_capacity(dim * dim);
    let mut classical = Vec::with_capacity(dim * dim);
    for m in 0..dim {
        let dev = sb.get(m, m).re - mean;
        classical.push(rho[m] * dev * dev);
        for n in 0..dim {
            if m == n {
                continue;
            }
            let (em, en) = (ens.eigenvalues()[m], ens.eigenvalues()[n]);
            let w = sb.abs2(m, n);
            if coincident(em, en) {
                if w > T::zero() {
                    degenerate = true;
                }
                classical.push(half * (rho[m] + rho[n]) * w);
            } else {
                let g = xcothx(half * beta * (em - en));
                quantum.push((rho[m] + rho[n]) * w / (g * g));
            }
        }
    }
    let b2 = beta * beta;
    let chi_quantum_term = b2 / T::lit(8.0) * ksum(quantum);
    let chi_classical_term = b2 / T::lit(4.0) * ksum(classical);
    let ill_conditioned = rho.iter().any(|r| r.as_f64() < 1e-300);

    Ok(FidelityReport {
        beta,
        x,
        chi_spectral_form1: form1,
        chi_spectral_form2: chi_quantum_term + chi_classical_term,
        chi_quantum_term,
        chi_classical_term,
        chi_fd_one_sided: None,
        chi_fd_two_sided: None,
        bound_lower: None,
        bound_upper: None,
        degenerate_limit_applied: degenerate,
        ill_conditioned,
    })
}

/// Spectral forms plus the two finite-difference oracles (default steps),
/// and, at `x = 0`, the one-sided value and the bounds.
pub fn fidelity_report<T: Real>(
    t: &HermitianOperator<T>,
    s: &HermitianOperator<T>,
    beta: T,
    x: T,
) -> Result<FidelityReport<T>> {
    let mut report = chi_f_spectral(t, s, beta, x)?;
    report.chi_fd_two_sided = Some(chi_f_fd_two_sided(t, s, beta, None, x)?);
    if x == T::zero() {
        report.chi_fd_one_sided = Some(chi_f_fd_one_sided(t, s, beta, None)?);
        let b = chi_f_bounds(t, s, beta)?;
        report.bound_lower = Some(b.lower);
        report.bound_upper = Some(b.upper);
    }
    Ok(report)
}

/// Default step `1e-2 / (1 + β‖S‖₂)` for the fidelity difference quotients;
/// smaller steps let `ε/h²` rounding dominate after extrapolation.
pub fn default_fidelity_step<T: Real>(s: &HermitianOperator<T>, beta: T) -> Result<T> {
    Ok(T::lit(1e-2) / (T::one() + beta * s.spectral_norm()?))
}

fn resolve_step<T: Real>(s: &HermitianOperator<T>, beta: T, h: Option<T>) -> Result<T> {
    match h {
        Some(h) if h > T::zero() && h.is_finite_val() => Ok(h),
        Some(h) => Err(param("h", format!("must be positive, got {h}"))),
        None => default_fidelity_step(s, beta),
    }
}

/// `−2 ln F / h²`.
fn log_rate<T: Real>(a: &DensityMatrix<T>, b: &DensityMatrix<T>, h: T) -> Result<T> {
    let f = uhlmann_fidelity(a, b)?;
    if !(f > T::zero()) || !f.is_finite_val() {
        return Err(Error::Conditioning(format!("fidelity {f} at step {h}")));
    }
    Ok(-T::lit(2.0) * f.ln() / (h * h))
}

/// `2(−ln F(ρ(0), ρ(h)))/h²` with one Richardson step over `h, h/2`
/// (the leading error is odd in `h`).
pub fn chi_f_fd_one_sided<T: Real>(
    t: &HermitianOperator<T>,
    s: &HermitianOperator<T>,
    beta: T,
    h: Option<T>,
) -> Result<T> {
    check_beta(beta)?;
    check_dim(t.dim(), s.dim())?;
    let h = resolve_step(s, beta, h)?;
    let rho0 = gibbs_state(t, s, T::zero(), beta)?;
    let q = |h: T| -> Result<T> { log_rate(&rho0, &gibbs_state(t, s, h, beta)?, h) };
    let coarse = q(h)?;
    let fine = q(h * T::lit(0.5))?;
    Ok(T::lit(2.0) * fine - coarse)
}

/// `2(−ln F(ρ(x − h/2), ρ(x + h/2)))/h²` with one Richardson step; the
/// quotient is even in `h`.
pub fn chi_f_fd_two_sided<T: Real>(
    t: &HermitianOperator<T>,
    s: &HermitianOperator<T>,
    beta: T,
    h: Option<T>,
    x: T,
) -> Result<T> {
    check_beta(beta)?;
    check_dim(t.dim(), s.dim())?;
    let h = resolve_step(s, beta, h)?;
    let half = T::lit(0.5);
    let q = |h: T| -> Result<T> {
        log_rate(
            &gibbs_state(t, s, x - half * h, beta)?,
            &gibbs_state(t, s, x + half * h, beta)?,
            h,
        )
    };
    let coarse = q(h)?;
    let fine = q(h * half)?;
    Ok((T::lit(4.0) * fine - coarse) / T::lit(3.0))
}

/// Second-order expansion of `F(ρ(x − y), ρ(x + y))` around `ρ(x)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionCheck<T> {
    pub x: T,
    pub y: T,
    /// Trace of the first-order correction `X` to the square root.
    #[serde(rename = "trace_X")]
    pub trace_x: T,
    /// `max |X_{mn} − X^{closed}_{mn}|` between the solved and closed-form `X`.
    #[serde(rename = "X_closed_form_defect")]
    pub x_closed_form_defect: T,
    /// `Tr Y = −y² Σ |ρ′_{mn}|² / (ρ_m + ρ_n)`.
    #[serde(rename = "trace_Y")]
    pub trace_y: T,
    pub fidelity_direct: T,
    pub fidelity_expansion: T,
    /// Slope `p` of `|F_direct − F_expansion| ∝ y^p` from `y` and `y/2`;
    /// absent when both residuals sit at the rounding floor.
    pub residual_order: Option<T>,
}

struct ExpansionTerms<T> {
    trace_x: T,
    x_defect: T,
    trace_y: T,
}

fn expansion_terms<T: Real>(rp: &RhoPrime<T>, y: T) -> ExpansionTerms<T> {
    let ens = &rp.ensemble;
    let dim = ens.dim();
    let rho = ens.weights();
    let norm = ens.z_shifted().sqrt();
    let half = T::lit(0.5);
    let root: Vec<T> = (0..dim)
        .map(|n| (-half * ens.beta() * ens.shifted_energy(n)).exp() / norm)
        .collect();
    let mut trace_x = Vec::with_capacity(dim);
    let mut x_defect = T::zero();
    let mut trace_y = Vec::with_capacity(dim * dim);
    for m in 0..dim {
        for n in 0..dim {
            let d = rp.elements[(m, n)];
            let denom = rho[m] + rho[n];
            if !(denom > T::zero()) {
                continue;
            }
            // A solves ρ^{1/2}A + Aρ^{1/2} = yρ′; X solves ρX + Xρ = rhs
            let a = d * (y / (root[m] + root[n]));
            let rhs = -a * (root[m].powi(3) + root[n].powi(3)) + d * (y * root[m] * root[n]);
            let x = rhs / cplx(denom);
            let gap = root[m] - root[n];
            let closed = d * (-y * gap * gap / denom);
            x_defect = x_defect.max(modulus(x - closed));
            if m == n {
                trace_x.push(x.re);
            }
            trace_y.push(d.norm_sqr() / denom);
        }
    }
    ExpansionTerms {
        trace_x: ksum(trace_x),
        x_defect,
        trace_y: -y * y * ksum(trace_y),
    }
}

/// Builds `X` and `Tr Y` in the eigenbasis of `H(x)`, compares
/// `1 + Tr Y` with the directly computed fidelity at `y` and `y/2`.
pub fn expansion_check<T: Real>(
    t: &HermitianOperator<T>,
    s: &HermitianOperator<T>,
    beta: T,
    x: T,
    y: T,
) -> Result<ExpansionCheck<T>> {
    if !(y >= T::zero()) || !y.is_finite_val() {
        return Err(param("y", format!("must be nonnegative, got {y}")));
    }
    let rp = rho_prime(t, s, beta, x)?;
    let terms = expansion_terms(&rp, y);
    let direct = |y: T| -> Result<T> {
        if y == T::zero() {
            return Ok(T::one());
        }
        uhlmann_fidelity(
            &gibbs_state(t, s, x - y, beta)?,
            &gibbs_state(t, s, x + y, beta)?,
        )
    };
    let fidelity_direct = direct(y)?;
    let fidelity_expansion = T::one() + terms.trace_y;
    let residual_order = if y == T::zero() {
        None
    } else {
        let half = T::lit(0.5);
        let r_coarse = (fidelity_direct - fidelity_expansion).abs();
        let r_fine =
            (direct(y * half)? - (T::one() + expansion_terms(&rp, y * half).trace_y)).abs();
        let floor = T::lit(64.0) * T::default_epsilon();
        (r_coarse > floor && r_fine > floor).then(|| (r_coarse / r_fine).ln() / T::lit(2.0).ln())
    };
    Ok(ExpansionCheck {
        x,
        y,
        trace_x: terms.trace_x,
        x_closed_form_defect: terms.x_defect,
        trace_y: terms.trace_y,
        fidelity_direct,
        fidelity_expansion,
        residual_order,
    })
}

/// Default expansion parameter `0.1 / (β‖S‖₂)` (or `0.1` when `S = 0`):
/// the states depend on `βyS`, and the `y⁴` residual must stay well above
/// rounding for its slope to be measurable.
pub fn default_expansion_step<T: Real>(s: &HermitianOperator<T>, beta: T) -> Result<T> {
    let scale = beta * s.spectral_norm()?;
    Ok(if scale > T::zero() {
        T::lit(0.1) / scale
    } else {
        T::lit(0.1)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FidelityBounds<T> {
    /// `upper − (β³/48)⟨[[S,T],S]⟩₀`
    pub lower: T,
    /// `(β²/4)(δS;δS)₀`
    pub upper: T,
    /// `⟨[[S,T],S]⟩₀`
    pub double_commutator: T,
}

/// Bounds on `χ_F` at `x = 0` from the Duhamel product of `δS = S − ⟨S⟩₀`.
pub fn chi_f_bounds<T: Real>(
    t: &HermitianOperator<T>,
    s: &HermitianOperator<T>,
    beta: T,
) -> Result<FidelityBounds<T>> {
    check_dim(t.dim(), s.dim())?;
    let ens = decompose(t, beta)?;
    let sb = ens.to_eigenbasis(s.matrix())?;
    let ds = sb.minus_scalar(ens.expectation(&sb));
    let upper = beta * beta / T::lit(4.0) * bd_inner(&ds, &ds, &ens)?.re;
    let dc_op = commutator(&commutator(s.matrix(), t.matrix()), s.matrix());
    let double_commutator = ens.expectation(&ens.to_eigenbasis(&dc_op)?).re;
    let lower = upper - beta.powi(3) / T::lit(48.0) * double_commutator;
    Ok(FidelityBounds {
        lower,
        upper,
        double_commutator,
    })
}
