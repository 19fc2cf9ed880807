//! Both sides of the classical and generalized fluctuation inequalities,
//! with slack and a pass verdict.
//!
//! The classical forms are assembled from operator expressions (commutators,
//! Duhamel products of `R_k`), the generalized ones from spectral sums over
//! `F_n`, so the `n = 0`, `k = 1` specializations compare two independent
//! routes.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::duhamel::{bd_inner, commutator_chain, functional_direct, weighted_sum};
use crate::error::{param, Result};
use crate::scalar::{ksum, Real, C};
use crate::spectral::{decompose, CMatrix, GibbsEnsemble, HermitianOperator, ObservableInBasis};

pub const MAX_ORDER: usize = 3;
pub const MAX_K: usize = 3;
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityKind {
    Harris,
    Ginibre,
    BogoliubovJr,
    Plechko,
    Bpr,
    GenHarris,
    GenPlechko,
    GenGinibre,
    GenBpr,
}

impl InequalityKind {
    pub const ALL: [InequalityKind; 9] = [
        InequalityKind::Harris,
        InequalityKind::Ginibre,
        InequalityKind::BogoliubovJr,
        InequalityKind::Plechko,
        InequalityKind::Bpr,
        InequalityKind::GenHarris,
        InequalityKind::GenPlechko,
        InequalityKind::GenGinibre,
        InequalityKind::GenBpr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InequalityKind::Harris => "harris",
            InequalityKind::Ginibre => "ginibre",
            InequalityKind::BogoliubovJr => "bogoliubov_jr",
            InequalityKind::Plechko => "plechko",
            InequalityKind::Bpr => "bpr",
            InequalityKind::GenHarris => "gen_harris",
            InequalityKind::GenPlechko => "gen_plechko",
            InequalityKind::GenGinibre => "gen_ginibre",
            InequalityKind::GenBpr => "gen_bpr",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.replace('-', "_"))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct InequalityParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    pub beta: f64,
}

/// `lhs ≤ mid ≤ rhs` (or `lhs ≤ rhs` when there is no middle term).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityReport<T> {
    pub name: InequalityKind,
    pub params: InequalityParams,
    pub lhs: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mid: Option<T>,
    pub rhs: T,
    /// `mid − lhs`, three-part chains only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slack_left: Option<T>,
    /// `rhs − mid`, or `rhs − lhs` without a middle term.
    pub slack_right: T,
    pub pass: bool,
    pub tol: T,
}

impl<T: Real> InequalityReport<T> {
    fn chain(
        name: InequalityKind,
        params: InequalityParams,
        lhs: T,
        mid: Option<T>,
        rhs: T,
        tol: T,
    ) -> Self {
        let (slack_left, slack_right) = match mid {
            Some(m) => (Some(m - lhs), rhs - m),
            None => (None, rhs - lhs),
        };
        let mut report = Self {
            name,
            params,
            lhs,
            mid,
            rhs,
            slack_left,
            slack_right,
            pass: false,
            tol,
        };
        report.pass = report.relative_slack() >= -tol;
        report
    }

    /// `max(1, |lhs|, |rhs|)`.
    pub fn scale(&self) -> T {
        T::one().max(self.lhs.abs()).max(self.rhs.abs())
    }

    /// Smallest slack divided by [`scale`](Self::scale); non-finite values map to −∞.
    pub fn relative_slack(&self) -> T {
        let worst = match self.slack_left {
            Some(l) => l.min(self.slack_right),
            None => self.slack_right,
        };
        let v = worst / self.scale();
        if v.is_finite_val() {
            v
        } else {
            -T::lit(f64::INFINITY)
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n > MAX_ORDER {
        return Err(param("n", format!("must be at most {MAX_ORDER}, got {n}")));
    }
    Ok(())
}

fn check_k(k: usize) -> Result<()> {
    if !(1..=MAX_K).contains(&k) {
        return Err(param("k", format!("must lie in 1..={MAX_K}, got {k}")));
    }
    Ok(())
}

/// Real, clamped at zero: averages of positive operators can round to `−ε`.
fn nonneg<T: Real>(x: T) -> T {
    x.max(T::zero())
}

fn params<T: Real>(ens: &GibbsEnsemble<T>) -> InequalityParams {
    InequalityParams {
        beta: ens.beta().as_f64(),
        ..Default::default()
    }
}

/// Operator expressions in the eigenbasis, with `H = diag(E)`.
struct OperatorForms<'a, T: Real> {
    j: &'a ObservableInBasis<T>,
    ens: &'a GibbsEnsemble<T>,
    energy: HermitianOperator<T>,
}

impl<'a, T: Real> OperatorForms<'a, T> {
    fn new(j: &'a ObservableInBasis<T>, ens: &'a GibbsEnsemble<T>) -> Result<Self> {
        crate::spectral::check_dim(ens.dim(), j.dim())?;
        Ok(Self {
            j,
            ens,
            energy: HermitianOperator::diagonal(ens.eigenvalues())?,
        })
    }

    fn avg(&self, m: &CMatrix<T>) -> C<T> {
        let rho = self.ens.weights();
        C::new(
            ksum((0..self.ens.dim()).map(|n| rho[n] * m[(n, n)].re)),
            ksum((0..self.ens.dim()).map(|n| rho[n] * m[(n, n)].im)),
        )
    }

    /// `(J;J)`
    fn duhamel(&self) -> Result<T> {
        Ok(bd_inner(self.j, self.j, self.ens)?.re)
    }

    /// `⟨JJ† + J†J⟩`
    fn anticommutator(&self) -> T {
        let j = self.j.elements();
        let jd = j.adjoint();
        self.avg(&(j * &jd + &jd * j)).re
    }

    /// `⟨[[J†, H], J]⟩`
    fn double_commutator(&self) -> T {
        let j = self.j.elements();
        let h = self.energy.matrix();
        let inner = crate::spectral::commutator(&j.adjoint(), h);
        self.avg(&crate::spectral::commutator(&inner, j)).re
    }

    /// `⟨R_k R_k† + R_k† R_k⟩`
    fn chain_anticommutator(&self, k: usize) -> Result<T> {
        let r = commutator_chain(self.j.elements(), &self.energy, k)?;
        let rd = r.adjoint();
        Ok(self.avg(&(&r * &rd + &rd * &r)).re)
    }

    /// `(R_k;R_k)`
    fn chain_duhamel(&self, k: usize) -> Result<T> {
        let r = ObservableInBasis::from_elements(commutator_chain(
            self.j.elements(),
            &self.energy,
            k,
        )?)?;
        Ok(bd_inner(&r, &r, self.ens)?.re)
    }
}

/// `(J;J) ≤ ½⟨JJ† + J†J⟩ ≤ (J;J) + (β/12)⟨[[J†,H],J]⟩`.
pub fn check_harris<T: Real>(
    j: &ObservableInBasis<T>,
    ens: &GibbsEnsemble<T>,
    tol: T,
) -> Result<InequalityReport<T>> {
    let ops = OperatorForms::new(j, ens)?;
    let jj = ops.duhamel()?;
    let mid = T::lit(0.5) * ops.anticommutator();
    let rhs = jj + ens.beta() / T::lit(12.0) * ops.double_commutator();
    Ok(InequalityReport::chain(
        InequalityKind::Harris,
        params(ens),
        jj,
        Some(mid),
        rhs,
        tol,
    ))
}

/// `(J;J) ≤ ½⟨JJ† + J†J⟩ ≤ (J;J) + ½{(J;J)β⟨[[J†,H],J]⟩}^{1/2}`.
pub fn check_ginibre<T: Real>(
    j: &ObservableInBasis<T>,
    ens: &GibbsEnsemble<T>,
    tol: T,
) -> Result<InequalityReport<T>> {
    let ops = OperatorForms::new(j, ens)?;
    let jj = ops.duhamel()?;
    let mid = T::lit(0.5) * ops.anticommutator();
    let rhs = jj + T::lit(0.5) * nonneg(jj * ens.beta() * ops.double_commutator()).sqrt();
    Ok(InequalityReport::chain(
        InequalityKind::Ginibre,
        params(ens),
        jj,
        Some(mid),
        rhs,
        tol,
    ))
}

/// `½⟨JJ† + J†J⟩ ≤ (J;J) + ½[(J;J)β]^{2/3}⟨[J†,H][H,J] + [H,J][J†,H]⟩^{1/3}`.
pub fn check_bogoliubov_jr<T: Real>(
    j: &ObservableInBasis<T>,
    ens: &GibbsEnsemble<T>,
    tol: T,
) -> Result<InequalityReport<T>> {
    let ops = OperatorForms::new(j, ens)?;
    let jj = ops.duhamel()?;
    let lhs = T::lit(0.5) * ops.anticommutator();
    // [H,J] = R_1 and [J†,H] = R_1†, so the bracket is ⟨R_1†R_1 + R_1R_1†⟩
    let bracket = ops.chain_anticommutator(1)?;
    let rhs = jj
        + T::lit(0.5)
            * nonneg(jj * ens.beta()).powf(T::lit(2.0 / 3.0))
            * nonneg(bracket).powf(T::lit(1.0 / 3.0));
    Ok(InequalityReport::chain(
        InequalityKind::BogoliubovJr,
        params(ens),
        lhs,
        None,
        rhs,
        tol,
    ))
}

/// `(J;J) ≤ ½⟨JJ† + J†J⟩ ≤ (J;J) + ½(J;J)^{(2k−1)/2k} β (R_k;R_k)^{1/2k}`.
pub fn check_plechko<T: Real>(
    j: &ObservableInBasis<T>,
    ens: &GibbsEnsemble<T>,
    k: usize,
    tol: T,
) -> Result<InequalityReport<T>> {
    check_k(k)?;
    let ops = OperatorForms::new(j, ens)?;
    let jj = ops.duhamel()?;
    let mid = T::lit(0.5) * ops.anticommutator();
    let two_k = T::lit(2.0 * k as f64);
    let rhs = jj
        + T::lit(0.5)
            * nonneg(jj).powf((two_k - T::one()) / two_k)
            * ens.beta()
            * nonneg(ops.chain_duhamel(k)?).powf(T::one() / two_k);
    let p = InequalityParams {
        k: Some(k),
        ..params(ens)
    };
    Ok(InequalityReport::chain(
        InequalityKind::Plechko,
        p,
        jj,
        Some(mid),
        rhs,
        tol,
    ))
}

/// `½⟨JJ† + J†J⟩ ≤ (J;J) + ½(J;J)^{2k/(2k+1)} {β^{2k}⟨R_kR_k† + R_k†R_k⟩}^{1/(2k+1)}`.
pub fn check_bpr<T: Real>(
    j: &ObservableInBasis<T>,
    ens: &GibbsEnsemble<T>,
    k: usize,
    tol: T,
) -> Result<InequalityReport<T>> {
    check_k(k)?;
    let ops = OperatorForms::new(j, ens)?;
    let jj = ops.duhamel()?;
    let lhs = T::lit(0.5) * ops.anticommutator();
    let odd = T::lit(2.0 * k as f64 + 1.0);
    let bracket = ens.beta().powi(2 * k as i32) * ops.chain_anticommutator(k)?;
    let rhs = jj
        + T::lit(0.5)
            * nonneg(jj).powf((odd - T::one()) / odd)
            * nonneg(bracket).powf(T::one() / odd);
    let p = InequalityParams {
        k: Some(k),
        ..params(ens)
    };
    Ok(InequalityReport::chain(
        InequalityKind::Bpr,
        p,
        lhs,
        None,
        rhs,
        tol,
    ))
}

/// `F_{2n} ≤ ½F_{2n+1} ≤ F_{2n} + F_{2n+2}/12`.
pub fn check_harris_gen<T: Real>(
    j: &ObservableInBasis<T>,
    ens: &GibbsEnsemble<T>,
    n: usize,
    tol: T,
) -> Result<InequalityReport<T>> {
    check_n(n)?;
    let f_even = functional_direct(j, ens, 2 * n)?;
    let f_odd = functional_direct(j, ens, 2 * n + 1)?;
    let f_next = functional_direct(j, ens, 2 * n + 2)?;
    let mid = T::lit(0.5) * f_odd;
    let rhs = f_even + f_next / T::lit(12.0);
    let p = InequalityParams {
        n: Some(n),
        ..params(ens)
    };
    Ok(InequalityReport::chain(
        InequalityKind::GenHarris,
        p,
        f_even,
        Some(mid),
        rhs,
        tol,
    ))
}

/// Hölder term `{Z⁻¹ Σ |J_{ml}|² K_{ml} [β|E_m − E_l|]^{(2n+1)q}}^{1/q}` with
/// `K` the Duhamel kernel.
fn holder_moment<T: Real>(j: &ObservableInBasis<T>, ens: &GibbsEnsemble<T>, n: usize, q: T) -> T {
    let exponent = T::lit(2.0 * n as f64 + 1.0) * q;
    let w = crate::duhamel::SpectralWeight::new(
        crate::duhamel::WeightBase::Duhamel,
        crate::duhamel::GapPower::Abs(exponent),
    );
    let sum = weighted_sum(
        ens,
        |m, l| j.abs2(m, l),
        |em, el, beta| w.eval(em, el, beta),
    );
    nonneg(sum).powf(T::one() / q)
}

/// `(2Z)⁻¹ Σ |J_{ml}|² |e^{−βE_l} − e^{−βE_m}| [β(E_m − E_l)]^{2n}
///   ≤ ½(J;J)^{1/p} {Z⁻¹ Σ |J_{ml}|² K_{ml} [β|E_m − E_l|]^{(2n+1)q}}^{1/q}`.
pub fn check_plechko_gen<T: Real>(
    j: &ObservableInBasis<T>,
    ens: &GibbsEnsemble<T>,
    n: usize,
    p: T,
    tol: T,
) -> Result<InequalityReport<T>> {
    check_n(n)?;
    if !(p > T::one()) || !p.is_finite_val() {
        return Err(param("p", format!("must exceed 1, got {p}")));
    }
    let q = p / (p - T::one());
    let w = crate::duhamel::SpectralWeight::new(
        crate::duhamel::WeightBase::AbsDifference,
        crate::duhamel::GapPower::Even(n as u32),
    );
    let lhs = T::lit(0.5)
        * weighted_sum(
            ens,
            |m, l| j.abs2(m, l),
            |em, el, beta| w.eval(em, el, beta),
        );
    let jj = functional_direct(j, ens, 0)?;
    let rhs = T::lit(0.5) * nonneg(jj).powf(T::one() / p) * holder_moment(j, ens, n, q);
    let params = InequalityParams {
        n: Some(n),
        p: Some(p.as_f64()),
        q: Some(q.as_f64()),
        ..params(ens)
    };
    Ok(InequalityReport::chain(
        InequalityKind::GenPlechko,
        params,
        lhs,
        None,
        rhs,
        tol,
    ))
}

/// `F_{2n} ≤ ½F_{2n+1} ≤ F_{2n} + ½(J;J)^{(2k−1)/2k} [F_{2k(2n+1)}]^{1/2k}`.
pub fn check_ginibre_gen<T: Real>(
    j: &ObservableInBasis<T>,
    ens: &GibbsEnsemble<T>,
    n: usize,
    k: usize,
    tol: T,
) -> Result<InequalityReport<T>> {
    check_n(n)?;
    check_k(k)?;
    let f_even = functional_direct(j, ens, 2 * n)?;
    let f_odd = functional_direct(j, ens, 2 * n + 1)?;
    let jj = functional_direct(j, ens, 0)?;
    let high = functional_direct(j, ens, 2 * k * (2 * n + 1))?;
    let two_k = T::lit(2.0 * k as f64);
    let rhs = f_even
        + T::lit(0.5)
            * nonneg(jj).powf((two_k - T::one()) / two_k)
            * nonneg(high).powf(T::one() / two_k);
    let p = InequalityParams {
        n: Some(n),
        k: Some(k),
        ..params(ens)
    };
    Ok(InequalityReport::chain(
        InequalityKind::GenGinibre,
        p,
        f_even,
        Some(T::lit(0.5) * f_odd),
        rhs,
        tol,
    ))
}

/// `½F_{2n+1} ≤ F_{2n} + ½(J;J)^{2k/(2k+1)} [F_{2(2nk+n+k)+1}]^{1/(2k+1)}`.
pub fn check_bpr_gen<T: Real>(
    j: &ObservableInBasis<T>,
    ens: &GibbsEnsemble<T>,
    n: usize,
    k: usize,
    tol: T,
) -> Result<InequalityReport<T>> {
    check_n(n)?;
    check_k(k)?;
    let f_even = functional_direct(j, ens, 2 * n)?;
    let f_odd = functional_direct(j, ens, 2 * n + 1)?;
    let jj = functional_direct(j, ens, 0)?;
    let high = functional_direct(j, ens, 2 * (2 * n * k + n + k) + 1)?;
    let odd = T::lit(2.0 * k as f64 + 1.0);
    let rhs = f_even
        + T::lit(0.5) * nonneg(jj).powf((odd - T::one()) / odd) * nonneg(high).powf(T::one() / odd);
    let p = InequalityParams {
        n: Some(n),
        k: Some(k),
        ..params(ens)
    };
    Ok(InequalityReport::chain(
        InequalityKind::GenBpr,
        p,
        T::lit(0.5) * f_odd,
        None,
        rhs,
        tol,
    ))
}

/// Which families and parameter values a campaign sweeps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    pub families: Vec<InequalityKind>,
    /// `n` values for the generalized families.
    pub orders: Vec<usize>,
    /// `k` values for plechko, bpr, gen_ginibre, gen_bpr.
    pub ks: Vec<usize>,
    /// Hölder exponents for gen_plechko.
    pub ps: Vec<f64>,
}

impl Default for ParamGrid {
    fn default() -> Self {
        Self {
            families: InequalityKind::ALL.to_vec(),
            orders: vec![0, 1, 2],
            ks: vec![1, 2, 3],
            ps: vec![1.25, 1.5, 2.0, 3.0],
        }
    }
}

impl ParamGrid {
    pub fn empty() -> Self {
        Self {
            families: Vec::new(),
            orders: Vec::new(),
            ks: Vec::new(),
            ps: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.orders.iter().try_for_each(|&n| check_n(n))?;
        self.ks.iter().try_for_each(|&k| check_k(k))?;
        if let Some(p) = self.ps.iter().find(|p| !(**p > 1.0) || !p.is_finite()) {
            return Err(param("p", format!("must exceed 1, got {p}")));
        }
        Ok(())
    }
}

/// Every report the grid asks for on one `(J, ensemble)` pair.
pub fn evaluate_grid<T: Real>(
    j: &ObservableInBasis<T>,
    ens: &GibbsEnsemble<T>,
    grid: &ParamGrid,
    tol: T,
) -> Result<Vec<InequalityReport<T>>> {
    let mut out = Vec::new();
    for &family in &grid.families {
        match family {
            InequalityKind::Harris => out.push(check_harris(j, ens, tol)?),
            InequalityKind::Ginibre => out.push(check_ginibre(j, ens, tol)?),
            InequalityKind::BogoliubovJr => out.push(check_bogoliubov_jr(j, ens, tol)?),
            InequalityKind::Plechko => {
                for &k in &grid.ks {
                    out.push(check_plechko(j, ens, k, tol)?);
                }
            }
            InequalityKind::Bpr => {
                for &k in &grid.ks {
                    out.push(check_bpr(j, ens, k, tol)?);
                }
            }
            InequalityKind::GenHarris => {
                for &n in &grid.orders {
                    out.push(check_harris_gen(j, ens, n, tol)?);
                }
            }
            InequalityKind::GenPlechko => {
                for &n in &grid.orders {
                    for &p in &grid.ps {
                        out.push(check_plechko_gen(j, ens, n, T::lit(p), tol)?);
                    }
                }
            }
            InequalityKind::GenGinibre => {
                for &n in &grid.orders {
                    for &k in &grid.ks {
                        out.push(check_ginibre_gen(j, ens, n, k, tol)?);
                    }
                }
            }
            InequalityKind::GenBpr => {
                for &n in &grid.orders {
                    for &k in &grid.ks {
                        out.push(check_bpr_gen(j, ens, n, k, tol)?);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Provenance of one campaign instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceTag {
    pub index: usize,
    pub model: String,
    pub seed: u64,
    pub trial: u64,
    pub beta: f64,
}

/// One `(H, J, β)` triple of a campaign.
#[derive(Clone, Debug)]
pub struct SuiteInstance<T: Real> {
    pub tag: InstanceTag,
    pub hamiltonian: HermitianOperator<T>,
    pub observable: CMatrix<T>,
    pub beta: T,
}

/// Aggregate over one check family.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FamilyAggregate {
    pub count: usize,
    pub pass_count: usize,
    /// Smallest `slack / scale` seen.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_slack: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_instance: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_instance_seed: Option<u64>,
}

impl FamilyAggregate {
    pub fn record(&mut self, slack: f64, pass: bool, tag: &InstanceTag) {
        self.count += 1;
        if pass {
            self.pass_count += 1;
        }
        let slack = if slack.is_nan() {
            f64::NEG_INFINITY
        } else {
            slack
        };
        if self.worst_slack.is_none_or(|w| slack < w) {
            self.worst_slack = Some(slack);
            self.worst_instance = Some(tag.index);
            self.worst_instance_seed = Some(tag.seed);
        }
    }

    pub fn all_pass(&self) -> bool {
        self.pass_count == self.count
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceRecord<T> {
    pub tag: InstanceTag,
    pub reports: Vec<InequalityReport<T>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport<T> {
    pub families: BTreeMap<String, FamilyAggregate>,
    pub instances: Vec<InstanceRecord<T>>,
    /// Indices (into `instances`) of records with a failed check or an error.
    pub failing: Vec<usize>,
}

impl<T> SuiteReport<T> {
    pub fn all_pass(&self) -> bool {
        self.failing.is_empty() && self.families.values().all(FamilyAggregate::all_pass)
    }
}

fn evaluate_instance<T: Real>(
    inst: &SuiteInstance<T>,
    grid: &ParamGrid,
    tol: T,
) -> Result<Vec<InequalityReport<T>>> {
    let ens = decompose(&inst.hamiltonian, inst.beta)?;
    let j = ens.to_eigenbasis(&inst.observable)?;
    evaluate_grid(&j, &ens, grid, tol)
}

/// Runs the grid over every instance; instances are evaluated in parallel and
/// merged in index order. Per-instance failures are recorded, not returned;
/// only an invalid grid is an error.
pub fn run_suite<T: Real>(
    instances: &[SuiteInstance<T>],
    grid: &ParamGrid,
    tol: T,
) -> Result<SuiteReport<T>> {
    grid.validate()?;
    let records: Vec<InstanceRecord<T>> = instances
        .par_iter()
        .map(|inst| match evaluate_instance(inst, grid, tol) {
            Ok(reports) => InstanceRecord {
                tag: inst.tag.clone(),
                reports,
                error: None,
            },
            Err(e) => InstanceRecord {
                tag: inst.tag.clone(),
                reports: Vec::new(),
                error: Some(e.to_string()),
            },
        })
        .collect();
    let mut families: BTreeMap<String, FamilyAggregate> = BTreeMap::new();
    let mut failing = Vec::new();
    for (i, rec) in records.iter().enumerate() {
        let mut failed = rec.error.is_some();
        for r in &rec.reports {
            families
                .entry(r.name.name().to_string())
                .or_default()
                .record(r.relative_slack().as_f64(), r.pass, &rec.tag);
            failed |= !r.pass;
        }
        if failed {
            failing.push(i);
        }
    }
    Ok(SuiteReport {
        families,
        instances: records,
        failing,
    })
}
