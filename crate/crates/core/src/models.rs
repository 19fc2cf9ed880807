//! Test Hamiltonian pairs `(T, S)`: the perturbed family is `H(h) = T − hS`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::scalar::{cplx, Real, C};
use crate::spectral::{CMatrix, HermitianOperator};

pub const MAX_ISING_SITES: usize = 10;
pub const MAX_DICKE_BOSONS: usize = 30;
pub const MAX_DICKE_SPINS: usize = 4;
pub const MAX_RANDOM_DIM: usize = 64;

/// A model family plus its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ModelSpec {
    SingleSpin {
        delta: f64,
    },
    IsingChain {
        n_sites: usize,
        coupling: f64,
        field: f64,
    },
    Dicke {
        n_max: usize,
        n_spins: usize,
        omega: f64,
        omega0: f64,
        lambda: f64,
    },
    Random {
        dim: usize,
    },
}

/// The pair `(T, S)` produced by a model factory.
#[derive(Clone, Debug)]
pub struct ModelPair<T: Real> {
    pub t: HermitianOperator<T>,
    pub s: HermitianOperator<T>,
}

impl ModelSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelSpec::SingleSpin { .. } => "single_spin",
            ModelSpec::IsingChain { .. } => "ising_chain",
            ModelSpec::Dicke { .. } => "dicke",
            ModelSpec::Random { .. } => "random",
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            ModelSpec::SingleSpin { .. } => 2,
            ModelSpec::IsingChain { n_sites, .. } => 1 << n_sites,
            ModelSpec::Dicke { n_max, n_spins, .. } => (n_max + 1) << n_spins,
            ModelSpec::Random { dim } => dim,
        }
    }

    /// Whether different instance indices yield different operators.
    pub fn is_random(&self) -> bool {
        matches!(self, ModelSpec::Random { .. })
    }

    /// Human-readable statement of the operator convention, echoed in reports.
    pub fn convention(&self) -> String {
        match self {
            ModelSpec::SingleSpin { .. } => "T = (delta/2) sz, S = sx".into(),
            ModelSpec::IsingChain { .. } => {
                "T = -coupling sum_i sz_i sz_(i+1) - field sum_i sx_i (open chain), S = (1/n_sites) sum_i sx_i".into()
            }
            ModelSpec::Dicke { .. } => "T = omega a^dag a + (omega0/2) sum_i sz_i, \
                 S = (lambda/sqrt(n_spins)) (a + a^dag) sum_i sx_i, boson space truncated at n_max quanta; \
                 basis order boson (x) spin_1 (x) ... (x) spin_N"
                .into(),
            ModelSpec::Random { .. } => {
                "T, S independent (G + G^dag)/2 with G standard complex normal, ChaCha8 stream = instance index".into()
            }
        }
    }

    /// Builds the operator pair; `seed`/`index` only matter for random models.
    pub fn build<T: Real>(&self, seed: u64, index: u64) -> Result<ModelPair<T>> {
        match *self {
            ModelSpec::SingleSpin { delta } => single_spin(T::lit(delta)),
            ModelSpec::IsingChain {
                n_sites,
                coupling,
                field,
            } => ising_chain(n_sites, T::lit(coupling), T::lit(field)),
            ModelSpec::Dicke {
                n_max,
                n_spins,
                omega,
                omega0,
                lambda,
            } => dicke_truncated(
                n_max,
                n_spins,
                T::lit(omega),
                T::lit(omega0),
                T::lit(lambda),
            ),
            ModelSpec::Random { dim } => random_pair(dim, seed, index),
        }
    }
}

fn c<T: Real>(re: f64, im: f64) -> C<T> {
    C::new(T::lit(re), T::lit(im))
}

pub fn pauli_x<T: Real>() -> CMatrix<T> {
    DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn pauli_y<T: Real>() -> CMatrix<T> {
    DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn pauli_z<T: Real>() -> CMatrix<T> {
    DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

/// `op` acting on `site` of an `n_sites` spin-1/2 register (site 0 is the
/// most significant factor).
fn site_operator<T: Real>(op: &CMatrix<T>, site: usize, n_sites: usize) -> CMatrix<T> {
    let mut acc = CMatrix::<T>::identity(1, 1);
    for i in 0..n_sites {
        acc = if i == site {
            acc.kronecker(op)
        } else {
            acc.kronecker(&CMatrix::identity(2, 2))
        };
    }
    acc
}

/// `T = (Δ/2)σ_z`, `S = σ_x`.
pub fn single_spin<T: Real>(delta: T) -> Result<ModelPair<T>> {
    if !(delta > T::zero()) || !delta.is_finite_val() {
        return Err(param("delta", format!("must be positive, got {delta}")));
    }
    let half = delta * T::lit(0.5);
    Ok(ModelPair {
        t: HermitianOperator::new(pauli_z::<T>().map(|z| z * half))?,
        s: HermitianOperator::new(pauli_x())?,
    })
}

/// Open transverse-field Ising chain with intensive perturbation
/// `S = (1/N) Σ σ_x^i`.
pub fn ising_chain<T: Real>(n_sites: usize, coupling: T, field: T) -> Result<ModelPair<T>> {
    if !(2..=MAX_ISING_SITES).contains(&n_sites) {
        return Err(param(
            "n_sites",
            format!("must lie in 2..={MAX_ISING_SITES}, got {n_sites}"),
        ));
    }
    let dim = 1 << n_sites;
    let sx = pauli_x::<T>();
    let sz = pauli_z::<T>();
    let mut t = CMatrix::<T>::zeros(dim, dim);
    let mut s = CMatrix::<T>::zeros(dim, dim);
    for i in 0..n_sites {
        let x_i = site_operator(&sx, i, n_sites);
        t -= x_i.map(|z| z * field);
        s += &x_i;
        if i + 1 < n_sites {
            let zz = site_operator(&sz, i, n_sites) * site_operator(&sz, i + 1, n_sites);
            t -= zz.map(|z| z * coupling);
        }
    }
    let inv_n = T::one() / T::lit(n_sites as f64);
    Ok(ModelPair {
        t: HermitianOperator::new(t)?,
        s: HermitianOperator::new(s.map(|z| z * inv_n))?,
    })
}

/// Single-mode Dicke model with the boson space cut off at `n_max` quanta.
pub fn dicke_truncated<T: Real>(
    n_max: usize,
    n_spins: usize,
    omega: T,
    omega0: T,
    lambda: T,
) -> Result<ModelPair<T>> {
    if !(1..=MAX_DICKE_BOSONS).contains(&n_max) {
        return Err(param(
            "n_max",
            format!("must lie in 1..={MAX_DICKE_BOSONS}, got {n_max}"),
        ));
    }
    if !(1..=MAX_DICKE_SPINS).contains(&n_spins) {
        return Err(param(
            "n_spins",
            format!("must lie in 1..={MAX_DICKE_SPINS}, got {n_spins}"),
        ));
    }
    let nb = n_max + 1;
    let annihilate = CMatrix::<T>::from_fn(nb, nb, |r, col| {
        if col == r + 1 {
            cplx(T::lit(col as f64).sqrt())
        } else {
            cplx(T::zero())
        }
    });
    let number = annihilate.adjoint() * &annihilate;
    let quadrature = &annihilate + annihilate.adjoint();
    let spin_dim = 1 << n_spins;
    let mut jz = CMatrix::<T>::zeros(spin_dim, spin_dim);
    let mut jx = CMatrix::<T>::zeros(spin_dim, spin_dim);
    for i in 0..n_spins {
        jz += site_operator(&pauli_z::<T>(), i, n_spins);
        jx += site_operator(&pauli_x::<T>(), i, n_spins);
    }
    let t = number
        .map(|z| z * omega)
        .kronecker(&CMatrix::identity(spin_dim, spin_dim))
        + CMatrix::<T>::identity(nb, nb).kronecker(&jz.map(|z| z * omega0 * T::lit(0.5)));
    let coupling = lambda / T::lit(n_spins as f64).sqrt();
    let s = quadrature.kronecker(&jx).map(|z| z * coupling);
    Ok(ModelPair {
        t: HermitianOperator::new(t)?,
        s: HermitianOperator::new(s)?,
    })
}

/// Generator for instance `index` of a campaign seeded with `seed`; each index
/// is an independent ChaCha8 stream, so instances can be drawn in any order.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Matrix of i.i.d. standard complex normals (`E|G_ij|² = 1`).
pub fn complex_gaussian<T: Real>(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix<T> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re * scale, im * scale)
    })
}

/// `(G + G†)/2` with `G` standard complex normal.
pub fn random_hermitian<T: Real>(dim: usize, rng: &mut ChaCha8Rng) -> Result<HermitianOperator<T>> {
    let g = complex_gaussian::<T>(dim, rng);
    let half = T::lit(0.5);
    HermitianOperator::new((&g + g.adjoint()).map(|z| z * half))
}

/// Independent random Hermitian `T` and `S`; bit-identical for identical
/// `(dim, seed, index)`.
pub fn random_pair<T: Real>(dim: usize, seed: u64, index: u64) -> Result<ModelPair<T>> {
    if !(2..=MAX_RANDOM_DIM).contains(&dim) {
        return Err(param(
            "dim",
            format!("must lie in 2..={MAX_RANDOM_DIM}, got {dim}"),
        ));
    }
    let mut rng = instance_rng(seed, index);
    let t = random_hermitian(dim, &mut rng)?;
    let s = random_hermitian(dim, &mut rng)?;
    Ok(ModelPair { t, s })
}

/// The built-in catalogue listed by the CLI `models` subcommand.
pub fn catalogue() -> Vec<ModelSpec> {
    vec![
        ModelSpec::SingleSpin { delta: 2.0 },
        ModelSpec::IsingChain {
            n_sites: 4,
            coupling: 1.0,
            field: 1.0,
        },
        ModelSpec::Dicke {
            n_max: 6,
            n_spins: 2,
            omega: 1.0,
            omega0: 1.0,
            lambda: 0.5,
        },
        ModelSpec::Random { dim: 8 },
    ]
}
