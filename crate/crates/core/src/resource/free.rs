use ndarray::{Array1, Array2};
use rand::Rng;

use crate::eigen::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::operator::{dagger, DenseOperator, DensityMatrix, StateVector};
use crate::random::{complex_normal, ginibre, haar_vector};
use crate::spectral::EigenClassification;
use crate::C64;

const NORM_TOL: f64 = 1e-9;

fn check_dims(spec: &SpectralDecomposition, cls: &EigenClassification) -> Result<()> {
    if spec.dim() != cls.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), found: cls.dim() });
    }
    Ok(())
}

/// Free pure state from eigenbasis coefficients `(eigen-index, c)`.
///
/// Either all indices lie in 𝒜 (any normalized superposition) or the
/// request is a single ℬ eigenstate. Superpositions that involve a ℬ index
/// and anything else are resourceful and are rejected.
pub fn make_free_state(
    spec: &SpectralDecomposition,
    cls: &EigenClassification,
    coefficients: &[(usize, C64)],
) -> Result<StateVector> {
    check_dims(spec, cls)?;
    let d = spec.dim();
    let mut c = Array1::<C64>::zeros(d);
    for &(k, z) in coefficients {
        if k >= d {
            return Err(Error::OutOfRange(format!("eigen-index {k} >= {d}")));
        }
        c[k] += z;
    }
    let support: Vec<usize> = (0..d).filter(|&k| c[k].norm() > 0.0).collect();
    let irrational: Vec<usize> = support.iter().copied().filter(|&k| !cls.is_rational(k)).collect();
    if !irrational.is_empty() && support.len() > 1 {
        return Err(Error::NotFree(format!(
            "irrational eigenstate(s) {irrational:?} superposed with other eigenstates"
        )));
    }
    let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(norm));
    }
    spec.state_from_coefficients(&c)
}

/// Haar-random superposition over the rational eigenstates.
pub fn random_rational_state<R: Rng + ?Sized>(
    spec: &SpectralDecomposition,
    cls: &EigenClassification,
    rng: &mut R,
) -> Result<StateVector> {
    let v = haar_vector(cls.n_rational(), rng);
    let coefficients: Vec<(usize, C64)> = cls.rational_indices().iter().copied().zip(v.iter().copied()).collect();
    make_free_state(spec, cls, &coefficients)
}

/// Uniformly chooses between a rational-span state and a random ℬ eigenstate.
pub fn random_free_state<R: Rng + ?Sized>(
    spec: &SpectralDecomposition,
    cls: &EigenClassification,
    rng: &mut R,
) -> Result<StateVector> {
    if cls.n_irrational() == 0 || (cls.n_rational() > 0 && rng.random_bool(0.5)) {
        random_rational_state(spec, cls, rng)
    } else {
        let b = cls.irrational_indices()[rng.random_range(0..cls.n_irrational())];
        make_free_state(spec, cls, &[(b, C64::new(1.0, 0.0))])
    }
}

/// Resourceful state: an irrational eigenstate superposed with at least one
/// other eigenstate, all coefficients bounded away from zero.
pub fn random_resourceful_state<R: Rng + ?Sized>(
    spec: &SpectralDecomposition,
    cls: &EigenClassification,
    rng: &mut R,
) -> Result<StateVector> {
    check_dims(spec, cls)?;
    if cls.n_irrational() == 0 || cls.dim() < 2 {
        return Err(Error::AssumptionViolation("resourceful states need an irrational eigenstate".into()));
    }
    let d = cls.dim();
    let anchor = cls.irrational_indices()[rng.random_range(0..cls.n_irrational())];
    let mut others: Vec<usize> = (0..d).filter(|&k| k != anchor).collect();
    for k in (1..others.len()).rev() {
        others.swap(k, rng.random_range(0..=k));
    }
    let extra = rng.random_range(1..=others.len());
    let mut c = Array1::<C64>::zeros(d);
    for &k in std::iter::once(&anchor).chain(&others[..extra]) {
        let modulus = rng.random_range(0.3..1.0);
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        c[k] = C64::from_polar(modulus, phase);
    }
    let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    spec.state_from_coefficients(&c.mapv(|z| z / norm))
}

/// Embeds a rational block and an irrational diagonal into a `d×d`
/// eigenbasis matrix.
fn block_diagonal(cls: &EigenClassification, rational_block: &Array2<C64>, irrational_diag: &[C64]) -> Result<Array2<C64>> {
    let (nr, ni) = (cls.n_rational(), cls.n_irrational());
    if rational_block.dim() != (nr, nr) {
        return Err(Error::DimensionMismatch { expected: nr, found: rational_block.nrows() });
    }
    if irrational_diag.len() != ni {
        return Err(Error::DimensionMismatch { expected: ni, found: irrational_diag.len() });
    }
    let mut m = Array2::<C64>::zeros((cls.dim(), cls.dim()));
    let a = cls.rational_indices();
    for (x, &i) in a.iter().enumerate() {
        for (y, &j) in a.iter().enumerate() {
            m[[i, j]] = rational_block[[x, y]];
        }
    }
    for (&b, &z) in cls.irrational_indices().iter().zip(irrational_diag) {
        m[[b, b]] = z;
    }
    Ok(m)
}

/// `ρ = Σ_{i,j∈𝒜} a_ij |ψ_i⟩⟨ψ_j| + Σ_{i∈ℬ} a_ii |ψ_i⟩⟨ψ_i|`, validated as a
/// density matrix.
pub fn make_free_density(
    spec: &SpectralDecomposition,
    cls: &EigenClassification,
    rational_block: &Array2<C64>,
    irrational_weights: &[f64],
) -> Result<DensityMatrix> {
    check_dims(spec, cls)?;
    let diag: Vec<C64> = irrational_weights.iter().map(|&w| C64::new(w, 0.0)).collect();
    let m = block_diagonal(cls, rational_block, &diag)?;
    DensityMatrix::new(crate::operator::hermitian_part(spec.from_eigenbasis(&m).matrix()))
}

/// Random full-rank free density matrix.
pub fn random_free_density<R: Rng + ?Sized>(
    spec: &SpectralDecomposition,
    cls: &EigenClassification,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let g = ginibre(cls.n_rational(), rng);
    let mut block = g.dot(&dagger(&g));
    let mut weights: Vec<f64> = (0..cls.n_irrational()).map(|_| rng.random_range(0.1..1.0)).collect();
    let total = block.diag().iter().map(|z| z.re).sum::<f64>() + weights.iter().sum::<f64>();
    block.mapv_inplace(|z| z / total);
    weights.iter_mut().for_each(|w| *w /= total);
    make_free_density(spec, cls, &block, &weights)
}

/// `O = Σ_{i,j∈𝒜} a_ij |ψ_i⟩⟨ψ_j| + Σ_{i∈ℬ} a_ii |ψ_i⟩⟨ψ_i|`, rescaled to
/// `‖O‖₂ = 1`.
pub fn make_free_observable(
    spec: &SpectralDecomposition,
    cls: &EigenClassification,
    rational_block: &Array2<C64>,
    irrational_diag: &[C64],
) -> Result<DenseOperator> {
    check_dims(spec, cls)?;
    let m = block_diagonal(cls, rational_block, irrational_diag)?;
    let op = spec.from_eigenbasis(&m);
    let norm = op.hs_norm();
    if norm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(op.scaled(C64::new(1.0 / norm, 0.0)))
}

/// Random Hermitian free observable.
pub fn random_free_observable<R: Rng + ?Sized>(
    spec: &SpectralDecomposition,
    cls: &EigenClassification,
    rng: &mut R,
) -> Result<DenseOperator> {
    let g = ginibre(cls.n_rational(), rng);
    let block = crate::operator::hermitian_part(&g);
    let diag: Vec<C64> = (0..cls.n_irrational()).map(|_| C64::new(complex_normal(rng).re, 0.0)).collect();
    make_free_observable(spec, cls, &block, &diag)
}
