use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::eigen::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::operator::{unitarity_residual, DenseOperator};
use crate::spectral::EigenClassification;
use crate::C64;

const BLOCK_UNITARY_TOL: f64 = 1e-10;

/// Parameters of a free unitary
/// `Σ_{i,j∈𝒜} c_ij |ψ_i⟩⟨ψ_j| + Σ_{i∈ℬ} e^{iθ_i} |ψ_i⟩⟨ψ_σ(i)|`.
///
/// `irrational_perm[k] = m` maps the `k`-th ℬ index to the `m`-th one
/// (positions within [`EigenClassification::irrational_indices`]).
#[derive(Clone, Debug, PartialEq)]
pub struct FreeUnitarySpec {
    pub rational_block: Array2<C64>,
    pub irrational_perm: Vec<usize>,
    pub irrational_phases: Vec<f64>,
}

impl FreeUnitarySpec {
    pub fn identity(cls: &EigenClassification) -> Self {
        Self {
            rational_block: Array2::eye(cls.n_rational()),
            irrational_perm: (0..cls.n_irrational()).collect(),
            irrational_phases: vec![0.0; cls.n_irrational()],
        }
    }

    /// Haar block, uniform permutation and uniform phases.
    pub fn random<R: Rng + ?Sized>(cls: &EigenClassification, rng: &mut R) -> Result<Self> {
        let ni = cls.n_irrational();
        let mut perm: Vec<usize> = (0..ni).collect();
        for k in (1..ni).rev() {
            perm.swap(k, rng.random_range(0..=k));
        }
        Ok(Self {
            rational_block: crate::random::haar_unitary(cls.n_rational(), rng)?,
            irrational_perm: perm,
            irrational_phases: (0..ni).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect(),
        })
    }

    pub fn validate(&self, cls: &EigenClassification) -> Result<()> {
        let (nr, ni) = (cls.n_rational(), cls.n_irrational());
        if self.rational_block.dim() != (nr, nr) {
            return Err(Error::InvalidFreeUnitary(format!(
                "rational block is {:?}, expected {nr}x{nr}",
                self.rational_block.dim()
            )));
        }
        let res = unitarity_residual(&self.rational_block);
        if res > BLOCK_UNITARY_TOL {
            return Err(Error::InvalidFreeUnitary(format!("rational block not unitary (residual {res:.3e})")));
        }
        let mut seen = vec![false; ni];
        if self.irrational_perm.len() != ni {
            return Err(Error::InvalidFreeUnitary(format!("permutation has length {}, expected {ni}", self.irrational_perm.len())));
        }
        for &m in &self.irrational_perm {
            if m >= ni || seen[m] {
                return Err(Error::InvalidFreeUnitary(format!("{:?} is not a permutation", self.irrational_perm)));
            }
            seen[m] = true;
        }
        if self.irrational_phases.len() != ni || self.irrational_phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidFreeUnitary("need one finite phase per irrational level".into()));
        }
        Ok(())
    }

    /// The unitary in the eigenbasis.
    pub fn eigenbasis_matrix(&self, cls: &EigenClassification) -> Result<Array2<C64>> {
        self.validate(cls)?;
        let mut u = Array2::<C64>::zeros((cls.dim(), cls.dim()));
        let a = cls.rational_indices();
        for (x, &i) in a.iter().enumerate() {
            for (y, &j) in a.iter().enumerate() {
                u[[i, j]] = self.rational_block[[x, y]];
            }
        }
        let b = cls.irrational_indices();
        for (k, (&m, &theta)) in self.irrational_perm.iter().zip(&self.irrational_phases).enumerate() {
            u[[b[k], b[m]]] = C64::from_polar(1.0, theta);
        }
        Ok(u)
    }
}

/// Builds the free unitary in the computational basis.
pub fn make_free_unitary(
    spec: &SpectralDecomposition,
    cls: &EigenClassification,
    u: &FreeUnitarySpec,
) -> Result<DenseOperator> {
    if spec.dim() != cls.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), found: cls.dim() });
    }
    Ok(spec.from_eigenbasis(&u.eigenbasis_matrix(cls)?))
}

/// Outcome of [`is_free_unitary`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreenessCheck {
    pub is_free: bool,
    /// Frobenius norm of the 𝒜–ℬ and ℬ–𝒜 blocks in the eigenbasis.
    pub cross_block_residual: f64,
    /// Largest off-peak row mass `sqrt(Σ_j |U_ij|² − max_j |U_ij|²)` in the ℬ–ℬ block.
    pub permutation_residual: f64,
}

/// Decides whether `U` has the free-unitary form, up to `tol`.
pub fn is_free_unitary(
    spec: &SpectralDecomposition,
    cls: &EigenClassification,
    u: &DenseOperator,
    tol: f64,
) -> Result<FreenessCheck> {
    let res = u.unitarity_residual();
    if res > tol {
        return Err(Error::NotUnitary(res));
    }
    if spec.dim() != cls.dim() || u.dim() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), found: u.dim() });
    }
    let m = spec.to_eigenbasis(u.matrix());
    let (a, b) = (cls.rational_indices(), cls.irrational_indices());
    let mut cross = 0.0;
    for &i in a {
        for &j in b {
            cross += m[[i, j]].norm_sqr() + m[[j, i]].norm_sqr();
        }
    }
    let cross = cross.sqrt();
    let perm = b
        .iter()
        .map(|&i| {
            // summing the off-peak entries avoids the cancellation in 1 − peak
            let row: Vec<f64> = b.iter().map(|&j| m[[i, j]].norm_sqr()).collect();
            let peak = row.iter().copied().fold(0.0, f64::max);
            (row.iter().sum::<f64>() - peak).max(0.0).sqrt()
        })
        .fold(0.0, f64::max);
    Ok(FreenessCheck { is_free: cross <= tol && perm <= tol, cross_block_residual: cross, permutation_residual: perm })
}
