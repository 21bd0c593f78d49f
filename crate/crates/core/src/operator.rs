//! Dense states, operators and density matrices in the computational basis.

use ndarray::{Array1, Array2, Axis, ShapeBuilder};
use ndarray_linalg::{Eigh, SVD, UPLO};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::C64;

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-10;

/// Returns `n` such that `dim == 2^n`.
pub fn qubit_count(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

fn check_square(mat: &Array2<C64>) -> Result<usize> {
    let (rows, cols) = mat.dim();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    Ok(rows)
}

/// Conjugate transpose.
pub fn dagger(mat: &Array2<C64>) -> Array2<C64> {
    mat.t().mapv(|z| z.conj())
}

/// Largest elementwise deviation of `mat` from its conjugate transpose.
pub fn hermiticity_residual(mat: &Array2<C64>) -> f64 {
    let n = mat.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((mat[[i, j]] - mat[[j, i]].conj()).norm());
        }
    }
    worst
}

/// Largest elementwise deviation of `U†U` from the identity.
pub fn unitarity_residual(mat: &Array2<C64>) -> f64 {
    let prod = dagger(mat).dot(mat);
    prod.indexed_iter()
        .map(|((i, j), z)| {
            let target = if i == j { 1.0 } else { 0.0 };
            (z - target).norm()
        })
        .fold(0.0, f64::max)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for ((i, j), &x) in a.indexed_iter() {
        if x == C64::new(0.0, 0.0) {
            continue;
        }
        let mut block = out.slice_mut(ndarray::s![i * br..(i + 1) * br, j * bc..(j + 1) * bc]);
        block.zip_mut_with(b, |o, &y| *o = x * y);
    }
    out
}

/// Normalized state vector on `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Array1<C64>,
    n_qubits: usize,
}

impl StateVector {
    /// Wraps raw amplitudes; the length must be a power of two. No
    /// normalization is applied.
    pub fn new(amplitudes: Array1<C64>) -> Result<Self> {
        let n_qubits = qubit_count(amplitudes.len())?;
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("state amplitude"));
        }
        Ok(Self { amplitudes, n_qubits })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::OutOfRange(format!("basis index {index} >= {dim}")));
        }
        let mut amplitudes = Array1::zeros(dim);
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes, n_qubits })
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Array1<C64> {
        self.amplitudes
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::ZeroNorm);
        }
        self.amplitudes.mapv_inplace(|z| z / norm);
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.amplitudes.iter().zip(other.amplitudes.iter()).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|self⟩⟨self|` as a density matrix (the state is normalized first).
    pub fn projector(&self) -> Result<DensityMatrix> {
        let psi = self.clone().normalized()?;
        let col = psi.amplitudes.view().insert_axis(Axis(1));
        let row = psi.amplitudes.mapv(|z| z.conj()).insert_axis(Axis(0));
        Ok(DensityMatrix { matrix: col.dot(&row), n_qubits: self.n_qubits })
    }
}

/// Square complex operator on `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    matrix: Array2<C64>,
    n_qubits: usize,
}

impl DenseOperator {
    pub fn new(matrix: Array2<C64>) -> Result<Self> {
        let dim = check_square(&matrix)?;
        let n_qubits = qubit_count(dim)?;
        Ok(Self { matrix, n_qubits })
    }

    pub fn from_real(matrix: Array2<f64>) -> Result<Self> {
        Self::new(matrix.mapv(|x| C64::new(x, 0.0)))
    }

    pub fn identity(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self { matrix: Array2::eye(dim), n_qubits }
    }

    pub fn zeros(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self { matrix: Array2::zeros((dim, dim)), n_qubits }
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn check_same_dim(&self, other: &DenseOperator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: dagger(&self.matrix), n_qubits: self.n_qubits }
    }

    pub fn dot(&self, other: &DenseOperator) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self { matrix: self.matrix.dot(&other.matrix), n_qubits: self.n_qubits })
    }

    pub fn add(&self, other: &DenseOperator) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self { matrix: &self.matrix + &other.matrix, n_qubits: self.n_qubits })
    }

    pub fn sub(&self, other: &DenseOperator) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self { matrix: &self.matrix - &other.matrix, n_qubits: self.n_qubits })
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self { matrix: self.matrix.mapv(|z| z * factor), n_qubits: self.n_qubits }
    }

    pub fn kron(&self, other: &DenseOperator) -> Self {
        Self {
            matrix: kron(&self.matrix, &other.matrix),
            n_qubits: self.n_qubits + other.n_qubits,
        }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.diag().sum()
    }

    /// Normalized Hilbert–Schmidt norm `sqrt(tr(A†A)/d)`.
    pub fn hs_norm(&self) -> f64 {
        let sq: f64 = self.matrix.iter().map(|z| z.norm_sqr()).sum();
        (sq / self.dim() as f64).sqrt()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        hermiticity_residual(&self.matrix)
    }

    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.matrix)
    }

    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|z| z.im == 0.0)
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: psi.dim() });
        }
        StateVector::new(self.matrix.dot(psi.amplitudes()))
    }

    /// `⟨ψ|A|ψ⟩`.
    pub fn expectation(&self, psi: &StateVector) -> Result<C64> {
        let image = self.apply(psi)?;
        psi.inner(&image)
    }

    /// Frobenius distance to another operator.
    pub fn distance(&self, other: &DenseOperator) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok((&self.matrix - &other.matrix).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
    }
}

/// Hilbert–Schmidt inner product `tr(a†b)/d`.
pub fn hs_inner(a: &DenseOperator, b: &DenseOperator) -> Result<C64> {
    a.check_same_dim(b)?;
    let sum: C64 = a.matrix.iter().zip(b.matrix.iter()).map(|(x, y)| x.conj() * y).sum();
    Ok(sum / a.dim() as f64)
}

/// Density matrix on `n` qubits: Hermitian, unit trace and positive
/// semidefinite up to `1e-10`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: Array2<C64>,
    n_qubits: usize,
}

impl DensityMatrix {
    pub fn new(matrix: Array2<C64>) -> Result<Self> {
        let dim = check_square(&matrix)?;
        let n_qubits = qubit_count(dim)?;
        validate_density(&matrix)?;
        Ok(Self { matrix, n_qubits })
    }

    pub fn from_pure(psi: &StateVector) -> Result<Self> {
        psi.projector()
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self { matrix: Array2::eye(dim) / C64::new(dim as f64, 0.0), n_qubits }
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn as_operator(&self) -> DenseOperator {
        DenseOperator { matrix: self.matrix.clone(), n_qubits: self.n_qubits }
    }

    /// `tr(O ρ)`.
    pub fn expectation(&self, op: &DenseOperator) -> Result<C64> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: op.dim() });
        }
        Ok(op.matrix().iter().zip(self.matrix.t().iter()).map(|(a, b)| a * b).sum())
    }
}

/// Checks the density-matrix invariants on an arbitrary square matrix.
pub fn validate_density(matrix: &Array2<C64>) -> Result<()> {
    check_square(matrix)?;
    let herm = hermiticity_residual(matrix);
    if herm > HERMITIAN_TOL {
        return Err(Error::InvalidDensityMatrix(format!("hermiticity residual {herm:.3e}")));
    }
    let tr = matrix.diag().sum();
    if (tr - 1.0).norm() > TRACE_TOL {
        return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
    }
    let (evals, _) = hermitian_part(matrix).eigh(UPLO::Lower)?;
    let min = evals.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -PSD_TOL {
        return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min:.3e}")));
    }
    Ok(())
}

/// Eigen-decomposition of a Hermitian matrix, ascending eigenvalues.
///
/// LAPACK is handed a column-major copy: for row-major input the backend
/// would otherwise decompose the transpose and return conjugated vectors.
pub fn eigh_hermitian(mat: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let mut f = Array2::<C64>::zeros(mat.raw_dim().f());
    f.assign(mat);
    let (evals, vecs) = f.eigh(UPLO::Lower)?;
    Ok((evals, vecs.as_standard_layout().into_owned()))
}

/// `(A + A†)/2`.
pub fn hermitian_part(mat: &Array2<C64>) -> Array2<C64> {
    (mat + &dagger(mat)).mapv(|z| z * 0.5)
}

/// Square root of a positive semidefinite Hermitian matrix; negative
/// eigenvalues from roundoff are clamped to zero.
pub fn psd_sqrt(mat: &Array2<C64>) -> Result<Array2<C64>> {
    let (evals, vecs) = eigh_hermitian(&hermitian_part(mat))?;
    let mut scaled = vecs.clone();
    for (mut col, &lam) in scaled.columns_mut().into_iter().zip(evals.iter()) {
        let s = lam.max(0.0).sqrt();
        col.mapv_inplace(|z| z * s);
    }
    Ok(scaled.dot(&dagger(&vecs)))
}

/// Relative cutoff below which eigenvalues of a density matrix are treated
/// as roundoff when factoring it.
const SUPPORT_CUTOFF: f64 = 1e-14;

/// `L` with `L L† = ρ`, keeping only eigenvalues above the support cutoff.
fn psd_factor(mat: &Array2<C64>) -> Result<Array2<C64>> {
    let (evals, vecs) = eigh_hermitian(&hermitian_part(mat))?;
    let top = evals.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..evals.len()).filter(|&k| evals[k] > SUPPORT_CUTOFF * top).collect();
    let mut out = Array2::<C64>::zeros((mat.nrows(), keep.len()));
    for (c, &k) in keep.iter().enumerate() {
        let s = evals[k].sqrt();
        out.column_mut(c).assign(&vecs.column(k).mapv(|z| z * s));
    }
    Ok(out)
}

/// Uhlmann fidelity `tr sqrt(sqrt(ρ) σ sqrt(ρ))` between two PSD matrices,
/// evaluated as the trace norm of `L_ρ† L_σ` so that pure inputs keep full
/// precision.
pub fn uhlmann_fidelity(rho: &Array2<C64>, sigma: &Array2<C64>) -> Result<f64> {
    let (lr, ls) = (psd_factor(rho)?, psd_factor(sigma)?);
    if lr.ncols() == 0 || ls.ncols() == 0 {
        return Ok(0.0);
    }
    let overlap = dagger(&lr).dot(&ls);
    let (_, sv, _) = overlap.svd(false, false)?;
    Ok(sv.sum())
}

fn sorted_sites(sites: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut out = sites.to_vec();
    out.sort_unstable();
    out.dedup();
    if let Some(&bad) = out.iter().find(|&&s| s == 0 || s > n) {
        return Err(Error::InvalidSite { site: bad, n });
    }
    Ok(out)
}

/// Bit position (from the least significant end) of 1-based `site` in an
/// `n`-qubit basis index.
pub(crate) fn site_bit(site: usize, n: usize) -> usize {
    n - site
}

/// Reduced operator on the `keep` sites (1-based). Kept sites appear in
/// ascending order in the result.
pub fn partial_trace(op: &DenseOperator, keep: &[usize]) -> Result<DenseOperator> {
    let n = op.n_qubits();
    let keep = sorted_sites(keep, n)?;
    let traced: Vec<usize> = (1..=n).filter(|s| !keep.contains(s)).collect();
    let keep_bits: Vec<usize> = keep.iter().map(|&s| site_bit(s, n)).collect();
    let traced_bits: Vec<usize> = traced.iter().map(|&s| site_bit(s, n)).collect();

    // Scatter a compact index into full-register bit positions, most
    // significant compact bit first.
    let scatter = |compact: usize, bits: &[usize]| -> usize {
        let k = bits.len();
        bits.iter()
            .enumerate()
            .fold(0usize, |acc, (pos, &bit)| acc | (((compact >> (k - 1 - pos)) & 1) << bit))
    };

    let dk = 1usize << keep.len();
    let dt = 1usize << traced.len();
    let keep_idx: Vec<usize> = (0..dk).map(|i| scatter(i, &keep_bits)).collect();
    let traced_idx: Vec<usize> = (0..dt).map(|r| scatter(r, &traced_bits)).collect();
    let m = op.matrix();
    let mut out = Array2::<C64>::zeros((dk, dk));
    for (i, &ki) in keep_idx.iter().enumerate() {
        for (j, &kj) in keep_idx.iter().enumerate() {
            out[[i, j]] = traced_idx.iter().map(|&r| m[[ki | r, kj | r]]).sum();
        }
    }
    DenseOperator::new(out)
}

/// Traces out the second factor of a bipartite `(da·db)`-dimensional matrix
/// with index ordering `a * db + b`.
pub fn trace_out_second(mat: &Array2<C64>, da: usize, db: usize) -> Result<Array2<C64>> {
    let dim = check_square(mat)?;
    if dim != da * db {
        return Err(Error::DimensionMismatch { expected: da * db, found: dim });
    }
    Ok(Array2::from_shape_fn((da, da), |(i, j)| {
        (0..db).map(|k| mat[[i * db + k, j * db + k]]).sum::<Complex64>()
    }))
}
