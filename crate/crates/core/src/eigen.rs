//! Hermitian eigendecomposition and spectral time evolution.
//!
//! A [`SpectralDecomposition`] is computed once per Hamiltonian; every
//! propagator `e^{-iHt}` and Heisenberg-evolved operator `e^{iHt} O e^{-iHt}`
//! is then a phase reweighting in the eigenbasis plus two basis changes.

use ndarray::{Array1, Array2, Zip};
use ndarray_linalg::{Eigh, UPLO};

use crate::error::{Error, Result};
use crate::operator::{dagger, DenseOperator, StateVector};
use crate::C64;

/// Relative hermiticity tolerance accepted by [`SpectralDecomposition::new`].
const HERMITIAN_TOL: f64 = 1e-10;
/// Components below this modulus are skipped when fixing eigenvector phases.
const PHASE_FIX_TOL: f64 = 1e-10;

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a
/// Hermitian operator.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Array1<f64>,
    eigenvectors: Array2<C64>,
    /// Present when the source operator was real symmetric; enables the
    /// real-arithmetic basis change.
    real_vectors: Option<Array2<f64>>,
    n_qubits: usize,
}

impl SpectralDecomposition {
    /// Diagonalizes `h`. Each eigenvector is phase-fixed so that its first
    /// component with modulus above `1e-10` is real and positive.
    pub fn new(h: &DenseOperator) -> Result<Self> {
        let scale = h.matrix().iter().map(|z| z.norm()).fold(1.0, f64::max);
        let residual = h.hermiticity_residual();
        if residual > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(residual));
        }
        if h.is_real() {
            let real = h.matrix().mapv(|z| z.re);
            let (eigenvalues, mut vecs) = real.eigh(UPLO::Lower)?;
            for mut col in vecs.columns_mut() {
                if let Some(&first) = col.iter().find(|x| x.abs() > PHASE_FIX_TOL) {
                    if first < 0.0 {
                        col.mapv_inplace(|x| -x);
                    }
                }
            }
            let eigenvectors = vecs.mapv(|x| C64::new(x, 0.0));
            return Ok(Self { eigenvalues, eigenvectors, real_vectors: Some(vecs), n_qubits: h.n_qubits() });
        }
        let (eigenvalues, mut vecs) = crate::operator::eigh_hermitian(h.matrix())?;
        for mut col in vecs.columns_mut() {
            if let Some(&first) = col.iter().find(|z| z.norm() > PHASE_FIX_TOL) {
                let phase = first.conj() / first.norm();
                col.mapv_inplace(|z| z * phase);
            }
        }
        Ok(Self { eigenvalues, eigenvectors: vecs, real_vectors: None, n_qubits: h.n_qubits() })
    }

    /// Builds a decomposition from known eigenpairs (e.g. synthetic spectra).
    /// Eigenvalues are sorted ascending; columns of `eigenvectors` must be
    /// orthonormal.
    pub fn from_parts(eigenvalues: Array1<f64>, eigenvectors: Array2<C64>) -> Result<Self> {
        let d = eigenvalues.len();
        if eigenvectors.dim() != (d, d) {
            return Err(Error::DimensionMismatch { expected: d, found: eigenvectors.nrows() });
        }
        let n_qubits = crate::operator::qubit_count(d)?;
        let res = crate::operator::unitarity_residual(&eigenvectors);
        if res > 1e-10 {
            return Err(Error::NotUnitary(res));
        }
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
        let values = Array1::from_iter(order.iter().map(|&k| eigenvalues[k]));
        let vectors = Array2::from_shape_fn((d, d), |(i, j)| eigenvectors[[i, order[j]]]);
        let real_vectors = vectors
            .iter()
            .all(|z| z.im == 0.0)
            .then(|| vectors.mapv(|z| z.re));
        Ok(Self { eigenvalues: values, eigenvectors: vectors, real_vectors, n_qubits })
    }

    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &Array2<C64> {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn has_real_eigenvectors(&self) -> bool {
        self.real_vectors.is_some()
    }

    /// Eigenvector `|ψ_k⟩` for 0-based eigen-index `k`.
    pub fn eigenvector(&self, k: usize) -> Result<StateVector> {
        if k >= self.dim() {
            return Err(Error::OutOfRange(format!("eigen-index {k} >= {}", self.dim())));
        }
        StateVector::new(self.eigenvectors.column(k).to_owned())
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found });
        }
        Ok(())
    }

    /// `V diag(E) V†`.
    pub fn reconstruct(&self) -> DenseOperator {
        let diag = Array2::from_diag(&self.eigenvalues.mapv(|e| C64::new(e, 0.0)));
        self.from_eigenbasis(&diag)
    }

    /// Expansion coefficients `V†ψ` of a state in the eigenbasis.
    pub fn coefficients(&self, psi: &StateVector) -> Result<Array1<C64>> {
        self.check_dim(psi.dim())?;
        Ok(self.eigenvectors.t().mapv(|z| z.conj()).dot(psi.amplitudes()))
    }

    /// State with eigenbasis coefficients `c`, i.e. `V c`.
    pub fn state_from_coefficients(&self, c: &Array1<C64>) -> Result<StateVector> {
        self.check_dim(c.len())?;
        StateVector::new(self.eigenvectors.dot(c))
    }

    /// `V† O V`.
    pub fn to_eigenbasis(&self, op: &Array2<C64>) -> Array2<C64> {
        match &self.real_vectors {
            Some(v) => real_sandwich(&v.t(), op, &v.view()),
            None => dagger(&self.eigenvectors).dot(op).dot(&self.eigenvectors),
        }
    }

    /// `V M V†`.
    pub fn from_eigenbasis(&self, m: &Array2<C64>) -> DenseOperator {
        let mat = match &self.real_vectors {
            Some(v) => real_sandwich(&v.view(), m, &v.t()),
            None => self.eigenvectors.dot(m).dot(&dagger(&self.eigenvectors)),
        };
        DenseOperator::new(mat).expect("eigenbasis dimension is a power of two")
    }

    /// Phases `e^{-i E_k t}`.
    pub fn phases(&self, t: f64) -> Array1<C64> {
        self.eigenvalues.mapv(|e| C64::from_polar(1.0, -e * t))
    }

    /// Propagator `e^{-iHt}`.
    pub fn propagator(&self, t: f64) -> Result<DenseOperator> {
        check_time(t)?;
        Ok(self.from_eigenbasis(&Array2::from_diag(&self.phases(t))))
    }

    /// `e^{-iHt}|ψ⟩`.
    pub fn evolve_state(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        check_time(t)?;
        let mut c = self.coefficients(psi)?;
        c.zip_mut_with(&self.phases(t), |a, p| *a *= p);
        self.state_from_coefficients(&c)
    }

    /// Heisenberg picture `O(t) = e^{iHt} O e^{-iHt}`.
    pub fn evolve_operator(&self, op: &DenseOperator, t: f64) -> Result<DenseOperator> {
        self.heisenberg(op)?.at(t)
    }

    /// Caches `V† O V` so that `O(t)` can be produced for many `t`.
    pub fn heisenberg(&self, op: &DenseOperator) -> Result<HeisenbergOperator<'_>> {
        self.check_dim(op.dim())?;
        Ok(HeisenbergOperator { spec: self, eig: self.to_eigenbasis(op.matrix()) })
    }
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() {
        return Err(Error::NonFinite("time"));
    }
    Ok(())
}

/// `A M B` for real `A`, `B` and complex `M`, using real GEMMs.
fn real_sandwich(
    a: &ndarray::ArrayView2<f64>,
    m: &Array2<C64>,
    b: &ndarray::ArrayView2<f64>,
) -> Array2<C64> {
    let re = m.mapv(|z| z.re);
    let im = m.mapv(|z| z.im);
    let out_re = a.dot(&re).dot(b);
    let has_im = im.iter().any(|&x| x != 0.0);
    if !has_im {
        return out_re.mapv(|x| C64::new(x, 0.0));
    }
    let out_im = a.dot(&im).dot(b);
    let mut out = Array2::zeros(out_re.dim());
    Zip::from(&mut out).and(&out_re).and(&out_im).for_each(|o, &r, &i| *o = C64::new(r, i));
    out
}

/// An operator expressed in the eigenbasis of a Hamiltonian, ready for
/// Heisenberg evolution at arbitrary times.
#[derive(Clone, Debug)]
pub struct HeisenbergOperator<'a> {
    spec: &'a SpectralDecomposition,
    eig: Array2<C64>,
}

impl HeisenbergOperator<'_> {
    /// `O` in the eigenbasis, `V† O V`.
    pub fn eigenbasis_matrix(&self) -> &Array2<C64> {
        &self.eig
    }

    /// Eigenbasis matrix of `O(t)`: entries scaled by `e^{i(E_j - E_k)t}`.
    pub fn eigenbasis_at(&self, t: f64) -> Array2<C64> {
        let ph = self.spec.phases(t);
        let mut m = self.eig.clone();
        for ((j, k), z) in m.indexed_iter_mut() {
            *z *= ph[j].conj() * ph[k];
        }
        m
    }

    /// `O(t)` in the computational basis.
    pub fn at(&self, t: f64) -> Result<DenseOperator> {
        check_time(t)?;
        Ok(self.spec.from_eigenbasis(&self.eigenbasis_at(t)))
    }

    /// `⟨O(t), O⟩ = tr(O(t)† O)/d`, computed in `O(d²)` from eigenbasis
    /// weights.
    pub fn autocorrelation(&self, t: f64) -> C64 {
        let ph = self.spec.phases(t);
        let d = self.eig.nrows() as f64;
        let mut acc = C64::new(0.0, 0.0);
        for ((j, k), z) in self.eig.indexed_iter() {
            // conj(e^{i(E_j-E_k)t}) = ph_j * conj(ph_k)
            acc += z.norm_sqr() * ph[j] * ph[k].conj();
        }
        acc / d
    }
}
