//! Seeded random objects: Haar unitaries, Haar states and Gaussian
//! Hermitian matrices.

use ndarray::{Array1, Array2};
use ndarray_linalg::QR;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::operator::{DenseOperator, StateVector};
use crate::C64;

/// Independent deterministic stream `stream` derived from a root seed.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard complex Gaussian with `E|z|² = 1`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Array2<C64> {
    Array2::from_shape_simple_fn((d, d), || complex_normal(rng))
}

/// Haar-distributed `d×d` unitary: QR of a Ginibre matrix with the phases of
/// `diag(R)` absorbed into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Array2<C64>> {
    let g = ginibre(d, rng);
    let (mut q, r) = g.qr()?;
    for (j, mut col) in q.columns_mut().into_iter().enumerate() {
        let rjj = r[[j, j]];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        col.mapv_inplace(|z| z * phase);
    }
    Ok(q)
}

/// Haar-random unit vector of length `d`.
pub fn haar_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Array1<C64> {
    let v = Array1::from_shape_simple_fn(d, || complex_normal(rng));
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.mapv(|z| z / norm)
}

pub fn haar_state<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<StateVector> {
    StateVector::new(haar_vector(1 << n_qubits, rng))
}

/// Hermitian matrix `(G + G†)/2` from a Ginibre `G`.
pub fn random_hermitian<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<DenseOperator> {
    let g = ginibre(1 << n_qubits, rng);
    let h = (&g + &crate::operator::dagger(&g)).mapv(|z| z * 0.5);
    DenseOperator::new(h)
}
