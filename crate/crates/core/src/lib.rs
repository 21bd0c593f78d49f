//! Exact-diagonalization toolkit for the resource theory of non-revivals.
//!
//! The crate is organised bottom-up:
//!
//! - [`operator`], [`eigen`] and [`pauli`]: dense complex operator algebra,
//!   Hermitian eigendecomposition and spectral time evolution.
//! - [`hamiltonian`] and [`surd`]: PXP chain, the two-qubit toy model and
//!   synthetic spectra with exactly known rational/irrational structure.
//! - [`spectral`]: classification of eigenvalues into rational and irrational
//!   sets and the common denominator `T` that sets the revival time `2πT`.
//! - [`resource`]: free states, unitaries, density matrices and observables,
//!   revival fidelities and lower-bound estimators for the monotones.
//! - [`scrambling`]: OTOCs, subsystem Pauli averages, the Hayden–Preskill
//!   decoding fidelity and the OTOC revival bound.
//! - [`protocol`]: weak measurement channel and the damaged-information
//!   recovery protocol.
//!
//! Site indices exposed in public APIs are 1-based; site 1 is the leftmost
//! tensor factor (most significant bit of a computational basis index).
//! Eigen-indices are 0-based positions in the ascending eigenvalue order.

// LAPACK/BLAS symbols come from the system OpenBLAS pulled in by ndarray-linalg.
extern crate ndarray_linalg;

pub mod eigen;
pub mod error;
pub mod hamiltonian;
pub mod operator;
pub mod pauli;
pub mod protocol;
pub mod random;
pub mod resource;
pub mod scrambling;
pub mod spectral;
pub mod surd;

pub use eigen::SpectralDecomposition;
pub use error::{Error, Result};
pub use operator::{hs_inner, partial_trace, DenseOperator, DensityMatrix, StateVector};
pub use pauli::{pauli_enumerate, Pauli, PauliString};
pub use spectral::EigenClassification;

/// Double-precision complex scalar used throughout.
pub type C64 = num_complex::Complex64;
