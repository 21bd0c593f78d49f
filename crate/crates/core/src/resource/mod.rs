//! The resource theory of non-revivals: free objects, revival fidelities
//! and lower-bound estimators for the monotones `R`, `D` and `𝒢`.
//!
//! All constructions are expressed in the eigenbasis of the Hamiltonian and
//! depend on the rational/irrational split of an [`EigenClassification`].
//!
//! [`EigenClassification`]: crate::spectral::EigenClassification

mod fidelity;
mod free;
mod monotone;
mod unitary;

pub use fidelity::{revival_correlator, revival_fidelity, revival_fidelity_mixed, FIDELITY_SLACK};
pub use free::{
    make_free_density, make_free_observable, make_free_state, random_free_density, random_free_observable,
    random_free_state, random_rational_state, random_resourceful_state,
};
pub use monotone::{
    expmap_unitary, monotone_d, monotone_g, monotone_r, FreeUnitaryParams, MonotoneEstimate, MonotoneKind,
    RestartRecord, SearchBudget,
};
pub use unitary::{is_free_unitary, make_free_unitary, FreeUnitarySpec, FreenessCheck};
