use ndarray::{Array1, Array2};

use crate::eigen::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::operator::{uhlmann_fidelity, DenseOperator, DensityMatrix, StateVector};
use crate::spectral::EigenClassification;
use crate::C64;

/// Roundoff allowance above 1 before a fidelity-like quantity is rejected.
pub const FIDELITY_SLACK: f64 = 1e-10;
/// Accepted deviation of `‖O‖₂` from 1.
const NORM_TOL: f64 = 1e-9;

pub(crate) fn clamp_unit(value: f64, what: &str) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::NonFinite("fidelity"));
    }
    if value > 1.0 + FIDELITY_SLACK {
        return Err(Error::OutOfRange(format!("{what} = {value} exceeds 1")));
    }
    Ok(value.clamp(0.0, 1.0))
}

/// `|Σ_k |c_k|² e^{-i E_k τ}|` from eigenbasis coefficients.
pub(crate) fn fidelity_from_weights(weights: impl Iterator<Item = f64>, phases: &Array1<C64>) -> f64 {
    weights.zip(phases.iter()).map(|(w, p)| p * w).sum::<C64>().norm()
}

/// `|(1/d) Σ_jk |X_jk|² e^{i(E_j−E_k)τ}|²` for an eigenbasis matrix `X`.
pub(crate) fn correlator_from_eigenbasis(x: &Array2<C64>, phases: &Array1<C64>) -> f64 {
    let d = x.nrows() as f64;
    let mut acc = C64::new(0.0, 0.0);
    for ((j, k), z) in x.indexed_iter() {
        acc += z.norm_sqr() * phases[j] * phases[k].conj();
    }
    (acc / d).norm_sqr()
}

/// `F_R(ψ) = |⟨ψ| e^{-iH 2πT} |ψ⟩|`.
pub fn revival_fidelity(spec: &SpectralDecomposition, cls: &EigenClassification, psi: &StateVector) -> Result<f64> {
    let tau = cls.revival_period()?;
    let c = spec.coefficients(psi)?;
    let f = fidelity_from_weights(c.iter().map(|z| z.norm_sqr()), &spec.phases(tau));
    clamp_unit(f, "revival fidelity")
}

/// Uhlmann fidelity between `ρ` and `e^{-iH2πT} ρ e^{iH2πT}`.
pub fn revival_fidelity_mixed(spec: &SpectralDecomposition, cls: &EigenClassification, rho: &DensityMatrix) -> Result<f64> {
    let tau = cls.revival_period()?;
    if rho.dim() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), found: rho.dim() });
    }
    // e^{-iHτ} ρ e^{iHτ} is the Heisenberg evolution at time −τ
    let evolved = spec.evolve_operator(&rho.as_operator(), -tau)?;
    let f = uhlmann_fidelity(rho.matrix(), evolved.matrix())?;
    clamp_unit(f, "mixed revival fidelity")
}

/// `G(O) = |⟨O(2πT), O⟩|²` for `‖O‖₂ = 1`.
pub fn revival_correlator(spec: &SpectralDecomposition, cls: &EigenClassification, op: &DenseOperator) -> Result<f64> {
    let tau = cls.revival_period()?;
    let norm = op.hs_norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(norm));
    }
    let heis = spec.heisenberg(op)?;
    clamp_unit(heis.autocorrelation(tau).norm_sqr(), "revival correlator")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::SyntheticSpectrum;
    use crate::random::substream;
    use crate::surd::Rational;
    use std::f64::consts::PI;

    fn fixture() -> (SpectralDecomposition, EigenClassification) {
        let spec = SyntheticSpectrum::new(
            vec![Rational::new(1, 2), Rational::from_integer(2)],
            vec!["sqrt(2)".parse().unwrap(), "1/3+sqrt(7)".parse().unwrap()],
            Some(crate::random::haar_unitary(4, &mut substream(11, 0)).unwrap()),
        );
        (spec.decomposition().unwrap(), spec.classification().unwrap())
    }

    #[test]
    fn eigenstates_revive() {
        let (spec, cls) = fixture();
        for k in 0..4 {
            let v = spec.eigenvector(k).unwrap();
            assert!((revival_fidelity(&spec, &cls, &v).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn irrational_pair_closed_form() {
        let (spec, cls) = fixture();
        let b = cls.irrational_indices();
        let psi = StateVector::new(
            (spec.eigenvector(b[0]).unwrap().amplitudes() + spec.eigenvector(b[1]).unwrap().amplitudes())
                .mapv(|z| z * std::f64::consts::FRAC_1_SQRT_2),
        )
        .unwrap();
        let e = spec.eigenvalues();
        let tau = 2.0 * PI * cls.denominator().unwrap() as f64;
        let want = ((1.0 + ((e[b[0]] - e[b[1]]) * tau).cos()) / 2.0).sqrt();
        assert!((revival_fidelity(&spec, &cls, &psi).unwrap() - want).abs() < 1e-12);
        assert!(want < 1.0 - 1e-6);
    }

    #[test]
    fn pure_density_matches_state_fidelity() {
        let (spec, cls) = fixture();
        let psi = crate::random::haar_state(2, &mut substream(3, 0)).unwrap();
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let a = revival_fidelity(&spec, &cls, &psi).unwrap();
        let b = revival_fidelity_mixed(&spec, &cls, &rho).unwrap();
        assert!((a - b).abs() < 1e-9, "{a} {b}");
    }

    #[test]
    fn correlator_requires_normalization() {
        let (spec, cls) = fixture();
        let op = DenseOperator::identity(2).scaled(C64::new(2.0, 0.0));
        assert!(matches!(revival_correlator(&spec, &cls, &op), Err(Error::NotNormalized(_))));
        let id = DenseOperator::identity(2);
        assert!((revival_correlator(&spec, &cls, &id).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clamp_rejects_large_values() {
        assert_eq!(clamp_unit(1.0 + 1e-12, "x").unwrap(), 1.0);
        assert!(clamp_unit(1.1, "x").is_err());
        assert_eq!(clamp_unit(-1e-16, "x").unwrap(), 0.0);
    }
}
