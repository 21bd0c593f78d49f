//! Weak measurement and recovery of information damaged by it, using the
//! perfect revivals of a free state.
//!
//! The protocol: prepare a free `|φ⟩`, evolve for `t1`, let an eavesdropper
//! weakly measure in the computational basis with a `(d+1)`-level ancilla,
//! evolve for `t2 = m·t_R − t1` and read off `⟨φ|O|φ⟩` from the final state.
//! Joint system–ancilla indices are `s·(d+1) + e`.

use ndarray::{Array1, Array2};
use num_integer::Integer;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::eigen::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::operator::{dagger, trace_out_second, validate_density, DenseOperator, DensityMatrix, StateVector};
use crate::random::haar_vector;
use crate::resource::revival_fidelity;
use crate::spectral::EigenClassification;
use crate::C64;

/// Default size cap for recovery runs; the joint state has `d²(d+1)²`
/// entries.
pub const DEFAULT_MAX_RECOVERY_QUBITS: usize = 6;
/// Required revival fidelity of the input state.
pub const FREE_STATE_TOL: f64 = 1e-8;
const WEIGHT_FLOOR: f64 = 1e-12;

fn check_strength(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::OutOfRange(format!("measurement strength must lie in (0, 1), got {p}")));
    }
    Ok(())
}

/// State of system and ancilla after a weak measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakMeasurementOutcome {
    joint_state: Array2<C64>,
    strength: f64,
    system_dim: usize,
}

impl WeakMeasurementOutcome {
    pub fn joint_state(&self) -> &Array2<C64> {
        &self.joint_state
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn ancilla_dim(&self) -> usize {
        self.system_dim + 1
    }

    /// Applies `V ⊗ I_E` to the joint state.
    pub fn evolve_system(&self, v: &Array2<C64>) -> Result<Self> {
        let (d, e) = (self.system_dim, self.ancilla_dim());
        if v.dim() != (d, d) {
            return Err(Error::DimensionMismatch { expected: d, found: v.nrows() });
        }
        // block (k, l) of the joint state transforms as V J_kl V†
        let vd = dagger(v);
        let mut out = Array2::<C64>::zeros((d * e, d * e));
        for k in 0..e {
            for l in 0..e {
                let block = Array2::from_shape_fn((d, d), |(a, b)| self.joint_state[[a * e + k, b * e + l]]);
                if block.iter().all(|z| *z == C64::new(0.0, 0.0)) {
                    continue;
                }
                let moved = v.dot(&block).dot(&vd);
                for ((i, j), z) in moved.indexed_iter() {
                    out[[i * e + k, j * e + l]] = *z;
                }
            }
        }
        Ok(Self { joint_state: out, ..self.clone() })
    }

    /// Reduced state of the system.
    pub fn system_state(&self) -> Result<Array2<C64>> {
        trace_out_second(&self.joint_state, self.system_dim, self.ancilla_dim())
    }
}

/// `(1−p) ρ⊗|0⟩⟨0| + p Σ_i |i⟩⟨i|ρ|i⟩⟨i| ⊗ |i+1⟩⟨i+1|` on any square `ρ`.
///
/// Ancilla level `0` records "no measurement"; outcome `i` is stored in
/// level `i + 1`.
pub fn weak_measure_matrix(rho: &Array2<C64>, p: f64) -> Result<WeakMeasurementOutcome> {
    check_strength(p)?;
    validate_density(rho)?;
    let d = rho.nrows();
    let e = d + 1;
    let mut joint = Array2::<C64>::zeros((d * e, d * e));
    for i in 0..d {
        for j in 0..d {
            joint[[i * e, j * e]] = rho[[i, j]] * (1.0 - p);
        }
        joint[[i * e + i + 1, i * e + i + 1]] = rho[[i, i]] * p;
    }
    // positivity follows from that of ρ; only the trace is rechecked
    let tr = joint.diag().sum().re;
    if (tr - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidDensityMatrix(format!("joint trace {tr}")));
    }
    Ok(WeakMeasurementOutcome { joint_state: joint, strength: p, system_dim: d })
}

pub fn weak_measure(rho: &DensityMatrix, p: f64) -> Result<WeakMeasurementOutcome> {
    weak_measure_matrix(rho.matrix(), p)
}

/// `2πT / k`, where `k` is the largest integer for which every rational
/// energy in the support of `φ` returns to a common phase. Falls back to
/// `2πT` when the support carries a single energy or touches ℬ.
pub fn earliest_revival_time(spec: &SpectralDecomposition, cls: &EigenClassification, phi: &StateVector) -> Result<f64> {
    let tau = cls.revival_period()?;
    let t = cls.denominator()? as i64;
    let c = spec.coefficients(phi)?;
    let mut energies = Vec::new();
    for (k, z) in c.iter().enumerate() {
        if z.norm_sqr() <= WEIGHT_FLOOR {
            continue;
        }
        match cls.rational_indices().iter().position(|&a| a == k) {
            Some(pos) => {
                let q = cls.rational_values()[pos] * t;
                energies.push(*q.numer());
            }
            None => return Ok(tau),
        }
    }
    let g = energies.iter().skip(1).fold(0i64, |g, &e| g.gcd(&(e - energies[0])));
    Ok(if g == 0 { tau } else { tau / g as f64 })
}

/// How [`run_recovery`] chooses `t_R` and guards the system size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryOptions {
    pub max_qubits: usize,
    /// Use [`earliest_revival_time`] instead of `2πT`.
    pub earliest_revival: bool,
    pub seed: Option<u64>,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self { max_qubits: DEFAULT_MAX_RECOVERY_QUBITS, earliest_revival: false, seed: None }
    }
}

/// One end-to-end recovery run with its diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryRun {
    pub n: usize,
    pub seed: Option<u64>,
    pub t1: f64,
    pub t2: f64,
    pub m: u32,
    pub p: f64,
    pub revival_time: f64,
    /// `⟨φ|ρ_f|φ⟩`.
    pub overlap_phi_rhof: f64,
    /// Estimate assuming Haar-typical `U(t2)|i⟩`.
    pub estimate: f64,
    /// Reconstruction using the exact correction term.
    pub exact_reconstruction: f64,
    pub direct_expectation: f64,
    /// `estimate − direct_expectation`.
    pub haar_gap: f64,
    /// `max_i Σ_{a∈𝒜} |⟨ψ_a|i⟩|²` over computational basis states.
    pub scar_overlap_diag: f64,
    /// Max entry difference between the simulated and closed-form `ρ_f`.
    pub closed_form_residual: f64,
    #[serde(skip)]
    pub rho_f: Option<Array2<C64>>,
}

/// Closed-form final state
/// `(1−p)|φ⟩⟨φ| + p Σ_i |⟨i|U(t1)φ⟩|² U(t2)|i⟩⟨i|U(t2)†`.
pub fn recovery_closed_form(spec: &SpectralDecomposition, phi: &StateVector, t1: f64, t2: f64, p: f64) -> Result<Array2<C64>> {
    check_strength(p)?;
    let w = basis_weights(spec, phi, t1)?;
    let u2 = spec.propagator(t2)?;
    let u2 = u2.matrix();
    let d = spec.dim();
    let proj = phi.projector()?;
    let mut out = proj.matrix().mapv(|z| z * (1.0 - p));
    for i in 0..d {
        if w[i] == 0.0 {
            continue;
        }
        for r in 0..d {
            let a = u2[[r, i]] * (p * w[i]);
            for c in 0..d {
                out[[r, c]] += a * u2[[c, i]].conj();
            }
        }
    }
    Ok(out)
}

/// `|⟨i|U(t)φ⟩|²` for every basis state.
fn basis_weights(spec: &SpectralDecomposition, phi: &StateVector, t: f64) -> Result<Array1<f64>> {
    Ok(spec.evolve_state(phi, t)?.amplitudes().mapv(|z| z.norm_sqr()))
}

fn real_trace_product(o: &Array2<C64>, rho: &Array2<C64>) -> f64 {
    o.dot(rho).diag().sum().re
}

/// `(tr(O ρ_f) − (p/d) tr O) / (1 − p)`.
pub fn estimate_from_state(rho_f: &Array2<C64>, o: &DenseOperator, p: f64) -> Result<f64> {
    check_strength(p)?;
    if rho_f.dim() != (o.dim(), o.dim()) {
        return Err(Error::DimensionMismatch { expected: o.dim(), found: rho_f.nrows() });
    }
    let d = o.dim() as f64;
    Ok((real_trace_product(o.matrix(), rho_f) - p / d * o.trace().re) / (1.0 - p))
}

/// Re-evaluates the estimator on a stored run.
pub fn estimate_expectation(run: &RecoveryRun, o: &DenseOperator) -> Result<f64> {
    let rho = run
        .rho_f
        .as_ref()
        .ok_or_else(|| Error::AssumptionViolation("recovery run carries no final state".into()))?;
    estimate_from_state(rho, o, run.p)
}

/// Runs the recovery protocol by explicit simulation of system and ancilla.
#[allow(clippy::too_many_arguments)]
pub fn run_recovery(
    spec: &SpectralDecomposition,
    cls: &EigenClassification,
    phi: &StateVector,
    t1: f64,
    m: u32,
    p: f64,
    o: &DenseOperator,
    options: &RecoveryOptions,
) -> Result<RecoveryRun> {
    check_strength(p)?;
    let n = spec.n_qubits();
    if n > options.max_qubits {
        return Err(Error::Infeasible(n));
    }
    if o.dim() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), found: o.dim() });
    }
    if !t1.is_finite() {
        return Err(Error::NonFinite("t1"));
    }
    let phi = phi.clone().normalized()?;
    let f = revival_fidelity(spec, cls, &phi)?;
    if f < 1.0 - FREE_STATE_TOL {
        return Err(Error::NotFree(format!("revival fidelity {f:.12} of the input state")));
    }
    let t_r = if options.earliest_revival { earliest_revival_time(spec, cls, &phi)? } else { cls.revival_period()? };
    let t2 = m as f64 * t_r - t1;
    if t2 <= 0.0 {
        return Err(Error::OutOfRange(format!("t2 = m·t_R − t1 = {t2} must be positive")));
    }
    let returned = spec.evolve_state(&phi, t_r)?;
    let back = phi.inner(&returned)?.norm();
    if back < 1.0 - FREE_STATE_TOL {
        return Err(Error::NotFree(format!("|⟨φ|U(t_R)φ⟩| = {back:.12}")));
    }

    let rho1 = spec.evolve_state(&phi, t1)?.projector()?;
    let measured = weak_measure(&rho1, p)?;
    let u2 = spec.propagator(t2)?;
    let rho_f = measured.evolve_system(u2.matrix())?.system_state()?;

    let closed = recovery_closed_form(spec, &phi, t1, t2, p)?;
    let residual = (&rho_f - &closed).iter().map(|z| z.norm()).fold(0.0, f64::max);

    let overlap = phi.inner(&StateVector::new(rho_f.dot(phi.amplitudes()))?)?.re;
    let direct = o.expectation(&phi)?.re;
    let estimate = estimate_from_state(&rho_f, o, p)?;
    // exact correction Σ_i ⟨i|U(t2)† O U(t2)|i⟩ |⟨i|U(t1)φ⟩|²
    let w = basis_weights(spec, &phi, t1)?;
    let o_t2 = spec.evolve_operator(o, t2)?;
    let correction: f64 = (0..spec.dim()).map(|i| o_t2.matrix()[[i, i]].re * w[i]).sum();
    let exact = (real_trace_product(o.matrix(), &rho_f) - p * correction) / (1.0 - p);

    let v = spec.eigenvectors();
    let scar = (0..spec.dim())
        .map(|i| cls.rational_indices().iter().map(|&a| v[[i, a]].norm_sqr()).sum::<f64>())
        .fold(0.0, f64::max);

    Ok(RecoveryRun {
        n,
        seed: options.seed,
        t1,
        t2,
        m,
        p,
        revival_time: t_r,
        overlap_phi_rhof: overlap,
        estimate,
        exact_reconstruction: exact,
        direct_expectation: direct,
        haar_gap: estimate - direct,
        scar_overlap_diag: scar,
        closed_form_residual: residual,
        rho_f: Some(rho_f),
    })
}

/// Monte-Carlo estimate of `∫dU ⟨i|U†OU|i⟩` with its standard error.
pub fn haar_twirl_reference<R: Rng + ?Sized>(o: &DenseOperator, i: usize, samples: usize, rng: &mut R) -> Result<(f64, f64)> {
    if samples < 2 {
        return Err(Error::OutOfRange(format!("need at least 2 samples, got {samples}")));
    }
    let d = o.dim();
    if i >= d {
        return Err(Error::OutOfRange(format!("basis index {i} outside dimension {d}")));
    }
    // U|i⟩ is a Haar-random vector for Haar U
    let values: Vec<f64> = (0..samples)
        .map(|_| {
            let v = haar_vector(d, rng);
            let ov = o.matrix().dot(&v);
            v.iter().zip(ov.iter()).map(|(a, b)| a.conj() * b).sum::<C64>().re
        })
        .collect();
    let mean = values.iter().sum::<f64>() / samples as f64;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (samples - 1) as f64;
    Ok((mean, (var / samples as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::SyntheticSpectrum;
    use crate::pauli::{Pauli, PauliString};
    use crate::random::{haar_state, substream};
    use crate::resource::random_rational_state;

    #[test]
    fn weak_measure_fixes_basis_states() {
        let psi = StateVector::basis(2, 2).unwrap();
        let out = weak_measure(&DensityMatrix::from_pure(&psi).unwrap(), 0.3).unwrap();
        let j = out.joint_state();
        let e = out.ancilla_dim();
        assert!((j[[2 * e, 2 * e]].re - 0.7).abs() < 1e-15);
        assert!((j[[2 * e + 3, 2 * e + 3]].re - 0.3).abs() < 1e-15);
        assert!((j.diag().sum().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn weak_measure_rejects_bad_strength() {
        let rho = DensityMatrix::maximally_mixed(1);
        for p in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(weak_measure(&rho, p).is_err());
        }
    }

    #[test]
    fn weak_limit_keeps_state() {
        let psi = haar_state(2, &mut substream(1, 0)).unwrap();
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let out = weak_measure(&rho, 1e-12).unwrap();
        let diff = (&out.system_state().unwrap() - rho.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-10);
    }

    #[test]
    fn recovery_matches_closed_form() {
        let spec = SyntheticSpectrum::random_generic(2, 2, true, 0.05, &mut substream(2, 0)).unwrap();
        let (dec, cls) = (spec.decomposition().unwrap(), spec.classification().unwrap());
        let phi = random_rational_state(&dec, &cls, &mut substream(2, 1)).unwrap();
        let o = PauliString::single(2, 1, Pauli::Z).unwrap().to_operator();
        let run = run_recovery(&dec, &cls, &phi, 0.7, 1, 0.2, &o, &RecoveryOptions::default()).unwrap();
        assert!(run.closed_form_residual < 1e-9);
        assert!((run.exact_reconstruction - run.direct_expectation).abs() < 1e-9);
        assert!(run.overlap_phi_rhof >= 0.8 - 1e-9);
        assert!((estimate_expectation(&run, &o).unwrap() - run.estimate).abs() < 1e-15);
        let id = DenseOperator::identity(2);
        assert!((estimate_expectation(&run, &id).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn recovery_guards() {
        let spec = SyntheticSpectrum::random_generic(2, 2, true, 0.05, &mut substream(3, 0)).unwrap();
        let (dec, cls) = (spec.decomposition().unwrap(), spec.classification().unwrap());
        let o = DenseOperator::identity(2);
        let phi = random_rational_state(&dec, &cls, &mut substream(3, 1)).unwrap();
        let opts = RecoveryOptions::default();
        let late = cls.revival_period().unwrap() + 1.0;
        assert!(run_recovery(&dec, &cls, &phi, late, 1, 0.2, &o, &opts).is_err());
        let small = RecoveryOptions { max_qubits: 1, ..opts };
        assert!(matches!(run_recovery(&dec, &cls, &phi, 0.1, 1, 0.2, &o, &small), Err(Error::Infeasible(2))));
        let a = cls.rational_indices()[0];
        let b = cls.irrational_indices()[0];
        let mut c = Array1::<C64>::zeros(4);
        c[a] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        c[b] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mixed = dec.state_from_coefficients(&c).unwrap();
        assert!(matches!(run_recovery(&dec, &cls, &mixed, 0.1, 1, 0.2, &o, &opts), Err(Error::NotFree(_))));
    }

    #[test]
    fn earliest_revival_divides_period() {
        let spec = SyntheticSpectrum::new(
            vec![crate::surd::Rational::new(1, 2), crate::surd::Rational::new(5, 2)],
            vec!["sqrt(2)".parse().unwrap(), "sqrt(3)".parse().unwrap()],
            None,
        );
        let (dec, cls) = (spec.decomposition().unwrap(), spec.classification().unwrap());
        let phi = random_rational_state(&dec, &cls, &mut substream(4, 0)).unwrap();
        let t = earliest_revival_time(&dec, &cls, &phi).unwrap();
        // energies differ by 2, so the revival time is π
        assert!((t - std::f64::consts::PI).abs() < 1e-12);
        let back = dec.evolve_state(&phi, t).unwrap();
        assert!((phi.inner(&back).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn haar_reference_of_identity() {
        let (mean, err) = haar_twirl_reference(&DenseOperator::identity(2), 1, 50, &mut substream(5, 0)).unwrap();
        assert!((mean - 1.0).abs() < 1e-12);
        assert!(err < 1e-12);
    }
}
