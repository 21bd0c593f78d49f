//! Hamiltonian constructors: the periodic PXP chain, the two-qubit toy
//! model, synthetic spectra with exactly known rational/irrational
//! structure, explicit matrices from file, and the scar-tower rescaling.

use std::path::PathBuf;

use ndarray::{Array1, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::eigen::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::operator::{dagger, qubit_count, site_bit, DenseOperator};
use crate::pauli::{Pauli, PauliString};
use crate::spectral::{EigenClassification, DEFAULT_MAX_DENOMINATOR};
use crate::surd::{Rational, Surd};
use crate::C64;

pub const PXP_MIN_SITES: usize = 3;
pub const PXP_MAX_SITES: usize = 14;

/// `H = Σᵢ Π_{i-1} X_i Π_{i+1}` with `Π = |0⟩⟨0|` and periodic boundaries,
/// on the full `2ⁿ`-dimensional space.
pub fn build_pxp(n: usize) -> Result<DenseOperator> {
    if !(PXP_MIN_SITES..=PXP_MAX_SITES).contains(&n) {
        return Err(Error::OutOfRange(format!(
            "PXP chain needs {PXP_MIN_SITES} <= n <= {PXP_MAX_SITES}, got {n}"
        )));
    }
    let d = 1usize << n;
    let mut h = Array2::<f64>::zeros((d, d));
    for site in 1..=n {
        let left = 1usize << site_bit(if site == 1 { n } else { site - 1 }, n);
        let right = 1usize << site_bit(if site == n { 1 } else { site + 1 }, n);
        let me = 1usize << site_bit(site, n);
        for b in 0..d {
            if b & (left | right) == 0 {
                h[[b ^ me, b]] += 1.0;
            }
        }
    }
    DenseOperator::from_real(h)
}

/// Two-qubit model `√2(XX + ZZ) + YY + Σ_{P≠P'} P⊗P'` over `P, P' ∈ {X,Y,Z}`.
/// Exactly one eigenvalue (3) is rational; see [`toy_model_eigenvalues`].
pub fn build_toy_model() -> DenseOperator {
    let paulis = [Pauli::X, Pauli::Y, Pauli::Z];
    let mut h = DenseOperator::zeros(2);
    for &p in &paulis {
        for &q in &paulis {
            let weight = match (p, q) {
                (Pauli::X, Pauli::X) | (Pauli::Z, Pauli::Z) => std::f64::consts::SQRT_2,
                _ => 1.0,
            };
            let term = PauliString::new(vec![p, q]).to_operator().scaled(C64::new(weight, 0.0));
            h = h.add(&term).expect("two-qubit operators");
        }
    }
    h
}

/// Exact toy-model eigenvalues, ascending. The spectrum is traceless like
/// the Hamiltonian, which pins the lowest level at `−1−2√2`.
pub fn toy_model_eigenvalues() -> [Surd; 4] {
    ["-1-2*sqrt(2)", "-1+sqrt(2)-sqrt(10)", "3", "-1+sqrt(2)+sqrt(10)"].map(|s| s.parse().expect("literal"))
}

/// `(H − E₁)/E₀`, mapping a tower `{E₀ m + E₁}` onto the integers `{m}`.
pub fn rescale_qmbs(h: &DenseOperator, e0: f64, e1: f64) -> Result<DenseOperator> {
    if e0 == 0.0 || !e0.is_finite() || !e1.is_finite() {
        return Err(Error::OutOfRange(format!("rescaling needs finite E0 != 0, got E0={e0}, E1={e1}")));
    }
    let shifted = h.sub(&DenseOperator::identity(h.n_qubits()).scaled(C64::new(e1, 0.0)))?;
    Ok(shifted.scaled(C64::new(1.0 / e0, 0.0)))
}

/// A spectrum given exactly, optionally conjugated by a unitary basis.
#[derive(Clone, Debug)]
pub struct SyntheticSpectrum {
    pub rational_entries: Vec<Rational>,
    pub irrational_entries: Vec<Surd>,
    /// Columns are the eigenvectors; the first `N_R` columns carry the
    /// rational entries in the given order, the rest the irrational ones.
    /// `None` means the computational basis.
    pub basis: Option<Array2<C64>>,
}

/// Square-free radicands used by [`SyntheticSpectrum::random`].
const RADICANDS: [u64; 16] = [2, 3, 5, 6, 7, 10, 11, 13, 14, 15, 17, 19, 21, 22, 23, 26];

impl SyntheticSpectrum {
    pub fn new(rational_entries: Vec<Rational>, irrational_entries: Vec<Surd>, basis: Option<Array2<C64>>) -> Self {
        Self { rational_entries, irrational_entries, basis }
    }

    /// Generic spectrum with `n_rational` values `p/q` (`q ≤ 4`) and
    /// `n_irrational` values `a + b√m` with distinct radicands, conjugated by
    /// a Haar-random basis when `random_basis` is set.
    pub fn random<R: Rng + ?Sized>(n_rational: usize, n_irrational: usize, random_basis: bool, rng: &mut R) -> Result<Self> {
        if n_irrational > RADICANDS.len() {
            return Err(Error::OutOfRange(format!("at most {} irrational entries", RADICANDS.len())));
        }
        let rational_entries = (0..n_rational)
            .map(|_| Rational::new(rng.random_range(-12..=12), rng.random_range(1..=4)))
            .collect();
        let mut radicands = RADICANDS.to_vec();
        for k in (1..radicands.len()).rev() {
            radicands.swap(k, rng.random_range(0..=k));
        }
        let irrational_entries = radicands[..n_irrational]
            .iter()
            .map(|&m| {
                let a = Rational::new(rng.random_range(-6..=6), rng.random_range(1..=3));
                let b = Rational::new(rng.random_range(1..=5) * if rng.random_bool(0.5) { 1 } else { -1 }, rng.random_range(1..=3));
                &Surd::rational(a) + &Surd::sqrt_term(b, m).expect("radicand fits")
            })
            .collect();
        let d = n_rational + n_irrational;
        let basis = if random_basis { Some(crate::random::haar_unitary(d, rng)?) } else { None };
        Ok(Self { rational_entries, irrational_entries, basis })
    }

    /// Like [`SyntheticSpectrum::random`], resampling until
    /// [`SyntheticSpectrum::phase_margin`] is at least `min_margin`.
    pub fn random_generic<R: Rng + ?Sized>(
        n_rational: usize,
        n_irrational: usize,
        random_basis: bool,
        min_margin: f64,
        rng: &mut R,
    ) -> Result<Self> {
        for _ in 0..10_000 {
            let spec = Self::random(n_rational, n_irrational, false, rng)?;
            if spec.phase_margin()? >= min_margin {
                let d = spec.dim();
                let basis = if random_basis { Some(crate::random::haar_unitary(d, rng)?) } else { None };
                return Ok(Self { basis, ..spec });
            }
        }
        Err(Error::OutOfRange(format!("no spectrum with phase margin {min_margin} found")))
    }

    pub fn dim(&self) -> usize {
        self.rational_entries.len() + self.irrational_entries.len()
    }

    /// Smallest angular distance (radians) between the revival phases
    /// `e^{-iE_k 2πT}` of distinct irrational levels, and between each of
    /// them and 1. Zero-free margins are what make fixtures generic: every
    /// resourceful superposition then loses fidelity by a definite amount.
    pub fn phase_margin(&self) -> Result<f64> {
        let tau = self.classification()?.revival_period()?;
        let angle = |x: f64| {
            let r = x.rem_euclid(std::f64::consts::TAU);
            r.min(std::f64::consts::TAU - r)
        };
        let e: Vec<f64> = self.irrational_entries.iter().map(Surd::to_f64).collect();
        let mut margin = f64::INFINITY;
        for (k, &a) in e.iter().enumerate() {
            margin = margin.min(angle(a * tau));
            for &b in &e[k + 1..] {
                margin = margin.min(angle((a - b) * tau));
            }
        }
        Ok(margin)
    }

    /// Checks that the irrational entries are irrational and pairwise
    /// differ by an irrational amount (exactly, symbolically).
    pub fn validate(&self) -> Result<()> {
        qubit_count(self.dim())?;
        for s in &self.irrational_entries {
            if s.is_rational() {
                return Err(Error::AssumptionViolation(format!("irrational entry {s} is rational")));
            }
        }
        for (k, a) in self.irrational_entries.iter().enumerate() {
            for b in &self.irrational_entries[k + 1..] {
                if (a - b).is_rational() {
                    return Err(Error::AssumptionViolation(format!("irrational entries {a} and {b} differ by a rational")));
                }
            }
        }
        if let Some(v) = &self.basis {
            if v.dim() != (self.dim(), self.dim()) {
                return Err(Error::DimensionMismatch { expected: self.dim(), found: v.nrows() });
            }
        }
        Ok(())
    }

    fn values(&self) -> Vec<f64> {
        self.rational_entries
            .iter()
            .map(|q| *q.numer() as f64 / *q.denom() as f64)
            .chain(self.irrational_entries.iter().map(Surd::to_f64))
            .collect()
    }

    /// Exact eigenpairs, sorted ascending.
    pub fn decomposition(&self) -> Result<SpectralDecomposition> {
        self.validate()?;
        let d = self.dim();
        let basis = self.basis.clone().unwrap_or_else(|| Array2::eye(d));
        SpectralDecomposition::from_parts(Array1::from(self.values()), basis)
    }

    /// Ground-truth classification in the ascending eigen-order.
    pub fn classification(&self) -> Result<EigenClassification> {
        self.validate()?;
        let values = self.values();
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let n_r = self.rational_entries.len();
        let rational = order
            .iter()
            .enumerate()
            .filter(|(_, &src)| src < n_r)
            .map(|(pos, &src)| (pos, self.rational_entries[src]))
            .collect();
        EigenClassification::from_parts(values.len(), rational, 0.0, DEFAULT_MAX_DENOMINATOR)
    }
}

/// `V diag(values) V†` plus the exact classification.
pub fn build_synthetic(spec: &SyntheticSpectrum) -> Result<(DenseOperator, EigenClassification)> {
    spec.validate()?;
    let diag = Array2::from_diag(&Array1::from(spec.values()).mapv(|e| C64::new(e, 0.0)));
    let h = match &spec.basis {
        Some(v) => {
            let res = crate::operator::unitarity_residual(v);
            if res > 1e-10 {
                return Err(Error::NotUnitary(res));
            }
            let m = v.dot(&diag).dot(&dagger(v));
            crate::operator::hermitian_part(&m)
        }
        None => diag,
    };
    Ok((DenseOperator::new(h)?, spec.classification()?))
}

/// Parses the explicit-matrix text format: a `dim d` header followed by
/// `row col re im` lines (0-indexed). Unlisted entries are zero; `#` starts
/// a comment.
pub fn parse_explicit_matrix(text: &str) -> Result<DenseOperator> {
    let mut lines = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .enumerate()
        .filter(|(_, l)| !l.is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::Parse("missing 'dim d' header".into()))?;
    let d: usize = match header.split_whitespace().collect::<Vec<_>>()[..] {
        ["dim", d] => d.parse().map_err(|_| Error::Parse(format!("bad dimension '{d}'")))?,
        _ => return Err(Error::Parse(format!("expected 'dim d', found '{header}'"))),
    };
    qubit_count(d)?;
    let mut m = Array2::<C64>::zeros((d, d));
    for (lineno, line) in lines {
        let bad = || Error::Parse(format!("line {}: expected 'row col re im', found '{line}'", lineno + 1));
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(bad());
        }
        let r: usize = fields[0].parse().map_err(|_| bad())?;
        let c: usize = fields[1].parse().map_err(|_| bad())?;
        let re: f64 = fields[2].parse().map_err(|_| bad())?;
        let im: f64 = fields[3].parse().map_err(|_| bad())?;
        if r >= d || c >= d {
            return Err(Error::Parse(format!("line {}: index out of range for dim {d}", lineno + 1)));
        }
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::NonFinite("matrix entry"));
        }
        m[[r, c]] = C64::new(re, im);
    }
    let op = DenseOperator::new(m)?;
    let scale = op.matrix().iter().map(|z| z.norm()).fold(1.0, f64::max);
    let res = op.hermiticity_residual();
    if res > 1e-12 * scale {
        return Err(Error::NotHermitian(res));
    }
    Ok(op)
}

/// Inverse of [`parse_explicit_matrix`], listing nonzero entries only.
pub fn format_explicit_matrix(op: &DenseOperator) -> String {
    let mut out = format!("dim {}\n", op.dim());
    for ((r, c), z) in op.matrix().indexed_iter() {
        if z.re != 0.0 || z.im != 0.0 {
            out.push_str(&format!("{r} {c} {:e} {:e}\n", z.re, z.im));
        }
    }
    out
}

/// Declarative description of a Hamiltonian, as found in experiment configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HamiltonianSpec {
    Pxp {
        n: usize,
    },
    ToyModel,
    Synthetic {
        rational: Vec<Surd>,
        irrational: Vec<Surd>,
        /// Seed of a Haar-random eigenbasis; computational basis if absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        basis_seed: Option<u64>,
    },
    ExplicitMatrix {
        path: PathBuf,
    },
}

/// A Hamiltonian together with its eigendecomposition and, for synthetic
/// spectra, the exact classification.
#[derive(Clone, Debug)]
pub struct RealizedHamiltonian {
    pub operator: DenseOperator,
    pub spectrum: SpectralDecomposition,
    pub ground_truth: Option<EigenClassification>,
}

impl HamiltonianSpec {
    /// Qubit count when known without touching the filesystem.
    pub fn n_qubits(&self) -> Option<usize> {
        match self {
            HamiltonianSpec::Pxp { n } => Some(*n),
            HamiltonianSpec::ToyModel => Some(2),
            HamiltonianSpec::Synthetic { rational, irrational, .. } => qubit_count(rational.len() + irrational.len()).ok(),
            HamiltonianSpec::ExplicitMatrix { .. } => None,
        }
    }

    pub fn synthetic_spectrum(&self) -> Result<Option<SyntheticSpectrum>> {
        let HamiltonianSpec::Synthetic { rational, irrational, basis_seed } = self else {
            return Ok(None);
        };
        let rational_entries = rational
            .iter()
            .map(|s| s.as_rational().ok_or_else(|| Error::AssumptionViolation(format!("rational entry {s} is irrational"))))
            .collect::<Result<Vec<_>>>()?;
        let d = rational.len() + irrational.len();
        let basis = match basis_seed {
            Some(seed) => Some(crate::random::haar_unitary(d, &mut crate::random::substream(*seed, 0))?),
            None => None,
        };
        Ok(Some(SyntheticSpectrum::new(rational_entries, irrational.clone(), basis)))
    }

    pub fn realize(&self) -> Result<RealizedHamiltonian> {
        if let Some(spec) = self.synthetic_spectrum()? {
            let (operator, truth) = build_synthetic(&spec)?;
            return Ok(RealizedHamiltonian { operator, spectrum: spec.decomposition()?, ground_truth: Some(truth) });
        }
        let operator = match self {
            HamiltonianSpec::Pxp { n } => build_pxp(*n)?,
            HamiltonianSpec::ToyModel => build_toy_model(),
            HamiltonianSpec::ExplicitMatrix { path } => parse_explicit_matrix(&std::fs::read_to_string(path)?)?,
            HamiltonianSpec::Synthetic { .. } => unreachable!("handled above"),
        };
        let spectrum = SpectralDecomposition::new(&operator)?;
        Ok(RealizedHamiltonian { operator, spectrum, ground_truth: None })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::StateVector;
    use crate::spectral::classify;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn pxp_three_sites_action() {
        let h = build_pxp(3).unwrap();
        let out = h.apply(&StateVector::basis(3, 0).unwrap()).unwrap();
        for b in 0..8 {
            let expected = if [0b100, 0b010, 0b001].contains(&b) { 1.0 } else { 0.0 };
            assert!((out.amplitudes()[b] - C64::new(expected, 0.0)).norm() < 1e-15);
        }
        for c in 0..8 {
            assert_eq!(h.matrix()[[7, c]], C64::new(0.0, 0.0));
        }
        assert!(h.is_real());
        assert_eq!(h.hermiticity_residual(), 0.0);
    }

    #[test]
    fn pxp_size_guard() {
        assert!(build_pxp(2).is_err());
        assert!(build_pxp(15).is_err());
    }

    #[test]
    fn toy_model_spectrum() {
        let h = build_toy_model();
        assert_eq!(h.hermiticity_residual(), 0.0);
        let spec = SpectralDecomposition::new(&h).unwrap();
        let exact: Vec<f64> = toy_model_eigenvalues().iter().map(Surd::to_f64).collect();
        let sum = toy_model_eigenvalues().iter().fold(Surd::zero(), |acc, e| &acc + e);
        assert!(sum.is_zero());
        for (a, b) in spec.eigenvalues().iter().zip(&exact) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        let cls = classify(&spec, 1e-9, 64).unwrap();
        assert_eq!(cls.n_rational(), 1);
        assert_eq!(cls.rational_values()[0], r(3, 1));
    }

    #[test]
    fn rescaling() {
        let h = build_toy_model();
        assert!(rescale_qmbs(&h, 1.0, 0.0).unwrap().distance(&h).unwrap() < 1e-15);
        assert!(rescale_qmbs(&h, 0.0, 1.0).is_err());
        let tower = DenseOperator::new(Array2::from_diag(&Array1::from(vec![
            C64::new(0.7 * 1.0 + 0.2, 0.0),
            C64::new(0.7 * 2.0 + 0.2, 0.0),
            C64::new(0.7 * 3.0 + 0.2, 0.0),
            C64::new(0.7 * 3.5 + 0.2, 0.0),
        ])))
        .unwrap();
        let scaled = rescale_qmbs(&tower, 0.7, 0.2).unwrap();
        for (k, want) in [1.0, 2.0, 3.0, 3.5].iter().enumerate() {
            assert!((scaled.matrix()[[k, k]].re - want).abs() < 1e-12);
        }
    }

    #[test]
    fn synthetic_ground_truth() {
        let spec = SyntheticSpectrum::new(vec![r(1, 2), r(3, 2)], vec!["sqrt(2)".parse().unwrap(), "sqrt(3)".parse().unwrap()], None);
        let (_, cls) = build_synthetic(&spec).unwrap();
        assert_eq!(cls.denominator().unwrap(), 2);
        assert_eq!(cls.rational_indices(), &[0, 2]);
    }

    #[test]
    fn synthetic_rejects_rational_spacing() {
        let spec = SyntheticSpectrum::new(
            vec![r(0, 1), r(5, 1)],
            vec!["sqrt(2)".parse().unwrap(), "1+sqrt(2)".parse().unwrap()],
            None,
        );
        assert!(matches!(build_synthetic(&spec), Err(Error::AssumptionViolation(_))));
    }

    #[test]
    fn explicit_matrix_round_trip() {
        let h = build_toy_model();
        let parsed = parse_explicit_matrix(&format_explicit_matrix(&h)).unwrap();
        assert!(parsed.distance(&h).unwrap() < 1e-15);
        assert!(parse_explicit_matrix("dim 2\n0 1 1 0\n").is_err());
        assert!(parse_explicit_matrix("dim 3\n").is_err());
        assert!(parse_explicit_matrix("dim 2\n0 5 1 0\n1 0 1 0").is_err());
        assert!(parse_explicit_matrix("size 2").is_err());
    }

    #[test]
    fn spec_serde_round_trip() {
        let spec = HamiltonianSpec::Synthetic {
            rational: vec!["1/2".parse().unwrap(), "1".parse().unwrap()],
            irrational: vec!["sqrt(2)".parse().unwrap(), "1+sqrt(3)".parse().unwrap()],
            basis_seed: Some(4),
        };
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<HamiltonianSpec>(&json).unwrap(), spec);
        let realized = spec.realize().unwrap();
        assert_eq!(realized.ground_truth.unwrap().denominator().unwrap(), 2);
    }
}
