//! Rational/irrational classification of a spectrum and the revival period.
//!
//! Rationality of a float is not decidable, so every classification carries
//! the `(tolerance, max_denominator)` pair that produced it.

use std::f64::consts::PI;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::eigen::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::surd::Rational;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_MAX_DENOMINATOR: u64 = 1000;

/// Rational and irrational eigenvalues closer than this multiple of the
/// tolerance make the eigenbasis split ill-defined.
const BOUNDARY_FACTOR: f64 = 10.0;

/// Exact value of a finite double as `num / 2^shift`, truncating the
/// mantissa for extremely small magnitudes.
fn exact_dyadic(x: f64) -> (i128, u32) {
    let bits = x.to_bits();
    let sign: i128 = if bits >> 63 == 1 { -1 } else { 1 };
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & ((1u64 << 52) - 1)) as i128;
    let (mant, exp) = if exp_bits == 0 { (frac, -1074) } else { (frac | (1i128 << 52), exp_bits - 1075) };
    if exp >= 0 {
        (sign * (mant << exp.min(70)), 0)
    } else {
        let shift = (-exp) as u32;
        if shift > 120 {
            (sign * (mant >> (shift - 120).min(127)), 120)
        } else {
            (sign * mant, shift)
        }
    }
}

/// Best rational approximation `p/q` of `x` with `1 ≤ q ≤ max_den`, found
/// from the continued-fraction convergents of `x` and the final
/// semiconvergent.
pub fn best_rational(x: f64, max_den: u64) -> Result<(i64, u64)> {
    if !x.is_finite() {
        return Err(Error::NonFinite("eigenvalue"));
    }
    if max_den == 0 {
        return Err(Error::OutOfRange("max_denominator must be at least 1".into()));
    }
    if x.abs() > 1e15 {
        return Err(Error::OutOfRange(format!("value {x} too large for rational approximation")));
    }
    let (num, shift) = exact_dyadic(x);
    let mut n = num;
    let mut d: i128 = 1i128 << shift;
    let max_den = max_den as i128;
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    loop {
        let a = Integer::div_floor(&n, &d);
        let q2 = q0 + a * q1;
        if q2 > max_den {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p0 + a * p1, q2);
        (n, d) = (d, n - a * d);
        if d == 0 {
            break;
        }
    }
    let (p, q) = if d == 0 {
        (p1, q1)
    } else {
        let k = (max_den - q0) / q1;
        let (sp, sq) = (p0 + k * p1, q0 + k * q1);
        // compare |x - sp/sq| with |x - p1/q1| exactly: x = num / 2^shift
        let denom = 1i128 << shift;
        let err = |pp: i128, qq: i128| (num * qq - pp * denom).abs() as f64 / (qq as f64);
        if err(sp, sq) < err(p1, q1) {
            (sp, sq)
        } else {
            (p1, q1)
        }
    };
    let p = i64::try_from(p).map_err(|_| Error::OutOfRange(format!("numerator of {x}")))?;
    Ok((p, q as u64))
}

/// Index sets of rational (𝒜) and irrational (ℬ) eigenvalues together with
/// the least common denominator `T` of the rational ones.
///
/// Indices are 0-based positions in the ascending eigenvalue order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenClassification {
    rational_indices: Vec<usize>,
    irrational_indices: Vec<usize>,
    rational_values: Vec<Rational>,
    period: Option<u64>,
    tolerance: f64,
    max_denominator: u64,
}

impl EigenClassification {
    /// Builds a classification from explicit index sets. `rational_values`
    /// pairs with `rational_indices`.
    pub fn from_parts(
        dim: usize,
        rational: Vec<(usize, Rational)>,
        tolerance: f64,
        max_denominator: u64,
    ) -> Result<Self> {
        let mut rational = rational;
        rational.sort_by_key(|(k, _)| *k);
        let mut seen = vec![false; dim];
        for &(k, _) in &rational {
            if k >= dim || seen[k] {
                return Err(Error::OutOfRange(format!("rational index {k} for dimension {dim}")));
            }
            seen[k] = true;
        }
        let irrational_indices = (0..dim).filter(|&k| !seen[k]).collect();
        let period = rational
            .iter()
            .map(|(_, q)| q.denom().unsigned_abs())
            .reduce(|a, b| a.lcm(&b));
        Ok(Self {
            rational_indices: rational.iter().map(|(k, _)| *k).collect(),
            rational_values: rational.iter().map(|(_, q)| *q).collect(),
            irrational_indices,
            period,
            tolerance,
            max_denominator,
        })
    }

    pub fn rational_indices(&self) -> &[usize] {
        &self.rational_indices
    }

    pub fn irrational_indices(&self) -> &[usize] {
        &self.irrational_indices
    }

    pub fn rational_values(&self) -> &[Rational] {
        &self.rational_values
    }

    pub fn n_rational(&self) -> usize {
        self.rational_indices.len()
    }

    pub fn n_irrational(&self) -> usize {
        self.irrational_indices.len()
    }

    pub fn dim(&self) -> usize {
        self.n_rational() + self.n_irrational()
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn max_denominator(&self) -> u64 {
        self.max_denominator
    }

    pub fn is_rational(&self, k: usize) -> bool {
        self.rational_indices.binary_search(&k).is_ok()
    }

    /// Least common denominator `T`.
    pub fn denominator(&self) -> Result<u64> {
        self.period.ok_or(Error::PeriodUndefined)
    }

    /// Revival time `2πT`.
    pub fn revival_period(&self) -> Result<f64> {
        Ok(2.0 * PI * self.denominator()? as f64)
    }

    /// Whether both classifications split the indices identically.
    pub fn same_partition(&self, other: &EigenClassification) -> bool {
        self.rational_indices == other.rational_indices && self.irrational_indices == other.irrational_indices
    }

    /// Non-fatal departures from the `N_R, N_I > 1` setting.
    pub fn assumption_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n_rational() == 1 {
            out.push("only one rational eigenvalue; results use the single-rational extension".into());
        }
        if self.n_irrational() < 2 {
            out.push(format!("only {} irrational eigenvalue(s)", self.n_irrational()));
        }
        out
    }
}

/// Revival time `2πT` of a classification.
pub fn revival_period(cls: &EigenClassification) -> Result<f64> {
    cls.revival_period()
}

fn check_params(tolerance: f64, max_denominator: u64) -> Result<()> {
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(Error::OutOfRange(format!("tolerance must be positive, got {tolerance}")));
    }
    if max_denominator == 0 {
        return Err(Error::OutOfRange("max_denominator must be at least 1".into()));
    }
    Ok(())
}

/// Classifies raw eigenvalues; see [`classify`].
pub fn classify_values(values: &[f64], tolerance: f64, max_denominator: u64) -> Result<EigenClassification> {
    check_params(tolerance, max_denominator)?;
    let mut rational = Vec::new();
    for (k, &e) in values.iter().enumerate() {
        let (p, q) = best_rational(e, max_denominator)?;
        if (e - p as f64 / q as f64).abs() <= tolerance {
            rational.push((k, Rational::new(p, q as i64)));
        }
    }
    if rational.is_empty() {
        return Err(Error::NoRationalEigenvalues);
    }
    let cls = EigenClassification::from_parts(values.len(), rational, tolerance, max_denominator)?;
    for &i in cls.rational_indices() {
        for &j in cls.irrational_indices() {
            if (values[i] - values[j]).abs() <= BOUNDARY_FACTOR * tolerance {
                return Err(Error::BoundaryDegeneracy { rational: i, irrational: j });
            }
        }
    }
    Ok(cls)
}

/// Marks each eigenvalue rational iff its best approximation with
/// denominator at most `max_denominator` lies within `tolerance`.
pub fn classify(spec: &SpectralDecomposition, tolerance: f64, max_denominator: u64) -> Result<EigenClassification> {
    classify_values(spec.eigenvalues().as_slice().expect("contiguous eigenvalues"), tolerance, max_denominator)
}

/// Pairs `(i, j)`, `i < j` in ℬ, whose energy difference looks rational at
/// the given resolution. Empty means the irrational-spacing assumption holds.
pub fn check_irrational_spacing(
    cls: &EigenClassification,
    spec: &SpectralDecomposition,
    tolerance: f64,
    max_denominator: u64,
) -> Result<Vec<(usize, usize)>> {
    check_params(tolerance, max_denominator)?;
    let e = spec.eigenvalues();
    let b = cls.irrational_indices();
    let mut out = Vec::new();
    for (x, &i) in b.iter().enumerate() {
        for &j in &b[x + 1..] {
            let diff = e[i] - e[j];
            let (p, q) = best_rational(diff, max_denominator)?;
            if (diff - p as f64 / q as f64).abs() <= tolerance {
                out.push((i, j));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalEntry {
    pub index: usize,
    pub num: i64,
    pub den: u64,
}

/// JSON-facing summary of a classification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub tolerance: f64,
    pub max_denominator: u64,
    #[serde(rename = "T")]
    pub t: Option<u64>,
    pub rational: Vec<RationalEntry>,
    pub irrational: Vec<usize>,
    pub spacing_violations: Vec<[usize; 2]>,
}

impl ClassificationReport {
    pub fn new(cls: &EigenClassification, violations: &[(usize, usize)]) -> Self {
        Self {
            tolerance: cls.tolerance,
            max_denominator: cls.max_denominator,
            t: cls.period,
            rational: cls
                .rational_indices
                .iter()
                .zip(&cls.rational_values)
                .map(|(&index, q)| RationalEntry { index, num: *q.numer(), den: *q.denom() as u64 })
                .collect(),
            irrational: cls.irrational_indices.clone(),
            spacing_violations: violations.iter().map(|&(i, j)| [i, j]).collect(),
        }
    }
}
