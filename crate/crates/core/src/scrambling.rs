//! Out-of-time-order correlators, Pauli-averaged OTOCs, the Hayden–Preskill
//! decoding fidelity and the OTOC revival bound.
//!
//! Conventions: `U = e^{-iHt}`, `O(t) = U† O U`, and `⟨A⟩ = tr(A)/d`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::operator::DenseOperator;
use crate::pauli::{pauli_enumerate, PauliString};
use crate::resource::{monotone_g, MonotoneEstimate, SearchBudget};
use crate::spectral::EigenClassification;
use crate::C64;

/// Largest number of `(P_A, P_D)` pairs [`avg_otoc`] will enumerate.
pub const MAX_OTOC_TERMS: usize = 1_000_000;
/// Average OTOCs at or below this value make the decoding fidelity diverge.
pub const AVERAGE_FLOOR: f64 = 1e-12;
/// Default prominence for extremum detection on time series.
pub const DEFAULT_PROMINENCE: f64 = 0.01;
const BOUND_TOL: f64 = 1e-9;

/// Input subsystem `A` and output subsystem `D`, as 1-based site sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsystemPair {
    n: usize,
    a: Vec<usize>,
    d: Vec<usize>,
}

fn normalize_sites(sites: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut out = sites.to_vec();
    out.sort_unstable();
    out.dedup();
    if let Some(&bad) = out.iter().find(|&&s| s == 0 || s > n) {
        return Err(Error::InvalidSite { site: bad, n });
    }
    Ok(out)
}

impl SubsystemPair {
    pub fn new(n: usize, a: &[usize], d: &[usize]) -> Result<Self> {
        Ok(Self { n, a: normalize_sites(a, n)?, d: normalize_sites(d, n)? })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &[usize] {
        &self.a
    }

    pub fn d(&self) -> &[usize] {
        &self.d
    }

    pub fn dim_a(&self) -> f64 {
        2f64.powi(self.a.len() as i32)
    }

    pub fn dim_d(&self) -> f64 {
        2f64.powi(self.d.len() as i32)
    }

    /// `d_{A\D}`.
    pub fn dim_a_minus_d(&self) -> f64 {
        let k = self.a.iter().filter(|s| !self.d.contains(s)).count();
        2f64.powi(k as i32)
    }

    /// Average OTOC at `t = 0`, `d²_{A\D} / d_A²`.
    pub fn initial_average(&self) -> f64 {
        (self.dim_a_minus_d() / self.dim_a()).powi(2)
    }

    pub fn term_count(&self) -> usize {
        1usize
            .checked_shl(2 * (self.a.len() + self.d.len()) as u32)
            .unwrap_or(usize::MAX)
    }
}

/// `⟨O₁(t) O₂ O₁(t) O₂⟩`.
pub fn otoc(spec: &SpectralDecomposition, o1: &DenseOperator, o2: &DenseOperator, t: f64) -> Result<C64> {
    if o1.dim() != spec.dim() || o2.dim() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), found: o1.dim().max(o2.dim()) });
    }
    let w = spec.evolve_operator(o1, t)?;
    let wo = w.dot(o2)?;
    Ok(wo.dot(&wo)?.trace() / spec.dim() as f64)
}

/// Deterministic pairwise (tree) summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => pairwise_sum(&values[..n / 2]) + pairwise_sum(&values[n / 2..]),
    }
}

/// Pauli-averaged OTOCs over `A × D` at each time in `times`.
///
/// Each `P_A` is evolved once per time and reused across the `P_D`
/// enumeration. Time points are processed in parallel on the current rayon
/// pool; the per-point reduction order is fixed.
pub fn avg_otoc_series(spec: &SpectralDecomposition, pair: &SubsystemPair, times: &[f64]) -> Result<Vec<f64>> {
    if pair.n_qubits() != spec.n_qubits() {
        return Err(Error::DimensionMismatch { expected: spec.n_qubits(), found: pair.n_qubits() });
    }
    if pair.term_count() > MAX_OTOC_TERMS {
        return Err(Error::Infeasible(pair.term_count()));
    }
    let n = pair.n_qubits();
    let pa = pauli_enumerate(n, pair.a())?;
    let pd: Vec<_> = pauli_enumerate(n, pair.d())?.iter().map(|p| p.action()).collect();
    let bare: Vec<DenseOperator> = pa.iter().filter(|p| !p.is_identity()).map(|p| p.to_operator()).collect();
    let evolved = bare.iter().map(|p| spec.heisenberg(p)).collect::<Result<Vec<_>>>()?;
    let identity_terms = (pa.len() - evolved.len()) * pd.len();
    let total = (pa.len() * pd.len()) as f64;
    times
        .par_iter()
        .map(|&t| {
            // identity P_A contributes ⟨P_D²⟩ = 1 per term
            let mut terms = vec![1.0; identity_terms];
            for (h, p) in evolved.iter().zip(&bare) {
                // O(0) = O exactly; skip the eigenbasis round trip
                let w = if t == 0.0 { p.clone() } else { h.at(t)? };
                for act in &pd {
                    terms.push(act.otoc_trace(w.matrix()).re);
                }
            }
            Ok(pairwise_sum(&terms) / total)
        })
        .collect()
}

/// Average of `otoc(P_A, P_D; t)` over all Paulis on `A` and on `D`.
pub fn avg_otoc(spec: &SpectralDecomposition, pair: &SubsystemPair, t: f64) -> Result<f64> {
    Ok(avg_otoc_series(spec, pair, &[t])?[0])
}

/// `1 / (d_A² · avg)`, or `+∞` when the average is at or below
/// [`AVERAGE_FLOOR`].
pub fn fidelity_from_average(pair: &SubsystemPair, avg: f64) -> f64 {
    if avg <= AVERAGE_FLOOR {
        f64::INFINITY
    } else {
        1.0 / (pair.dim_a().powi(2) * avg)
    }
}

/// Hayden–Preskill decoding fidelity of `e^{-iHt}`.
pub fn decoding_fidelity(spec: &SpectralDecomposition, pair: &SubsystemPair, t: f64) -> Result<f64> {
    Ok(fidelity_from_average(pair, avg_otoc(spec, pair, t)?))
}

pub fn decoding_fidelity_series(spec: &SpectralDecomposition, pair: &SubsystemPair, times: &[f64]) -> Result<Vec<f64>> {
    Ok(avg_otoc_series(spec, pair, times)?.into_iter().map(|a| fidelity_from_average(pair, a)).collect())
}

/// `⟨P(t), P⟩` at each time (real part; the imaginary part vanishes for
/// Hermitian `P`).
pub fn pauli_weight_overlap_series(spec: &SpectralDecomposition, p: &PauliString, times: &[f64]) -> Result<Vec<f64>> {
    if p.n_qubits() != spec.n_qubits() {
        return Err(Error::DimensionMismatch { expected: spec.n_qubits(), found: p.n_qubits() });
    }
    let h = spec.heisenberg(&p.to_operator())?;
    times
        .iter()
        .map(|&t| {
            if !t.is_finite() {
                return Err(Error::NonFinite("time"));
            }
            Ok(h.autocorrelation(t).re)
        })
        .collect()
}

pub fn pauli_weight_overlap(spec: &SpectralDecomposition, p: &PauliString, t: f64) -> Result<f64> {
    Ok(pauli_weight_overlap_series(spec, p, &[t])?[0])
}

/// Numbers behind the OTOC revival bound for one Pauli `O₁`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OtocBoundReport {
    pub pauli: String,
    pub tau: f64,
    /// `otoc(O₁, O₁; τ)` (real part).
    pub otoc: f64,
    pub otoc_imag: f64,
    /// `⟨O₁(τ), O₁⟩`.
    pub overlap: f64,
    /// `2⟨O₁(τ), O₁⟩² − 1`.
    pub intermediate_bound: f64,
    /// `otoc − intermediate_bound`.
    pub lower_slack: f64,
    /// `1 − otoc`.
    pub upper_slack: f64,
    pub holds: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotone_g: Option<MonotoneEstimate>,
}

/// Evaluates `2⟨O₁(τ),O₁⟩² − 1 ≤ otoc(O₁, O₁; τ) ≤ 1` at `τ = 2πT`.
///
/// `holds` records whether the chain is satisfied within `1e-9`. When a
/// budget is supplied, a lower bound on `𝒢(O₁)` is attached as well.
pub fn check_otoc_bound(
    spec: &SpectralDecomposition,
    cls: &EigenClassification,
    o1: &PauliString,
    budget: Option<&SearchBudget>,
) -> Result<OtocBoundReport> {
    let tau = cls.revival_period()?;
    let op = o1.to_operator();
    let value = otoc(spec, &op, &op, tau)?;
    let overlap = pauli_weight_overlap(spec, o1, tau)?;
    let intermediate = 2.0 * overlap * overlap - 1.0;
    let lower_slack = value.re - intermediate;
    let upper_slack = 1.0 - value.re;
    let monotone = budget.map(|b| monotone_g(spec, cls, &op, b)).transpose()?;
    Ok(OtocBoundReport {
        pauli: o1.to_string(),
        tau,
        otoc: value.re,
        otoc_imag: value.im,
        overlap,
        intermediate_bound: intermediate,
        lower_slack,
        upper_slack,
        holds: lower_slack >= -BOUND_TOL && upper_slack >= -BOUND_TOL,
        monotone_g: monotone,
    })
}

/// Uniform time grid `start, …, stop` with `points` samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self { start: 0.0, stop: 30.0, points: 600 }
    }
}

impl TimeGrid {
    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::OutOfRange(format!("time grid needs at least 2 points, got {}", self.points)));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::NonFinite("time grid bounds"));
        }
        if self.stop <= self.start {
            return Err(Error::OutOfRange(format!("time grid stop {} must exceed start {}", self.stop, self.start)));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.points - 1) as f64
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let step = self.step();
        Ok((0..self.points)
            .map(|k| if k + 1 == self.points { self.stop } else { self.start + k as f64 * step })
            .collect())
    }
}

/// Interior local maxima whose topographic prominence is at least
/// `min_prominence`. A flat top is reported at its first index.
pub fn local_maxima(values: &[f64], min_prominence: f64) -> Vec<usize> {
    let n = values.len();
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if values[i] > values[i - 1] {
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[i] {
                peaks.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks.into_iter().filter(|&p| prominence(values, p) >= min_prominence).collect()
}

/// Interior local minima, by the same rule as [`local_maxima`].
pub fn local_minima(values: &[f64], min_prominence: f64) -> Vec<usize> {
    let neg: Vec<f64> = values.iter().map(|v| -v).collect();
    local_maxima(&neg, min_prominence)
}

/// Height of a peak above the higher of its two bases, where each base is
/// the lowest point before the series first rises above the peak.
pub fn prominence(values: &[f64], peak: usize) -> f64 {
    let h = values[peak];
    let mut left = h;
    for &v in values[..peak].iter().rev() {
        if v > h {
            break;
        }
        left = left.min(v);
    }
    let mut right = h;
    for &v in &values[peak + 1..] {
        if v > h {
            break;
        }
        right = right.min(v);
    }
    h - left.max(right)
}

/// Writes `t,<columns...>` rows with 17 significant digits and LF endings.
pub fn write_series_csv<W: Write>(out: &mut W, times: &[f64], columns: &[(&str, &[f64])]) -> Result<()> {
    for (name, col) in columns {
        if col.len() != times.len() {
            return Err(Error::Parse(format!("column '{name}' has {} rows, expected {}", col.len(), times.len())));
        }
    }
    let header: Vec<&str> = std::iter::once("t").chain(columns.iter().map(|(n, _)| *n)).collect();
    writeln!(out, "{}", header.join(","))?;
    for (k, t) in times.iter().enumerate() {
        write!(out, "{t:.16e}")?;
        for (_, col) in columns {
            write!(out, ",{:.16e}", col[k])?;
        }
        writeln!(out)?;
    }
    Ok(())
}
