//! Pauli strings and their action on dense matrices.

use std::fmt;
use std::str::FromStr;

use ndarray::{array, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{kron, site_bit, DenseOperator};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> Array2<C64> {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            Pauli::I => array![[l, o], [o, l]],
            Pauli::X => array![[o, l], [l, o]],
            Pauli::Y => array![[o, -i], [i, o]],
            Pauli::Z => array![[l, o], [o, -l]],
        }
    }

    fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    fn signs(self) -> bool {
        matches!(self, Pauli::Y | Pauli::Z)
    }

    fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Paulis; `letters[k]` acts on site `k+1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self { letters }
    }

    pub fn identity(n: usize) -> Self {
        Self { letters: vec![Pauli::I; n] }
    }

    /// Single Pauli on 1-based `site`, identity elsewhere.
    pub fn single(n: usize, site: usize, pauli: Pauli) -> Result<Self> {
        if site == 0 || site > n {
            return Err(Error::InvalidSite { site, n });
        }
        let mut letters = vec![Pauli::I; n];
        letters[site - 1] = pauli;
        Ok(Self { letters })
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    /// 1-based sites carrying a non-identity letter.
    pub fn support(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(k, _)| k + 1)
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    pub fn to_operator(&self) -> DenseOperator {
        let m = self
            .letters
            .iter()
            .fold(Array2::from_elem((1, 1), C64::new(1.0, 0.0)), |acc, p| kron(&acc, &p.matrix()));
        DenseOperator::new(m).expect("Pauli string dimension is a power of two")
    }

    /// Whether the two strings commute.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(other.letters.iter())
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    /// Sparse action: `P|b⟩ = phase(b)|b ⊕ flip⟩`.
    pub(crate) fn action(&self) -> PauliAction {
        let n = self.letters.len();
        let mut flip = 0usize;
        let mut sign = 0usize;
        let mut n_y = 0u32;
        for (k, &p) in self.letters.iter().enumerate() {
            let bit = 1usize << site_bit(k + 1, n);
            if p.flips() {
                flip |= bit;
            }
            if p.signs() {
                sign |= bit;
            }
            if p == Pauli::Y {
                n_y += 1;
            }
        }
        let global = match n_y % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        PauliAction { flip, sign, global }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .trim()
            .chars()
            .map(|ch| match ch.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Parse(format!("invalid Pauli letter '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(Error::Parse("empty Pauli string".into()));
        }
        Ok(Self { letters })
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct PauliAction {
    flip: usize,
    sign: usize,
    global: C64,
}

impl PauliAction {
    /// Phase picked up by basis state `b`.
    #[inline]
    pub(crate) fn phase(&self, b: usize) -> C64 {
        if (b & self.sign).count_ones() % 2 == 1 {
            -self.global
        } else {
            self.global
        }
    }

    /// `(1/d) tr(W P W P)` in `O(d²)`.
    pub(crate) fn otoc_trace(&self, w: &Array2<C64>) -> C64 {
        let d = w.nrows();
        let phases: Vec<C64> = (0..d).map(|b| self.phase(b)).collect();
        // (WP)_{r,c} = W_{r, c^flip} phase(c^flip)
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..d {
            let rf = r ^ self.flip;
            let mut row = C64::new(0.0, 0.0);
            for c in 0..d {
                let cf = c ^ self.flip;
                row += w[[r, cf]] * phases[cf] * w[[c, rf]] * phases[rf];
            }
            acc += row;
        }
        acc / d as f64
    }
}

/// All `4^|support|` Pauli strings on `n` sites supported within `support`
/// (1-based). The identity comes first; the order is lexicographic in
/// `I < X < Y < Z` over the ascending support.
pub fn pauli_enumerate(n: usize, support: &[usize]) -> Result<Vec<PauliString>> {
    let mut sites = support.to_vec();
    sites.sort_unstable();
    sites.dedup();
    if let Some(&bad) = sites.iter().find(|&&s| s == 0 || s > n) {
        return Err(Error::InvalidSite { site: bad, n });
    }
    let count = 1usize << (2 * sites.len());
    let mut out = Vec::with_capacity(count);
    for code in 0..count {
        let mut letters = vec![Pauli::I; n];
        for (pos, &site) in sites.iter().enumerate() {
            let shift = 2 * (sites.len() - 1 - pos);
            letters[site - 1] = Pauli::ALL[(code >> shift) & 3];
        }
        out.push(PauliString { letters });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::hs_inner;

    #[test]
    fn single_site_enumeration() {
        let ps = pauli_enumerate(2, &[1]).unwrap();
        let names: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
        assert_eq!(names, ["II", "XI", "YI", "ZI"]);
    }

    #[test]
    fn empty_support_is_identity() {
        let ps = pauli_enumerate(3, &[]).unwrap();
        assert_eq!(ps, vec![PauliString::identity(3)]);
    }

    #[test]
    fn invalid_support_rejected() {
        assert!(pauli_enumerate(2, &[3]).is_err());
        assert!(PauliString::single(2, 0, Pauli::X).is_err());
    }

    #[test]
    fn pauli_operator_properties() {
        for p in pauli_enumerate(2, &[1, 2]).unwrap() {
            let op = p.to_operator();
            assert!(op.hermiticity_residual() < 1e-15);
            assert!(op.unitarity_residual() < 1e-15);
            assert!((op.hs_norm() - 1.0).abs() < 1e-15);
            if !p.is_identity() {
                assert!(op.trace().norm() < 1e-15);
            }
        }
    }

    #[test]
    fn orthogonal_single_qubit_paulis() {
        let z: PauliString = "Z".parse().unwrap();
        let x: PauliString = "X".parse().unwrap();
        assert!(hs_inner(&z.to_operator(), &x.to_operator()).unwrap().norm() < 1e-15);
        assert!(!z.commutes_with(&x));
    }

    #[test]
    fn sparse_action_matches_dense_matrix() {
        for p in pauli_enumerate(3, &[1, 2, 3]).unwrap() {
            let dense = p.to_operator();
            let act = p.action();
            for b in 0..8 {
                let target = b ^ act.flip;
                assert!((dense.matrix()[[target, b]] - act.phase(b)).norm() < 1e-15, "{p}");
            }
        }
    }

    #[test]
    fn parse_and_display_round_trip() {
        let p: PauliString = "xyIz".parse().unwrap();
        assert_eq!(p.to_string(), "XYIZ");
        assert_eq!(p.support(), vec![1, 2, 4]);
        assert!("XQ".parse::<PauliString>().is_err());
    }
}
