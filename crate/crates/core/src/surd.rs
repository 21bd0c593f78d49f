//! Exact arithmetic on finite sums `q₀ + Σ qₖ √mₖ` with rational `qₖ` and
//! distinct square-free `mₖ > 1`.
//!
//! Square roots of distinct square-free integers are linearly independent
//! over the rationals, so a surd is rational exactly when every radical
//! coefficient vanishes. That makes the "irrational differences" property of
//! a synthetic spectrum decidable.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// Exact value `Σ coeff[m] · √m`; the key `1` holds the rational part.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Surd {
    terms: BTreeMap<u64, Rational>,
}

/// Splits `k` into `(s, r)` with `k = s² r` and `r` square-free.
fn square_free_split(mut k: u64) -> (u64, u64) {
    let mut outside = 1u64;
    let mut inside = 1u64;
    let mut p = 2u64;
    while p * p <= k {
        let mut e = 0;
        while k.is_multiple_of(p) {
            k /= p;
            e += 1;
        }
        outside *= p.pow(e / 2);
        if e % 2 == 1 {
            inside *= p;
        }
        p += 1;
    }
    (outside, inside * k)
}

impl Surd {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn rational(q: Rational) -> Self {
        let mut s = Self::zero();
        s.push(1, q);
        s
    }

    pub fn integer(n: i64) -> Self {
        Self::rational(Rational::from_integer(n))
    }

    /// `q · √k` for any positive integer `k`; perfect-square factors are
    /// pulled out of the radical.
    pub fn sqrt_term(q: Rational, k: u64) -> Result<Self> {
        if k == 0 {
            return Ok(Self::zero());
        }
        let (outside, inside) = square_free_split(k);
        let factor = i64::try_from(outside).map_err(|_| Error::OutOfRange(format!("radicand {k}")))?;
        let mut s = Self::zero();
        s.push(inside, q * factor);
        Ok(s)
    }

    pub fn sqrt(k: u64) -> Result<Self> {
        Self::sqrt_term(Rational::from_integer(1), k)
    }

    fn push(&mut self, radicand: u64, q: Rational) {
        let entry = self.terms.entry(radicand).or_insert_with(|| Rational::from_integer(0));
        *entry += q;
        if *entry == Rational::from_integer(0) {
            self.terms.remove(&radicand);
        }
    }

    /// Nonzero `(radicand, coefficient)` pairs in ascending radicand order.
    pub fn terms(&self) -> impl Iterator<Item = (u64, Rational)> + '_ {
        self.terms.iter().map(|(&m, &q)| (m, q))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_rational(&self) -> bool {
        self.terms.keys().all(|&m| m == 1)
    }

    /// Rational value when [`Surd::is_rational`] holds.
    pub fn as_rational(&self) -> Option<Rational> {
        self.is_rational()
            .then(|| self.terms.get(&1).copied().unwrap_or_else(|| Rational::from_integer(0)))
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(&m, q)| (*q.numer() as f64 / *q.denom() as f64) * (m as f64).sqrt())
            .sum()
    }
}

impl Add for &Surd {
    type Output = Surd;
    fn add(self, rhs: &Surd) -> Surd {
        let mut out = self.clone();
        for (m, q) in rhs.terms() {
            out.push(m, q);
        }
        out
    }
}

impl Neg for &Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd { terms: self.terms.iter().map(|(&m, &q)| (m, -q)).collect() }
    }
}

impl Sub for &Surd {
    type Output = Surd;
    fn sub(self, rhs: &Surd) -> Surd {
        self + &(-rhs)
    }
}

impl Mul for &Surd {
    type Output = Surd;
    fn mul(self, rhs: &Surd) -> Surd {
        let mut out = Surd::zero();
        for (a, p) in self.terms() {
            for (b, q) in rhs.terms() {
                // √a √b = g √(ab/g²) for square-free a, b with g = gcd(a, b)
                let g = a.gcd(&b);
                out.push((a / g) * (b / g), p * q * g as i64);
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for Surd {
            type Output = Surd;
            fn $f(self, rhs: Surd) -> Surd {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        -&self
    }
}

fn fmt_rational(q: &Rational) -> String {
    if *q.denom() == 1 {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (&m, q)) in self.terms.iter().enumerate() {
            let neg = *q < Rational::from_integer(0);
            let mag = if neg { -*q } else { *q };
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { "-" } else { "+" })?;
            }
            if m == 1 {
                write!(f, "{}", fmt_rational(&mag))?;
            } else if mag == Rational::from_integer(1) {
                write!(f, "sqrt({m})")?;
            } else {
                write!(f, "{}*sqrt({m})", fmt_rational(&mag))?;
            }
        }
        Ok(())
    }
}

/// Parses one unsigned term such as `3`, `3/2`, `sqrt(2)`, `2*sqrt(2)`,
/// `√10` or `sqrt(2)/2`.
fn parse_term(term: &str) -> Result<Surd> {
    let bad = || Error::Parse(format!("invalid surd term '{term}'"));
    let s = term.trim().replace('√', "sqrt");
    let (coef_part, radical, tail) = match s.find("sqrt") {
        None => (s.as_str(), None, ""),
        Some(pos) => {
            let rest = &s[pos + 4..];
            let (rad, tail) = if let Some(inner) = rest.strip_prefix('(') {
                let close = inner.find(')').ok_or_else(bad)?;
                (&inner[..close], &inner[close + 1..])
            } else {
                let end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
                (&rest[..end], &rest[end..])
            };
            let rad: u64 = rad.trim().parse().map_err(|_| bad())?;
            (s[..pos].trim().trim_end_matches('*'), Some(rad), tail.trim())
        }
    };
    let parse_q = |txt: &str| -> Result<Rational> {
        let txt = txt.trim();
        match txt.split_once('/') {
            Some((n, d)) => {
                let n: i64 = n.trim().parse().map_err(|_| bad())?;
                let d: i64 = d.trim().parse().map_err(|_| bad())?;
                if d == 0 {
                    return Err(bad());
                }
                Ok(Rational::new(n, d))
            }
            None => Ok(Rational::from_integer(txt.parse().map_err(|_| bad())?)),
        }
    };
    let mut coef = if coef_part.trim().is_empty() {
        if radical.is_none() {
            return Err(bad());
        }
        Rational::from_integer(1)
    } else {
        parse_q(coef_part)?
    };
    if !tail.is_empty() {
        let den = tail.strip_prefix('/').ok_or_else(bad)?;
        let den: i64 = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        coef /= den;
    }
    match radical {
        Some(k) => Surd::sqrt_term(coef, k),
        None => Ok(Surd::rational(coef)),
    }
}

impl FromStr for Surd {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty surd".into()));
        }
        let mut total = Surd::zero();
        let mut start = 0;
        let bytes = s.as_bytes();
        let mut depth = 0i32;
        let flush = |from: usize, to: usize, total: &mut Surd| -> Result<()> {
            let piece = &s[from..to];
            let (neg, body) = match piece.as_bytes().first() {
                Some(b'-') => (true, &piece[1..]),
                Some(b'+') => (false, &piece[1..]),
                _ => (false, piece),
            };
            let t = parse_term(body)?;
            *total = if neg { &*total - &t } else { &*total + &t };
            Ok(())
        };
        for (i, &b) in bytes.iter().enumerate() {
            match b {
                b'(' => depth += 1,
                b')' => depth -= 1,
                b'+' | b'-' if i > start && depth == 0 => {
                    flush(start, i, &mut total)?;
                    start = i;
                }
                _ => {}
            }
        }
        flush(start, s.len(), &mut total)?;
        Ok(total)
    }
}

impl Serialize for Surd {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Surd {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
