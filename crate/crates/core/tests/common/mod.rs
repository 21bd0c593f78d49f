//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use ndarray::Array2;
use revivals::hamiltonian::SyntheticSpectrum;
use revivals::random::substream;
use revivals::{EigenClassification, SpectralDecomposition, C64};

/// `e^{-iHt}` by scaling and squaring of a truncated Taylor series; no
/// eigendecomposition involved.
pub fn expm_oracle(h: &Array2<C64>, t: f64) -> Array2<C64> {
    let d = h.nrows();
    let norm: f64 = h.iter().map(|z| z.norm()).sum::<f64>() * t.abs();
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let a = h.mapv(|z| z * C64::new(0.0, -t / 2f64.powi(s)));
    let mut term = Array2::<C64>::eye(d);
    let mut sum = term.clone();
    for k in 1..=24 {
        term = term.dot(&a).mapv(|z| z / k as f64);
        sum += &term;
    }
    for _ in 0..s {
        sum = sum.dot(&sum);
    }
    sum
}

pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn kron_all(factors: &[Array2<C64>]) -> Array2<C64> {
    let mut out = Array2::<C64>::eye(1);
    for f in factors {
        let (ar, ac) = out.dim();
        let (br, bc) = f.dim();
        let mut next = Array2::<C64>::zeros((ar * br, ac * bc));
        for ((i, j), x) in out.indexed_iter() {
            for ((k, l), y) in f.indexed_iter() {
                next[[i * br + k, j * bc + l]] = x * y;
            }
        }
        out = next;
    }
    out
}

pub fn generic_fixture(nr: usize, ni: usize, seed: u64) -> (SpectralDecomposition, EigenClassification) {
    let spec = SyntheticSpectrum::random_generic(nr, ni, true, 0.05, &mut substream(seed, 0)).unwrap();
    (spec.decomposition().unwrap(), spec.classification().unwrap())
}

/// Bits of `index` at the given 1-based sites, packed most significant first.
fn gather(index: usize, sites: &[usize], n: usize) -> usize {
    sites.iter().fold(0, |acc, &s| (acc << 1) | ((index >> (n - s)) & 1))
}

/// Pauli-averaged OTOC from the operator-space purity of `U`:
/// with rows split as `(a ∈ A, b)` and columns as `(δ ∈ D, c)`, the matrix
/// `M[(b,δ),(a,c)] = U[(a,b),(δ,c)]` gives `avg = ‖M M†‖²_F / (d d_A d_D)`.
pub fn purity_avg_otoc(u: &Array2<C64>, n: usize, a: &[usize], d_sites: &[usize]) -> f64 {
    let d = 1usize << n;
    let rest_a: Vec<usize> = (1..=n).filter(|s| !a.contains(s)).collect();
    let rest_d: Vec<usize> = (1..=n).filter(|s| !d_sites.contains(s)).collect();
    let (da, dd) = (1usize << a.len(), 1usize << d_sites.len());
    let (db, dc) = (d / da, d / dd);
    let mut m = Array2::<C64>::zeros((db * dd, da * dc));
    for r in 0..d {
        let (ai, bi) = (gather(r, a, n), gather(r, &rest_a, n));
        for c in 0..d {
            let (di, ci) = (gather(c, d_sites, n), gather(c, &rest_d, n));
            m[[bi * dd + di, ai * dc + ci]] = u[[r, c]];
        }
    }
    let k = m.dot(&m.t().mapv(|z| z.conj()));
    k.iter().map(|z| z.norm_sqr()).sum::<f64>() / (d * da * dd) as f64
}

fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

/// Maximum of `objective` over free unitaries of a fixture with
/// `N_R = N_I = 2`, on a grid of spacing `step`.
///
/// The rational block is `[[cos θ, −e^{iδ} sin θ], [e^{−iδ} sin θ, cos θ]]`
/// (other block phases only rephase coefficients) and the ℬ block runs over
/// both permutations. ℬ phases drop out of state weights and of `|X_jk|²`,
/// so they are held at zero.
pub fn grid_free_maximum(
    spec: &SpectralDecomposition,
    cls: &EigenClassification,
    step: f64,
    objective: impl Fn(&Array2<C64>) -> f64,
) -> f64 {
    assert_eq!((cls.n_rational(), cls.n_irrational()), (2, 2));
    let (a, b) = (cls.rational_indices(), cls.irrational_indices());
    let v = spec.eigenvectors();
    let mut best = f64::NEG_INFINITY;
    let n_theta = (std::f64::consts::PI / step).ceil() as usize;
    let n_delta = (std::f64::consts::TAU / step).ceil() as usize;
    for swap in [false, true] {
        for i in 0..n_theta {
            let (s, c) = (i as f64 * step).sin_cos();
            for j in 0..n_delta {
                let e = C64::from_polar(1.0, j as f64 * step);
                let mut m = Array2::<C64>::zeros((4, 4));
                m[[a[0], a[0]]] = C64::new(c, 0.0);
                m[[a[0], a[1]]] = -e * s;
                m[[a[1], a[0]]] = e.conj() * s;
                m[[a[1], a[1]]] = C64::new(c, 0.0);
                let (p, q) = if swap { (b[1], b[0]) } else { (b[0], b[1]) };
                m[[b[0], p]] = C64::new(1.0, 0.0);
                m[[b[1], q]] = C64::new(1.0, 0.0);
                let u = v.dot(&m).dot(&dagger(v));
                best = best.max(objective(&u));
            }
        }
    }
    best
}

/// `1 − |⟨φ|U_τ|φ⟩|` with `φ = U ψ`.
pub fn non_revival<'a>(u_tau: &'a Array2<C64>, psi: &'a ndarray::Array1<C64>) -> impl Fn(&Array2<C64>) -> f64 + 'a {
    move |u: &Array2<C64>| {
        let phi = u.dot(psi);
        let back = u_tau.dot(&phi);
        1.0 - phi.iter().zip(back.iter()).map(|(x, y)| x.conj() * y).sum::<C64>().norm()
    }
}

/// `1 − |tr(X(τ)† X)/d|²` with `X = U† O U`.
pub fn observable_non_revival<'a>(u_tau: &'a Array2<C64>, o: &'a Array2<C64>) -> impl Fn(&Array2<C64>) -> f64 + 'a {
    move |u: &Array2<C64>| {
        let x = dagger(u).dot(o).dot(u);
        let xt = dagger(u_tau).dot(&x).dot(u_tau);
        let d = o.nrows() as f64;
        1.0 - (dagger(&xt).dot(&x).diag().sum() / d).norm_sqr()
    }
}

pub fn random_density(d: usize, rng: &mut impl rand::Rng) -> Array2<C64> {
    let g = revivals::random::ginibre(d, rng);
    let rho = g.dot(&dagger(&g));
    let tr = rho.diag().sum();
    rho.mapv(|z| z / tr)
}

/// Controlled rotation `exp(−iα Σ_i |i⟩⟨i| ⊗ (|i+1⟩⟨0| + h.c.))` with
/// `sin²α = p` on `ρ ⊗ |0⟩⟨0|`, followed by dephasing of the ancilla.
pub fn circuit_oracle(rho: &Array2<C64>, p: f64) -> Array2<C64> {
    let d = rho.nrows();
    let da = d + 1;
    let mut gen = Array2::<C64>::zeros((d * da, d * da));
    for i in 0..d {
        gen[[i * da + i + 1, i * da]] = C64::new(1.0, 0.0);
        gen[[i * da, i * da + i + 1]] = C64::new(1.0, 0.0);
    }
    let u = expm_oracle(&gen, p.sqrt().asin());
    let mut joint = Array2::<C64>::zeros((d * da, d * da));
    for s in 0..d {
        for t in 0..d {
            joint[[s * da, t * da]] = rho[[s, t]];
        }
    }
    let mut out = u.dot(&joint).dot(&dagger(&u));
    for ((r, c), z) in out.indexed_iter_mut() {
        if r % da != c % da {
            *z = C64::new(0.0, 0.0);
        }
    }
    out
}

/// `(1−p)|φ⟩⟨φ| + p Σ_i |⟨i|U(t1)φ⟩|² U(t2)|i⟩⟨i|U(t2)†` with both
/// propagators from the Taylor oracle.
pub fn recovery_oracle(h: &Array2<C64>, phi: &ndarray::Array1<C64>, t1: f64, t2: f64, p: f64) -> Array2<C64> {
    let d = h.nrows();
    let v = expm_oracle(h, t1).dot(phi);
    let u2 = expm_oracle(h, t2);
    let mut out = Array2::<C64>::zeros((d, d));
    for r in 0..d {
        for c in 0..d {
            out[[r, c]] = phi[r] * phi[c].conj() * (1.0 - p);
        }
    }
    for i in 0..d {
        let w = p * v[i].norm_sqr();
        for r in 0..d {
            for c in 0..d {
                out[[r, c]] += u2[[r, i]] * u2[[c, i]].conj() * w;
            }
        }
    }
    out
}
