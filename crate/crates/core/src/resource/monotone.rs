//! Lower-bound estimators for the monotones `R`, `D` and `𝒢`.
//!
//! Each monotone is a maximum over the free unitaries, so any feasible point
//! gives a certified lower bound. The search enumerates permutations of ℬ
//! (all of them when `N_I ≤ 6`), and for each permutation runs a
//! coordinate-wise golden-section ascent over the rational block
//! (exponential map of a skew-Hermitian matrix, `N_R²` reals) and the `N_I`
//! phases. Restarts are independent, seeded from per-restart substreams and
//! may run in parallel without affecting the result.

use ndarray::{Array1, Array2};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fidelity::{correlator_from_eigenbasis, revival_correlator, revival_fidelity};
use super::unitary::{make_free_unitary, FreeUnitarySpec};
use crate::eigen::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::operator::{dagger, eigh_hermitian, DenseOperator, StateVector};
use crate::random::substream;
use crate::spectral::EigenClassification;
use crate::C64;

/// Permutations of ℬ are enumerated exhaustively up to this many levels.
pub const EXHAUSTIVE_PERMUTATION_LIMIT: usize = 6;
const GOLDEN_STEPS: usize = 40;
const SWEEP_STOP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub restarts: usize,
    /// Coordinate-ascent sweeps per permutation (and swap rounds when
    /// permutations are sampled).
    pub iterations: usize,
    pub seed: u64,
    /// Worker threads for restarts; 0 uses the global pool.
    #[serde(default)]
    pub threads: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self { restarts: 4, iterations: 4, seed: 0, threads: 1 }
    }
}

impl SearchBudget {
    fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.iterations == 0 {
            return Err(Error::OutOfRange("search budget needs restarts >= 1 and iterations >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MonotoneKind {
    R,
    D,
    #[serde(rename = "G_obs")]
    G,
}

/// Free-unitary coordinates: exp-map parameters of the rational block, the
/// ℬ permutation and the ℬ phases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeUnitaryParams {
    pub block: Vec<f64>,
    pub permutation: Vec<usize>,
    pub phases: Vec<f64>,
}

impl FreeUnitaryParams {
    pub fn to_spec(&self, n_rational: usize) -> FreeUnitarySpec {
        FreeUnitarySpec {
            rational_block: expmap_unitary(&self.block, n_rational),
            irrational_perm: self.permutation.clone(),
            irrational_phases: self.phases.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub restart: usize,
    pub best_value: f64,
    pub evaluations: u64,
}

/// Certified lower bound on a monotone with optimizer provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneEstimate {
    pub kind: MonotoneKind,
    /// Objective re-evaluated from scratch at `best` in the computational
    /// basis; a feasible value, hence a lower bound.
    pub value: f64,
    pub seed: u64,
    pub budget: SearchBudget,
    pub exhaustive_permutations: bool,
    pub evaluations: u64,
    pub restarts: Vec<RestartRecord>,
    pub best: FreeUnitaryParams,
    /// For `D`: eigenbasis coefficients `(index, re, im)` of the maximizing
    /// free state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free_state: Option<Vec<(usize, f64, f64)>>,
}

/// `exp(K)` for the skew-Hermitian `K` encoded by `params`: the first `n`
/// entries set `K_kk = i x`, then each pair `(a, b)` sets `K_kl = a + ib`
/// for `k < l` in row-major order.
pub fn expmap_unitary(params: &[f64], n: usize) -> Array2<C64> {
    assert_eq!(params.len(), n * n, "exp-map needs n² parameters");
    if n == 0 {
        return Array2::zeros((0, 0));
    }
    // H = -iK is Hermitian: diagonal x_k, H_kl = -i(a + ib) = b - ia.
    let mut h = Array2::<C64>::zeros((n, n));
    for k in 0..n {
        h[[k, k]] = C64::new(params[k], 0.0);
    }
    let mut pos = n;
    for k in 0..n {
        for l in k + 1..n {
            let (a, b) = (params[pos], params[pos + 1]);
            pos += 2;
            h[[k, l]] = C64::new(b, -a);
            h[[l, k]] = C64::new(b, a);
        }
    }
    let (lam, v) = eigh_hermitian(&h).expect("small Hermitian eigenproblem");
    let mut scaled = v.clone();
    for (mut col, &l) in scaled.columns_mut().into_iter().zip(lam.iter()) {
        let p = C64::from_polar(1.0, l);
        col.mapv_inplace(|z| z * p);
    }
    scaled.dot(&dagger(&v))
}

/// Lexicographic successor; false after the last permutation.
fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (0..n).collect();
    let mut out = vec![p.clone()];
    while next_permutation(&mut p) {
        out.push(p.clone());
    }
    out
}

fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for k in (1..n).rev() {
        p.swap(k, rng.random_range(0..=k));
    }
    p
}

/// Objective `1 − fidelity` to be maximized over free unitaries.
trait Objective: Sync {
    fn value(&self, block: &Array2<C64>, perm: &[usize], phases: &[f64]) -> f64;
}

/// `1 − F_R(U_F ψ)` from the eigenbasis coefficients of `ψ`.
struct StateObjective {
    rational: Array1<C64>,
    irrational_weights: Vec<f64>,
    rational_phases: Vec<C64>,
    irrational_phases: Vec<C64>,
}

impl StateObjective {
    fn new(cls: &EigenClassification, coeffs: &Array1<C64>, phases: &Array1<C64>) -> Self {
        Self {
            rational: cls.rational_indices().iter().map(|&k| coeffs[k]).collect(),
            irrational_weights: cls.irrational_indices().iter().map(|&k| coeffs[k].norm_sqr()).collect(),
            rational_phases: cls.rational_indices().iter().map(|&k| phases[k]).collect(),
            irrational_phases: cls.irrational_indices().iter().map(|&k| phases[k]).collect(),
        }
    }
}

impl Objective for StateObjective {
    fn value(&self, block: &Array2<C64>, perm: &[usize], _phases: &[f64]) -> f64 {
        // ℬ phases only rotate amplitudes, so they drop out of |c'|².
        let rotated = block.dot(&self.rational);
        let mut acc: C64 = rotated.iter().zip(&self.rational_phases).map(|(c, p)| p * c.norm_sqr()).sum();
        for (k, &m) in perm.iter().enumerate() {
            acc += self.irrational_phases[k] * self.irrational_weights[m];
        }
        1.0 - acc.norm().min(1.0)
    }
}

/// `1 − G(U_F† O U_F)` from the eigenbasis matrix of `O`.
struct ObservableObjective<'a> {
    cls: &'a EigenClassification,
    op: Array2<C64>,
    phases: Array1<C64>,
}

impl Objective for ObservableObjective<'_> {
    fn value(&self, block: &Array2<C64>, perm: &[usize], phases: &[f64]) -> f64 {
        let spec = FreeUnitarySpec {
            rational_block: block.clone(),
            irrational_perm: perm.to_vec(),
            irrational_phases: phases.to_vec(),
        };
        let u = match spec.eigenbasis_matrix(self.cls) {
            Ok(u) => u,
            Err(_) => return f64::NEG_INFINITY,
        };
        let x = dagger(&u).dot(&self.op).dot(&u);
        1.0 - correlator_from_eigenbasis(&x, &self.phases).min(1.0)
    }
}

struct Point {
    value: f64,
    params: FreeUnitaryParams,
}

struct Counter(u64);

fn evaluate<O: Objective>(obj: &O, nr: usize, x: &[f64], perm: &[usize], counter: &mut Counter) -> f64 {
    counter.0 += 1;
    let block = expmap_unitary(&x[..nr * nr], nr);
    obj.value(&block, perm, &x[nr * nr..])
}

/// Coordinate-wise golden-section ascent with a fixed permutation.
fn ascend<O: Objective>(obj: &O, nr: usize, perm: &[usize], x0: &[f64], sweeps: usize, counter: &mut Counter) -> (f64, Vec<f64>) {
    let mut x = x0.to_vec();
    let mut best = evaluate(obj, nr, &x, perm, counter);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..sweeps {
        let before = best;
        for j in 0..x.len() {
            let centre = x[j];
            let (mut a, mut b) = (centre - std::f64::consts::PI, centre + std::f64::consts::PI);
            let mut probe = x.clone();
            let f_at = |t: f64, probe: &mut Vec<f64>, counter: &mut Counter| {
                probe[j] = t;
                evaluate(obj, nr, probe, perm, counter)
            };
            let mut c = b - inv_phi * (b - a);
            let mut d = a + inv_phi * (b - a);
            let mut fc = f_at(c, &mut probe, counter);
            let mut fd = f_at(d, &mut probe, counter);
            for _ in 0..GOLDEN_STEPS {
                if fc >= fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - inv_phi * (b - a);
                    fc = f_at(c, &mut probe, counter);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + inv_phi * (b - a);
                    fd = f_at(d, &mut probe, counter);
                }
            }
            let (t, ft) = if fc >= fd { (c, fc) } else { (d, fd) };
            if ft > best {
                best = ft;
                x[j] = t;
            }
        }
        if best - before < SWEEP_STOP {
            break;
        }
    }
    (best, x)
}

fn start_point<R: Rng + ?Sized>(restart: usize, len: usize, rng: &mut R) -> Vec<f64> {
    if restart == 0 {
        vec![0.0; len]
    } else {
        (0..len).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect()
    }
}

fn split(x: &[f64], nr: usize, perm: Vec<usize>) -> FreeUnitaryParams {
    FreeUnitaryParams { block: x[..nr * nr].to_vec(), permutation: perm, phases: x[nr * nr..].to_vec() }
}

/// One restart of the free-unitary search.
fn search_restart<O: Objective>(obj: &O, nr: usize, ni: usize, restart: usize, budget: &SearchBudget) -> (Point, u64) {
    let mut rng = substream(budget.seed, restart as u64);
    let mut counter = Counter(0);
    let x0 = start_point(restart, nr * nr + ni, &mut rng);
    let mut best = Point { value: f64::NEG_INFINITY, params: split(&x0, nr, (0..ni).collect()) };
    if ni <= EXHAUSTIVE_PERMUTATION_LIMIT {
        for perm in all_permutations(ni) {
            let (v, x) = ascend(obj, nr, &perm, &x0, budget.iterations, &mut counter);
            if v > best.value {
                best = Point { value: v, params: split(&x, nr, perm) };
            }
        }
    } else {
        let mut perm = if restart == 0 { (0..ni).collect() } else { random_permutation(ni, &mut rng) };
        let mut current = evaluate(obj, nr, &x0, &perm, &mut counter);
        for _ in 0..budget.iterations {
            let mut improved = false;
            for i in 0..ni {
                for j in i + 1..ni {
                    perm.swap(i, j);
                    let v = evaluate(obj, nr, &x0, &perm, &mut counter);
                    if v > current {
                        current = v;
                        improved = true;
                    } else {
                        perm.swap(i, j);
                    }
                }
            }
            if !improved {
                break;
            }
        }
        let (v, x) = ascend(obj, nr, &perm, &x0, budget.iterations, &mut counter);
        best = Point { value: v, params: split(&x, nr, perm) };
    }
    (best, counter.0)
}

fn run_restarts<T: Send, F: Fn(usize) -> T + Sync + Send>(budget: &SearchBudget, f: F) -> Result<Vec<T>> {
    if budget.threads == 1 {
        return Ok((0..budget.restarts).map(f).collect());
    }
    let job = || (0..budget.restarts).into_par_iter().map(&f).collect::<Vec<T>>();
    if budget.threads == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(budget.threads)
        .build()
        .map_err(|e| Error::OutOfRange(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

struct SearchResult {
    best: Point,
    records: Vec<RestartRecord>,
    evaluations: u64,
}

fn search<O: Objective>(obj: &O, nr: usize, ni: usize, budget: &SearchBudget) -> Result<SearchResult> {
    let results = run_restarts(budget, |r| search_restart(obj, nr, ni, r, budget))?;
    let records = results
        .iter()
        .enumerate()
        .map(|(restart, (p, n))| RestartRecord { restart, best_value: p.value, evaluations: *n })
        .collect();
    let evaluations = results.iter().map(|(_, n)| n).sum();
    // first restart wins ties, so results do not depend on scheduling
    let best = results
        .into_iter()
        .map(|(p, _)| p)
        .reduce(|acc, p| if p.value > acc.value { p } else { acc })
        .expect("at least one restart");
    Ok(SearchResult { best, records, evaluations })
}

fn check_dims(spec: &SpectralDecomposition, cls: &EigenClassification) -> Result<()> {
    if spec.dim() != cls.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), found: cls.dim() });
    }
    Ok(())
}

/// Lower bound on `R(ψ) = max_{U_F} 1 − F_R(U_F ψ)`.
pub fn monotone_r(
    spec: &SpectralDecomposition,
    cls: &EigenClassification,
    psi: &StateVector,
    budget: &SearchBudget,
) -> Result<MonotoneEstimate> {
    budget.validate()?;
    check_dims(spec, cls)?;
    let tau = cls.revival_period()?;
    let obj = StateObjective::new(cls, &spec.coefficients(psi)?, &spec.phases(tau));
    let res = search(&obj, cls.n_rational(), cls.n_irrational(), budget)?;
    let u = make_free_unitary(spec, cls, &res.best.params.to_spec(cls.n_rational()))?;
    let value = 1.0 - revival_fidelity(spec, cls, &u.apply(psi)?)?;
    Ok(MonotoneEstimate {
        kind: MonotoneKind::R,
        value,
        seed: budget.seed,
        budget: *budget,
        exhaustive_permutations: cls.n_irrational() <= EXHAUSTIVE_PERMUTATION_LIMIT,
        evaluations: res.evaluations,
        restarts: res.records,
        best: res.best.params,
        free_state: None,
    })
}

/// Lower bound on `𝒢(O) = max_{U_F} 1 − G(U_F† O U_F)` for `‖O‖₂ = 1`.
pub fn monotone_g(
    spec: &SpectralDecomposition,
    cls: &EigenClassification,
    op: &DenseOperator,
    budget: &SearchBudget,
) -> Result<MonotoneEstimate> {
    budget.validate()?;
    check_dims(spec, cls)?;
    let tau = cls.revival_period()?;
    // validates the normalization
    revival_correlator(spec, cls, op)?;
    let obj = ObservableObjective { cls, op: spec.to_eigenbasis(op.matrix()), phases: spec.phases(tau) };
    let res = search(&obj, cls.n_rational(), cls.n_irrational(), budget)?;
    let u = make_free_unitary(spec, cls, &res.best.params.to_spec(cls.n_rational()))?;
    let conjugated = u.adjoint().dot(op)?.dot(&u)?;
    let value = 1.0 - revival_correlator(spec, cls, &conjugated)?;
    Ok(MonotoneEstimate {
        kind: MonotoneKind::G,
        value,
        seed: budget.seed,
        budget: *budget,
        exhaustive_permutations: cls.n_irrational() <= EXHAUSTIVE_PERMUTATION_LIMIT,
        evaluations: res.evaluations,
        restarts: res.records,
        best: res.best.params,
        free_state: None,
    })
}

/// Inner `R` for the destruction capacity: a single restart with no
/// coordinate sweeps, so every permutation is scored at the identity block.
fn inner_r(cls: &EigenClassification, coeffs: &Array1<C64>, phases: &Array1<C64>, budget: &SearchBudget, counter: &mut Counter) -> Point {
    let obj = StateObjective::new(cls, coeffs, phases);
    let inner = SearchBudget { restarts: 1, iterations: 0, seed: budget.seed, threads: 1 };
    let (p, n) = search_restart(&obj, cls.n_rational(), cls.n_irrational(), 0, &inner);
    counter.0 += n;
    p
}

/// Lower bound on `D(U) = max_{ψ free} R(Uψ)`.
///
/// The outer search covers every ℬ eigenstate plus a coordinate ascent over
/// unit vectors in the rational span (first column of an exp-map unitary).
pub fn monotone_d(
    spec: &SpectralDecomposition,
    cls: &EigenClassification,
    u: &DenseOperator,
    budget: &SearchBudget,
) -> Result<MonotoneEstimate> {
    budget.validate()?;
    check_dims(spec, cls)?;
    let tau = cls.revival_period()?;
    if u.dim() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), found: u.dim() });
    }
    let phases = spec.phases(tau);
    let u_eig = spec.to_eigenbasis(u.matrix());
    let (nr, d) = (cls.n_rational(), cls.dim());
    let rational_state = |x: &[f64]| -> Array1<C64> {
        let w = expmap_unitary(x, nr);
        let mut c = Array1::<C64>::zeros(d);
        for (k, &a) in cls.rational_indices().iter().enumerate() {
            c[a] = w[[k, 0]];
        }
        c
    };

    struct Candidate {
        value: f64,
        free: Array1<C64>,
        params: FreeUnitaryParams,
    }

    let per_restart = run_restarts(budget, |r| {
        let mut counter = Counter(0);
        let mut best: Option<Candidate> = None;
        let consider = |free: Array1<C64>, counter: &mut Counter, best: &mut Option<Candidate>| {
            let image = u_eig.dot(&free);
            let p = inner_r(cls, &image, &phases, budget, counter);
            if best.as_ref().is_none_or(|b| p.value > b.value) {
                *best = Some(Candidate { value: p.value, free, params: p.params });
            }
        };
        if r == 0 {
            for &b in cls.irrational_indices() {
                let mut c = Array1::<C64>::zeros(d);
                c[b] = C64::new(1.0, 0.0);
                consider(c, &mut counter, &mut best);
            }
        }
        if nr > 0 {
            let mut rng = substream(budget.seed, r as u64);
            let x0 = start_point(r, nr * nr, &mut rng);
            let outer = OuterObjective { cls, u_eig: &u_eig, phases: &phases, budget, nr, d };
            let (_, x) = ascend(&outer, nr, &[], &x0, budget.iterations, &mut counter);
            consider(rational_state(&x), &mut counter, &mut best);
        }
        (best.expect("at least one candidate"), counter.0)
    })?;

    let records = per_restart
        .iter()
        .enumerate()
        .map(|(restart, (c, n))| RestartRecord { restart, best_value: c.value, evaluations: *n })
        .collect();
    let evaluations = per_restart.iter().map(|(_, n)| n).sum();
    let best = per_restart
        .into_iter()
        .map(|(c, _)| c)
        .reduce(|acc, c| if c.value > acc.value { c } else { acc })
        .expect("at least one restart");

    let psi = spec.state_from_coefficients(&best.free)?;
    let uf = make_free_unitary(spec, cls, &best.params.to_spec(nr))?;
    let value = 1.0 - revival_fidelity(spec, cls, &uf.apply(&u.apply(&psi)?)?)?;
    let free_state = best
        .free
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > 0.0)
        .map(|(k, z)| (k, z.re, z.im))
        .collect();
    Ok(MonotoneEstimate {
        kind: MonotoneKind::D,
        value,
        seed: budget.seed,
        budget: *budget,
        exhaustive_permutations: cls.n_irrational() <= EXHAUSTIVE_PERMUTATION_LIMIT,
        evaluations,
        restarts: records,
        best: best.params,
        free_state: Some(free_state),
    })
}

/// Outer objective of `D` over the rational span: the block parameters
/// select the free state, the inner search scores it.
struct OuterObjective<'a> {
    cls: &'a EigenClassification,
    u_eig: &'a Array2<C64>,
    phases: &'a Array1<C64>,
    budget: &'a SearchBudget,
    nr: usize,
    d: usize,
}

impl Objective for OuterObjective<'_> {
    fn value(&self, block: &Array2<C64>, _perm: &[usize], _phases: &[f64]) -> f64 {
        let mut c = Array1::<C64>::zeros(self.d);
        for (k, &a) in self.cls.rational_indices().iter().enumerate() {
            c[a] = block[[k, 0]];
        }
        debug_assert_eq!(block.nrows(), self.nr);
        let image = self.u_eig.dot(&c);
        inner_r(self.cls, &image, self.phases, self.budget, &mut Counter(0)).value
    }
}
