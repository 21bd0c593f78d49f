mod common;

use common::{expm_oracle, generic_fixture, grid_free_maximum, non_revival, observable_non_revival};
use ndarray::Array2;
use proptest::prelude::*;
use revivals::operator::unitarity_residual;
use revivals::random::{haar_state, random_hermitian, substream};
use revivals::resource::*;
use revivals::scrambling::otoc;
use revivals::{pauli_enumerate, DenseOperator, DensityMatrix, SpectralDecomposition, C64};

const GRID_STEP: f64 = 0.01;

fn u_tau(spec: &SpectralDecomposition, tau: f64) -> Array2<C64> {
    expm_oracle(spec.reconstruct().matrix(), tau)
}

fn budget(seed: u64) -> SearchBudget {
    SearchBudget { seed, ..SearchBudget::default() }
}

#[test]
fn span_states_revive_and_resourceful_states_do_not() {
    for seed in 0..5 {
        let (spec, cls) = generic_fixture(4, 4, seed);
        let mut rng = substream(seed, 7);
        for _ in 0..50 {
            let free = random_rational_state(&spec, &cls, &mut rng).unwrap();
            assert!(revival_fidelity(&spec, &cls, &free).unwrap() >= 1.0 - 1e-9);
            let bad = random_resourceful_state(&spec, &cls, &mut rng).unwrap();
            assert!(revival_fidelity(&spec, &cls, &bad).unwrap() <= 1.0 - 1e-6);
        }
    }
}

#[test]
fn free_unitaries_preserve_freeness() {
    let (spec, cls) = generic_fixture(3, 5, 3);
    let mut rng = substream(3, 8);
    let units: Vec<DenseOperator> = (0..10)
        .map(|_| make_free_unitary(&spec, &cls, &FreeUnitarySpec::random(&cls, &mut rng).unwrap()).unwrap())
        .collect();
    for u in &units {
        assert!(u.unitarity_residual() < 1e-9);
        for _ in 0..20 {
            let psi = random_free_state(&spec, &cls, &mut rng).unwrap();
            assert!(revival_fidelity(&spec, &cls, &u.apply(&psi).unwrap()).unwrap() >= 1.0 - 1e-9);
        }
        assert!(is_free_unitary(&spec, &cls, &u.adjoint(), 1e-8).unwrap().is_free);
    }
    for pair in units.windows(2) {
        let product = pair[0].dot(&pair[1]).unwrap();
        assert!(is_free_unitary(&spec, &cls, &product, 1e-8).unwrap().is_free);
    }
}

#[test]
fn coherence_between_classes_breaks_mixed_revival() {
    let (spec, cls) = generic_fixture(3, 5, 4);
    let mut rng = substream(4, 9);
    let rho = random_free_density(&spec, &cls, &mut rng).unwrap();
    assert!(revival_fidelity_mixed(&spec, &cls, &rho).unwrap() >= 1.0 - 1e-8);
    let (a, b) = (cls.rational_indices()[0], cls.irrational_indices()[0]);
    let mut eig = spec.to_eigenbasis(rho.matrix());
    let eps = 0.01 * eig[[a, a]].re.min(eig[[b, b]].re);
    eig[[a, b]] += C64::new(eps, 0.0);
    eig[[b, a]] += C64::new(eps, 0.0);
    let perturbed = DensityMatrix::new(spec.from_eigenbasis(&eig).into_matrix()).unwrap();
    assert!(revival_fidelity_mixed(&spec, &cls, &perturbed).unwrap() <= 1.0 - 1e-6);
}

#[test]
fn coherence_between_irrational_levels_breaks_observable_revival() {
    let (spec, cls) = generic_fixture(3, 5, 5);
    let o = random_free_observable(&spec, &cls, &mut substream(5, 9)).unwrap();
    assert!(revival_correlator(&spec, &cls, &o).unwrap() >= 1.0 - 1e-8);
    let (b0, b1) = (cls.irrational_indices()[0], cls.irrational_indices()[1]);
    let mut eig = spec.to_eigenbasis(o.matrix());
    eig[[b0, b1]] += C64::new(0.1, 0.0);
    eig[[b1, b0]] += C64::new(0.1, 0.0);
    let p = spec.from_eigenbasis(&eig);
    let p = p.scaled(C64::new(1.0 / p.hs_norm(), 0.0));
    assert!(revival_correlator(&spec, &cls, &p).unwrap() <= 1.0 - 1e-6);
}

#[test]
fn monotone_r_vanishes_on_free_states_and_bounds_resourceful_ones() {
    let (spec, cls) = generic_fixture(3, 5, 6);
    let mut rng = substream(6, 10);
    for k in 0..5 {
        let free = random_free_state(&spec, &cls, &mut rng).unwrap();
        assert!(monotone_r(&spec, &cls, &free, &budget(k)).unwrap().value.abs() < 1e-8);
        let bad = random_resourceful_state(&spec, &cls, &mut rng).unwrap();
        let f = revival_fidelity(&spec, &cls, &bad).unwrap();
        assert!(monotone_r(&spec, &cls, &bad, &budget(k)).unwrap().value >= 1.0 - f - 1e-12);
    }
}

#[test]
fn monotone_r_matches_grid_oracle() {
    for seed in [40, 41] {
        let (spec, cls) = generic_fixture(2, 2, seed);
        let ut = u_tau(&spec, cls.revival_period().unwrap());
        let mut rng = substream(seed, 11);
        let states = [random_resourceful_state(&spec, &cls, &mut rng).unwrap(), haar_state(2, &mut rng).unwrap()];
        for psi in &states {
            let grid = grid_free_maximum(&spec, &cls, GRID_STEP, non_revival(&ut, psi.amplitudes()));
            let est = monotone_r(&spec, &cls, psi, &budget(seed)).unwrap().value;
            assert!((est - grid).abs() < 1e-3, "seed {seed}: estimate {est} vs grid {grid}");
        }
    }
}

#[test]
fn monotone_g_matches_grid_oracle_and_bounds_otoc() {
    let (spec, cls) = generic_fixture(2, 2, 42);
    let tau = cls.revival_period().unwrap();
    let ut = u_tau(&spec, tau);
    for p in pauli_enumerate(2, &[1, 2]).unwrap().into_iter().filter(|p| !p.is_identity()) {
        let o = p.to_operator();
        let grid = grid_free_maximum(&spec, &cls, GRID_STEP, observable_non_revival(&ut, o.matrix()));
        let est = monotone_g(&spec, &cls, &o, &budget(1)).unwrap().value;
        assert!((est - grid).abs() < 1e-3, "{p}: estimate {est} vs grid {grid}");
        let value = otoc(&spec, &o, &o, tau).unwrap().re;
        assert!(value >= 1.0 - 2.0 * grid - 1e-6, "{p}: otoc {value} below 1 - 2G = {}", 1.0 - 2.0 * grid);
        assert!(value <= 1.0 + 1e-6);
    }
}

#[test]
fn destruction_capacity_dominates_state_monotone() {
    let (spec, cls) = generic_fixture(1, 3, 43);
    let mut rng = substream(43, 12);
    let u = DenseOperator::new(revivals::random::haar_unitary(spec.dim(), &mut rng).unwrap()).unwrap();
    let d = monotone_d(&spec, &cls, &u, &budget(2)).unwrap().value;
    for &b in cls.irrational_indices() {
        let psi = u.apply(&spec.eigenvector(b).unwrap()).unwrap();
        let r = monotone_r(&spec, &cls, &psi, &SearchBudget { restarts: 1, iterations: 1, seed: 0, threads: 1 }).unwrap();
        assert!(d >= r.value - 1e-9, "D {d} < R(U psi_b) {}", r.value);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exponential_map_is_unitary(params in prop::collection::vec(-4.0f64..4.0, 9)) {
        prop_assert!(unitarity_residual(&expmap_unitary(&params, 3)) < 1e-10);
    }

    #[test]
    fn fidelity_lies_in_unit_interval(seed in 0u64..1000) {
        let (spec, cls) = generic_fixture(2, 2, 44);
        let psi = haar_state(2, &mut substream(seed, 0)).unwrap();
        let f = revival_fidelity(&spec, &cls, &psi).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
    }

    #[test]
    fn random_free_unitaries_pass_the_check(seed in 0u64..1000) {
        let (spec, cls) = generic_fixture(1, 3, 45);
        let u = make_free_unitary(&spec, &cls, &FreeUnitarySpec::random(&cls, &mut substream(seed, 0)).unwrap()).unwrap();
        prop_assert!(is_free_unitary(&spec, &cls, &u, 1e-8).unwrap().is_free);
    }

    #[test]
    fn correlator_is_basis_phase_invariant(seed in 0u64..1000, phase in 0.0..std::f64::consts::TAU) {
        let (spec, cls) = generic_fixture(2, 2, 46);
        let h = random_hermitian(2, &mut substream(seed, 0)).unwrap();
        let h = h.scaled(C64::new(1.0 / h.hs_norm(), 0.0));
        let g = revival_correlator(&spec, &cls, &h).unwrap();
        let rotated = h.scaled(C64::from_polar(1.0, phase));
        prop_assert!((revival_correlator(&spec, &cls, &rotated).unwrap() - g).abs() < 1e-12);
    }
}
