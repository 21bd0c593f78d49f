mod common;

use common::{expm_oracle, generic_fixture, kron_all, purity_avg_otoc};
use ndarray::Array2;
use rand::Rng;
use revivals::hamiltonian::build_pxp;
use revivals::random::{random_hermitian, substream};
use revivals::resource::random_free_observable;
use revivals::scrambling::{avg_otoc, avg_otoc_series, decoding_fidelity, otoc, pauli_weight_overlap, SubsystemPair};
use revivals::{Pauli, PauliString, SpectralDecomposition, C64};

fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

fn pxp(n: usize) -> (Array2<C64>, SpectralDecomposition) {
    let h = build_pxp(n).unwrap();
    let spec = SpectralDecomposition::new(&h).unwrap();
    (h.into_matrix(), spec)
}

#[test]
fn average_matches_operator_purity() {
    let n = 6;
    let (h, spec) = pxp(n);
    let cases: [(&[usize], &[usize]); 4] = [(&[1], &[6]), (&[1], &[1]), (&[1, 2], &[2, 5]), (&[3], &[1, 2, 4])];
    for &t in &[0.7, 3.1] {
        let u = expm_oracle(&h, t);
        for (a, d) in cases {
            let pair = SubsystemPair::new(n, a, d).unwrap();
            let got = avg_otoc(&spec, &pair, t).unwrap();
            let want = purity_avg_otoc(&u, n, a, d);
            assert!((got - want).abs() < 1e-9, "A={a:?} D={d:?} t={t}: {got} vs {want}");
        }
    }
}

#[test]
fn average_matches_explicit_term_sum() {
    let n = 8;
    let (h, spec) = pxp(n);
    let pair = SubsystemPair::new(n, &[1], &[8]).unwrap();
    let letters = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let embed = |site: usize, p: Pauli| {
        let mut f = vec![Array2::<C64>::eye(2); n];
        f[site - 1] = p.matrix();
        kron_all(&f)
    };
    let times = [0.55, 4.6, 12.0];
    let got = avg_otoc_series(&spec, &pair, &times).unwrap();
    for (k, &t) in times.iter().enumerate() {
        let u = expm_oracle(&h, t);
        let mut total = C64::new(0.0, 0.0);
        for &pa in &letters {
            let a = embed(1, pa);
            let at = dagger(&u).dot(&a).dot(&u);
            for &pd in &letters {
                let d = embed(8, pd);
                total += at.dot(&d).dot(&at).dot(&d).diag().sum() / 256.0;
            }
        }
        let want = total.re / 16.0;
        assert!(total.im.abs() < 1e-10);
        assert!((got[k] - want).abs() < 1e-9, "t={t}: {} vs {want}", got[k]);
    }
}

#[test]
fn initial_average_formula() {
    let mut rng = substream(21, 0);
    for _ in 0..10 {
        let n = rng.random_range(3..=8);
        let mut pick = |k: usize| {
            let mut sites: Vec<usize> = (1..=n).collect();
            for i in (1..n).rev() {
                sites.swap(i, rng.random_range(0..=i));
            }
            let mut s = sites[..k].to_vec();
            s.sort();
            s
        };
        let a = pick(1 + n / 4);
        let d = pick(1 + n / 3);
        let spec = SpectralDecomposition::new(&build_pxp(n).unwrap()).unwrap();
        let pair = SubsystemPair::new(n, &a, &d).unwrap();
        let outside = a.iter().filter(|s| !d.contains(s)).count() as i32;
        let want = 4f64.powi(outside) / 4f64.powi(a.len() as i32);
        let got = avg_otoc(&spec, &pair, 0.0).unwrap();
        assert!((got - want).abs() < 1e-9, "n={n} A={a:?} D={d:?}");
    }
}

#[test]
fn initial_decoding_fidelity() {
    let spec = SpectralDecomposition::new(&build_pxp(6).unwrap()).unwrap();
    let disjoint = SubsystemPair::new(6, &[1], &[6]).unwrap();
    let same = SubsystemPair::new(6, &[1], &[1]).unwrap();
    assert!((decoding_fidelity(&spec, &disjoint, 0.0).unwrap() - 0.25).abs() < 1e-12);
    assert!((decoding_fidelity(&spec, &same, 0.0).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn free_observable_otoc_revives() {
    for seed in 0..3 {
        let (spec, cls) = generic_fixture(3, 5, 30 + seed);
        let mut rng = substream(seed, 1);
        let o1 = random_free_observable(&spec, &cls, &mut rng).unwrap();
        let o2 = random_hermitian(3, &mut rng).unwrap();
        let tau = cls.revival_period().unwrap();
        let start = otoc(&spec, &o1, &o2, 0.0).unwrap();
        let revived = otoc(&spec, &o1, &o2, tau).unwrap();
        assert!((revived - start).norm() < 1e-8, "seed={seed}");
    }
}

#[test]
fn pauli_overlap_starts_at_one_and_is_bounded() {
    let (_, spec) = pxp(6);
    let z1 = PauliString::single(6, 1, Pauli::Z).unwrap();
    assert!((pauli_weight_overlap(&spec, &z1, 0.0).unwrap() - 1.0).abs() < 1e-12);
    for k in 1..40 {
        let v = pauli_weight_overlap(&spec, &z1, 0.37 * k as f64).unwrap();
        assert!(v.abs() <= 1.0 + 1e-12);
    }
}
