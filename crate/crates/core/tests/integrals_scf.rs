use ducc_core::linalg::symmetric_eigenvalues;
use ducc_core::molint::{build_chain, compute_integrals, sto3g_basis, Geometry};
use ducc_core::scf::{run_rhf, to_spin_orbitals, ScfOptions};
use proptest::prelude::*;

fn tables(geom: &Geometry) -> ducc_core::molint::IntegralTables {
    compute_integrals(geom, &sto3g_basis(geom)).unwrap()
}

#[test]
fn eri_has_eightfold_symmetry() {
    let ints = tables(&build_chain(4, 1.7).unwrap());
    let n = ints.n_basis();
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let v = ints.eri(p, q, r, s);
                    for w in [
                        ints.eri(q, p, r, s),
                        ints.eri(p, q, s, r),
                        ints.eri(r, s, p, q),
                        ints.eri(s, r, q, p),
                    ] {
                        assert_eq!(v, w);
                    }
                }
            }
        }
    }
}

#[test]
fn overlap_is_positive_definite_with_unit_diagonal() {
    for r in [1.0, 1.5, 2.0, 3.0] {
        let ints = tables(&build_chain(8, r).unwrap());
        for i in 0..8 {
            assert!((ints.overlap[(i, i)] - 1.0).abs() < 1e-12);
        }
        assert!(symmetric_eigenvalues(&ints.overlap)[0] > 0.0);
    }
}

#[test]
fn rhf_energy_is_translation_invariant() {
    let geom = build_chain(6, 2.0).unwrap();
    let moved = geom.translated([1.3, -0.4, 7.25]);
    let e0 = run_rhf(&tables(&geom), 6, &ScfOptions::default())
        .unwrap()
        .total_energy;
    let e1 = run_rhf(&tables(&moved), 6, &ScfOptions::default())
        .unwrap()
        .total_energy;
    assert!((e0 - e1).abs() < 1e-10, "{e0} vs {e1}");
    assert!((e0 - (-3.105850)).abs() < 2e-6);
}

#[test]
fn spin_orbital_reference_energy_matches_rhf() {
    for (n, r) in [(2, 1.4), (6, 2.0), (8, 3.0)] {
        let ints = tables(&build_chain(n, r).unwrap());
        let mos = run_rhf(&ints, n, &ScfOptions::default()).unwrap();
        let ham = to_spin_orbitals(&ints, &mos).unwrap();
        assert!((ham.reference_energy(n / 2) - mos.total_energy).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn integrals_invariant_under_translation(dx in -5.0f64..5.0, dy in -5.0f64..5.0, dz in -5.0f64..5.0) {
        let geom = build_chain(3, 1.6).unwrap();
        let a = tables(&geom);
        let b = tables(&geom.translated([dx, dy, dz]));
        prop_assert!((a.overlap - b.overlap).amax() < 1e-12);
        prop_assert!((a.kinetic - b.kinetic).amax() < 1e-12);
        prop_assert!((a.nuclear - b.nuclear).amax() < 1e-11);
        let eri = a.eri.iter().zip(&b.eri).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        prop_assert!(eri < 1e-11);
        prop_assert!((a.nuclear_repulsion - b.nuclear_repulsion).abs() < 1e-12);
    }
}
