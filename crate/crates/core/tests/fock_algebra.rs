mod common;

use ducc_core::ccsolver::{ClusterOperator, ExcitationSignature};
use ducc_core::fockspace::full_space::{hamiltonian, string_matrix};
use ducc_core::fockspace::{
    apply_string, exp_nilpotent, lower_cluster, Determinant, ExcitationPattern, Ladder,
    SectorMatrix,
};
use ducc_core::linalg::max_abs;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn anticommutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b + b * a
}

#[test]
fn canonical_anticommutation_on_full_space() {
    for m in 1..=6 {
        let dim = 1 << m;
        let id = DMatrix::<f64>::identity(dim, dim);
        let create: Vec<_> = (0..m)
            .map(|p| string_matrix(m, &[Ladder::Create(p)]))
            .collect();
        let annihilate: Vec<_> = (0..m)
            .map(|p| string_matrix(m, &[Ladder::Annihilate(p)]))
            .collect();
        for p in 0..m {
            // a_p is the transpose of a+_p in a real basis.
            assert_eq!(annihilate[p], create[p].transpose());
            for q in 0..m {
                let expected = if p == q {
                    id.clone()
                } else {
                    DMatrix::zeros(dim, dim)
                };
                assert_eq!(
                    anticommutator(&annihilate[p], &create[q]),
                    expected,
                    "m={m} p={p} q={q}"
                );
                assert_eq!(
                    anticommutator(&create[p], &create[q]),
                    DMatrix::zeros(dim, dim)
                );
                assert_eq!(
                    anticommutator(&annihilate[p], &annihilate[q]),
                    DMatrix::zeros(dim, dim)
                );
            }
        }
    }
}

#[test]
fn ladder_strings_are_matrix_products() {
    let m = 5;
    let ops = [
        Ladder::Create(4),
        Ladder::Create(1),
        Ladder::Annihilate(3),
        Ladder::Annihilate(0),
    ];
    let product = ops
        .iter()
        .map(|op| string_matrix(m, &[*op]))
        .fold(DMatrix::identity(1 << m, 1 << m), |acc, x| acc * x);
    assert_eq!(string_matrix(m, &ops), product);
}

#[test]
fn sector_hamiltonian_matches_full_space_block() {
    for (n, r) in [(2, 1.4), (4, 2.0), (6, 2.0)] {
        let sys = common::chain(n, r);
        let full = hamiltonian(&sys.ham);
        let dets = sys.basis.dets();
        let block = DMatrix::from_fn(dets.len(), dets.len(), |i, j| {
            full[(dets[i].0 as usize, dets[j].0 as usize)]
        });
        let err = max_abs(&(block - &sys.h.data));
        assert!(err < 1e-12, "H{n}: {err}");
    }
}

#[test]
fn full_space_hamiltonian_conserves_spin_projections() {
    let sys = common::chain(4, 2.0);
    let full = hamiltonian(&sys.ham);
    let count = |bits: usize, parity: usize| {
        (0..8)
            .filter(|p| p % 2 == parity && bits >> p & 1 == 1)
            .count()
    };
    for j in 0..full.ncols() {
        for i in 0..full.nrows() {
            if full[(i, j)] != 0.0 {
                assert_eq!(count(i, 0), count(j, 0));
                assert_eq!(count(i, 1), count(j, 1));
            }
        }
    }
    assert!(max_abs(&(&full - full.transpose())) < 1e-13);
}

fn h4_operator() -> (common::Chain, ClusterOperator) {
    let sys = common::chain(4, 2.0);
    let mut t = ClusterOperator::new(2);
    t.insert(ExcitationSignature::new(vec![2], vec![4]).unwrap(), 0.1)
        .unwrap();
    t.insert(ExcitationSignature::new(vec![1], vec![7]).unwrap(), -0.05)
        .unwrap();
    t.insert(
        ExcitationSignature::new(vec![2, 3], vec![4, 5]).unwrap(),
        0.2,
    )
    .unwrap();
    t.insert(
        ExcitationSignature::new(vec![0, 3], vec![5, 6]).unwrap(),
        0.07,
    )
    .unwrap();
    (sys, t)
}

#[test]
fn lowered_cluster_is_strictly_raising_and_nilpotent() {
    let (sys, t) = h4_operator();
    let tm = lower_cluster(&t, &sys.basis).unwrap();
    let level = |i: usize| (sys.basis.det(i).0 ^ sys.basis.reference().0).count_ones();
    for j in 0..tm.dim() {
        for i in 0..tm.dim() {
            if tm.data[(i, j)] != 0.0 {
                assert!(level(i) > level(j));
            }
        }
    }
    let mut power = tm.data.clone();
    for _ in 0..8 {
        power = &power * &tm.data;
    }
    assert_eq!(max_abs(&power), 0.0);
}

#[test]
fn lowered_cluster_phase_by_hand() {
    // X = a+_5 a+_4 a_3 a_2 on |0123> gives +|0145>.
    let (sys, _) = h4_operator();
    let mut t = ClusterOperator::new(2);
    t.insert(
        ExcitationSignature::new(vec![2, 3], vec![4, 5]).unwrap(),
        1.0,
    )
    .unwrap();
    let tm = lower_cluster(&t, &sys.basis).unwrap();
    let row = sys.basis.index_of(Determinant(0b110011)).unwrap();
    assert_eq!(tm.data[(row, 0)], 1.0);
    // a+_4 a+_6 a_2 a_0 on |0123>: a_0 gives +, a_2 passes orbital 1 (-),
    // a+_6 and a+_4 each pass orbitals 1 and 3 (+).
    let mut t = ClusterOperator::new(2);
    t.insert(
        ExcitationSignature::new(vec![0, 2], vec![4, 6]).unwrap(),
        1.0,
    )
    .unwrap();
    let tm = lower_cluster(&t, &sys.basis).unwrap();
    let row = sys.basis.index_of(Determinant(0b1011010)).unwrap();
    assert_eq!(tm.data[(row, 0)], -1.0);
}

#[test]
fn pattern_assembly_matches_dense_lowering() {
    let (sys, t) = h4_operator();
    let pattern = ExcitationPattern::new(&sys.basis, t.signatures()).unwrap();
    let sparse = pattern.assemble(&t.values()).to_dense();
    let dense = lower_cluster(&t, &sys.basis).unwrap();
    assert_eq!(sparse, dense.data);
}

#[test]
fn exponential_of_commuting_excitations_is_a_group_law() {
    let (sys, t) = h4_operator();
    let tm = lower_cluster(&t, &sys.basis).unwrap();
    let half = SectorMatrix::from_data(sys.basis.clone(), &tm.data * 0.5).unwrap();
    let neg = SectorMatrix::from_data(sys.basis.clone(), -&tm.data).unwrap();
    let e = exp_nilpotent(&tm).unwrap();
    let e_half = exp_nilpotent(&half).unwrap();
    let e_neg = exp_nilpotent(&neg).unwrap();
    assert!(max_abs(&(&e_half.data * &e_half.data - &e.data)) < 1e-14);
    let id = DMatrix::identity(tm.dim(), tm.dim());
    assert!(max_abs(&(&e.data * &e_neg.data - id)) < 1e-14);
}

proptest! {
    #[test]
    fn number_operator_counts_occupation(bits in 0u64..(1 << 12), p in 0usize..12) {
        let det = Determinant(bits);
        let out = apply_string(det, &[Ladder::Create(p), Ladder::Annihilate(p)]);
        if det.is_occupied(p) {
            prop_assert_eq!(out, Some((det, 1)));
        } else {
            prop_assert_eq!(out, None);
        }
    }

    #[test]
    fn swapping_distinct_creators_flips_sign(bits in 0u64..(1 << 10), p in 0usize..10, q in 0usize..10) {
        prop_assume!(p != q);
        let det = Determinant(bits);
        let a = apply_string(det, &[Ladder::Create(p), Ladder::Create(q)]);
        let b = apply_string(det, &[Ladder::Create(q), Ladder::Create(p)]);
        match (a, b) {
            (Some((d1, s1)), Some((d2, s2))) => {
                prop_assert_eq!(d1, d2);
                prop_assert_eq!(s1, -s2);
            }
            (None, None) => {}
            _ => prop_assert!(false, "one ordering vanished and the other did not"),
        }
    }

    #[test]
    fn sector_index_round_trips(n_alpha in 0usize..=4, n_beta in 0usize..=4, pick in any::<prop::sample::Index>()) {
        let basis = ducc_core::fockspace::enumerate_sector(10, n_alpha, n_beta).unwrap();
        let i = pick.index(basis.len());
        prop_assert_eq!(basis.index_of(basis.det(i)), Some(i));
    }
}
