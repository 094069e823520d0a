use ducc_core::linalg::symmetric_eigenvalues;
use ducc_core::pds::{compute_moments_dense, pds_energy};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn matrix(seed: &[f64]) -> DMatrix<f64> {
    let n = 8;
    DMatrix::from_fn(n, n, |i, j| {
        let x = seed[(i * 7 + j * 3) % seed.len()] * 0.1;
        if i == j {
            i as f64 * 0.3 - 1.0 + x
        } else {
            seed[(i + j) % seed.len()] * 0.05
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn roots_follow_a_constant_shift(seed in prop::collection::vec(-1.0f64..1.0, 11), c in -20.0f64..20.0, k in 1usize..=4) {
        let h = matrix(&seed);
        let phi = DVector::from_fn(8, |i, _| if i == 0 { 1.0 } else { 0.1 * seed[i] }).normalize();
        let base = pds_energy(&compute_moments_dense(&h, &phi, k).unwrap());
        let shifted = &h + DMatrix::identity(8, 8) * c;
        let moved = pds_energy(&compute_moments_dense(&shifted, &phi, k).unwrap());
        if let (Ok(base), Ok(moved)) = (base, moved) {
            prop_assert_eq!(base.roots.len(), moved.roots.len());
            for (a, b) in base.roots.iter().zip(&moved.roots) {
                prop_assert!((b - a - c).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn estimate_bounds_the_lowest_eigenvalue(seed in prop::collection::vec(-1.0f64..1.0, 11), k in 1usize..=3) {
        let h = matrix(&seed);
        let exact = symmetric_eigenvalues(&h)[0];
        let phi = DVector::from_fn(8, |i, _| if i == 0 { 1.0 } else { 0.1 * seed[i] }).normalize();
        let est = pds_energy(&compute_moments_dense(&h, &phi, k).unwrap()).unwrap();
        prop_assert!(est.energy >= exact - 1e-9);
    }
}
