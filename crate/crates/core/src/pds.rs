//! Peeters-Devreese-Soldatov moment functional PDS(K).
//!
//! From the moments m_k = <phi|H^k|phi>, k = 0..2K-1, the coefficients of
//! P(E) = E^K + a_1 E^{K-1} + ... + a_K solve the Hankel system
//! sum_j m_{2K-i-j} a_j = -m_{2K-i} (i, j = 1..K). The smallest real root of
//! P is the PDS(K) energy, an upper bound to the lowest eigenvalue.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::downfold::EffectiveHamiltonian;
use crate::linalg;
use crate::math::binomial;
use crate::{Error, Result};

/// Condition number above which the Hankel system is rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Moments of H about its expectation value in phi.
///
/// `central[k] = <phi|(H - shift)^k|phi>` with `shift = <phi|H|phi>`,
/// which keeps the Hankel system well scaled.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    pub order: usize,
    pub shift: f64,
    pub central: Vec<f64>,
}

impl MomentVector {
    /// Raw moments <phi|H^k|phi>, k = 0..2K-1.
    pub fn raw(&self) -> Vec<f64> {
        (0..self.central.len())
            .map(|k| {
                (0..=k)
                    .map(|j| {
                        binomial(k, j) as f64
                            * libm::pow(self.shift, (k - j) as f64)
                            * self.central[j]
                    })
                    .sum()
            })
            .collect()
    }
}

/// Moments m_0..m_{2K-1} of `matrix` in the normalized state `phi`.
pub fn compute_moments_dense(
    matrix: &DMatrix<f64>,
    phi: &DVector<f64>,
    order: usize,
) -> Result<MomentVector> {
    if order == 0 {
        return Err(Error::invalid("PDS order must be at least 1"));
    }
    if phi.len() != matrix.nrows() {
        return Err(Error::invalid(
            "reference vector length does not match the Hamiltonian",
        ));
    }
    let norm = phi.norm();
    if norm == 0.0 {
        return Err(Error::invalid("reference vector is zero"));
    }
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::invalid("reference vector is not normalized"));
    }
    let shift = phi.dot(&(matrix * phi));
    let shifted = matrix - DMatrix::identity(matrix.nrows(), matrix.ncols()) * shift;
    let mut central = Vec::with_capacity(2 * order);
    let mut w = phi.clone();
    central.push(phi.dot(&w));
    for _ in 1..2 * order {
        w = &shifted * w;
        central.push(phi.dot(&w));
    }
    Ok(MomentVector {
        order,
        shift,
        central,
    })
}

/// Moments of a downfolded Hamiltonian in the CAS vector `phi`.
pub fn compute_moments(
    heff: &EffectiveHamiltonian,
    phi: &DVector<f64>,
    order: usize,
) -> Result<MomentVector> {
    compute_moments_dense(&heff.matrix, phi, order)
}

/// PDS(K) energy and all real roots of the moment polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct PdsEstimate {
    pub energy: f64,
    /// Real roots, ascending.
    pub roots: Vec<f64>,
}

pub fn pds_energy(mom: &MomentVector) -> Result<PdsEstimate> {
    let k = mom.order;
    let m = &mom.central;
    if m.len() < 2 * k {
        return Err(Error::invalid("too few moments for the requested order"));
    }
    // Indices i, j run 1..=K in the formula; shift to 0-based storage.
    let hankel = DMatrix::from_fn(k, k, |i, j| m[2 * k - (i + 1) - (j + 1)]);
    let rhs = DVector::from_fn(k, |i, _| -m[2 * k - (i + 1)]);
    let condition = linalg::condition_number(&hankel);
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::DegenerateMoments { condition });
    }
    let a = linalg::solve(&hankel, &rhs).ok_or(Error::DegenerateMoments { condition })?;

    // Companion matrix of E^K + a_1 E^{K-1} + ... + a_K.
    let mut companion = DMatrix::zeros(k, k);
    for j in 0..k {
        companion[(0, j)] = -a[j];
    }
    for i in 1..k {
        companion[(i, i - 1)] = 1.0;
    }
    let eig = companion.complex_eigenvalues();
    let mut roots: Vec<f64> = eig
        .iter()
        .filter(|z| z.im.abs() < 1e-8 * z.re.abs().max(1.0))
        .map(|z| z.re + mom.shift)
        .collect();
    if roots.is_empty() {
        return Err(Error::RootFailure);
    }
    roots.sort_by(f64::total_cmp);
    Ok(PdsEstimate {
        energy: roots[0],
        roots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sample_matrix() -> DMatrix<f64> {
        DMatrix::from_fn(6, 6, |i, j| {
            if i == j {
                -1.0 + 0.4 * i as f64
            } else {
                0.05 * (1.0 + (i + j) as f64 * 0.1)
            }
        })
    }

    #[test]
    fn two_by_two_exact() {
        let h = DMatrix::from_row_slice(2, 2, &[-1.0, 0.3, 0.3, 0.5]);
        let eig = linalg::symmetric_eigen(&h);
        // Eigenvector as reference: first moment is the eigenvalue.
        let v = eig.vectors.column(0).into_owned();
        let mom = compute_moments_dense(&h, &v, 1).unwrap();
        let est = pds_energy(&mom).unwrap();
        assert_abs_diff_eq!(est.energy, eig.values[0], epsilon = 1e-14);
        // Any generic vector with K = 2 spans the space.
        let phi = DVector::from_vec(vec![1.0, 0.0]);
        let est = pds_energy(&compute_moments_dense(&h, &phi, 2).unwrap()).unwrap();
        assert_abs_diff_eq!(est.energy, eig.values[0], epsilon = 1e-12);
        assert_abs_diff_eq!(est.roots[1], eig.values[1], epsilon = 1e-12);
    }

    #[test]
    fn moments_basic_properties() {
        let h = sample_matrix();
        let mut phi = DVector::zeros(6);
        phi[0] = 1.0;
        let mom = compute_moments_dense(&h, &phi, 3).unwrap();
        let raw = mom.raw();
        assert_abs_diff_eq!(raw[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(raw[1], h[(0, 0)], epsilon = 1e-15);
        assert!(raw[2] - raw[1] * raw[1] >= 0.0);
        assert_eq!(raw.len(), 6);

        let eig = linalg::symmetric_eigen(&h);
        let ground = eig.vectors.column(0).into_owned();
        let mom = compute_moments_dense(&h, &ground, 2).unwrap();
        for (k, mk) in mom.raw().iter().enumerate() {
            assert_abs_diff_eq!(*mk, libm::pow(eig.values[0], k as f64), epsilon = 1e-12);
        }
        // Hankel system is singular for an exact eigenvector.
        assert!(matches!(
            pds_energy(&mom),
            Err(Error::DegenerateMoments { .. })
        ));
    }

    #[test]
    fn upper_bound_and_order_improvement() {
        let h = sample_matrix();
        let exact = linalg::symmetric_eigenvalues(&h)[0];
        let mut phi = DVector::zeros(6);
        phi[0] = 1.0;
        let mut prev = f64::INFINITY;
        for k in 1..=4 {
            let e = pds_energy(&compute_moments_dense(&h, &phi, k).unwrap())
                .unwrap()
                .energy;
            assert!(e >= exact - 1e-12);
            assert!(e <= prev + 1e-12);
            prev = e;
        }
    }

    #[test]
    fn rejects_bad_reference() {
        let h = sample_matrix();
        assert!(compute_moments_dense(&h, &DVector::zeros(6), 2).is_err());
        assert!(compute_moments_dense(&h, &DVector::from_element(6, 1.0), 2).is_err());
        let mut phi = DVector::zeros(6);
        phi[0] = 1.0;
        assert!(compute_moments_dense(&h, &phi, 0).is_err());
    }

    #[test]
    fn shift_covariance() {
        let h = sample_matrix();
        let phi = DVector::from_fn(6, |i, _| 1.0 / (1.0 + i as f64)).normalize();
        for k in 1..=3 {
            let base = pds_energy(&compute_moments_dense(&h, &phi, k).unwrap()).unwrap();
            let shifted = &h + DMatrix::identity(6, 6) * 2.75;
            let moved = pds_energy(&compute_moments_dense(&shifted, &phi, k).unwrap()).unwrap();
            for (a, b) in base.roots.iter().zip(&moved.roots) {
                assert_abs_diff_eq!(b - a, 2.75, epsilon = 1e-9);
            }
        }
    }
}
