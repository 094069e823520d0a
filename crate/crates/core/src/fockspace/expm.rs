//! Matrix exponentials of excitation and anti-Hermitian operators.

use alloc::format;

use nalgebra::{Complex, DMatrix, DVector};

use super::cluster::SparseOperator;
use super::sector::SectorMatrix;
use crate::linalg;
use crate::math;
use crate::{Error, Result};

/// Default truncation tolerance for [`exp_antisymmetric`].
pub const EXP_TOL: f64 = 1e-14;

/// exp(T) for a nilpotent T, summed until a power of T vanishes exactly.
///
/// Fails if T^k is still nonzero after `M + 1` factors, M being the number
/// of spin orbitals; no excitation operator survives that many.
pub fn exp_nilpotent(t: &SectorMatrix) -> Result<SectorMatrix> {
    let limit = t.basis.n_spin_orbitals() + 1;
    let mut result = SectorMatrix::identity(t.basis.clone());
    let mut term = result.data.clone();
    for k in 1..=limit {
        term = &term * &t.data / k as f64;
        if term.iter().all(|&x| x == 0.0) {
            return Ok(result);
        }
        result.data += &term;
    }
    Err(Error::invalid(format!(
        "exponential series did not terminate after {limit} terms; the input is not nilpotent"
    )))
}

/// exp(sign * T) v for a nilpotent sparse T.
pub fn exp_nilpotent_apply(
    t: &SparseOperator,
    sign: f64,
    v: &DVector<f64>,
) -> Result<DVector<f64>> {
    let limit = 65;
    let mut out = v.clone();
    let mut term = v.clone();
    for k in 1..=limit {
        term = t.apply(&term) * (sign / k as f64);
        if term.iter().all(|&x| x == 0.0) {
            return Ok(out);
        }
        out += &term;
    }
    Err(Error::invalid(
        "exponential series did not terminate; the input is not nilpotent",
    ))
}

fn check_antisymmetric(a: &DMatrix<f64>) -> Result<()> {
    if !a.is_square() {
        return Err(Error::invalid("matrix exponential needs a square matrix"));
    }
    let scale = linalg::max_abs(a).max(1.0);
    let asym = {
        let n = a.nrows();
        let mut worst = 0.0_f64;
        for j in 0..n {
            for i in 0..=j {
                worst = worst.max((a[(i, j)] + a[(j, i)]).abs());
            }
        }
        worst
    };
    if asym > 1e-12 * scale {
        return Err(Error::invalid(format!(
            "matrix is not antisymmetric (max |A + A^T| = {asym:.3e})"
        )));
    }
    Ok(())
}

/// exp(A) for antisymmetric A by scaling and squaring of a Taylor series.
///
/// The argument is halved until its 1-norm is at most 1/2, the series is
/// summed until the next term drops below `tol / 2^s`, and the result is
/// squared back `s` times.
pub fn exp_antisymmetric(a: &SectorMatrix, tol: f64) -> Result<SectorMatrix> {
    let data = exp_antisymmetric_dense(&a.data, tol)?;
    Ok(SectorMatrix {
        basis: a.basis.clone(),
        data,
    })
}

/// [`exp_antisymmetric`] on a bare matrix.
pub fn exp_antisymmetric_dense(a: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    check_antisymmetric(a)?;
    let n = a.nrows();
    let norm = a
        .column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    while norm / math::powi(2.0, squarings as i32) > 0.5 {
        squarings += 1;
    }
    let scaled = a / math::powi(2.0, squarings as i32);
    let term_tol = tol / math::powi(2.0, squarings as i32);

    let mut result = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..=60 {
        term = &term * &scaled / k as f64;
        result += &term;
        if linalg::max_abs(&term) < term_tol {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}

/// exp(A) for antisymmetric A through the Hermitian eigendecomposition of
/// iA. Slower than [`exp_antisymmetric`]; kept as an independent check.
pub fn exp_antisymmetric_eig(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_antisymmetric(a)?;
    let n = a.nrows();
    let herm = a.map(|x| Complex::new(0.0, x));
    let eig = herm.symmetric_eigen();
    let phases = DVector::from_iterator(
        n,
        eig.eigenvalues
            .iter()
            .map(|&l| Complex::new(libm::cos(l), -libm::sin(l))),
    );
    let u = &eig.eigenvectors;
    let mut scaled = u.clone();
    for j in 0..n {
        let f = phases[j];
        for i in 0..n {
            scaled[(i, j)] *= f;
        }
    }
    let full = scaled * u.adjoint();
    Ok(full.map(|z| z.re))
}

/// exp(S) V for antisymmetric sparse S and a block of columns V.
///
/// S is split into `ceil(|S|_1)` equal steps so each Taylor series runs on
/// an operator of norm at most one; each series is summed until its terms
/// fall below `tol` relative to the block.
pub fn exp_antisymmetric_apply(
    s: &SparseOperator,
    v: &DMatrix<f64>,
    tol: f64,
) -> Result<DMatrix<f64>> {
    let steps = math::ceil(s.norm1()).max(1.0) as usize;
    let inv = 1.0 / steps as f64;
    let mut w = v.clone();
    for _ in 0..steps {
        let scale = linalg::max_abs(&w).max(f64::MIN_POSITIVE);
        let mut term = w.clone();
        let mut converged = false;
        for k in 1..=80 {
            term = s.apply_block(&term) * (inv / k as f64);
            w += &term;
            if linalg::max_abs(&term) <= tol * scale {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::ConvergenceFailure {
                stage: "exponential action",
                iterations: 80,
                last: linalg::max_abs(&term),
            });
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::enumerate_sector;
    use alloc::sync::Arc;
    use approx::assert_abs_diff_eq;

    fn random_antisymmetric(n: usize, seed: u64, scale: f64) -> DMatrix<f64> {
        let mut state = seed;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * scale
        };
        let mut a = DMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..j {
                let x = next();
                a[(i, j)] = x;
                a[(j, i)] = -x;
            }
        }
        a
    }

    #[test]
    fn rotation_closed_form() {
        for &theta in &[0.0, 0.3, 1.0, 2.5, 7.0] {
            let a = DMatrix::from_row_slice(2, 2, &[0.0, theta, -theta, 0.0]);
            let e = exp_antisymmetric_dense(&a, EXP_TOL).unwrap();
            let (c, s) = (libm::cos(theta), libm::sin(theta));
            assert_abs_diff_eq!(e[(0, 0)], c, epsilon = 1e-13);
            assert_abs_diff_eq!(e[(0, 1)], s, epsilon = 1e-13);
            assert_abs_diff_eq!(e[(1, 0)], -s, epsilon = 1e-13);
            assert_abs_diff_eq!(e[(1, 1)], c, epsilon = 1e-13);
        }
    }

    #[test]
    fn orthogonal_and_matches_eig_route() {
        let a = random_antisymmetric(40, 7, 1.5);
        let e = exp_antisymmetric_dense(&a, EXP_TOL).unwrap();
        let ortho = &e * e.transpose() - DMatrix::identity(40, 40);
        assert!(linalg::max_abs(&ortho) < 1e-10);
        let e2 = exp_antisymmetric_eig(&a).unwrap();
        assert!(linalg::max_abs(&(e - e2)) < 1e-11);
    }

    #[test]
    fn zero_gives_identity() {
        let basis = Arc::new(enumerate_sector(8, 2, 2).unwrap());
        let z = SectorMatrix::zeros(basis.clone());
        let e = exp_antisymmetric(&z, EXP_TOL).unwrap();
        assert_eq!(e.data, DMatrix::identity(basis.len(), basis.len()));
        let e = exp_nilpotent(&z).unwrap();
        assert_eq!(e.data, DMatrix::identity(basis.len(), basis.len()));
    }

    #[test]
    fn rejects_symmetric_input() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(exp_antisymmetric_dense(&a, EXP_TOL).is_err());
    }

    #[test]
    fn non_nilpotent_rejected() {
        let basis = Arc::new(enumerate_sector(4, 1, 0).unwrap());
        let mut m = SectorMatrix::zeros(basis);
        m.data[(0, 1)] = 1.0;
        m.data[(1, 0)] = 1.0;
        assert!(exp_nilpotent(&m).is_err());
    }

    #[test]
    fn block_action_matches_dense() {
        let a = random_antisymmetric(30, 11, 2.0);
        let mut entries = alloc::vec::Vec::new();
        for j in 0..30 {
            for i in 0..30 {
                if a[(i, j)] != 0.0 {
                    entries.push((i as u32, j as u32, a[(i, j)]));
                }
            }
        }
        let sparse = SparseOperator::from_entries(30, entries);
        let v = DMatrix::from_fn(30, 3, |i, j| if i == j * 5 { 1.0 } else { 0.0 });
        let w = exp_antisymmetric_apply(&sparse, &v, 1e-16).unwrap();
        let dense = exp_antisymmetric_dense(&a, EXP_TOL).unwrap() * &v;
        assert!(linalg::max_abs(&(w - dense)) < 1e-12);
    }
}
