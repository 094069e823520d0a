//! Dense linear-algebra helpers shared by the solvers.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::math;
use crate::{Error, Result};

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SortedEigen {
    pub values: DVector<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: DMatrix<f64>,
}

/// Full eigendecomposition of a symmetric matrix with ascending ordering.
///
/// Householder reduction to tridiagonal form followed by the implicit QL
/// algorithm (the EISPACK tred2/tql2 pair). Only the lower triangle of `a`
/// is read.
pub fn symmetric_eigen(a: &DMatrix<f64>) -> SortedEigen {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigendecomposition needs a square matrix");
    if n == 0 {
        return SortedEigen {
            values: DVector::zeros(0),
            vectors: DMatrix::zeros(0, 0),
        };
    }
    // Row-major working copy: v[i][j].
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| a[(i.max(j), i.min(j))]).collect())
        .collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| d[i]));
    let vectors = DMatrix::from_fn(n, n, |i, k| v[i][order[k]]);
    SortedEigen { values, vectors }
}

/// Ascending eigenvalues only.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    symmetric_eigen(a).values.iter().copied().collect()
}

#[allow(clippy::needless_range_loop)]
fn tred2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    d.copy_from_slice(&v[n - 1]);
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
                v[j][i] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = math::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in j + 1..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
            }
        }
        d[i] = h;
    }
    // Accumulate transformations.
    for i in 0..n - 1 {
        v[n - 1][i] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[k][i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

#[allow(clippy::needless_range_loop)]
fn tql2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            loop {
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for i in l + 2..n {
                    d[i] -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for row in v.iter_mut() {
                        h = row[i + 1];
                        row[i + 1] = s * row[i] + c * h;
                        row[i] = c * row[i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
}

/// Largest absolute entry.
pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0_f64, |m, &x| m.max(x.abs()))
}

/// Largest absolute entry of A - A^T.
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in 0..j {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// Lowest eigenpair of a dense symmetric matrix by Davidson iteration with
/// a diagonal preconditioner. Converges when the residual norm drops below
/// `tol`; the eigenvalue error is then of order `tol^2`.
pub fn lowest_eigenpair(
    a: &DMatrix<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, DVector<f64>)> {
    let n = a.nrows();
    if n <= 200 {
        let eig = symmetric_eigen(a);
        return Ok((eig.values[0], eig.vectors.column(0).into_owned()));
    }
    let diag = a.diagonal();
    let start = diag.imin();
    let max_subspace = 40;

    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut images: Vec<DVector<f64>> = Vec::new();
    let mut e0 = DVector::zeros(n);
    e0[start] = 1.0;
    let mut pending = e0;
    let mut last = f64::INFINITY;

    for _ in 0..max_iter {
        // Orthogonalize twice against the current basis.
        for _ in 0..2 {
            for b in &basis {
                let overlap = b.dot(&pending);
                pending.axpy(-overlap, b, 1.0);
            }
        }
        let norm = pending.norm();
        if norm > 1e-12 {
            pending /= norm;
            images.push(a * &pending);
            basis.push(pending.clone());
        }

        let k = basis.len();
        let mut small = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..=i {
                let v = basis[i].dot(&images[j]);
                small[(i, j)] = v;
                small[(j, i)] = v;
            }
        }
        let eig = symmetric_eigen(&small);
        let theta = eig.values[0];
        let coeffs = eig.vectors.column(0);

        let mut x = DVector::zeros(n);
        let mut ax = DVector::zeros(n);
        for i in 0..k {
            x.axpy(coeffs[i], &basis[i], 1.0);
            ax.axpy(coeffs[i], &images[i], 1.0);
        }
        let residual = &ax - &x * theta;
        last = residual.norm();
        if last < tol {
            return Ok((theta, x));
        }
        if norm <= 1e-12 && k > 1 {
            // Correction collapsed into the subspace; the Ritz pair is as
            // good as this basis allows.
            if last < math::sqrt(tol) {
                return Ok((theta, x));
            }
        }

        let mut correction = residual;
        for i in 0..n {
            let denom = diag[i] - theta;
            correction[i] /= if denom.abs() < 1e-8 {
                1e-8_f64.copysign(denom)
            } else {
                denom
            };
        }
        pending = correction;

        if basis.len() >= max_subspace {
            let ax_norm = x.norm();
            basis.clear();
            images.clear();
            let x = x / ax_norm;
            images.push(a * &x);
            basis.push(x);
        }
    }
    Err(Error::ConvergenceFailure {
        stage: "davidson",
        iterations: max_iter,
        last,
    })
}

/// Solves a small dense system, returning `None` when it is singular.
pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    a.clone().lu().solve(b)
}

/// Condition number in the 2-norm from singular values.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.iter().fold(0.0_f64, |m, &x| m.max(x));
    let min = sv.iter().fold(f64::INFINITY, |m, &x| m.min(x));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Pulay DIIS extrapolation over a bounded history.
#[derive(Debug, Clone)]
pub struct Diis {
    depth: usize,
    params: VecDeque<DVector<f64>>,
    errors: VecDeque<DVector<f64>>,
}

impl Diis {
    pub fn new(depth: usize) -> Self {
        Diis {
            depth,
            params: VecDeque::new(),
            errors: VecDeque::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn clear(&mut self) {
        self.params.clear();
        self.errors.clear();
    }

    /// Records a (parameter, error) pair and returns the extrapolated
    /// parameter vector. With fewer than two entries the input is returned.
    pub fn extrapolate(&mut self, param: DVector<f64>, error: DVector<f64>) -> DVector<f64> {
        if self.params.len() == self.depth {
            self.params.pop_front();
            self.errors.pop_front();
        }
        self.params.push_back(param);
        self.errors.push_back(error);

        while self.params.len() >= 2 {
            let k = self.params.len();
            let mut b = DMatrix::zeros(k + 1, k + 1);
            for i in 0..k {
                for j in 0..=i {
                    let v = self.errors[i].dot(&self.errors[j]);
                    b[(i, j)] = v;
                    b[(j, i)] = v;
                }
                b[(i, k)] = -1.0;
                b[(k, i)] = -1.0;
            }
            // Scale the error block to keep the bordered system balanced.
            let scale = (0..k).map(|i| b[(i, i)]).fold(0.0_f64, f64::max);
            if scale > 0.0 {
                for i in 0..k {
                    for j in 0..k {
                        b[(i, j)] /= scale;
                    }
                }
            }
            let mut rhs = DVector::zeros(k + 1);
            rhs[k] = -1.0;
            match solve(&b, &rhs) {
                Some(c) if c.iter().all(|x| x.is_finite()) => {
                    let mut out = DVector::zeros(self.params[0].len());
                    for i in 0..k {
                        out.axpy(c[i], &self.params[i], 1.0);
                    }
                    return out;
                }
                _ => {
                    self.params.pop_front();
                    self.errors.pop_front();
                }
            }
        }
        self.params.back().cloned().unwrap_or_default()
    }
}

/// Restarted GMRES for `A x = b` with right preconditioning.
///
/// `apply` computes A v and `precondition` applies an approximate inverse.
/// Stops once the residual norm falls below `rel_tol * |b|` or after
/// `max_matvecs` products; the best iterate found is returned either way.
pub fn gmres<A, P>(
    mut apply: A,
    precondition: P,
    b: &DVector<f64>,
    rel_tol: f64,
    restart: usize,
    max_matvecs: usize,
) -> Result<DVector<f64>>
where
    A: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
    P: Fn(&DVector<f64>) -> DVector<f64>,
{
    let n = b.len();
    let b_norm = b.norm();
    let mut x = DVector::zeros(n);
    if b_norm == 0.0 {
        return Ok(x);
    }
    let target = rel_tol * b_norm;
    let mut used = 0;
    let mut r = b.clone();
    while used < max_matvecs {
        let beta = r.norm();
        if beta <= target {
            break;
        }
        let m = restart.min(max_matvecs - used);
        let mut v: Vec<DVector<f64>> = Vec::with_capacity(m + 1);
        let mut z: Vec<DVector<f64>> = Vec::with_capacity(m);
        let mut h = DMatrix::zeros(m + 1, m);
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = DVector::zeros(m + 1);
        g[0] = beta;
        v.push(&r / beta);
        let mut k_used = 0;
        for k in 0..m {
            let zk = precondition(&v[k]);
            let mut w = apply(&zk)?;
            used += 1;
            z.push(zk);
            for i in 0..=k {
                h[(i, k)] = w.dot(&v[i]);
                w.axpy(-h[(i, k)], &v[i], 1.0);
            }
            let wn = w.norm();
            h[(k + 1, k)] = wn;
            for i in 0..k {
                let t = cs[i] * h[(i, k)] + sn[i] * h[(i + 1, k)];
                h[(i + 1, k)] = -sn[i] * h[(i, k)] + cs[i] * h[(i + 1, k)];
                h[(i, k)] = t;
            }
            let rho = libm::hypot(h[(k, k)], h[(k + 1, k)]);
            if rho == 0.0 {
                break;
            }
            cs[k] = h[(k, k)] / rho;
            sn[k] = h[(k + 1, k)] / rho;
            h[(k, k)] = rho;
            h[(k + 1, k)] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            if g[k + 1].abs() <= target || wn == 0.0 {
                break;
            }
            v.push(w / wn);
        }
        if k_used == 0 {
            break;
        }
        // Back substitution on the triangular Hessenberg factor.
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[(i, j)] * y[j];
            }
            y[i] = s / h[(i, i)];
        }
        for (yi, zi) in y.iter().zip(&z) {
            x.axpy(*yi, zi, 1.0);
        }
        r = b - apply(&x)?;
        used += 1;
    }
    Ok(x)
}

/// Inverse square root of a symmetric positive-definite matrix.
pub fn inverse_sqrt(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = symmetric_eigen(s);
    let n = s.nrows();
    if eig.values[0] <= 1e-10 * eig.values[n - 1].abs().max(1.0) {
        return Err(Error::invalid("overlap matrix is singular or indefinite"));
    }
    let mut scaled = eig.vectors.clone();
    for j in 0..n {
        let f = 1.0 / math::sqrt(eig.values[j]);
        for i in 0..n {
            scaled[(i, j)] *= f;
        }
    }
    Ok(&scaled * eig.vectors.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn test_matrix(n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                i as f64 * 0.5 - 3.0
            } else {
                0.01 / (1.0 + (i as f64 - j as f64).abs())
            }
        })
    }

    #[test]
    fn eigen_sorted() {
        let a = test_matrix(30);
        let e = symmetric_eigen(&a);
        for i in 1..30 {
            assert!(e.values[i] >= e.values[i - 1]);
        }
        let recon = &e.vectors * DMatrix::from_diagonal(&e.values) * e.vectors.transpose();
        let err = max_abs(&(recon - &a));
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn davidson_matches_dense() {
        let a = test_matrix(400);
        let (e, v) = lowest_eigenpair(&a, 1e-9, 200).unwrap();
        let dense = symmetric_eigenvalues(&a)[0];
        assert_abs_diff_eq!(e, dense, epsilon = 1e-12);
        assert_abs_diff_eq!(v.norm(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn diis_solves_linear_fixed_point() {
        // x = G x + c with contraction G; DIIS on the residual recovers x*.
        let n = 5;
        let g = DMatrix::from_fn(n, n, |i, j| if i == j { 0.6 } else { 0.05 });
        let c = DVector::from_fn(n, |i, _| i as f64);
        let exact = (DMatrix::identity(n, n) - &g).lu().solve(&c).unwrap();
        let mut diis = Diis::new(8);
        let mut x = DVector::zeros(n);
        for _ in 0..30 {
            let next = &g * &x + &c;
            let err = &next - &x;
            x = diis.extrapolate(next, err);
        }
        assert!((x - exact).amax() < 1e-10);
    }

    #[test]
    fn gmres_solves_nonsymmetric_system() {
        let n = 60;
        let a = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                2.0 + i as f64 * 0.1
            } else if j == i + 1 {
                0.7
            } else if i == j + 2 {
                -0.4
            } else {
                0.0
            }
        });
        let b = DVector::from_fn(n, |i, _| 1.0 + (i % 3) as f64);
        let diag = a.diagonal();
        let x = gmres(
            |v| Ok(&a * v),
            |v| v.component_div(&diag),
            &b,
            1e-12,
            20,
            500,
        )
        .unwrap();
        assert!((&a * x - &b).norm() < 1e-10);
    }

    #[test]
    fn inverse_sqrt_identity() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0]);
        let x = inverse_sqrt(&s).unwrap();
        let check = &x * &s * &x;
        assert!(max_abs(&(check - DMatrix::identity(2, 2))) < 1e-14);
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(inverse_sqrt(&singular).is_err());
    }
}
