//! Hermitian downfolding of the sector Hamiltonian into an active space.
//!
//! With sigma = T_ext - T_ext^T, the transformed Hamiltonian
//! exp(-sigma) H exp(sigma) is restricted to the complete-active-space
//! determinants (inactive occupied orbitals filled, inactive virtual
//! orbitals empty) and diagonalized there. The transform is available
//! exactly or as a commutator series truncated after `max_r` nested
//! commutators.
//!
//! Two routes are provided for each transform. The full-sector routes
//! ([`transform_exact`], [`transform_bch`]) build the whole transformed
//! matrix. The projected routes ([`downfold_exact`], [`downfold_bch`]) only
//! ever touch the CAS columns: with V the CAS columns of the identity and
//! B_j = sigma^j V,
//!
//! * exact: H_eff = (exp(sigma) V)^T H (exp(sigma) V),
//! * truncated: P C_i P = sum_k binom(i, k) B_k^T H B_{i-k}, where
//!   C_i = [C_{i-1}, sigma] and C_0 = H.
//!
//! Both identities are exact rewritings, so the two routes agree to
//! rounding error.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::ccsolver::{ActiveSpace, ClusterOperator};
use crate::fockspace::{
    exp_antisymmetric, exp_antisymmetric_apply, lower_cluster, Determinant, ExcitationPattern,
    SectorBasis, SectorMatrix, SparseOperator, EXP_TOL,
};
use crate::linalg;
use crate::{Error, Result};

/// Downfolded Hamiltonian over the CAS determinants of a sector.
#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    pub active: ActiveSpace,
    pub n_spin_orbitals: usize,
    /// CAS determinants, in sector order; the reference comes first.
    pub cas_dets: Vec<Determinant>,
    /// Positions of `cas_dets` in the parent sector.
    pub cas_indices: Vec<usize>,
    pub matrix: DMatrix<f64>,
}

impl EffectiveHamiltonian {
    pub fn dim(&self) -> usize {
        self.cas_dets.len()
    }
}

/// Ground state of an effective Hamiltonian.
#[derive(Debug, Clone)]
pub struct EffectiveEigensolution {
    pub energy: f64,
    /// Normalized coefficients over the CAS determinants.
    pub vector: DVector<f64>,
}

/// Sector indices of CAS determinants for `act`.
pub fn cas_indices(basis: &SectorBasis, act: &ActiveSpace) -> Vec<usize> {
    let inactive = act.inactive_mask(basis.n_spatial());
    let reference = basis.reference().bits();
    let inactive_occ = inactive & reference;
    let inactive_virt = inactive & !reference;
    basis
        .dets()
        .iter()
        .enumerate()
        .filter(|(_, d)| d.bits() & inactive_occ == inactive_occ && d.bits() & inactive_virt == 0)
        .map(|(i, _)| i)
        .collect()
}

fn check_external(t_ext: &ClusterOperator, act: &ActiveSpace, n_spatial: usize) -> Result<()> {
    let inactive = act.inactive_mask(n_spatial);
    if let Some((sig, _)) = t_ext.iter().find(|(s, _)| !s.touches(inactive)) {
        return Err(Error::invalid(format!(
            "internal excitation {sig} present in the external cluster operator"
        )));
    }
    Ok(())
}

/// sigma_ext = T_ext - T_ext^T as a dense sector matrix.
pub fn build_sigma_ext(
    t_ext: &ClusterOperator,
    basis: &Arc<SectorBasis>,
    act: &ActiveSpace,
) -> Result<SectorMatrix> {
    check_external(t_ext, act, basis.n_spatial())?;
    let t = lower_cluster(t_ext, basis)?;
    let mut sigma = t.data.clone();
    sigma -= t.data.transpose();
    SectorMatrix::from_data(basis.clone(), sigma)
}

/// sigma_ext = T_ext - T_ext^T in sparse form.
pub fn build_sigma_ext_sparse(
    t_ext: &ClusterOperator,
    basis: &SectorBasis,
    act: &ActiveSpace,
) -> Result<SparseOperator> {
    check_external(t_ext, act, basis.n_spatial())?;
    let pattern = ExcitationPattern::new(basis, t_ext.signatures())?;
    Ok(pattern.assemble(&t_ext.values()).antisymmetrized())
}

/// exp(-sigma) H exp(sigma) over the full sector.
pub fn transform_exact(h: &SectorMatrix, sigma: &SectorMatrix) -> Result<SectorMatrix> {
    let u = exp_antisymmetric(sigma, EXP_TOL)?;
    // exp(-sigma) = exp(sigma)^T for antisymmetric sigma.
    let mut out = SectorMatrix {
        basis: h.basis.clone(),
        data: u.data.transpose() * &h.data * &u.data,
    };
    out.symmetrize();
    Ok(out)
}

/// H + sum_{i=1}^{max_r} C_i / i! with C_i = [C_{i-1}, sigma], over the
/// full sector. The partial sum is symmetrized before returning.
pub fn transform_bch(h: &SectorMatrix, sigma: &SectorMatrix, max_r: usize) -> SectorMatrix {
    let mut total = h.data.clone();
    let mut comm = h.data.clone();
    let mut factorial = 1.0;
    for i in 1..=max_r {
        comm = &comm * &sigma.data - &sigma.data * &comm;
        factorial *= i as f64;
        total += &comm / factorial;
    }
    let mut out = SectorMatrix {
        basis: h.basis.clone(),
        data: total,
    };
    out.symmetrize();
    out
}

/// Restricts a transformed Hamiltonian to the CAS determinants of `act`.
pub fn project_cas(hbar: &SectorMatrix, act: &ActiveSpace) -> Result<EffectiveHamiltonian> {
    let basis = &hbar.basis;
    let indices = cas_indices(basis, act);
    if indices.is_empty() {
        return Err(Error::invalid(format!(
            "active space {act} selects no determinants"
        )));
    }
    let matrix = hbar.principal_submatrix(&indices);
    Ok(EffectiveHamiltonian {
        active: act.clone(),
        n_spin_orbitals: basis.n_spin_orbitals(),
        cas_dets: indices.iter().map(|&i| basis.det(i)).collect(),
        cas_indices: indices,
        matrix,
    })
}

/// Lowest eigenpair of the effective Hamiltonian.
pub fn ground_state(heff: &EffectiveHamiltonian) -> EffectiveEigensolution {
    let eig = linalg::symmetric_eigen(&heff.matrix);
    let mut vector = eig.vectors.column(0).into_owned();
    // Fix the overall sign on the reference coefficient.
    if vector[0] < 0.0 {
        vector.neg_mut();
    }
    EffectiveEigensolution {
        energy: eig.values[0],
        vector,
    }
}

fn cas_frame(basis: &Arc<SectorBasis>, act: &ActiveSpace) -> Result<(Vec<usize>, DMatrix<f64>)> {
    let indices = cas_indices(basis, act);
    if indices.is_empty() {
        return Err(Error::invalid(format!(
            "active space {act} selects no determinants"
        )));
    }
    let mut v = DMatrix::zeros(basis.len(), indices.len());
    for (col, &row) in indices.iter().enumerate() {
        v[(row, col)] = 1.0;
    }
    Ok((indices, v))
}

fn wrap(
    basis: &SectorBasis,
    act: &ActiveSpace,
    indices: Vec<usize>,
    mut matrix: DMatrix<f64>,
) -> EffectiveHamiltonian {
    let t = matrix.transpose();
    matrix += t;
    matrix *= 0.5;
    EffectiveHamiltonian {
        active: act.clone(),
        n_spin_orbitals: basis.n_spin_orbitals(),
        cas_dets: indices.iter().map(|&i| basis.det(i)).collect(),
        cas_indices: indices,
        matrix,
    }
}

/// CAS block of exp(-sigma) H exp(sigma) without forming the full
/// transformed matrix.
pub fn downfold_exact(
    h: &SectorMatrix,
    sigma: &SparseOperator,
    act: &ActiveSpace,
) -> Result<EffectiveHamiltonian> {
    let (indices, v) = cas_frame(&h.basis, act)?;
    let w = exp_antisymmetric_apply(sigma, &v, 1e-16)?;
    let hw = SparseOperator::from_dense(&h.data).apply_block(&w);
    Ok(wrap(&h.basis, act, indices, w.transpose() * hw))
}

/// CAS blocks of the commutator series truncated at each requested order,
/// returned in the order of `orders`.
pub fn downfold_bch(
    h: &SectorMatrix,
    sigma: &SparseOperator,
    act: &ActiveSpace,
    orders: &[usize],
) -> Result<Vec<EffectiveHamiltonian>> {
    let (indices, v) = cas_frame(&h.basis, act)?;
    let top = orders.iter().copied().max().unwrap_or(0);
    // B_j = sigma^j V and H B_j for j = 0..=top.
    let mut blocks = Vec::with_capacity(top + 1);
    blocks.push(v);
    for j in 1..=top {
        let next = sigma.apply_block(&blocks[j - 1]);
        blocks.push(next);
    }
    let sparse_h = SparseOperator::from_dense(&h.data);
    let h_blocks: Vec<DMatrix<f64>> = blocks.iter().map(|b| sparse_h.apply_block(b)).collect();

    let d = indices.len();
    // Projected commutators P C_i P / i!.
    let mut terms = Vec::with_capacity(top + 1);
    let mut factorial = 1.0;
    for i in 0..=top {
        if i > 0 {
            factorial *= i as f64;
        }
        let mut c = DMatrix::zeros(d, d);
        let mut binom = 1.0;
        for k in 0..=i {
            c += blocks[k].transpose() * &h_blocks[i - k] * binom;
            binom = binom * (i - k) as f64 / (k + 1) as f64;
        }
        terms.push(c / factorial);
    }
    let mut out = Vec::with_capacity(orders.len());
    for &order in orders {
        let mut m = DMatrix::zeros(d, d);
        for term in &terms[..=order] {
            m += term;
        }
        out.push(wrap(&h.basis, act, indices.clone(), m));
    }
    Ok(out)
}
