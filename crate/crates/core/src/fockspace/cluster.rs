//! Excitation operators lowered to sector matrices, dense and sparse.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::determinant::apply_string;
use super::sector::{SectorBasis, SectorMatrix};
use crate::ccsolver::{ClusterOperator, ExcitationSignature};
use crate::{Error, Result};

fn check_against_reference(sig: &ExcitationSignature, basis: &SectorBasis) -> Result<()> {
    let reference = basis.reference();
    if sig.holes().iter().any(|&h| !reference.is_occupied(h))
        || sig.particles().iter().any(|&p| reference.is_occupied(p))
    {
        return Err(Error::invalid(format!(
            "excitation {sig} is not defined relative to the sector reference"
        )));
    }
    if sig
        .holes()
        .iter()
        .chain(sig.particles())
        .any(|&p| p >= basis.n_spin_orbitals())
    {
        return Err(Error::invalid(format!(
            "excitation {sig} addresses orbitals outside the sector"
        )));
    }
    Ok(())
}

/// Dense matrix of sum_mu t_mu X_mu, with X_mu the excitation string of
/// each signature.
pub fn lower_cluster(t: &ClusterOperator, basis: &Arc<SectorBasis>) -> Result<SectorMatrix> {
    let mut out = SectorMatrix::zeros(basis.clone());
    for (sig, &amp) in t.iter() {
        check_against_reference(sig, basis)?;
        let ops = sig.ladder_string();
        let (hmask, pmask) = (sig.hole_mask(), sig.particle_mask());
        for (j, &det) in basis.dets().iter().enumerate() {
            if det.0 & hmask != hmask || det.0 & pmask != 0 {
                continue;
            }
            if let Some((res, sign)) = apply_string(det, &ops) {
                if let Some(i) = basis.index_of(res) {
                    out.data[(i, j)] += f64::from(sign) * amp;
                }
            }
        }
    }
    Ok(out)
}

/// Precomputed nonzero structure of a family of excitation operators over a
/// sector.
///
/// A determinant pair fixes the holes and particles connecting it, so each
/// (row, column) position belongs to exactly one signature and the entries
/// can be kept in final sorted order.
#[derive(Debug, Clone)]
pub struct ExcitationPattern {
    dim: usize,
    signatures: Vec<ExcitationSignature>,
    /// (row, column, signature, sign), sorted by column then row.
    entries: Vec<(u32, u32, u32, i8)>,
    /// Row of X_mu|ref> and its sign, per signature.
    targets: Vec<(usize, i8)>,
}

impl ExcitationPattern {
    pub fn new(basis: &SectorBasis, signatures: Vec<ExcitationSignature>) -> Result<Self> {
        let mut entries = Vec::new();
        let mut targets = Vec::with_capacity(signatures.len());
        for (mu, sig) in signatures.iter().enumerate() {
            check_against_reference(sig, basis)?;
            let ops = sig.ladder_string();
            let (hmask, pmask) = (sig.hole_mask(), sig.particle_mask());
            let mut target = None;
            for (j, &det) in basis.dets().iter().enumerate() {
                if det.0 & hmask != hmask || det.0 & pmask != 0 {
                    continue;
                }
                if let Some((res, sign)) = apply_string(det, &ops) {
                    if let Some(i) = basis.index_of(res) {
                        entries.push((i as u32, j as u32, mu as u32, sign));
                        if j == 0 {
                            target = Some((i, sign));
                        }
                    }
                }
            }
            targets
                .push(target.ok_or_else(|| {
                    Error::invalid(format!("excitation {sig} leaves the sector"))
                })?);
        }
        entries.sort_unstable_by_key(|&(r, c, _, _)| (c, r));
        Ok(ExcitationPattern {
            dim: basis.len(),
            signatures,
            entries,
            targets,
        })
    }

    pub fn signatures(&self) -> &[ExcitationSignature] {
        &self.signatures
    }

    pub fn len(&self) -> usize {
        self.signatures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signatures.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Sector index and sign of X_mu|ref> for signature `mu`.
    pub fn target(&self, mu: usize) -> (usize, i8) {
        self.targets[mu]
    }

    /// Sparse matrix of sum_mu amplitudes[mu] X_mu.
    pub fn assemble(&self, amplitudes: &[f64]) -> SparseOperator {
        assert_eq!(amplitudes.len(), self.signatures.len());
        let entries = self
            .entries
            .iter()
            .filter_map(|&(r, c, mu, sign)| {
                let amp = amplitudes[mu as usize];
                (amp != 0.0).then(|| (r, c, f64::from(sign) * amp))
            })
            .collect();
        SparseOperator {
            dim: self.dim,
            entries,
        }
    }
}

/// Square sparse matrix in coordinate form with merged duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    entries: Vec<(u32, u32, f64)>,
}

impl SparseOperator {
    /// Entries are sorted by (column, row) and duplicates summed.
    pub fn from_entries(dim: usize, mut entries: Vec<(u32, u32, f64)>) -> Self {
        entries.sort_unstable_by_key(|&(r, c, _)| (c, r));
        let mut merged: Vec<(u32, u32, f64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|e| e.2 != 0.0);
        SparseOperator {
            dim,
            entries: merged,
        }
    }

    /// Nonzero entries of a square dense matrix.
    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        assert!(m.is_square(), "sparse operator needs a square matrix");
        let mut entries = Vec::new();
        for (c, col) in m.column_iter().enumerate() {
            for (r, &v) in col.iter().enumerate() {
                if v != 0.0 {
                    entries.push((r as u32, c as u32, v));
                }
            }
        }
        SparseOperator {
            dim: m.nrows(),
            entries,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        SparseOperator {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(u32, u32, f64)] {
        &self.entries
    }

    pub fn transpose(&self) -> SparseOperator {
        SparseOperator::from_entries(
            self.dim,
            self.entries.iter().map(|&(r, c, v)| (c, r, v)).collect(),
        )
    }

    /// A - A^T.
    pub fn antisymmetrized(&self) -> SparseOperator {
        let mut all = self.entries.clone();
        all.extend(self.entries.iter().map(|&(r, c, v)| (c, r, -v)));
        SparseOperator::from_entries(self.dim, all)
    }

    /// Largest absolute column sum.
    pub fn norm1(&self) -> f64 {
        let mut sums = alloc::vec![0.0; self.dim];
        for &(_, c, v) in &self.entries {
            sums[c as usize] += v.abs();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// y = A x
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.dim);
        for &(r, c, v) in &self.entries {
            y[r as usize] += v * x[c as usize];
        }
        y
    }

    /// Y = A X for a block of column vectors.
    pub fn apply_block(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let cols = x.ncols();
        // Work on X^T so the columns of one row sit next to each other.
        let xt = x.transpose();
        let src = xt.as_slice();
        let mut yt = DMatrix::zeros(cols, self.dim);
        let dst = yt.as_mut_slice();
        for &(r, c, v) in &self.entries {
            let (r, c) = (r as usize * cols, c as usize * cols);
            for (y, x) in dst[r..r + cols].iter_mut().zip(&src[c..c + cols]) {
                *y += v * x;
            }
        }
        yt.transpose()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r as usize, c as usize)] += v;
        }
        m
    }
}
