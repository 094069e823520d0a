//! Fixed-(N_alpha, N_beta) determinant sectors and dense operators on them.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::determinant::{apply_string, BitIter, Determinant, Ladder};
use crate::scf::SpinOrbitalHamiltonian;
use crate::{Error, Result};

/// All determinants with fixed alpha and beta electron counts.
///
/// Ordering is alpha-major: determinants are sorted by alpha string, then
/// beta string, each string compared as an integer spatial bitmask. The
/// aufbau determinant is therefore index 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorBasis {
    n_spatial: usize,
    n_alpha: usize,
    n_beta: usize,
    alpha_strings: Vec<u64>,
    beta_strings: Vec<u64>,
    dets: Vec<Determinant>,
    /// binom[n][k] for n <= n_spatial.
    binom: Vec<Vec<usize>>,
}

/// Enumerates the (n_alpha, n_beta) sector over `m` spin orbitals.
pub fn enumerate_sector(m: usize, n_alpha: usize, n_beta: usize) -> Result<SectorBasis> {
    SectorBasis::new(m, n_alpha, n_beta)
}

impl SectorBasis {
    pub fn new(m: usize, n_alpha: usize, n_beta: usize) -> Result<Self> {
        if !m.is_multiple_of(2) || m == 0 || m > 64 {
            return Err(Error::invalid(format!(
                "spin-orbital count must be even and within 2..=64, got {m}"
            )));
        }
        let n_spatial = m / 2;
        if n_alpha > n_spatial || n_beta > n_spatial {
            return Err(Error::invalid(format!(
                "sector ({n_alpha}, {n_beta}) does not fit {n_spatial} spatial orbitals"
            )));
        }
        let mut binom = vec![vec![0usize; n_spatial + 1]; n_spatial + 1];
        for n in 0..=n_spatial {
            binom[n][0] = 1;
            for k in 1..=n {
                binom[n][k] = binom[n - 1][k - 1] + if k < n { binom[n - 1][k] } else { 0 };
            }
        }
        let alpha_strings = strings_with_popcount(n_spatial, n_alpha);
        let beta_strings = strings_with_popcount(n_spatial, n_beta);
        let mut dets = Vec::with_capacity(alpha_strings.len() * beta_strings.len());
        for &a in &alpha_strings {
            for &b in &beta_strings {
                dets.push(Determinant::from_strings(a, b, n_spatial));
            }
        }
        Ok(SectorBasis {
            n_spatial,
            n_alpha,
            n_beta,
            alpha_strings,
            beta_strings,
            dets,
            binom,
        })
    }

    pub fn n_spin_orbitals(&self) -> usize {
        2 * self.n_spatial
    }

    pub fn n_spatial(&self) -> usize {
        self.n_spatial
    }

    pub fn n_alpha(&self) -> usize {
        self.n_alpha
    }

    pub fn n_beta(&self) -> usize {
        self.n_beta
    }

    pub fn n_electrons(&self) -> usize {
        self.n_alpha + self.n_beta
    }

    pub fn len(&self) -> usize {
        self.dets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dets.is_empty()
    }

    pub fn dets(&self) -> &[Determinant] {
        &self.dets
    }

    pub fn det(&self, i: usize) -> Determinant {
        self.dets[i]
    }

    /// Aufbau determinant (lowest spatial orbitals filled).
    pub fn reference(&self) -> Determinant {
        self.dets[0]
    }

    /// Position of `det` in the sector, or `None` if it lies outside.
    pub fn index_of(&self, det: Determinant) -> Option<usize> {
        if det.0 >> self.n_spin_orbitals() != 0 {
            return None;
        }
        let a = det.alpha_string(self.n_spatial);
        let b = det.beta_string(self.n_spatial);
        if a.count_ones() as usize != self.n_alpha || b.count_ones() as usize != self.n_beta {
            return None;
        }
        Some(self.rank(a) * self.beta_strings.len() + self.rank(b))
    }

    /// Colexicographic rank, which equals the position among same-popcount
    /// integers in ascending order.
    fn rank(&self, s: u64) -> usize {
        BitIter(s)
            .enumerate()
            .map(|(i, pos)| if i < pos { self.binom[pos][i + 1] } else { 0 })
            .sum()
    }
}

fn strings_with_popcount(n: usize, k: usize) -> Vec<u64> {
    (0u64..(1u64 << n))
        .filter(|s| s.count_ones() as usize == k)
        .collect()
}

/// Dense real matrix over a sector basis.
#[derive(Debug, Clone)]
pub struct SectorMatrix {
    pub basis: Arc<SectorBasis>,
    pub data: DMatrix<f64>,
}

impl SectorMatrix {
    pub fn zeros(basis: Arc<SectorBasis>) -> Self {
        let n = basis.len();
        SectorMatrix {
            basis,
            data: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(basis: Arc<SectorBasis>) -> Self {
        let n = basis.len();
        SectorMatrix {
            basis,
            data: DMatrix::identity(n, n),
        }
    }

    pub fn from_data(basis: Arc<SectorBasis>, data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() != basis.len() || data.ncols() != basis.len() {
            return Err(Error::invalid(format!(
                "matrix is {}x{} but the sector has {} determinants",
                data.nrows(),
                data.ncols(),
                basis.len()
            )));
        }
        Ok(SectorMatrix { basis, data })
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn transpose(&self) -> SectorMatrix {
        SectorMatrix {
            basis: self.basis.clone(),
            data: self.data.transpose(),
        }
    }

    /// Product with another operator on the same sector.
    pub fn mul(&self, other: &SectorMatrix) -> SectorMatrix {
        SectorMatrix {
            basis: self.basis.clone(),
            data: &self.data * &other.data,
        }
    }

    /// Replaces the matrix by (A + A^T) / 2.
    pub fn symmetrize(&mut self) {
        let t = self.data.transpose();
        self.data += t;
        self.data *= 0.5;
    }

    /// Principal submatrix on the given determinant indices.
    pub fn principal_submatrix(&self, indices: &[usize]) -> DMatrix<f64> {
        let d = indices.len();
        DMatrix::from_fn(d, d, |i, j| self.data[(indices[i], indices[j])])
    }
}

/// Matrix of the electronic Hamiltonian
/// sum h_pq a_p^+ a_q + 1/4 sum <pq||rs> a_p^+ a_q^+ a_s a_r, plus E_nn on
/// the diagonal, over the sector.
pub fn lower_hamiltonian(
    ham: &SpinOrbitalHamiltonian,
    basis: &Arc<SectorBasis>,
) -> Result<SectorMatrix> {
    let m = basis.n_spin_orbitals();
    if ham.n_spin_orbitals != m {
        return Err(Error::invalid(format!(
            "Hamiltonian has {} spin orbitals, sector has {m}",
            ham.n_spin_orbitals
        )));
    }
    let full = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let n = basis.len();
    let mut h = DMatrix::zeros(n, n);
    let mut occ = Vec::with_capacity(m);
    let mut virt = Vec::with_capacity(m);

    for (j, &det) in basis.dets().iter().enumerate() {
        occ.clear();
        occ.extend(det.occupied());
        virt.clear();
        virt.extend(BitIter(!det.0 & full));

        let mut diag = ham.nuclear_repulsion;
        for &i in &occ {
            diag += ham.h(i, i);
            for &k in &occ {
                diag += 0.5 * ham.v(i, k, i, k);
            }
        }
        h[(j, j)] += diag;

        for &q in &occ {
            for &p in &virt {
                if p % 2 != q % 2 {
                    continue;
                }
                let mut val = ham.h(p, q);
                for &k in &occ {
                    if k != q {
                        val += ham.v(p, k, q, k);
                    }
                }
                if val == 0.0 {
                    continue;
                }
                let (out, sign) = apply_string(det, &[Ladder::Create(p), Ladder::Annihilate(q)])
                    .expect("single excitation between occupied and virtual is allowed");
                if let Some(i) = basis.index_of(out) {
                    h[(i, j)] += f64::from(sign) * val;
                }
            }
        }

        for (ri, &r) in occ.iter().enumerate() {
            for &s in &occ[ri + 1..] {
                let spin_out = r % 2 + s % 2;
                for (pi, &p) in virt.iter().enumerate() {
                    for &q in &virt[pi + 1..] {
                        if p % 2 + q % 2 != spin_out {
                            continue;
                        }
                        let val = ham.v(p, q, r, s);
                        if val == 0.0 {
                            continue;
                        }
                        let (out, sign) = apply_string(
                            det,
                            &[
                                Ladder::Create(p),
                                Ladder::Create(q),
                                Ladder::Annihilate(s),
                                Ladder::Annihilate(r),
                            ],
                        )
                        .expect("double excitation between occupied and virtual is allowed");
                        if let Some(i) = basis.index_of(out) {
                            h[(i, j)] += f64::from(sign) * val;
                        }
                    }
                }
            }
        }
    }
    Ok(SectorMatrix {
        basis: basis.clone(),
        data: h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_sizes() {
        assert_eq!(enumerate_sector(12, 3, 3).unwrap().len(), 400);
        assert_eq!(enumerate_sector(16, 4, 4).unwrap().len(), 4900);
        let b = enumerate_sector(4, 1, 1).unwrap();
        assert_eq!(b.len(), 4);
        // Both electrons in the first spatial orbital.
        assert_eq!(b.reference(), Determinant(0b0011));
        assert!(enumerate_sector(12, 7, 3).is_err());
        assert!(enumerate_sector(7, 1, 1).is_err());
    }

    #[test]
    fn index_round_trip() {
        let b = enumerate_sector(12, 3, 2).unwrap();
        for (i, &d) in b.dets().iter().enumerate() {
            assert_eq!(b.index_of(d), Some(i));
        }
        assert_eq!(b.index_of(Determinant(0b1)), None);
        // Deterministic alpha-major ordering.
        for w in b.dets().windows(2) {
            let key = |d: Determinant| (d.alpha_string(6), d.beta_string(6));
            assert!(key(w[0]) < key(w[1]));
        }
    }
}
