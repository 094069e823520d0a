//! Restricted Hartree-Fock and the spin-orbital molecular Hamiltonian.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::linalg::{self, Diis};
use crate::molint::IntegralTables;
use crate::{Error, Result};

/// Convergence controls for [`run_rhf`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScfOptions {
    pub max_iter: usize,
    pub e_tol: f64,
    pub d_tol: f64,
    /// DIIS subspace depth; 0 gives plain Roothaan iterations.
    pub diis_depth: usize,
}

impl Default for ScfOptions {
    fn default() -> Self {
        ScfOptions {
            max_iter: 200,
            e_tol: 1e-10,
            d_tol: 1e-8,
            diis_depth: 8,
        }
    }
}

/// Converged canonical RHF orbitals.
#[derive(Debug, Clone)]
pub struct MolecularOrbitals {
    /// AO -> MO coefficients, one orbital per column.
    pub coefficients: DMatrix<f64>,
    /// Orbital energies, ascending.
    pub energies: DVector<f64>,
    /// Total RHF energy including nuclear repulsion.
    pub total_energy: f64,
    pub n_occ: usize,
    pub iterations: usize,
}

impl MolecularOrbitals {
    pub fn n_orbitals(&self) -> usize {
        self.energies.len()
    }
}

/// Solves the Roothaan equations from a core-Hamiltonian guess.
pub fn run_rhf(
    ints: &IntegralTables,
    n_electrons: usize,
    opts: &ScfOptions,
) -> Result<MolecularOrbitals> {
    let n = ints.n_basis();
    if n_electrons == 0 || n_electrons % 2 != 0 {
        return Err(Error::invalid(format!(
            "RHF needs an even positive electron count, got {n_electrons}"
        )));
    }
    let n_occ = n_electrons / 2;
    if n_occ > n {
        return Err(Error::invalid(format!(
            "{n_electrons} electrons do not fit into {n} spatial orbitals"
        )));
    }

    let x = linalg::inverse_sqrt(&ints.overlap)?;
    let hcore = ints.core_hamiltonian();

    let (guess, _) = diagonalize_fock(&hcore, &x);
    let mut density = build_density(&guess, n_occ);
    let mut energy = f64::NAN;
    let mut diis = Diis::new(opts.diis_depth.max(1));

    for iter in 1..=opts.max_iter {
        let fock = build_fock(ints, &hcore, &density);
        let e_new = electronic_energy(&density, &hcore, &fock) + ints.nuclear_repulsion;

        let fock_used = if opts.diis_depth > 0 {
            // Commutator FDS - SDF in the orthogonal basis.
            let fds = &fock * &density * &ints.overlap;
            let err = x.transpose() * (&fds - fds.transpose()) * &x;
            let flat = |m: &DMatrix<f64>| DVector::from_column_slice(m.as_slice());
            let extrap = diis.extrapolate(flat(&fock), flat(&err));
            DMatrix::from_column_slice(n, n, extrap.as_slice())
        } else {
            fock
        };

        let (c_new, _) = diagonalize_fock(&fock_used, &x);
        let d_new = build_density(&c_new, n_occ);
        let d_change = (&d_new - &density).amax();
        let e_change = (e_new - energy).abs();

        density = d_new;
        energy = e_new;

        if e_change < opts.e_tol && d_change < opts.d_tol {
            // Recompute the canonical orbitals from the unextrapolated Fock
            // matrix of the converged density.
            let fock = build_fock(ints, &hcore, &density);
            let (c, eps) = diagonalize_fock(&fock, &x);
            let d = build_density(&c, n_occ);
            let e = electronic_energy(&d, &hcore, &build_fock(ints, &hcore, &d))
                + ints.nuclear_repulsion;
            return Ok(MolecularOrbitals {
                coefficients: c,
                energies: eps,
                total_energy: e,
                n_occ,
                iterations: iter,
            });
        }
    }
    Err(Error::ConvergenceFailure {
        stage: "rhf",
        iterations: opts.max_iter,
        last: energy,
    })
}

fn diagonalize_fock(fock: &DMatrix<f64>, x: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let fp = x.transpose() * fock * x;
    let fp = (&fp + fp.transpose()) * 0.5;
    let eig = linalg::symmetric_eigen(&fp);
    let mut c = x * &eig.vectors;
    fix_signs(&mut c);
    (c, eig.values)
}

/// Makes the largest-magnitude coefficient of every column positive; the
/// first such coefficient wins among near-ties.
fn fix_signs(c: &mut DMatrix<f64>) {
    for j in 0..c.ncols() {
        let col = c.column(j);
        let big = col.amax();
        let pivot = col.iter().position(|v| v.abs() > big - 1e-8).unwrap_or(0);
        if c[(pivot, j)] < 0.0 {
            c.column_mut(j).neg_mut();
        }
    }
}

fn build_density(c: &DMatrix<f64>, n_occ: usize) -> DMatrix<f64> {
    let occ = c.columns(0, n_occ);
    occ * occ.transpose() * 2.0
}

fn build_fock(ints: &IntegralTables, hcore: &DMatrix<f64>, density: &DMatrix<f64>) -> DMatrix<f64> {
    let n = ints.n_basis();
    let mut f = hcore.clone();
    for p in 0..n {
        for q in 0..n {
            let mut g = 0.0;
            for r in 0..n {
                for s in 0..n {
                    g += density[(r, s)] * (ints.eri(p, q, r, s) - 0.5 * ints.eri(p, r, q, s));
                }
            }
            f[(p, q)] += g;
        }
    }
    f
}

fn electronic_energy(density: &DMatrix<f64>, hcore: &DMatrix<f64>, fock: &DMatrix<f64>) -> f64 {
    0.5 * density.component_mul(&(hcore + fock)).sum()
}

/// MO-basis Fock matrix, diagonal at convergence.
pub fn mo_fock(ints: &IntegralTables, mos: &MolecularOrbitals) -> DMatrix<f64> {
    let hcore = ints.core_hamiltonian();
    let density = build_density(&mos.coefficients, mos.n_occ);
    let f = build_fock(ints, &hcore, &density);
    mos.coefficients.transpose() * f * &mos.coefficients
}

/// Electronic Hamiltonian in the spin-orbital MO basis.
///
/// Spin orbital `p = 2k + s` carries spatial orbital `k` and spin `s`
/// (0 = alpha, 1 = beta).
#[derive(Debug, Clone)]
pub struct SpinOrbitalHamiltonian {
    pub n_spin_orbitals: usize,
    pub one_body: DMatrix<f64>,
    /// Antisymmetrized <pq||rs>, flattened as ((p*M + q)*M + r)*M + s.
    pub two_body: Vec<f64>,
    pub nuclear_repulsion: f64,
    /// Spatial orbital energies, carried along for denominators.
    pub orbital_energies: Vec<f64>,
}

impl SpinOrbitalHamiltonian {
    #[inline]
    pub fn v(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let m = self.n_spin_orbitals;
        self.two_body[((p * m + q) * m + r) * m + s]
    }

    #[inline]
    pub fn h(&self, p: usize, q: usize) -> f64 {
        self.one_body[(p, q)]
    }

    /// Orbital energy of a spin orbital.
    #[inline]
    pub fn epsilon(&self, p: usize) -> f64 {
        self.orbital_energies[p / 2]
    }

    /// E_nn + sum_i h_ii + 1/2 sum_ij <ij||ij> over the `n_occ` lowest
    /// spatial orbitals, doubly occupied.
    pub fn reference_energy(&self, n_occ: usize) -> f64 {
        let occ = 0..2 * n_occ;
        let mut e = self.nuclear_repulsion;
        for i in occ.clone() {
            e += self.h(i, i);
            for j in occ.clone() {
                e += 0.5 * self.v(i, j, i, j);
            }
        }
        e
    }
}

/// Transforms AO integrals to the spin-orbital MO basis.
pub fn to_spin_orbitals(
    ints: &IntegralTables,
    mos: &MolecularOrbitals,
) -> Result<SpinOrbitalHamiltonian> {
    let n = ints.n_basis();
    let c = &mos.coefficients;
    if c.nrows() != n || c.ncols() != n {
        return Err(Error::invalid("MO coefficients do not match the AO basis"));
    }
    let h_mo = c.transpose() * ints.core_hamiltonian() * c;

    // Quarter transformations, one index at a time.
    let mut cur = ints.eri.clone();
    for axis in 0..4 {
        let mut next = vec![0.0; n * n * n * n];
        for a in 0..n {
            for b in 0..n {
                for d in 0..n {
                    for e in 0..n {
                        let old = [a, b, d, e];
                        let src = cur[((a * n + b) * n + d) * n + e];
                        if src == 0.0 {
                            continue;
                        }
                        for k in 0..n {
                            let mut idx = old;
                            idx[axis] = k;
                            next[((idx[0] * n + idx[1]) * n + idx[2]) * n + idx[3]] +=
                                c[(old[axis], k)] * src;
                        }
                    }
                }
            }
        }
        cur = next;
    }
    let chem = |p: usize, q: usize, r: usize, s: usize| cur[((p * n + q) * n + r) * n + s];

    let m = 2 * n;
    let mut one_body = DMatrix::zeros(m, m);
    for p in 0..m {
        for q in 0..m {
            if p % 2 == q % 2 {
                one_body[(p, q)] = h_mo[(p / 2, q / 2)];
            }
        }
    }
    // <pq|rs> = (pr|qs) with spin integration.
    let coulomb = |p: usize, q: usize, r: usize, s: usize| {
        if p % 2 == r % 2 && q % 2 == s % 2 {
            chem(p / 2, r / 2, q / 2, s / 2)
        } else {
            0.0
        }
    };
    let mut two_body = vec![0.0; m * m * m * m];
    for p in 0..m {
        for q in 0..m {
            for r in 0..m {
                for s in 0..m {
                    two_body[((p * m + q) * m + r) * m + s] =
                        coulomb(p, q, r, s) - coulomb(p, q, s, r);
                }
            }
        }
    }

    Ok(SpinOrbitalHamiltonian {
        n_spin_orbitals: m,
        one_body,
        two_body,
        nuclear_repulsion: ints.nuclear_repulsion,
        orbital_energies: mos.energies.iter().copied().collect(),
    })
}
