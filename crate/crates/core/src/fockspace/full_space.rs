//! Operators over the complete 2^M Fock space, for small M only.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::determinant::{apply_string, Determinant, Ladder};
use crate::scf::SpinOrbitalHamiltonian;

/// Largest spin-orbital count accepted here (dimension 2^12 = 4096).
pub const MAX_SPIN_ORBITALS: usize = 12;

/// Matrix of a ladder-operator product over all 2^m occupation strings,
/// indexed by the bitstring value.
pub fn string_matrix(m: usize, ops: &[Ladder]) -> DMatrix<f64> {
    assert!(
        m <= MAX_SPIN_ORBITALS,
        "full Fock space limited to {MAX_SPIN_ORBITALS} spin orbitals"
    );
    let dim = 1usize << m;
    let mut out = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        if let Some((det, sign)) = apply_string(Determinant(j as u64), ops) {
            out[(det.0 as usize, j)] += f64::from(sign);
        }
    }
    out
}

/// Hamiltonian over the full Fock space, built term by term from the
/// operator sum without Slater-Condon shortcuts.
pub fn hamiltonian(ham: &SpinOrbitalHamiltonian) -> DMatrix<f64> {
    let m = ham.n_spin_orbitals;
    assert!(
        m <= MAX_SPIN_ORBITALS,
        "full Fock space limited to {MAX_SPIN_ORBITALS} spin orbitals"
    );
    let dim = 1usize << m;
    let mut out = DMatrix::zeros(dim, dim);
    let mut terms: Vec<(f64, [Ladder; 4], usize)> = Vec::new();
    for p in 0..m {
        for q in 0..m {
            let h = ham.h(p, q);
            if h != 0.0 {
                terms.push((
                    h,
                    [
                        Ladder::Create(p),
                        Ladder::Annihilate(q),
                        Ladder::Create(0),
                        Ladder::Create(0),
                    ],
                    2,
                ));
            }
            for r in 0..m {
                for s in 0..m {
                    let v = ham.v(p, q, r, s);
                    if v != 0.0 {
                        terms.push((
                            0.25 * v,
                            [
                                Ladder::Create(p),
                                Ladder::Create(q),
                                Ladder::Annihilate(s),
                                Ladder::Annihilate(r),
                            ],
                            4,
                        ));
                    }
                }
            }
        }
    }
    for j in 0..dim {
        let det = Determinant(j as u64);
        for (coef, ops, len) in &terms {
            if let Some((res, sign)) = apply_string(det, &ops[..*len]) {
                out[(res.0 as usize, j)] += coef * f64::from(sign);
            }
        }
        // E_nn on every diagonal entry, as in the sector builds.
        out[(j, j)] += ham.nuclear_repulsion;
    }
    out
}
