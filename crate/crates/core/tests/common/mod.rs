#![allow(dead_code)]

use std::sync::Arc;

use ducc_core::fockspace::{enumerate_sector, lower_hamiltonian, SectorBasis, SectorMatrix};
use ducc_core::molint::{build_chain, compute_integrals, sto3g_basis};
use ducc_core::scf::{
    run_rhf, to_spin_orbitals, MolecularOrbitals, ScfOptions, SpinOrbitalHamiltonian,
};

pub struct Chain {
    pub n_atoms: usize,
    pub mos: MolecularOrbitals,
    pub ham: SpinOrbitalHamiltonian,
    pub basis: Arc<SectorBasis>,
    pub h: SectorMatrix,
}

pub fn chain(n_atoms: usize, spacing: f64) -> Chain {
    let geom = build_chain(n_atoms, spacing).unwrap();
    let ints = compute_integrals(&geom, &sto3g_basis(&geom)).unwrap();
    let mos = run_rhf(&ints, n_atoms, &ScfOptions::default()).unwrap();
    let ham = to_spin_orbitals(&ints, &mos).unwrap();
    let basis = Arc::new(enumerate_sector(2 * n_atoms, n_atoms / 2, n_atoms / 2).unwrap());
    let h = lower_hamiltonian(&ham, &basis).unwrap();
    Chain {
        n_atoms,
        mos,
        ham,
        basis,
        h,
    }
}
