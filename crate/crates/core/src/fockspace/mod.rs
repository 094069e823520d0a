//! Occupation-number representation of fermionic operators.
//!
//! Determinants are bitstrings, ladder operators act with the prefix-parity
//! sign rule, and second-quantized operators (Hamiltonian, cluster
//! operators, their exponentials) are lowered to dense matrices over a
//! fixed-(N_alpha, N_beta) sector. The full Fock space is only ever built
//! for tiny systems in [`full_space`].

mod cluster;
mod determinant;
mod expm;
pub mod full_space;
mod sector;

pub use cluster::{lower_cluster, ExcitationPattern, SparseOperator};
pub use determinant::{apply_string, BitIter, Determinant, Ladder};
pub use expm::{
    exp_antisymmetric, exp_antisymmetric_apply, exp_antisymmetric_dense, exp_antisymmetric_eig,
    exp_nilpotent, exp_nilpotent_apply, EXP_TOL,
};
pub use sector::{enumerate_sector, lower_hamiltonian, SectorBasis, SectorMatrix};
