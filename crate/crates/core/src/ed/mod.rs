//! Exact diagonalization in a truncated Fock space.

mod banded;
mod hamiltonian;
mod operators;
mod solve;

pub use banded::{BandCholesky, BandedSym};
pub use hamiltonian::{build_hamiltonian, photon_parity, relative_commutator, z4_parity, HamiltonianMatrix, Spin};
pub use operators::{build_operators, FockOperators, SparseMatrix};
pub use solve::{
    converge_cutoff, ground_state, ground_state_with, solve_at, CutoffPolicy, EigenBackend, SpectralResult,
    DENSE_AUTO_MAX_DIM,
};
