//! Numerics for the two-photon Rabi-Stark model.
//!
//! The crate covers exact diagonalization in a truncated Fock space
//! ([`ed`]), ground-state observables and wavefunctions ([`observables`]),
//! the quantum Fisher information with respect to the quadratic coupling
//! ([`qfi`]), the variational polaron picture and its QFI decomposition
//! ([`polaron`]), Wigner-function squeezing diagnostics ([`wigner`]), the
//! probe-state preparation time ([`ptps`]) and reproducible parameter
//! sweeps written as CSV ([`sweep`]). [`selftest`] is a fast invariant suite.
//!
//! Energies are in units of the mode frequency ω unless stated otherwise.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ed;
pub mod error;
pub mod model;
pub mod observables;
pub mod polaron;
pub mod ptps;
pub mod qfi;
pub mod selftest;
pub mod sweep;
pub mod wigner;

pub use error::{Error, Result};
pub use model::{
    bare_frequencies, critical_coupling, derive, equi_flip_omega, rotated_frame, stability_check, DerivedParams,
    ModelParams, RotatedFrame,
};
pub use sweep::{run_sweep, Axis, ResultTable, Spacing, SweepKind, SweepOutput, SweepSpec};

/// Version string written into result metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
