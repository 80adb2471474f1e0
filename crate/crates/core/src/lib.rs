//! Semiclassical dynamics of interacting spin-1/2 lattices.
//!
//! Each spin is described by a four-point discrete Wigner function. Initial
//! classical spin vectors are drawn from it, evolved with the mean-field
//! equations of motion of the XXZ + transverse-field Hamiltonian
//!
//! ```text
//! H = 1/2 Σ_{i≠j} [ J⊥_ij/2 (σx_i σx_j + σy_i σy_j) + Jz_ij σz_i σz_j ] + Ω Σ_i σx_i
//! ```
//!
//! and averaged over many trajectories. Exact references (closed-form Ising
//! results and dense exact diagonalization for small systems) live in
//! [`oracle`].
//!
//! All spin quantities use Pauli normalization: a single spin has components
//! in `{-1, +1}` and the collective spin is `S = Σ_n σ_n`.
//!
//! The crate is `no_std` and needs only `alloc`. Parallel execution, file
//! formats and the command line live in the companion `dtwa` crate.
#![no_std]

extern crate alloc;

mod error;
mod math;

pub mod dynamics;
pub mod ensemble;
pub mod gaussian_twa;
pub mod lattice;
pub mod observables;
pub mod oracle;
pub mod phase_space;

pub use error::{Error, Result};
