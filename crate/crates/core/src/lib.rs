// SPDX-License-Identifier: Apache-2.0

//! Correlation dynamics of finite-dimensional quantum many-particle systems.
//!
//! Operators act on `(C^d)^{⊗n}` as dense matrices. On top of that algebra the
//! crate provides set-partition combinatorics, the Möbius maps between density
//! operators and correlation operators, the von Neumann hierarchy for
//! correlations, cumulants of the group of evolution operators and the
//! marginal (BBGKY) hierarchy with its series solution.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod bbgky;
pub mod combinatorics;
pub mod correlations;
pub mod error;
pub mod hamiltonian;
pub mod hilbert;

#[cfg(test)]
pub(crate) mod testing;

pub use combinatorics::{ClusterElement, ClusterSet, Label, Partition};
pub use error::{Error, Result};
pub use hilbert::{ManyBodyOperator, Matrix, OperatorSequence, Permutation, Statistics};
pub use num_complex::Complex64;
