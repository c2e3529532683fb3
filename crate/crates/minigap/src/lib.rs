//! Analysis of first-order quantum phase transitions in adiabatic quantum
//! optimization at desk scale.
//!
//! The crate interpolates a transverse-field Ising Hamiltonian
//! `H(lambda) = (1-lambda) Delta sum_i sigma^x_i + lambda H_P`, follows its
//! lowest eigenpairs across `lambda`, refines the minimum spectral gap, and
//! independently predicts the anticrossing position and gap size from
//! second-order perturbation theory plus a path-sum tunneling amplitude. A
//! weighted maximum independent set family on a 15-vertex triangle graph is
//! built in as the testbed.
//!
//! # Instance file format
//!
//! UTF-8 text, one directive per line, `#` starts a comment:
//!
//! ```text
//! n 2          # qubit count, first non-comment directive
//! delta 1.0    # transverse amplitude, required, > 0
//! h 0 0.5      # local field (default 0)
//! J 0 1 -1.0   # coupling, i != j, each unordered pair at most once
//! ```
//!
//! Floats accept scientific notation.

pub mod error;
pub mod ising;
pub mod spectral;

pub use error::{Error, Result};
