//! Steady-state photon statistics of a nonlinear cavity and a linear
//! auxiliary cavity whose output fields are mixed on a beam splitter.
//!
//! Two nonlinear elements are covered: a Kerr medium and a two-level system
//! (Jaynes-Cummings coupling). The crate solves the Lindblad master equation
//! exactly on a truncated Fock space, evaluates intracavity and output-field
//! `g2(0)`, and cross-checks the numerics against the weak-drive amplitude
//! picture and its large-coupling scaling laws.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod error;
pub mod hilbert;
pub mod liouville;
pub mod model;
pub mod observables;
pub mod recipes;
pub mod sweep;
pub mod weakdrive;

pub use error::{Error, Result};
pub use faer::c64;
