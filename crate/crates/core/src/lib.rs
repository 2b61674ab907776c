//! Adaptive quarklet tree approximation in `L2([0,1])`.
//!
//! Quarklets are polynomially enriched Haar wavelets; weighted, they form a
//! redundant frame of the unit interval. This crate builds near-best tree
//! approximations from frame coefficient sequences:
//!
//! * [`index`] / [`tree`] — dyadic index machinery and quarklet trees;
//! * [`coeff`] / [`local_error`] — coefficient sequences and the local error
//!   functionals driving refinement;
//! * [`penalty`] / [`nearbest`] — the penalized error recursions and the
//!   incremental refinement with trimming;
//! * [`sigma`] / [`certificate`] — the exhaustive best-tree oracle and the
//!   near-best certificates;
//! * [`haar`] / [`quad`] / [`gramian`] — Haar quarklet evaluation, exact
//!   inner products, Gramian systems and quadrature;
//! * [`solver`] — damped Richardson iteration with adaptive index growth;
//! * [`target`] / [`bench`] — test functions, convergence experiments and
//!   rate fits.

pub mod bench;
pub mod certificate;
pub mod coeff;
pub mod error;
pub mod gramian;
pub mod haar;
pub mod index;
pub mod local_error;
pub mod nearbest;
pub mod penalty;
pub mod quad;
pub mod sigma;
pub mod solver;
pub mod target;
pub mod tree;

#[cfg(test)]
pub(crate) mod testutil;

pub use crate::error::{Error, Result};
pub use crate::index::{Bounds, QuarkletIndex, WaveletIndex, ROOT};
pub use crate::tree::{QuarkletTree, WaveletTree};
