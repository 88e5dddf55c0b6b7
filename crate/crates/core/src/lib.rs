//! Chordal, radial and strip SLE(kappa; rho_1, ..., rho_m) with force points
//! on the boundary or in the interior of the domain.
//!
//! The crate is organized bottom-up:
//!
//! - [`loewner`]: vector fields, reflections and the deterministic flow of
//!   marked points in the half-plane, the disk and the strip.
//! - [`process`]: the stochastic driving function and force points.
//! - [`coordinate`]: Mobius maps between the domains, the mid-flow
//!   uniformizers and the transformation of whole sample paths.
//! - [`martingale`]: the explicit local martingales and the tests that
//!   check their drift.
//! - [`harness`]: ensembles, statistics and experiment manifests.
//! - [`cli`]: the `sle-rho` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coordinate;
pub mod domain;
pub mod error;
pub mod harness;
pub mod io;
pub mod loewner;
pub mod martingale;
pub mod mobius;
pub mod process;
pub mod rng;
pub mod stats;

pub use domain::{Domain, Point};
pub use error::{Result, SleError};
