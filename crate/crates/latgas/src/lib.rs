//! Lattice-gas Monte Carlo simulation and diffraction analysis on periodic
//! tori.
//!
//! The crate samples ±1 spin systems (equivalently 0/1 lattice gases) under
//! a translation-invariant pair coupling, estimates two-point correlations
//! with honest error bars, fits decay laws with certified tail bounds, and
//! assembles the scattering picture: a pure point part on the integer dual
//! lattice plus an absolutely continuous density given by a cosine series in
//! the correlations.
//!
//! Energy convention: `E = -1/2 * sum_x sum_{r != 0} J(r) s_x s_{x+r}`, i.e.
//! every unordered interacting pair counts once. All file formats and
//! reported temperatures refer to this convention (see
//! [`model::CONVENTION_TAG`]).
//!
//! Modules:
//! - [`lattice`]: periodic tori and spin configurations.
//! - [`model`]: coupling maps, energies, uniqueness/moment conditions,
//!   lattice change-of-basis.
//! - [`sampler`]: Metropolis and Wolff chains, parallel runs.
//! - [`oracle`]: exact enumeration and closed-form 1D references.
//! - [`correlation`]: correlation tables, decay fits, summability bounds.
//! - [`diffraction`]: spectrum decomposition, intensity estimation, property
//!   checks.
//! - [`io`]: artifact files (tables, sample streams, checksum manifest).
//! - [`config`]: TOML job descriptions.
//! - [`pipeline`]: the check / simulate / analyze / diffract / report stages.
//! - [`stats`]: scalar statistics helpers (batch means, autocorrelation).
//! - [`error`]: shared error type with process exit codes.
//!
//! The `examples/` directory exercises each capability end to end; start
//! with `examples/full_pipeline.rs`.

// Parameter guards are written `!(x > 0.0)` so that NaN falls into the
// rejecting branch; the negation is the point.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod correlation;
pub mod diffraction;
pub mod error;
pub mod io;
pub mod lattice;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod sampler;
pub mod stats;

pub use error::{Error, Result};
