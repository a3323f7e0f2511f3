//! IO, parallel sweeps and the command-line front end for
//! [`torus_spectra_core`].
//!
//! - [`edgelist`]: read and write graphs as plain edge lists.
//! - [`table`]: CSV tables with a fixed byte format.
//! - [`manifest`]: JSON run records.
//! - [`sweeps`]: figure data and Monte Carlo replicas on the rayon pool.
//! - [`cli`]: argument definitions and dispatch for the `torus-spectra` binary.

pub mod cli;
pub mod edgelist;
pub mod manifest;
pub mod sweeps;
pub mod table;

pub use torus_spectra_core as core;
