//! Spectral analysis of SIS spreading on torus and almost-torus networks.
//!
//! The crate is `no_std` (with `alloc`); enable the `std` feature to link
//! the standard library. Modules:
//!
//! - [`topology`]: tori, grids, rings and their node/edge deletions.
//! - [`spectral`]: closed-form torus spectra, the dense oracle, power
//!   iteration and characteristic polynomial values.
//! - [`walks`]: closed and point-to-point walk counts on the torus and the
//!   infinite square lattice, resolvent entries and truncated walk
//!   generating functions.
//! - [`deletion`]: characteristic polynomials and spectral radii of tori
//!   with nodes or an edge removed.
//! - [`bounds`]: lattice and Stirling lower bounds, torus vs lattice tables.
//! - [`sis`]: discrete-time SIS dynamics and the `ρ(A) < δ/β` threshold.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bounds;
pub mod deletion;
pub(crate) mod math;
pub mod sis;
pub mod spectral;
pub mod topology;
pub mod walks;

pub use spectral::{PolyEval, Spectrum};
pub use topology::{Graph, NodeCoord, TorusSpec};
