//! Explicit Lax pairs for non-twisted sl2(C) meromorphic connections.
//!
//! The crate builds the oper-gauge and geometric-gauge Lax matrices of a
//! rational connection with poles at infinity and at finitely many points,
//! expresses the isomonodromic Hamiltonians in several Darboux charts and
//! checks every identity numerically.
//!
//! Module map:
//! - [`ratcalc`]: polynomials, rational functions, Laurent slices and projectors.
//! - [`structlin`]: lower-triangular Toeplitz and Vandermonde-stack solves.
//! - [`model`]: pole profiles, time charts, deformation vectors, genus.
//! - [`coords`]: the Darboux charts and their transition maps.
//! - [`opergauge`]: companion-form Lax pair, Hamiltonians and compatibility.
//! - [`geogauge`]: geometric Lax pair from (Q,P) and (Q,R).
//! - [`spectral`]: determinant calculus and spectral invariants.
//! - [`isospectral`]: explicit time dependence and isospectral coordinates.
//! - [`harness`]: instance generation, verification suites and reports.

pub mod coords;
pub mod error;
pub mod geogauge;
pub mod harness;
pub mod isospectral;
pub mod model;
pub mod opergauge;
pub mod ratcalc;
pub mod spectral;
pub mod structlin;

pub use error::{LaxError, Result};

/// Complex double-precision scalar used throughout the crate.
pub type C = num_complex::Complex64;
