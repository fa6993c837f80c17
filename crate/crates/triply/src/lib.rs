//! Exact computational machinery for spherical designs and the association
//! schemes they carry.
//!
//! Everything here runs over exact arithmetic: point systems are held as Gram
//! matrices with entries in a multi-quadratic extension of the rationals
//! ([`qfield::ExactReal`]), design strength is decided by exact Gegenbauer
//! sums, and every structural claim (coherent-configuration axioms, triple
//! regularity, solver output) is certified by independent brute-force
//! counting.
//!
//! The main entry points:
//!
//! - [`catalog`] builds the named configurations (polygons, cross polytopes,
//!   the icosahedron, the 27-point two-distance set, the E8 root system,
//!   real mutually unbiased bases, linked symmetric designs), each
//!   self-verified on construction.
//! - [`sphereset`] answers geometric questions about a configuration: angle
//!   sets, design strength, tightness, intersection counts, derived
//!   (subconstituent) designs.
//! - [`scheme`] verifies coherent-configuration axioms, computes eigenmatrix
//!   and Krein data, and certifies triple regularity by exhaustive counting.
//! - [`solver`] derives the parameters of the coherent configuration carried
//!   by a union of designs from exact Vandermonde-Kronecker linear systems,
//!   and cross-checks them against counting.
//!
//! See the `examples/` directory for a runnable tour of each capability; the
//! `triply` binary exposes the same operations as subcommands.

pub mod catalog;
pub mod gegenbauer;
pub mod linalg;
pub mod qfield;
pub mod report;
pub mod scheme;
pub mod solver;
pub mod sphereset;

pub use qfield::{ExactReal, Rational};
