//! Spectral-curve toolkit for the difference Lamé operator.
//!
//! The crate evaluates Jacobi theta functions and the elliptic-number calculus
//! built on them, realizes the commuting family of difference operators of the
//! integrable difference Lamé problem, computes the transfer-matrix
//! polynomials, and assembles the spectral curve in both of its presentations
//! (the covering form over the elliptic curve and the hyperelliptic form),
//! together with Bloch eigenfunctions, band edges and Lax pairs.  Every
//! closed-form identity the constructions rest on is re-checked numerically:
//! dual-route computations are mandatory and disagreement is an error.

pub mod curve;
pub mod diffop;
pub mod error;
pub mod lax;
pub mod polyalg;
pub mod theta;
pub mod transfer;
pub mod verify;

pub use error::{Error, Result};
pub use theta::{EllipticContext, Tolerances, C};
