//! Index computations for Toeplitz operators on the circle, Wiener-Hopf
//! operators on the line and Dirac-type operators on the cylinder
//! R x S^1, cross-checked against the Roe cocycle
//! zeta(A, B) = 1/4 Tr(chi [chi, A] [chi, B]).
//!
//! Module map:
//! - [`numerics`]: truncated operators, kernel dimensions, integer rounding and the
//!   window-doubling convergence driver.
//! - [`symbols`]: matrix symbols on the circle, winding numbers, presets.
//! - [`hardy`]: Hardy projection, Laurent blocks, Toeplitz index.
//! - [`line`]: the rho basis of L^2(R), Hilbert transform, Cayley pullbacks.
//! - [`wiener_hopf`]: rational Wiener-Hopf symbols and their indices.
//! - [`cylinder`]: the spectral model of the cylinder operator.
//! - [`lattice`]: the discretised cylinder.
//! - [`pairing`]: the cocycle, the pairing and the index-from-cocycle routes.
//! - [`report`]: the command line driver and its JSON report.

pub mod cylinder;
pub mod error;
pub mod hardy;
pub mod kron;
pub mod lattice;
pub mod line;
pub mod numerics;
pub mod pairing;
pub mod report;
pub mod symbols;
pub mod wiener_hopf;

pub use error::{IndexError, Result};
pub use num_complex::Complex64 as C64;
