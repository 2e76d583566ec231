//! Numerical toolkit for families of fixed-order Dirichlet characters.
//!
//! The crate is organised bottom-up:
//!
//! * [`arith`]: factorization, Möbius and divisor functions, unit groups.
//! * [`characters`]: Dirichlet characters, Gauss sums, the families `O_j(Q)`.
//! * [`lfunc`]: `L(s, χ)` by a Hurwitz-zeta oracle and a smoothed approximate
//!   functional equation, derivatives, Dirichlet polynomials and mollifiers.
//! * [`quad`]: composite Gauss–Legendre quadrature.
//! * [`moments`]: fixed-t, integrated and discrete family moments; exponent fits.
//! * [`sieve`]: large-sieve bound formulas, brute-force left-hand sides,
//!   Gallagher's inequality and mean-value comparisons.
//! * [`zeros`]: argument-principle zero counts, critical-line zeros, the
//!   mollified zero detector and zero-density bound formulas.

pub mod arith;
pub mod characters;
pub mod error;
pub mod lfunc;
pub mod moments;
pub mod quad;
pub mod sieve;
pub mod zeros;

pub use error::{Error, Result};
pub use num_complex::Complex64;
