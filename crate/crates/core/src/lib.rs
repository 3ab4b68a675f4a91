//! Numerical laboratory for the two-dimensional value distribution of cubic
//! Hecke L-functions on k = Q(√-3).
//!
//! The crate provides, end to end:
//!
//! * arithmetic in the Eisenstein integers Z[ω] and enumeration of prime
//!   ideals, integral ideals, and the family of squarefree moduli
//!   c ≡ 1 (mod 9) ([`eisenstein`]);
//! * the cubic residue character χ_c attached to each modulus ([`cubic_char`]);
//! * truncated L-series, their logarithms and logarithmic derivatives, and
//!   the twisted coefficient series I_y ([`lfunc`]);
//! * the characteristic function φ of the limiting two-dimensional
//!   distribution of log L(s, χ_c), resp. (L'/L)(s, χ_c), as an Euler
//!   product over local atomic measures, with rigorous truncation bounds,
//!   decay-window verification, and decay-envelope fits ([`charfn`]);
//! * Fourier inversion of φ to a density grid, a deterministic sampler of
//!   the infinite convolution, and two-dimensional CDF comparison
//!   ([`density`]);
//! * sweeps of L-values over the actual family of characters, empirical
//!   characteristic functions, and smoothed family counts ([`empirics`]);
//! * the acceptance checks wiring all of the above together ([`checks`]).
//!
//! Throughout, "case 1" refers to the distribution of log L and "case 2" to
//! the distribution of L'/L; `y = (y₁, y₂)` is the frequency variable of the
//! two-dimensional characteristic function, identified with the complex
//! number y₁ + iy₂ where convenient.

pub mod charfn;
pub mod checks;
pub mod cubic_char;
pub mod density;
pub mod eisenstein;
pub mod empirics;
pub mod error;
pub mod lfunc;

pub use error::{Error, Result};
