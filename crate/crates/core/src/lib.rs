//! Exact arithmetic for Hecke-type indefinite theta series and universal
//! triple Massey systems on elliptic curves.
//!
//! Everything here is computed over exact domains: arbitrary-precision
//! rationals, cyclotomic field elements, truncated q-series with rational
//! exponents, and rational lattices. All identity checks are exact equalities
//! of truncated series; no floating point enters any verification path.
//!
//! Module map:
//!
//! - [`numeric`]: rationals and cyclotomic numbers, the coefficient domain.
//! - [`qseries`]: truncated formal series in `q` with rational exponents.
//! - [`lattice`]: rank-2/3 lattices in `Q^n`, normal forms, congruences.
//! - [`geometry`]: combinatorics attached to a degree triple `(d1, d2, d)`:
//!   the quadratic form, the coordinate change `phi`, the lattices
//!   `Lambda`, `Gamma`, the subgroup `Delta`, and the index progressions.
//! - [`indeftheta`]: doubly periodic kernels, the sign-reversal condition,
//!   and indefinite theta series.
//! - [`massey`]: universal Massey system solvers and the series identity
//!   verifier for Massey product coefficients.
//! - [`inversion`]: the reverse construction from an admissible `(Q, f)`
//!   back to a Massey system reproducing its theta series.

pub mod error;
pub mod geometry;
pub mod indeftheta;
pub mod inversion;
pub mod lattice;
pub mod linalg;
pub mod massey;
pub mod numeric;
pub mod qseries;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
