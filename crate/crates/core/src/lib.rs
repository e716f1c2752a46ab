//! Coefficient-multiplier calculus on product domains in several complex
//! variables.
//!
//! The library represents analytic functionals as contour quadratures
//! against germs holomorphic on complements, converts between functionals,
//! multiplier sequences and their Laurent/Taylor symbol germs, applies
//! multipliers through explicit contour-integral formulas, and evaluates the
//! weighted-derivative seminorm system used for boundedness diagnostics.
//! Every operation is pure and deterministic; a brute-force coefficientwise
//! path doubles as the oracle for all integral formulas.

pub mod domains;
pub mod duality;
pub mod error;
pub mod literal;
pub mod multiplier;
pub mod quadrature;
pub mod sampling;
pub mod seminorms;
pub mod series;
pub mod tensor;

pub use error::{Error, Result};
pub use num_complex::Complex64;
