//! Clifford analysis toolkit.
//!
//! * [`algebra`]: exact and floating-point Clifford algebra over `R^{n+1}`.
//! * [`field`]: grid-sampled algebra-valued fields, finite-difference Dirac
//!   operators, weights and weighted quadrature.
//! * [`verify`]: exact checks of the sign combinatorics behind the weighted
//!   estimate for the Dirac operator.
//! * [`solver`]: discrete minimal-norm solutions of `D̄u = f` and the bounds
//!   they satisfy.

pub mod algebra;
pub mod field;
pub mod parallel;
pub mod solver;
pub mod verify;

pub use algebra::{Blade, Involution, Multivector, Scalar, ScalarKind, Sign};
