//! Real Clifford algebra over `R^{n+1}` with `e_0 = 1`, `e_i^2 = -1` and
//! `e_i e_j = -e_j e_i` for `1 <= i != j <= n`.
//!
//! Multivectors are dense `2^n` coefficient arrays indexed by blade mask. The
//! coefficient type selects float or exact-rational arithmetic.

mod blade;
mod multivector;
mod scalar;

pub use blade::{
    blade_product, generator_action, parse_blade, product_sign, Blade, Side, Sign, SignTable,
};
pub use multivector::{mul_into, Involution, Multivector};
pub use scalar::{rational, Scalar, ScalarKind};

use thiserror::Error;

/// Largest supported number of generators (4096 coefficients).
pub const MAX_N: usize = 12;

/// Largest `n` for which a full product sign table is cached.
pub const TABLE_MAX_N: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("dimension mismatch: n = {left} vs n = {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("n = {n} is not supported (maximum {max})")]
    UnsupportedDimension { n: usize, max: usize },
    #[error("blade mask {mask:#b} has bits outside 1..={n}")]
    MaskOutOfRange { mask: u32, n: usize },
    #[error("generator index {index} out of range for n = {n}")]
    GeneratorOutOfRange { index: usize, n: usize },
    #[error("blade indices must be strictly increasing")]
    UnsortedIndices,
    #[error("expected {expected} coefficients, got {got}")]
    CoefficientCount { expected: usize, got: usize },
    #[error("cannot parse blade {0:?}")]
    BladeSyntax(String),
}
