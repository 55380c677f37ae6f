//! Grid-sampled algebra-valued fields and the operators acting on them.

mod bump;
mod clifford_field;
mod grid;
mod ops;
mod poly;
pub mod snapshot;
mod weight;

pub use bump::{make_bump, profile, profile_derivative, test_function_battery, Bump, TestFunction};
pub use clifford_field::CliffordField;
pub use grid::Grid;
pub use ops::{
    dirac, dual_operator_analytic, dual_operator_weight_right, integrate, laplacian, node_weights, partial,
    weighted_inner, weighted_norm_sq, weighted_norm_sq_with,
};
pub use poly::{Poly, PolyTestField};
pub use weight::{Admissibility, WeightSpec};

use thiserror::Error;

use crate::algebra::AlgebraError;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("expected {expected} values, got {got}")]
    ValueCount { expected: usize, got: usize },
    #[error("dimension mismatch: grid n = {field}, other n = {other}")]
    DimensionMismatch { field: usize, other: usize },
    #[error("non-finite value at node {node}")]
    NonFinite { node: usize },
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("invalid bump: {0}")]
    InvalidBump(String),
    #[error("bump margin {0} must lie strictly between 0 and 1/2")]
    DegenerateMargin(f64),
    #[error("test function support is not inside the grid box")]
    NotCompactlySupported,
    #[error("snapshot format: {0}")]
    Format(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
