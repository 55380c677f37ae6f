//! Discrete minimal-norm solutions of `D̄u = f` in weighted `L²`, the
//! bounds they satisfy, and weak-solution checks.

mod cg;
mod kernel;
mod operator;

pub use kernel::{annulus_dirac_max, cauchy_kernel, sphere_area, weak_defect};
pub use operator::DiscreteDiracOperator;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{integrate, weighted_inner, weighted_norm_sq_with, CliffordField, FieldError, TestFunction, WeightSpec};

/// Default relative residual target.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("weight {0} violates the estimate's hypotheses on this grid")]
    InadmissibleWeight(WeightSpec),
    #[error("∫|f|²/Δφ e^(-φ) is undefined: Δφ = {laplacian} ≤ 0 at node {node} where f ≠ 0")]
    RhsFunctionalUndefined { node: usize, laplacian: f64 },
    #[error("slab bound needs the weight x0², got {0}")]
    SlabWeight(WeightSpec),
    #[error("origin lies outside the grid box")]
    OriginOutside,
    #[error("exclusion radius must be positive, got {0}")]
    InvalidRadius(f64),
}

/// Default iteration cap, `10 · sqrt(unknowns)`.
pub fn default_max_iter(op: &DiscreteDiracOperator) -> usize {
    (10.0 * (op.unknowns() as f64).sqrt()).ceil() as usize
}

/// Plain `L²` bound on a slab `a ≤ x_0 ≤ b` for `φ = x_0²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlabBound {
    pub a: f64,
    pub b: f64,
    /// `c(a, b) = e^{max(a², b²)} / 2`
    pub c: f64,
    /// `∫|u|_0² dx`
    pub plain_norm_sq: f64,
    /// `∫|f|_0² dx`
    pub plain_rhs_norm_sq: f64,
    /// `plain_norm_sq / (2^{2n} c plain_rhs_norm_sq)`, zero when `f = 0`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub n: usize,
    pub extents: Vec<usize>,
    pub lows: Vec<f64>,
    pub highs: Vec<f64>,
    pub weight: WeightSpec,
    pub tol: f64,
    pub max_iter: usize,
    pub iterations: usize,
    pub converged: bool,
    /// `‖Lu - f‖_W / ‖f‖_W` over interior nodes.
    pub relative_residual: f64,
    /// `‖u‖²_φ`
    pub norm_sq: f64,
    /// `∫|f|_0²/Δφ e^{-φ} dx`, absent when `Δφ ≤ 0` somewhere on the
    /// support of `f`.
    pub rhs_functional: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs_functional_error: Option<String>,
    /// `‖u‖²_φ / (2^{2n} rhs_functional)`
    pub bound_ratio: Option<f64>,
    /// `‖u‖²_φ / rhs_functional`
    pub unscaled_bound_ratio: Option<f64>,
    /// `∫|u|_0² dx`
    pub plain_norm_sq: f64,
    /// `∫|f|_0² dx`
    pub plain_rhs_norm_sq: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slab: Option<SlabBound>,
}

/// `∫|f|_0²/Δφ e^{-φ} dx`.
pub fn rhs_functional(f: &CliffordField, w: &WeightSpec) -> Result<f64, SolverError> {
    let grid = f.grid();
    w.validate(grid)?;
    let scale = grid.width() as f64;
    for k in 0..grid.len() {
        if f.at(k).iter().any(|v| *v != 0.0) {
            let lap = w.laplacian(&grid.coords(k));
            if lap.is_nan() || lap <= 0.0 {
                return Err(SolverError::RhsFunctionalUndefined { node: k, laplacian: lap });
            }
        }
    }
    Ok(integrate(grid, |k, x| {
        let s: f64 = f.at(k).iter().map(|v| v * v).sum();
        if s == 0.0 {
            0.0
        } else {
            scale * s / w.laplacian(x) * (-w.value(x)).exp()
        }
    }))
}

fn plain_l2(f: &CliffordField) -> f64 {
    let scale = f.width() as f64;
    integrate(f.grid(), |k, _| scale * f.at(k).iter().map(|v| v * v).sum::<f64>())
}

/// Minimum-`‖·‖_φ` solution of `Lu = f` at interior nodes, found as
/// `u = L*_φ v` with conjugate gradients on `L L*_φ v = f`. Values of `f` on
/// boundary nodes are ignored. A solve that misses `tol` within `max_iter`
/// iterations returns its last iterate with `converged = false`.
pub fn solve_min_norm(
    f: &CliffordField,
    w: &WeightSpec,
    tol: f64,
    max_iter: Option<usize>,
) -> Result<(CliffordField, SolveReport), SolverError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(SolverError::InvalidTolerance(tol));
    }
    f.check_finite()?;
    let grid = f.grid();
    if !w.admissibility(grid)?.admissible() {
        return Err(SolverError::InadmissibleWeight(w.clone()));
    }
    let op = DiscreteDiracOperator::new(grid, w)?;
    let max_iter = max_iter.unwrap_or_else(|| default_max_iter(&op));
    let rhs = op.restrict_interior(f.values());
    let out = cg::min_norm(&op, &rhs, tol, max_iter);
    let u = CliffordField::from_values(grid, out.u)?;

    let n = grid.n();
    let norm_sq = weighted_norm_sq_with(&u, op.node_weights());
    let (rhs_functional, rhs_functional_error) = match rhs_functional(f, w) {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let ratio = |scale: f64| {
        rhs_functional.map(|r| if norm_sq == 0.0 { 0.0 } else { norm_sq / (scale * r) })
    };
    let report = SolveReport {
        n,
        extents: grid.extents().to_vec(),
        lows: grid.lows().to_vec(),
        highs: grid.highs().to_vec(),
        weight: w.clone(),
        tol,
        max_iter,
        iterations: out.iterations,
        converged: out.converged,
        relative_residual: out.relative_residual,
        norm_sq,
        rhs_functional,
        rhs_functional_error,
        bound_ratio: ratio(4f64.powi(n as i32)),
        unscaled_bound_ratio: ratio(1.0),
        plain_norm_sq: plain_l2(&u),
        plain_rhs_norm_sq: plain_l2(f),
        slab: None,
    };
    Ok((u, report))
}

/// Plain `L²` ratio `∫|u|_0² / (2^{2n} c(a, b) ∫|f|_0²)` on the slab spanned
/// by axis 0, with `c(a, b) = e^{max(a², b²)} / 2`. Only meaningful for a
/// solve with `φ = x_0²`.
pub fn slab_bound_report(u: &CliffordField, f: &CliffordField, w: &WeightSpec) -> Result<SlabBound, SolverError> {
    if *w != WeightSpec::Quadratic0 {
        return Err(SolverError::SlabWeight(w.clone()));
    }
    u.check_same_grid(f)?;
    let grid = u.grid();
    let (a, b) = (grid.lows()[0], grid.highs()[0]);
    let c = (a * a).max(b * b).exp() / 2.0;
    let plain_norm_sq = plain_l2(u);
    let plain_rhs_norm_sq = plain_l2(f);
    let ratio = if plain_norm_sq == 0.0 {
        0.0
    } else {
        plain_norm_sq / (4f64.powi(grid.n() as i32) * c * plain_rhs_norm_sq)
    };
    Ok(SlabBound {
        a,
        b,
        c,
        plain_norm_sq,
        plain_rhs_norm_sq,
        ratio,
    })
}

/// `z = r - L*_φ (L L*_φ)⁻¹ L r`, the `W`-orthogonal projection of `r` onto
/// the null space of `L`. `None` when the inner solve does not converge.
pub fn null_space_projection(op: &DiscreteDiracOperator, r: &[f64], tol: f64, max_iter: usize) -> Option<Vec<f64>> {
    let lr = op.apply(r);
    let out = cg::min_norm(op, &lr, tol, max_iter);
    if !out.converged {
        return None;
    }
    Some(r.iter().zip(&out.u).map(|(a, b)| a - b).collect())
}

/// Orthogonality of a solution to sampled null-space directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalityCheck {
    pub samples: usize,
    /// `max |⟨u, z⟩_W| / (‖u‖_W ‖z‖_W)` over the samples.
    pub max_relative_inner: f64,
    /// `max ‖Lz‖_W / ‖z‖_W`, how well each sample lies in the null space.
    pub max_relative_image: f64,
}

/// Projects `samples` seeded random fields onto the null space of `L` and
/// measures their `W`-inner products with `u`.
pub fn check_minimality(
    u: &CliffordField,
    w: &WeightSpec,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<Option<MinimalityCheck>, SolverError> {
    let op = DiscreteDiracOperator::new(u.grid(), w)?;
    let max_iter = default_max_iter(&op);
    let un = op.dot(u.values(), u.values()).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_relative_inner = 0.0f64;
    let mut max_relative_image = 0.0f64;
    for _ in 0..samples {
        let r: Vec<f64> = (0..u.values().len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let Some(z) = null_space_projection(&op, &r, tol, max_iter) else {
            return Ok(None);
        };
        let zn = op.dot(&z, &z).sqrt();
        if zn == 0.0 {
            continue;
        }
        let lz = op.apply(&z);
        max_relative_image = max_relative_image.max(op.dot_interior(&lz, &lz).sqrt() / zn);
        if un > 0.0 {
            max_relative_inner = max_relative_inner.max(op.dot(u.values(), &z).abs() / (un * zn));
        }
    }
    Ok(Some(MinimalityCheck {
        samples,
        max_relative_inner,
        max_relative_image,
    }))
}

/// One test function of the necessity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessityRow {
    /// `|(f, α)_φ|_0²`
    pub pairing_sq: f64,
    /// `‖D̄*_φ α‖²_φ` with the exact adjoint.
    pub dual_norm_sq: f64,
    /// `‖L*_φ α‖²_φ`
    pub discrete_dual_norm_sq: f64,
    /// `pairing_sq / (c' dual_norm_sq)`
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessityReport {
    /// `c' = ‖u‖²_φ`
    pub c_prime: f64,
    pub rows: Vec<NecessityRow>,
}

impl NecessityReport {
    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio).fold(0.0, f64::max)
    }

    /// `|(f, α)_φ|_0² ≤ c' ‖D̄*_φ α‖² (1 + slack)` for every row.
    pub fn holds(&self, slack: f64) -> bool {
        self.rows.iter().all(|r| r.ratio <= 1.0 + slack)
    }
}

/// Checks `|(f, α)_φ|_0² ≤ ‖u‖²_φ ‖D̄*_φ α‖²` for each test function.
pub fn necessity_check(
    u: &CliffordField,
    f: &CliffordField,
    w: &WeightSpec,
    alphas: &[TestFunction],
) -> Result<NecessityReport, SolverError> {
    u.check_same_grid(f)?;
    let grid = u.grid();
    let op = DiscreteDiracOperator::new(grid, w)?;
    let weights = op.node_weights();
    let c_prime = weighted_norm_sq_with(u, weights);
    let f_int = CliffordField::from_values(grid, op.restrict_interior(f.values()))?;
    let mut rows = Vec::with_capacity(alphas.len());
    for alpha in alphas {
        alpha.check_support(grid)?;
        let a = alpha.sample(grid);
        let pairing_sq = weighted_inner(&f_int, &a, w)?.norm0_sq();
        let dual_norm_sq = weighted_norm_sq_with(&alpha.sample_dual(grid, w), weights);
        let discrete = CliffordField::from_values(grid, op.adjoint(&op.restrict_interior(a.values())))?;
        let discrete_dual_norm_sq = weighted_norm_sq_with(&discrete, weights);
        let bound = c_prime * dual_norm_sq;
        rows.push(NecessityRow {
            pairing_sq,
            dual_norm_sq,
            discrete_dual_norm_sq,
            ratio: if pairing_sq == 0.0 { 0.0 } else { pairing_sq / bound },
        });
    }
    Ok(NecessityReport { c_prime, rows })
}
