//! Numerical check of the norm identity for the weighted adjoint,
//! `‖D̄*_φ α‖² = ‖D̄α‖² + ∫|α|_0² Δφ e^{-φ} + I3`, on a bump test function.

use serde::{Deserialize, Serialize};

use super::combinatorics::{i4_closed, HessianStub, SignRules};
use crate::algebra::{generator_action, mul_into, Side};
use crate::field::{
    dual_operator_analytic, dual_operator_weight_right, node_weights, weighted_norm_sq_with, FieldError, Grid,
    TestFunction, WeightSpec,
};
use crate::parallel::ordered_sum;

/// Every quantity of the identity at one grid level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eq22Report {
    pub n: usize,
    pub extents: Vec<usize>,
    pub h: f64,
    pub weight: WeightSpec,
    pub coefficient: Vec<f64>,
    /// `‖(Dφ)α - Dα‖²_φ` with `Dα` by finite differences.
    pub adjoint_norm_sq: f64,
    /// `‖α(Dφ) - Dα‖²_φ`, the weight factor on the right.
    pub weight_right_norm_sq: f64,
    /// `‖D̄α‖²_φ` from the exact derivative.
    pub dbar_norm_sq: f64,
    /// `∫|α|_0² Δφ e^{-φ}`
    pub laplacian_term: f64,
    /// `I3` from the closed forms with enumeration-checked signs.
    pub i3: f64,
    /// `I3` with the printed `I6` signs.
    pub i3_printed_signs: f64,
    /// `τ_0(α, Σ_{j≥1} (e_j Dφ - Dφ e_j) ∂_j α)_φ`, the term that closes the
    /// identity for the adjoint.
    pub commutator_term: f64,
    /// `adjoint_norm_sq - (dbar_norm_sq + laplacian_term + i3)`
    pub defect: f64,
    pub relative_defect: f64,
    /// `weight_right_norm_sq - (dbar_norm_sq + laplacian_term + i3)`
    pub weight_right_defect: f64,
    /// `adjoint_norm_sq - (dbar_norm_sq + laplacian_term + commutator_term)`
    pub commutator_defect: f64,
    pub relative_commutator_defect: f64,
}

/// Evaluates every term of the identity for `alpha` on `grid`.
pub fn verify_eq22(grid: &Grid, w: &WeightSpec, alpha: &TestFunction) -> Result<Eq22Report, FieldError> {
    alpha.check_support(grid)?;
    let n = grid.n();
    let width = grid.width();
    let weights = node_weights(grid, w)?;
    let a = alpha.sample(grid);
    let adjoint = dual_operator_analytic(&a, w)?;
    let right = dual_operator_weight_right(&a, w)?;
    let dbar = alpha.sample_dirac(grid, Side::Left, false);
    let adjoint_norm_sq = weighted_norm_sq_with(&adjoint, &weights);
    let weight_right_norm_sq = weighted_norm_sq_with(&right, &weights);
    let dbar_norm_sq = weighted_norm_sq_with(&dbar, &weights);

    let scale = width as f64;
    // [laplacian term, I3, I3 printed, commutator term]
    let sums = ordered_sum(grid.len(), 4, |range, acc| {
        let mut x = vec![0.0; grid.axes()];
        let mut grad = vec![0.0; grid.axes()];
        let mut da = vec![0.0; width];
        let mut comm = vec![0.0; width];
        let mut t = vec![0.0; width];
        for k in range {
            let ak = a.at(k);
            if ak.iter().all(|v| *v == 0.0) {
                continue;
            }
            grid.coords_into(k, &mut x);
            let wk = weights[k];
            let norm_sq: f64 = ak.iter().map(|v| v * v).sum();
            acc[0] += wk * scale * norm_sq * w.laplacian(&x);

            let alpha_k = a.multivector(k);
            let hess = HessianStub::from_fn(n, |i, j| w.hessian_entry(&x, i, j)).expect("hessian is symmetric");
            acc[1] += wk * i4_closed(&alpha_k, &hess, SignRules::Corrected);
            acc[2] += wk * i4_closed(&alpha_k, &hess, SignRules::Printed);

            // Σ_j (e_j v - v e_j) ∂_j α, v = Dφ
            let v = w.conjugate_gradient_vector(&x);
            for o in t.iter_mut() {
                *o = 0.0;
            }
            for j in 1..=n {
                for o in comm.iter_mut() {
                    *o = 0.0;
                }
                for (m, c) in v.coeffs().iter().enumerate() {
                    if *c == 0.0 {
                        continue;
                    }
                    let (tl, nl) = generator_action(j, m as u32, Side::Left, false);
                    let (tr, nr) = generator_action(j, m as u32, Side::Right, false);
                    comm[tl as usize] += if nl { -c } else { *c };
                    comm[tr as usize] -= if nr { -c } else { *c };
                }
                alpha.partial_into(&x, j, &mut grad, &mut da);
                mul_into(n, &comm, &da, &mut t);
            }
            // τ_0(ᾱ t) = 2^n Σ_A α_A t_A
            acc[3] += wk * scale * ak.iter().zip(&t).map(|(p, q)| p * q).sum::<f64>();
        }
    });
    let (laplacian_term, i3, i3_printed_signs, commutator_term) = (sums[0], sums[1], sums[2], sums[3]);
    let defect = adjoint_norm_sq - (dbar_norm_sq + laplacian_term + i3);
    let commutator_defect = adjoint_norm_sq - (dbar_norm_sq + laplacian_term + commutator_term);
    Ok(Eq22Report {
        n,
        extents: grid.extents().to_vec(),
        h: grid.max_spacing(),
        weight: w.clone(),
        coefficient: alpha.coeff.coeffs().to_vec(),
        adjoint_norm_sq,
        weight_right_norm_sq,
        dbar_norm_sq,
        laplacian_term,
        i3,
        i3_printed_signs,
        commutator_term,
        defect,
        relative_defect: defect.abs() / adjoint_norm_sq,
        weight_right_defect: weight_right_norm_sq - (dbar_norm_sq + laplacian_term + i3),
        commutator_defect,
        relative_commutator_defect: commutator_defect.abs() / adjoint_norm_sq,
    })
}

/// Reports over a refinement ladder plus the observed orders between
/// consecutive levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eq22Ladder {
    pub levels: Vec<Eq22Report>,
    pub orders: Vec<f64>,
    pub commutator_orders: Vec<f64>,
}

impl Eq22Ladder {
    /// Order between the last two levels.
    pub fn final_order(&self) -> f64 {
        self.orders.last().copied().unwrap_or(f64::NAN)
    }
}

/// `log(e_k / e_{k+1}) / log(h_k / h_{k+1})` for consecutive levels.
pub fn observed_orders(errors: &[f64], spacings: &[f64]) -> Vec<f64> {
    errors
        .windows(2)
        .zip(spacings.windows(2))
        .map(|(e, h)| (e[0].abs() / e[1].abs()).ln() / (h[0] / h[1]).ln())
        .collect()
}

/// Runs [`verify_eq22`] on `levels` grids, each a refinement of the last.
pub fn eq22_ladder(base: &Grid, levels: usize, w: &WeightSpec, alpha: &TestFunction) -> Result<Eq22Ladder, FieldError> {
    let mut grid = base.clone();
    let mut out = Vec::with_capacity(levels);
    for level in 0..levels {
        if level > 0 {
            grid = grid.refined();
        }
        out.push(verify_eq22(&grid, w, alpha)?);
    }
    let hs: Vec<f64> = out.iter().map(|r| r.h).collect();
    let orders = observed_orders(&out.iter().map(|r| r.relative_defect).collect::<Vec<_>>(), &hs);
    let commutator_orders = observed_orders(&out.iter().map(|r| r.relative_commutator_defect).collect::<Vec<_>>(), &hs);
    Ok(Eq22Ladder {
        levels: out,
        orders,
        commutator_orders,
    })
}

/// The estimate `‖D̄*_φ α‖² ≥ ∫|α|_0² Δφ e^{-φ}` for one test function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    /// `‖(Dφ)α - Dα‖²_φ` with `Dα` by finite differences.
    pub adjoint_norm_sq: f64,
    pub laplacian_term: f64,
    /// `(adjoint_norm_sq - laplacian_term) / adjoint_norm_sq`
    pub relative_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub n: usize,
    pub extents: Vec<usize>,
    pub weight: WeightSpec,
    /// Whether the weight meets the estimate's hypotheses on the grid.
    pub admissible: bool,
    pub rows: Vec<EstimateRow>,
}

impl EstimateReport {
    pub fn min_relative_defect(&self) -> f64 {
        self.rows.iter().map(|r| r.relative_defect).fold(f64::INFINITY, f64::min)
    }

    /// Every relative defect is at least `-tol`.
    pub fn holds(&self, tol: f64) -> bool {
        self.rows.iter().all(|r| r.relative_defect >= -tol)
    }
}

/// Evaluates both sides of the estimate for each test function.
pub fn verify_estimate(grid: &Grid, w: &WeightSpec, alphas: &[TestFunction]) -> Result<EstimateReport, FieldError> {
    let admissible = w.admissibility(grid)?.admissible();
    let weights = node_weights(grid, w)?;
    let scale = grid.width() as f64;
    let mut rows = Vec::with_capacity(alphas.len());
    for alpha in alphas {
        alpha.check_support(grid)?;
        let a = alpha.sample(grid);
        let adjoint_norm_sq = weighted_norm_sq_with(&dual_operator_analytic(&a, w)?, &weights);
        let laplacian_term = ordered_sum(grid.len(), 1, |range, acc| {
            let mut x = vec![0.0; grid.axes()];
            for k in range {
                let s: f64 = a.at(k).iter().map(|v| v * v).sum();
                if s != 0.0 {
                    grid.coords_into(k, &mut x);
                    acc[0] += weights[k] * scale * s * w.laplacian(&x);
                }
            }
        })[0];
        rows.push(EstimateRow {
            adjoint_norm_sq,
            laplacian_term,
            relative_defect: (adjoint_norm_sq - laplacian_term) / adjoint_norm_sq,
        });
    }
    Ok(EstimateReport {
        n: grid.n(),
        extents: grid.extents().to_vec(),
        weight: w.clone(),
        admissible,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Blade;

    #[test]
    fn one_dimensional_i3_is_zero() {
        let g = Grid::cube(1, 33, -1.0, 1.0).unwrap();
        for mask in 0..2 {
            let tf = TestFunction::blade(&g, 0.1, Blade::new(1, mask).unwrap()).unwrap();
            let r = verify_eq22(&g, &WeightSpec::AnisoQuadratic, &tf).unwrap();
            assert_eq!(r.i3, 0.0);
            assert_eq!(r.commutator_term, 0.0);
        }
    }

    #[test]
    fn zero_weight_defect_shrinks() {
        let g = Grid::cube(1, 17, -1.0, 1.0).unwrap();
        let tf = TestFunction::blade(&g, 0.1, Blade::scalar(1).unwrap()).unwrap();
        let ladder = eq22_ladder(&g, 3, &WeightSpec::Zero, &tf).unwrap();
        assert!(ladder.levels[2].relative_defect < ladder.levels[0].relative_defect);
    }

    #[test]
    fn orders_formula() {
        let o = observed_orders(&[1.0, 0.25, 0.0625], &[0.1, 0.05, 0.025]);
        assert!(o.iter().all(|v| (v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn unsupported_test_function_rejected() {
        let g = Grid::cube(1, 9, 0.0, 1.0).unwrap();
        let big = Grid::cube(1, 9, -1.0, 2.0).unwrap();
        let tf = TestFunction::blade(&big, 0.1, Blade::scalar(1).unwrap()).unwrap();
        assert!(verify_eq22(&g, &WeightSpec::Zero, &tf).is_err());
    }

    #[test]
    fn estimate_holds_for_quadratic_weight() {
        let g = Grid::cube(1, 33, -1.0, 1.0).unwrap();
        let alphas = crate::field::test_function_battery(&g, 4, 1);
        let r = verify_estimate(&g, &WeightSpec::Quadratic0, &alphas).unwrap();
        assert!(r.admissible);
        assert!(r.holds(1e-6), "{r:?}");
    }
}
