use rayon::prelude::*;

use super::{CliffordField, FieldError, Grid, WeightSpec};
use crate::algebra::{generator_action, mul_into, Multivector, Side};
use crate::parallel::ordered_sum;

/// Second-order first derivative of component `a` along `axis` at node `k`:
/// central in the interior, one-sided three-point at the two ends.
#[inline]
pub(crate) fn diff1(grid: &Grid, values: &[f64], k: usize, axis: usize, a: usize) -> f64 {
    let w = grid.width();
    let s = grid.stride(axis) * w;
    let h = grid.spacings()[axis];
    let i = grid.axis_index(k, axis);
    let last = grid.extents()[axis] - 1;
    let at = k * w + a;
    if i == 0 {
        (-3.0 * values[at] + 4.0 * values[at + s] - values[at + 2 * s]) / (2.0 * h)
    } else if i == last {
        (3.0 * values[at] - 4.0 * values[at - s] + values[at - 2 * s]) / (2.0 * h)
    } else {
        (values[at + s] - values[at - s]) / (2.0 * h)
    }
}

/// Second derivative of component `a` along `axis` at node `k`: three-point
/// central in the interior; at the ends the four-point one-sided stencil
/// (second order) when the axis has at least four nodes, else three-point.
#[inline]
fn diff2(grid: &Grid, values: &[f64], k: usize, axis: usize, a: usize) -> f64 {
    let w = grid.width();
    let s = grid.stride(axis) * w;
    let h2 = grid.spacings()[axis].powi(2);
    let i = grid.axis_index(k, axis);
    let count = grid.extents()[axis];
    let at = k * w + a;
    let one_sided = |dir: isize| {
        let f = |m: isize| values[(at as isize + dir * m * s as isize) as usize];
        if count >= 4 {
            (2.0 * f(0) - 5.0 * f(1) + 4.0 * f(2) - f(3)) / h2
        } else {
            (f(0) - 2.0 * f(1) + f(2)) / h2
        }
    };
    if i == 0 {
        one_sided(1)
    } else if i == count - 1 {
        one_sided(-1)
    } else {
        (values[at + s] - 2.0 * values[at] + values[at - s]) / h2
    }
}

/// `∂f/∂x_axis` by finite differences.
pub fn partial(f: &CliffordField, axis: usize) -> Result<CliffordField, FieldError> {
    f.check_finite()?;
    let grid = f.grid();
    if axis > grid.n() {
        return Err(FieldError::InvalidGrid(format!("no axis {axis}")));
    }
    let w = grid.width();
    let mut out = vec![0.0; f.values().len()];
    out.par_chunks_mut(w).enumerate().for_each(|(k, o)| {
        for (a, v) in o.iter_mut().enumerate() {
            *v = diff1(grid, f.values(), k, axis, a);
        }
    });
    CliffordField::from_values(grid, out)
}

/// `Σ_i e_i ∂_i f` (left) or `Σ_i f e_i ∂_i` (right); `ē_i` replaces `e_i`
/// when `conjugated`, giving `D`.
pub fn dirac(f: &CliffordField, side: Side, conjugated: bool) -> Result<CliffordField, FieldError> {
    f.check_finite()?;
    let grid = f.grid();
    let w = grid.width();
    let mut out = vec![0.0; f.values().len()];
    out.par_chunks_mut(w).enumerate().for_each(|(k, o)| {
        for axis in 0..grid.axes() {
            for a in 0..w {
                let d = diff1(grid, f.values(), k, axis, a);
                let (t, neg) = generator_action(axis, a as u32, side, conjugated);
                if neg {
                    o[t as usize] -= d;
                } else {
                    o[t as usize] += d;
                }
            }
        }
    });
    CliffordField::from_values(grid, out)
}

/// Componentwise `Σ_i ∂²f/∂x_i²`.
pub fn laplacian(f: &CliffordField) -> Result<CliffordField, FieldError> {
    f.check_finite()?;
    let grid = f.grid();
    let w = grid.width();
    let mut out = vec![0.0; f.values().len()];
    out.par_chunks_mut(w).enumerate().for_each(|(k, o)| {
        for (a, v) in o.iter_mut().enumerate() {
            *v = (0..grid.axes()).map(|axis| diff2(grid, f.values(), k, axis, a)).sum();
        }
    });
    CliffordField::from_values(grid, out)
}

/// Trapezoid weight times `e^{-φ}` at every node.
pub fn node_weights(grid: &Grid, w: &WeightSpec) -> Result<Vec<f64>, FieldError> {
    w.validate(grid)?;
    let mut out = vec![0.0; grid.len()];
    out.par_iter_mut().enumerate().for_each_init(
        || vec![0.0; grid.axes()],
        |x, (k, o)| {
            grid.coords_into(k, x);
            *o = grid.quadrature_weight(k) * (-w.value(x)).exp();
        },
    );
    Ok(out)
}

/// Trapezoid rule for a scalar integrand `g(node, x)`.
pub fn integrate<F>(grid: &Grid, g: F) -> f64
where
    F: Fn(usize, &[f64]) -> f64 + Sync,
{
    ordered_sum(grid.len(), 1, |range, acc| {
        let mut x = vec![0.0; grid.axes()];
        for k in range {
            grid.coords_into(k, &mut x);
            acc[0] += grid.quadrature_weight(k) * g(k, &x);
        }
    })[0]
}

/// `(f, g)_φ = ∫ f̄ g e^{-φ} dx` by the trapezoid rule.
pub fn weighted_inner(f: &CliffordField, g: &CliffordField, w: &WeightSpec) -> Result<Multivector<f64>, FieldError> {
    f.check_same_grid(g)?;
    let grid = f.grid();
    let weights = node_weights(grid, w)?;
    let n = grid.n();
    let width = grid.width();
    let bar_sign: Vec<f64> = (0..width)
        .map(|a| {
            let r = (a as u32).count_ones();
            if (r * (r + 1) / 2) % 2 == 1 {
                -1.0
            } else {
                1.0
            }
        })
        .collect();
    let total = ordered_sum(grid.len(), width, |range, acc| {
        let mut fb = vec![0.0; width];
        for k in range {
            let wk = weights[k];
            for a in 0..width {
                fb[a] = bar_sign[a] * f.at(k)[a] * wk;
            }
            mul_into(n, &fb, g.at(k), acc);
        }
    });
    Ok(Multivector::from_coeffs(n, total).expect("width matches n"))
}

/// `‖f‖²_φ = ∫ |f|_0² e^{-φ} dx`.
pub fn weighted_norm_sq(f: &CliffordField, w: &WeightSpec) -> Result<f64, FieldError> {
    let weights = node_weights(f.grid(), w)?;
    Ok(weighted_norm_sq_with(f, &weights))
}

/// [`weighted_norm_sq`] with precomputed [`node_weights`].
pub fn weighted_norm_sq_with(f: &CliffordField, weights: &[f64]) -> f64 {
    let grid = f.grid();
    let scale = grid.width() as f64;
    scale
        * ordered_sum(grid.len(), 1, |range, acc| {
            for k in range {
                acc[0] += weights[k] * f.at(k).iter().map(|v| v * v).sum::<f64>();
            }
        })[0]
}

/// `D̄*_φ α = (Dφ) α - Dα`, the adjoint of `D̄` for `(·,·)_φ`, with `Dφ`
/// exact and `Dα` by finite differences.
pub fn dual_operator_analytic(alpha: &CliffordField, w: &WeightSpec) -> Result<CliffordField, FieldError> {
    dual_with_weight_on(alpha, w, Side::Left)
}

/// `α (Dφ) - Dα`: the weight factor multiplied on the right instead. This
/// differs from the adjoint whenever `α` does not commute with `Dφ`, which
/// needs `n ≥ 2`.
pub fn dual_operator_weight_right(alpha: &CliffordField, w: &WeightSpec) -> Result<CliffordField, FieldError> {
    dual_with_weight_on(alpha, w, Side::Right)
}

fn dual_with_weight_on(alpha: &CliffordField, w: &WeightSpec, side: Side) -> Result<CliffordField, FieldError> {
    let grid = alpha.grid();
    w.validate(grid)?;
    let mut out = dirac(alpha, Side::Left, true)?.scaled(-1.0).into_values();
    let n = grid.n();
    let width = grid.width();
    out.par_chunks_mut(width).enumerate().for_each_init(
        || vec![0.0; grid.axes()],
        |x, (k, o)| {
            grid.coords_into(k, x);
            let dphi = w.conjugate_gradient_vector(x);
            match side {
                Side::Left => mul_into(n, dphi.coeffs(), alpha.at(k), o),
                Side::Right => mul_into(n, alpha.at(k), dphi.coeffs(), o),
            }
        },
    );
    CliffordField::from_values(grid, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn dirac_exact_on_affine() {
        let g = Grid::new(1, vec![5, 4], vec![-1.0, 0.0], vec![1.0, 2.0]).unwrap();
        let f = CliffordField::from_fn(&g, |x, o| {
            o[0] = x[0];
            o[1] = x[1];
        });
        let d = dirac(&f, Side::Left, false).unwrap();
        assert!(d.max_abs() < 1e-12);
        let f = CliffordField::from_scalar_fn(&g, 0, |x| x[1]);
        let d = dirac(&f, Side::Left, false).unwrap();
        for k in 0..g.len() {
            assert!(close(d.at(k), &[0.0, 1.0], 1e-12));
        }
    }

    #[test]
    fn laplacian_exact_on_quadratics() {
        let g = Grid::new(1, vec![4, 5], vec![-1.0, -1.0], vec![1.0, 0.5]).unwrap();
        let f = CliffordField::from_scalar_fn(&g, 0, |x| x[0] * x[0] + x[1] * x[1]);
        let l = laplacian(&f).unwrap();
        for k in 0..g.len() {
            assert!(close(l.at(k), &[4.0, 0.0], 1e-10));
        }
        let g3 = Grid::cube(1, 3, 0.0, 1.0).unwrap();
        let f = CliffordField::from_scalar_fn(&g3, 0, |x| x[0] * x[0]);
        let l = laplacian(&f).unwrap();
        for k in 0..g3.len() {
            assert!(close(l.at(k), &[2.0, 0.0], 1e-10));
        }
    }

    #[test]
    fn weighted_inner_constants() {
        let g = Grid::cube(2, 5, 0.0, 1.0).unwrap();
        let one = CliffordField::from_scalar_fn(&g, 0, |_| 1.0);
        let ip = weighted_inner(&one, &one, &WeightSpec::Zero).unwrap();
        assert!(close(ip.coeffs(), &[1.0, 0.0, 0.0, 0.0], 1e-12));
        assert!((weighted_norm_sq(&one, &WeightSpec::Zero).unwrap() - 4.0).abs() < 1e-12);
        let g1 = Grid::cube(1, 5, 0.0, 1.0).unwrap();
        let e1 = CliffordField::from_scalar_fn(&g1, 1, |_| 1.0);
        let ip = weighted_inner(&e1, &e1, &WeightSpec::Zero).unwrap();
        assert!(close(ip.coeffs(), &[1.0, 0.0], 1e-12));
    }

    #[test]
    fn dual_examples() {
        let g = Grid::cube(1, 5, -1.0, 1.0).unwrap();
        let one = CliffordField::from_scalar_fn(&g, 0, |_| 1.0);
        let d = dual_operator_analytic(&one, &WeightSpec::Quadratic0).unwrap();
        for k in 0..g.len() {
            let x = g.coords(k);
            assert!(close(d.at(k), &[2.0 * x[0], 0.0], 1e-12));
        }
        let w = WeightSpec::AxialPoly {
            axis: 1,
            coeffs: vec![0.0, 0.0, 1.0],
        };
        let g2 = Grid::cube(2, 5, -1.0, 1.0).unwrap();
        let e1 = CliffordField::from_scalar_fn(&g2, 1, |_| 1.0);
        for d in [
            dual_operator_analytic(&e1, &w).unwrap(),
            dual_operator_weight_right(&e1, &w).unwrap(),
        ] {
            for k in 0..g2.len() {
                let x = g2.coords(k);
                assert!(close(d.at(k), &[2.0 * x[1], 0.0, 0.0, 0.0], 1e-12));
            }
        }
    }

    #[test]
    fn orderings_differ_off_commuting_cases() {
        let w = WeightSpec::AxialPoly {
            axis: 1,
            coeffs: vec![0.0, 0.0, 1.0],
        };
        let g = Grid::cube(2, 5, -1.0, 1.0).unwrap();
        let e2 = CliffordField::from_scalar_fn(&g, 2, |_| 1.0);
        let a = dual_operator_analytic(&e2, &w).unwrap();
        let b = dual_operator_weight_right(&e2, &w).unwrap();
        assert!(a.sub(&b).unwrap().max_abs() > 1.0);
    }
}
