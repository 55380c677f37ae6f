use std::f64::consts::PI;

use super::SolverError;
use crate::algebra::{mul_into, Multivector, Side};
use crate::field::{dirac, CliffordField, Grid, TestFunction};
use crate::parallel::ordered_sum;

/// `Γ(m/2)` for a positive integer `m`, from `Γ(1/2) = √π`, `Γ(1) = 1`
/// and `Γ(s + 1) = s Γ(s)`.
fn gamma_half(m: usize) -> f64 {
    let (mut s, mut g) = if m % 2 == 0 { (1.0, 1.0) } else { (0.5, PI.sqrt()) };
    while 2.0 * s < m as f64 {
        g *= s;
        s += 1.0;
    }
    g
}

/// Surface area of the unit sphere in `R^m`, `2π^{m/2} / Γ(m/2)`.
pub fn sphere_area(m: usize) -> f64 {
    2.0 * PI.powf(m as f64 / 2.0) / gamma_half(m)
}

/// `G(x) = x̄ / (ω_{n+1} |x|^{n+1})` at every node, zero within
/// `exclusion_radius` of the origin.
pub fn cauchy_kernel(grid: &Grid, exclusion_radius: f64) -> Result<CliffordField, SolverError> {
    if exclusion_radius.is_nan() || exclusion_radius <= 0.0 {
        return Err(SolverError::InvalidRadius(exclusion_radius));
    }
    let m = grid.axes();
    if !grid.contains_point(&vec![0.0; m]) {
        return Err(SolverError::OriginOutside);
    }
    let omega = sphere_area(m);
    Ok(CliffordField::from_fn(grid, |x, out| {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r <= exclusion_radius {
            return;
        }
        let c = 1.0 / (omega * r.powi(m as i32));
        out[0] = c * x[0];
        for i in 1..m {
            out[1 << (i - 1)] = -c * x[i];
        }
    }))
}

/// `∫ α f dx + ∫ (αD̄) u dx` by the trapezoid rule, with `αD̄ = Σ_i ∂_i α e_i`
/// exact. Zero up to quadrature error when `u` is a weak solution of
/// `D̄u = f`.
pub fn weak_defect(u: &CliffordField, f: &CliffordField, alpha: &TestFunction) -> Result<Multivector<f64>, SolverError> {
    u.check_same_grid(f)?;
    let grid = u.grid();
    alpha.check_support(grid)?;
    let n = grid.n();
    let width = grid.width();
    let total = ordered_sum(grid.len(), width, |range, acc| {
        let mut x = vec![0.0; grid.axes()];
        let mut grad = vec![0.0; grid.axes()];
        let mut a = vec![0.0; width];
        let mut ad = vec![0.0; width];
        let mut t = vec![0.0; width];
        for k in range {
            grid.coords_into(k, &mut x);
            let b = alpha.bump.value(&x);
            alpha.dirac_into(&x, Side::Right, false, &mut grad, &mut ad);
            if b == 0.0 && ad.iter().all(|v| *v == 0.0) {
                continue;
            }
            for (o, c) in a.iter_mut().zip(alpha.coeff.coeffs()) {
                *o = b * c;
            }
            t.fill(0.0);
            mul_into(n, &a, f.at(k), &mut t);
            mul_into(n, &ad, u.at(k), &mut t);
            let q = grid.quadrature_weight(k);
            for (s, v) in acc.iter_mut().zip(&t) {
                *s += q * v;
            }
        }
    });
    Ok(Multivector::from_coeffs(n, total).expect("width matches n"))
}

/// `max |D̄g|_0` over interior nodes with `r_in ≤ |x| ≤ r_out`, `D̄` by
/// finite differences.
pub fn annulus_dirac_max(g: &CliffordField, r_in: f64, r_out: f64) -> Result<f64, SolverError> {
    let grid = g.grid();
    let d = dirac(g, Side::Left, false)?;
    let scale = grid.width() as f64;
    let mut best = 0.0f64;
    for k in 0..grid.len() {
        if grid.is_boundary(k) {
            continue;
        }
        let r = grid.coords(k).iter().map(|v| v * v).sum::<f64>().sqrt();
        if r >= r_in && r <= r_out {
            best = best.max((scale * d.at(k).iter().map(|v| v * v).sum::<f64>()).sqrt());
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_values() {
        let g = Grid::cube(1, 3, -1.0, 1.0).unwrap();
        let k = cauchy_kernel(&g, 0.1).unwrap();
        let at = |x: &[usize]| k.at(g.node(x)).to_vec();
        let c = 1.0 / (2.0 * PI);
        let e0 = at(&[2, 1]);
        assert!((e0[0] - c).abs() < 1e-15 && e0[1] == 0.0);
        let e1 = at(&[1, 2]);
        assert!(e1[0] == 0.0 && (e1[1] + c).abs() < 1e-15);
        assert_eq!(at(&[1, 1]), vec![0.0, 0.0]);
    }

    #[test]
    fn kernel_errors() {
        let g = Grid::cube(1, 5, 0.5, 1.0).unwrap();
        assert!(matches!(cauchy_kernel(&g, 0.1), Err(SolverError::OriginOutside)));
        let g = Grid::cube(1, 5, -1.0, 1.0).unwrap();
        assert!(matches!(cauchy_kernel(&g, 0.0), Err(SolverError::InvalidRadius(_))));
    }

    #[test]
    fn zero_fields_have_zero_defect() {
        let g = Grid::cube(2, 9, -1.0, 1.0).unwrap();
        let z = CliffordField::zeros(&g);
        let alpha = TestFunction::blade(&g, 0.1, crate::Blade::scalar(2).unwrap()).unwrap();
        assert!(weak_defect(&z, &z, &alpha).unwrap().is_zero());
    }
}
