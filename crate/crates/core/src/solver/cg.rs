use rayon::prelude::*;

use super::DiscreteDiracOperator;

/// Result of conjugate gradients on `L L*_φ v = f`.
#[derive(Debug, Clone)]
pub(crate) struct CgOutcome {
    /// `u = L*_φ v`
    pub u: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `‖Lu - f‖_W / ‖f‖_W` recomputed from `u`, interior nodes only.
    pub relative_residual: f64,
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.par_iter_mut().zip(x.par_iter()).for_each(|(y, x)| *y += a * x);
}

fn true_residual(op: &DiscreteDiracOperator, f: &[f64], u: &[f64]) -> Vec<f64> {
    let mut r = op.apply(u);
    r.par_iter_mut().zip(f.par_iter()).for_each(|(r, f)| *r = f - *r);
    r
}

/// Conjugate gradients in the interior `W` inner product, where `L L*_φ` is
/// self-adjoint and positive. `f` must vanish on boundary nodes. When the
/// recurrence residual reaches `tol` but the recomputed one does not, the
/// iteration restarts from the recomputed residual.
pub(crate) fn min_norm(op: &DiscreteDiracOperator, f: &[f64], tol: f64, max_iter: usize) -> CgOutcome {
    let f_norm = op.dot_interior(f, f).sqrt();
    let mut u = vec![0.0; f.len()];
    if f_norm == 0.0 {
        return CgOutcome {
            u,
            iterations: 0,
            converged: true,
            relative_residual: 0.0,
        };
    }
    let mut r = f.to_vec();
    let mut p = r.clone();
    let mut rr = op.dot_interior(&r, &r);
    let mut iterations = 0;
    loop {
        if rr.sqrt() <= tol * f_norm {
            r = true_residual(op, f, &u);
            rr = op.dot_interior(&r, &r);
            if rr.sqrt() <= tol * f_norm {
                break;
            }
            p.clone_from(&r);
        }
        if iterations >= max_iter {
            break;
        }
        let q = op.adjoint(&p);
        let ap = op.apply(&q);
        let pap = op.dot(&q, &q);
        if pap.is_nan() || pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        axpy(&mut u, alpha, &q);
        axpy(&mut r, -alpha, &ap);
        let rr_next = op.dot_interior(&r, &r);
        let beta = rr_next / rr;
        rr = rr_next;
        p.par_iter_mut().zip(r.par_iter()).for_each(|(p, r)| *p = r + beta * *p);
        iterations += 1;
    }
    let r = true_residual(op, f, &u);
    let relative_residual = op.dot_interior(&r, &r).sqrt() / f_norm;
    CgOutcome {
        u,
        iterations,
        converged: relative_residual <= tol,
        relative_residual,
    }
}
