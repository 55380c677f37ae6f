use rand::Rng;

use super::{check_range, merge, run_trials, Counterexample, IdentityReport, VerifyError};
use crate::algebra::{Multivector, Side};
use crate::field::PolyTestField;

/// Relative tolerance for identities between exactly differentiated
/// polynomial fields evaluated in floating point.
pub const CALCULUS_TOLERANCE: f64 = 1e-12;

const POINTS: usize = 8;

fn rel_gap(lhs: &Multivector<f64>, rhs: &Multivector<f64>, scale: f64) -> f64 {
    let gap = lhs.coeffs().iter().zip(rhs.coeffs()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    gap / scale.max(lhs.max_abs()).max(rhs.max_abs()).max(f64::MIN_POSITIVE)
}

fn compare<R: Rng>(
    what: &str,
    n: usize,
    rng: &mut R,
    lhs: &PolyTestField,
    rhs: impl Fn(&[f64]) -> (Multivector<f64>, f64),
) -> Result<(), Counterexample> {
    for _ in 0..POINTS {
        let x: Vec<f64> = (0..=n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let (r, scale) = rhs(&x);
        let gap = rel_gap(&lhs.eval(&x), &r, scale);
        if gap > CALCULUS_TOLERANCE {
            return Err(Counterexample {
                trial: 0,
                seed: 0,
                detail: format!("{what}: relative gap {gap:e} at {x:?}"),
                coefficients: Vec::new(),
                blades: Vec::new(),
            });
        }
    }
    Ok(())
}

/// Conjugation, product rule and factorization identities on random
/// polynomial fields of degree at most 4, using exact derivatives:
///
/// * `bar(D̄u) = ū D`
/// * `D̄(uv) = (D̄u)v + u(D̄v) + Σ_{j≥1} (e_j u - u e_j) ∂_j v` for paravector `v`
/// * `D̄(Du) = D(D̄u) = Δu`
pub fn verify_calculus_identities(n: usize, fields: u64, seed: u64) -> Result<IdentityReport, VerifyError> {
    check_range(n, 1)?;
    let conj = run_trials("conjugate of Dirac", n, fields, seed, |rng| {
        let u = PolyTestField::random(n, 4, rng);
        let lhs = u.dirac(Side::Left, false).bar();
        let rhs = u.bar().dirac(Side::Right, true);
        compare("bar(Dbar u) = bar(u) D", n, rng, &lhs, |x| (rhs.eval(x), 0.0))
    });
    let product = run_trials("product rule", n, fields, seed.wrapping_add(1), |rng| {
        let u = PolyTestField::random(n, 4, rng);
        let v = PolyTestField::random_paravector(n, 4, rng);
        let lhs = u.mul(&v).dirac(Side::Left, false);
        let du = u.dirac(Side::Left, false);
        let dv = v.dirac(Side::Left, false);
        let dvs: Vec<PolyTestField> = (1..=n).map(|j| v.partial(j)).collect();
        compare("product rule", n, rng, &lhs, |x| {
            let (ux, vx) = (u.eval(x), v.eval(x));
            let a = du.eval(x).mul(&vx).expect("same n");
            let b = ux.mul(&dv.eval(x)).expect("same n");
            let mut sum = &a + &b;
            let mut scale = a.max_abs().max(b.max_abs());
            for (j, dvj) in dvs.iter().enumerate() {
                let ej = Multivector::basis(crate::algebra::Blade::generator(n, j + 1).expect("in range"));
                let comm = &ej.mul(&ux).expect("same n") - &ux.mul(&ej).expect("same n");
                let t = comm.mul(&dvj.eval(x)).expect("same n");
                scale = scale.max(t.max_abs());
                sum = &sum + &t;
            }
            (sum, scale)
        })
    });
    let factor = run_trials("Dirac factorization", n, fields, seed.wrapping_add(2), |rng| {
        let u = PolyTestField::random(n, 4, rng);
        let lap = u.laplacian();
        let a = u.dirac(Side::Left, true).dirac(Side::Left, false);
        let b = u.dirac(Side::Left, false).dirac(Side::Left, true);
        compare("Dbar D u = Laplacian u", n, rng, &a, |x| (lap.eval(x), 0.0))?;
        compare("D Dbar u = Laplacian u", n, rng, &b, |x| (lap.eval(x), 0.0))
    });
    Ok(merge("calculus identities", n, seed, vec![conj, product, factor]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let r = verify_calculus_identities(2, 5, 3).unwrap();
        assert!(r.passed(), "{r:?}");
    }
}
