use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CliffordField, FieldError, Grid};
use crate::algebra::{generator_action, mul_into, Blade, Multivector, Side};

/// `ψ(t) = exp(1 - 1/(1 - t²))` on `|t| < 1`, zero outside; `ψ(0) = 1`.
pub fn profile(t: f64) -> f64 {
    let s = 1.0 - t * t;
    if s <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / s).exp()
    }
}

/// `ψ'(t) = -2t ψ(t) / (1 - t²)²`
pub fn profile_derivative(t: f64) -> f64 {
    let s = 1.0 - t * t;
    if s <= 0.0 {
        0.0
    } else {
        -2.0 * t * profile(t) / (s * s)
    }
}

/// Tensor-product bump `Π_i ψ((x_i - c_i) / r_i)`, supported on the box
/// `Π [c_i - r_i, c_i + r_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Vec<f64>,
    pub radii: Vec<f64>,
}

impl Bump {
    pub fn new(center: Vec<f64>, radii: Vec<f64>) -> Result<Bump, FieldError> {
        if center.len() != radii.len() || radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(FieldError::InvalidBump("radii must be positive, one per axis".into()));
        }
        Ok(Bump { center, radii })
    }

    /// The bump whose support leaves a gap of `margin` times the box length
    /// at each face.
    pub fn inside(grid: &Grid, margin: f64) -> Result<Bump, FieldError> {
        if !(margin > 0.0 && margin < 0.5) {
            return Err(FieldError::DegenerateMargin(margin));
        }
        let center = grid.lows().iter().zip(grid.highs()).map(|(a, b)| 0.5 * (a + b)).collect();
        let radii = grid
            .lows()
            .iter()
            .zip(grid.highs())
            .map(|(a, b)| (0.5 - margin) * (b - a))
            .collect();
        Bump::new(center, radii)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let mut v = 1.0;
        for ((xi, c), r) in x.iter().zip(&self.center).zip(&self.radii) {
            v *= profile((xi - c) / r);
            if v == 0.0 {
                break;
            }
        }
        v
    }

    /// `∇` of the bump, written into `out`.
    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        let m = x.len();
        let t: Vec<f64> = (0..m).map(|i| (x[i] - self.center[i]) / self.radii[i]).collect();
        let p: Vec<f64> = t.iter().map(|&ti| profile(ti)).collect();
        for i in 0..m {
            let mut v = profile_derivative(t[i]) / self.radii[i];
            for (j, pj) in p.iter().enumerate() {
                if j != i {
                    v *= pj;
                }
            }
            out[i] = v;
        }
    }

    /// Whether the closed support lies inside the grid's box.
    pub fn fits(&self, grid: &Grid) -> bool {
        self.center.len() == grid.axes()
            && (0..grid.axes()).all(|i| {
                self.center[i] - self.radii[i] >= grid.lows()[i] && self.center[i] + self.radii[i] <= grid.highs()[i]
            })
    }
}

/// A compactly supported test function `α(x) = ψ_bump(x) · c` with a
/// constant multivector `c`. Derivatives are exact.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub bump: Bump,
    pub coeff: Multivector<f64>,
}

impl TestFunction {
    pub fn new(bump: Bump, coeff: Multivector<f64>) -> TestFunction {
        TestFunction { bump, coeff }
    }

    /// The centered bump of [`Bump::inside`] times `e_A`.
    pub fn blade(grid: &Grid, margin: f64, blade: Blade) -> Result<TestFunction, FieldError> {
        if blade.n() != grid.n() {
            return Err(FieldError::DimensionMismatch {
                field: grid.n(),
                other: blade.n(),
            });
        }
        Ok(TestFunction::new(Bump::inside(grid, margin)?, Multivector::basis(blade)))
    }

    pub fn n(&self) -> usize {
        self.coeff.n()
    }

    /// Errors unless the support lies in the grid's box and dimensions agree.
    pub fn check_support(&self, grid: &Grid) -> Result<(), FieldError> {
        if self.coeff.n() != grid.n() {
            return Err(FieldError::DimensionMismatch {
                field: grid.n(),
                other: self.coeff.n(),
            });
        }
        if !self.bump.fits(grid) {
            return Err(FieldError::NotCompactlySupported);
        }
        Ok(())
    }

    pub fn sample(&self, grid: &Grid) -> CliffordField {
        CliffordField::from_fn(grid, |x, out| {
            let b = self.bump.value(x);
            for (o, c) in out.iter_mut().zip(self.coeff.coeffs()) {
                *o = b * c;
            }
        })
    }

    /// Exact `Σ_i e_i ∂_i α` (left) or `Σ_i ∂_i α e_i` (right), `ē_i` when
    /// `conjugated`.
    pub fn dirac_into(&self, x: &[f64], side: Side, conjugated: bool, grad: &mut [f64], out: &mut [f64]) {
        self.bump.gradient_into(x, grad);
        for o in out.iter_mut() {
            *o = 0.0;
        }
        for (i, g) in grad.iter().enumerate() {
            if *g == 0.0 {
                continue;
            }
            for (a, c) in self.coeff.coeffs().iter().enumerate() {
                let (t, neg) = generator_action(i, a as u32, side, conjugated);
                let v = g * c;
                if neg {
                    out[t as usize] -= v;
                } else {
                    out[t as usize] += v;
                }
            }
        }
    }

    pub fn sample_dirac(&self, grid: &Grid, side: Side, conjugated: bool) -> CliffordField {
        CliffordField::from_fn(grid, |x, out| {
            let mut grad = vec![0.0; x.len()];
            self.dirac_into(x, side, conjugated, &mut grad, out);
        })
    }

    /// `∂_j α` at `x`.
    pub fn partial_into(&self, x: &[f64], j: usize, grad: &mut [f64], out: &mut [f64]) {
        self.bump.gradient_into(x, grad);
        for (o, c) in out.iter_mut().zip(self.coeff.coeffs()) {
            *o = grad[j] * c;
        }
    }

    /// Exact `(Dφ)α - Dα` sampled on a grid, for comparisons.
    pub fn sample_dual(&self, grid: &Grid, w: &super::WeightSpec) -> CliffordField {
        let n = grid.n();
        CliffordField::from_fn(grid, |x, out| {
            let mut grad = vec![0.0; x.len()];
            self.dirac_into(x, Side::Left, true, &mut grad, out);
            for o in out.iter_mut() {
                *o = -*o;
            }
            let b = self.bump.value(x);
            let a: Vec<f64> = self.coeff.coeffs().iter().map(|c| b * c).collect();
            mul_into(n, w.conjugate_gradient_vector(x).coeffs(), &a, out);
        })
    }
}

/// `count` seeded test functions with random boxes inside the grid (radii
/// 25% to 45% of each side) and random coefficients in `[-1, 1]`.
pub fn test_function_battery(grid: &Grid, count: usize, seed: u64) -> Vec<TestFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut center = Vec::with_capacity(grid.axes());
            let mut radii = Vec::with_capacity(grid.axes());
            for (lo, hi) in grid.lows().iter().zip(grid.highs()) {
                let r = rng.random_range(0.25..=0.45) * (hi - lo);
                center.push(rng.random_range(lo + r..=hi - r));
                radii.push(r);
            }
            let coeffs = (0..grid.width()).map(|_| rng.random_range(-1.0..=1.0)).collect();
            TestFunction::new(
                Bump::new(center, radii).expect("positive radii"),
                Multivector::from_coeffs(grid.n(), coeffs).expect("width matches n"),
            )
        })
        .collect()
}

/// `ψ_bump · e_A` with the support shrunk by `margin` of the box on every face.
pub fn make_bump(grid: &Grid, margin: f64, blade: Blade) -> Result<CliffordField, FieldError> {
    Ok(TestFunction::blade(grid, margin, blade)?.sample(grid))
}
