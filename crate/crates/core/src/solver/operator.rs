use rayon::prelude::*;

use super::SolverError;
use crate::algebra::{generator_action, Side};
use crate::field::{node_weights, CliffordField, Grid, WeightSpec};
use crate::parallel::ordered_sum;

/// Matrix-free discrete `D̄`: central differences, equations at interior
/// nodes only, unknowns at every node. Fields in the range of [`apply`]
/// are zero on boundary nodes.
///
/// [`apply`]: DiscreteDiracOperator::apply
#[derive(Debug, Clone)]
pub struct DiscreteDiracOperator {
    grid: Grid,
    weight: WeightSpec,
    weights: Vec<f64>,
    interior: Vec<bool>,
}

impl DiscreteDiracOperator {
    pub fn new(grid: &Grid, weight: &WeightSpec) -> Result<DiscreteDiracOperator, SolverError> {
        let weights = node_weights(grid, weight)?;
        let interior = (0..grid.len()).map(|k| !grid.is_boundary(k)).collect();
        Ok(DiscreteDiracOperator {
            grid: grid.clone(),
            weight: weight.clone(),
            weights,
            interior,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn weight(&self) -> &WeightSpec {
        &self.weight
    }

    /// Trapezoid weight times `e^{-φ}` per node.
    pub fn node_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_interior(&self, node: usize) -> bool {
        self.interior[node]
    }

    /// Number of real unknowns, nodes times `2^n`.
    pub fn unknowns(&self) -> usize {
        self.grid.len() * self.grid.width()
    }

    /// `(Lu)_k = Σ_i e_i (u_{k+s_i} - u_{k-s_i}) / 2h_i` at interior `k`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let grid = &self.grid;
        let w = grid.width();
        let mut out = vec![0.0; u.len()];
        out.par_chunks_mut(w).enumerate().for_each(|(k, o)| {
            if !self.interior[k] {
                return;
            }
            for axis in 0..grid.axes() {
                let s = grid.stride(axis) * w;
                let inv = 0.5 / grid.spacings()[axis];
                let (up, down) = (k * w + s, k * w - s);
                for a in 0..w {
                    let d = (u[up + a] - u[down + a]) * inv;
                    let (t, neg) = generator_action(axis, a as u32, Side::Left, false);
                    if neg {
                        o[t as usize] -= d;
                    } else {
                        o[t as usize] += d;
                    }
                }
            }
        });
        out
    }

    /// Euclidean transpose of [`apply`](Self::apply). `y` must vanish on
    /// boundary nodes.
    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let grid = &self.grid;
        let w = grid.width();
        let mut out = vec![0.0; y.len()];
        out.par_chunks_mut(w).enumerate().for_each(|(m, o)| {
            for axis in 0..grid.axes() {
                let s = grid.stride(axis) * w;
                let inv = 0.5 / grid.spacings()[axis];
                let i = grid.axis_index(m, axis);
                let below = i > 0;
                let above = i + 1 < grid.extents()[axis];
                for (a, oa) in o.iter_mut().enumerate() {
                    let (t, neg) = generator_action(axis, a as u32, Side::Left, false);
                    let t = t as usize;
                    let mut d = 0.0;
                    if below {
                        d += y[m * w - s + t];
                    }
                    if above {
                        d -= y[m * w + s + t];
                    }
                    d *= inv;
                    if neg {
                        *oa -= d;
                    } else {
                        *oa += d;
                    }
                }
            }
        });
        out
    }

    /// `L*_φ v = W⁻¹ Lᵀ W v`, with `v` read at interior nodes only.
    pub fn adjoint(&self, v: &[f64]) -> Vec<f64> {
        let w = self.grid.width();
        let mut y = vec![0.0; v.len()];
        y.par_chunks_mut(w).enumerate().for_each(|(k, o)| {
            if self.interior[k] {
                for (oa, va) in o.iter_mut().zip(&v[k * w..(k + 1) * w]) {
                    *oa = self.weights[k] * va;
                }
            }
        });
        let mut out = self.apply_transpose(&y);
        out.par_chunks_mut(w).enumerate().for_each(|(k, o)| {
            let inv = 1.0 / self.weights[k];
            for oa in o.iter_mut() {
                *oa *= inv;
            }
        });
        out
    }

    /// `Σ_k W_k Σ_A a_A b_A` over every node; the real part of `(a, b)_φ`
    /// without the `2^n` factor.
    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        let w = self.grid.width();
        ordered_sum(self.grid.len(), 1, |range, acc| {
            for k in range {
                let s: f64 = a[k * w..(k + 1) * w].iter().zip(&b[k * w..(k + 1) * w]).map(|(p, q)| p * q).sum();
                acc[0] += self.weights[k] * s;
            }
        })[0]
    }

    /// [`dot`](Self::dot) restricted to interior nodes.
    pub fn dot_interior(&self, a: &[f64], b: &[f64]) -> f64 {
        let w = self.grid.width();
        ordered_sum(self.grid.len(), 1, |range, acc| {
            for k in range {
                if self.interior[k] {
                    let s: f64 =
                        a[k * w..(k + 1) * w].iter().zip(&b[k * w..(k + 1) * w]).map(|(p, q)| p * q).sum();
                    acc[0] += self.weights[k] * s;
                }
            }
        })[0]
    }

    /// Copy of `f` with boundary nodes zeroed.
    pub fn restrict_interior(&self, f: &[f64]) -> Vec<f64> {
        let w = self.grid.width();
        let mut out = f.to_vec();
        out.par_chunks_mut(w).enumerate().for_each(|(k, o)| {
            if !self.interior[k] {
                o.fill(0.0);
            }
        });
        out
    }

    /// [`apply`](Self::apply) on a field.
    pub fn apply_field(&self, u: &CliffordField) -> Result<CliffordField, SolverError> {
        self.check_grid(u)?;
        Ok(CliffordField::from_values(&self.grid, self.apply(u.values()))?)
    }

    /// [`adjoint`](Self::adjoint) on a field.
    pub fn adjoint_field(&self, v: &CliffordField) -> Result<CliffordField, SolverError> {
        self.check_grid(v)?;
        Ok(CliffordField::from_values(&self.grid, self.adjoint(v.values()))?)
    }

    pub(crate) fn check_grid(&self, f: &CliffordField) -> Result<(), SolverError> {
        if f.grid() != &self.grid {
            return Err(SolverError::Field(crate::field::FieldError::GridMismatch));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Blade;
    use crate::field::TestFunction;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_values(len: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn adjoint_identity() {
        for (n, nodes) in [(1, 9), (2, 6), (3, 4)] {
            let g = Grid::cube(n, nodes, -1.0, 1.0).unwrap();
            let op = DiscreteDiracOperator::new(&g, &WeightSpec::AnisoQuadratic).unwrap();
            let len = g.len() * g.width();
            let u = random_values(len, 1);
            let v = op.restrict_interior(&random_values(len, 2));
            let lhs = op.dot_interior(&op.apply(&u), &v);
            let rhs = op.dot(&u, &op.adjoint(&v));
            let scale = op.dot(&u, &u).sqrt() * op.dot(&v, &v).sqrt();
            assert!((lhs - rhs).abs() <= 1e-12 * scale, "n = {n}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn boundary_rows_are_zero() {
        let g = Grid::cube(1, 5, 0.0, 1.0).unwrap();
        let op = DiscreteDiracOperator::new(&g, &WeightSpec::Zero).unwrap();
        let lu = op.apply(&random_values(g.len() * 2, 3));
        for k in 0..g.len() {
            if g.is_boundary(k) {
                assert_eq!(&lu[2 * k..2 * k + 2], &[0.0, 0.0]);
            }
        }
    }

    #[test]
    fn matches_field_dirac_at_interior() {
        let g = Grid::cube(2, 9, -1.0, 1.0).unwrap();
        let f = TestFunction::blade(&g, 0.1, Blade::new(2, 0b01).unwrap()).unwrap().sample(&g);
        let op = DiscreteDiracOperator::new(&g, &WeightSpec::Zero).unwrap();
        let lu = op.apply(f.values());
        let d = crate::field::dirac(&f, Side::Left, false).unwrap();
        for k in 0..g.len() {
            if !g.is_boundary(k) {
                for a in 0..4 {
                    assert!((lu[4 * k + a] - d.at(k)[a]).abs() < 1e-12);
                }
            }
        }
    }
}
