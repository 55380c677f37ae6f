use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{FieldError, Grid};
use crate::algebra::Multivector;

/// Analytic weight `φ` with closed-form derivatives.
///
/// Every evaluator takes a point `x = (x_0, ..., x_n)`; the dimension is read
/// from its length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum WeightSpec {
    /// `φ = 0`
    Zero,
    /// `φ = x_0^2`
    Quadratic0,
    /// `φ = (n+1) x_0^2 - Σ_{i≥1} x_i^2`, so `Δφ = 2`.
    AnisoQuadratic,
    /// `φ = Σ_k c_k x_axis^k`
    AxialPoly { axis: usize, coeffs: Vec<f64> },
}

/// Which of the hypotheses of the weighted estimate hold on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admissibility {
    /// `Δφ ≥ 0` at every node.
    pub laplacian_nonnegative: bool,
    /// `∂²φ/∂x_i∂x_j = 0` for `i ≠ j` in `1..n`.
    pub spatial_mixed_zero: bool,
    /// `∂²φ/∂x_i² ≤ 0` for `i` in `1..n`.
    pub spatial_diagonal_nonpositive: bool,
}

impl Admissibility {
    pub fn admissible(&self) -> bool {
        self.laplacian_nonnegative && self.spatial_mixed_zero && self.spatial_diagonal_nonpositive
    }
}

impl WeightSpec {
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            WeightSpec::Zero => 0.0,
            WeightSpec::Quadratic0 => x[0] * x[0],
            WeightSpec::AnisoQuadratic => {
                let n = (x.len() - 1) as f64;
                (n + 1.0) * x[0] * x[0] - x[1..].iter().map(|v| v * v).sum::<f64>()
            }
            WeightSpec::AxialPoly { axis, coeffs } => horner(coeffs, x[*axis]),
        }
    }

    /// `∂φ/∂x_i`
    pub fn partial(&self, x: &[f64], i: usize) -> f64 {
        match self {
            WeightSpec::Zero => 0.0,
            WeightSpec::Quadratic0 => {
                if i == 0 {
                    2.0 * x[0]
                } else {
                    0.0
                }
            }
            WeightSpec::AnisoQuadratic => {
                if i == 0 {
                    2.0 * (x.len() as f64) * x[0]
                } else {
                    -2.0 * x[i]
                }
            }
            WeightSpec::AxialPoly { axis, coeffs } => {
                if i == *axis {
                    horner(&derivative(coeffs), x[i])
                } else {
                    0.0
                }
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (0..x.len()).map(|i| self.partial(x, i)).collect()
    }

    /// `∂²φ/∂x_i∂x_j`
    pub fn hessian_entry(&self, x: &[f64], i: usize, j: usize) -> f64 {
        if i != j {
            return 0.0;
        }
        match self {
            WeightSpec::Zero => 0.0,
            WeightSpec::Quadratic0 => {
                if i == 0 {
                    2.0
                } else {
                    0.0
                }
            }
            WeightSpec::AnisoQuadratic => {
                if i == 0 {
                    2.0 * x.len() as f64
                } else {
                    -2.0
                }
            }
            WeightSpec::AxialPoly { axis, coeffs } => {
                if i == *axis {
                    horner(&derivative(&derivative(coeffs)), x[i])
                } else {
                    0.0
                }
            }
        }
    }

    pub fn hessian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let m = x.len();
        (0..m)
            .map(|i| (0..m).map(|j| self.hessian_entry(x, i, j)).collect())
            .collect()
    }

    /// `Δφ`
    pub fn laplacian(&self, x: &[f64]) -> f64 {
        (0..x.len()).map(|i| self.hessian_entry(x, i, i)).sum()
    }

    /// `Dφ = Σ_i ē_i ∂φ/∂x_i`
    pub fn conjugate_gradient_vector(&self, x: &[f64]) -> Multivector<f64> {
        let n = x.len() - 1;
        let mut coeffs = vec![0.0; 1 << n];
        coeffs[0] = self.partial(x, 0);
        for i in 1..=n {
            coeffs[1 << (i - 1)] = -self.partial(x, i);
        }
        Multivector::from_coeffs(n, coeffs).expect("grid n within range")
    }

    pub fn validate(&self, grid: &Grid) -> Result<(), FieldError> {
        if let WeightSpec::AxialPoly { axis, coeffs } = self {
            if *axis > grid.n() {
                return Err(FieldError::InvalidWeight(format!(
                    "axis {axis} does not exist for n = {}",
                    grid.n()
                )));
            }
            if coeffs.iter().any(|c| !c.is_finite()) {
                return Err(FieldError::InvalidWeight("non-finite polynomial coefficient".into()));
            }
        }
        Ok(())
    }

    /// Checks the estimate's hypotheses at every grid node.
    pub fn admissibility(&self, grid: &Grid) -> Result<Admissibility, FieldError> {
        self.validate(grid)?;
        let n = grid.n();
        let mut out = Admissibility {
            laplacian_nonnegative: true,
            spatial_mixed_zero: true,
            spatial_diagonal_nonpositive: true,
        };
        let mut x = vec![0.0; grid.axes()];
        for k in 0..grid.len() {
            grid.coords_into(k, &mut x);
            if self.laplacian(&x) < 0.0 {
                out.laplacian_nonnegative = false;
            }
            for i in 1..=n {
                if self.hessian_entry(&x, i, i) > 0.0 {
                    out.spatial_diagonal_nonpositive = false;
                }
                for j in 1..=n {
                    if i != j && self.hessian_entry(&x, i, j) != 0.0 {
                        out.spatial_mixed_zero = false;
                    }
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::Zero => f.write_str("zero"),
            WeightSpec::Quadratic0 => f.write_str("quadratic0"),
            WeightSpec::AnisoQuadratic => f.write_str("aniso-quadratic"),
            WeightSpec::AxialPoly { axis, coeffs } => {
                write!(f, "axial-poly:{axis}:")?;
                for (k, c) in coeffs.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{c}")?;
                }
                Ok(())
            }
        }
    }
}

/// Accepts `zero`, `quadratic0`, `aniso-quadratic` and
/// `axial-poly:<axis>:<c0>,<c1>,...`.
impl FromStr for WeightSpec {
    type Err = FieldError;
    fn from_str(s: &str) -> Result<WeightSpec, FieldError> {
        let bad = || FieldError::InvalidWeight(format!("unknown weight {s:?}"));
        match s {
            "zero" => return Ok(WeightSpec::Zero),
            "quadratic0" => return Ok(WeightSpec::Quadratic0),
            "aniso-quadratic" | "anisoquadratic" => return Ok(WeightSpec::AnisoQuadratic),
            _ => {}
        }
        let rest = s.strip_prefix("axial-poly:").ok_or_else(bad)?;
        let (axis, coeffs) = rest.split_once(':').ok_or_else(bad)?;
        let axis = axis.parse().map_err(|_| bad())?;
        let coeffs = coeffs
            .split(',')
            .map(|c| c.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(WeightSpec::AxialPoly { axis, coeffs })
    }
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| k as f64 * c)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aniso_has_unit_half_laplacian() {
        let x = [0.3, -0.2, 0.7];
        assert_eq!(WeightSpec::AnisoQuadratic.laplacian(&x), 2.0);
        assert_eq!(WeightSpec::AnisoQuadratic.partial(&x, 0), 6.0 * 0.3);
        assert_eq!(WeightSpec::AnisoQuadratic.partial(&x, 2), -1.4);
    }

    #[test]
    fn axial_poly_derivatives() {
        let w = WeightSpec::AxialPoly {
            axis: 1,
            coeffs: vec![1.0, 0.0, 3.0, 2.0],
        };
        let x = [5.0, 2.0];
        assert_eq!(w.value(&x), 1.0 + 12.0 + 16.0);
        assert_eq!(w.partial(&x, 1), 12.0 + 24.0);
        assert_eq!(w.partial(&x, 0), 0.0);
        assert_eq!(w.hessian_entry(&x, 1, 1), 6.0 + 24.0);
    }

    #[test]
    fn conjugate_gradient_of_quadratic0() {
        let d = WeightSpec::Quadratic0.conjugate_gradient_vector(&[0.5, 0.1]);
        assert_eq!(d.coeffs(), &[1.0, 0.0]);
    }

    #[test]
    fn admissibility_flags() {
        let g = Grid::cube(2, 5, -1.0, 1.0).unwrap();
        assert!(WeightSpec::AnisoQuadratic.admissibility(&g).unwrap().admissible());
        assert!(WeightSpec::Quadratic0.admissibility(&g).unwrap().admissible());
        let convex = WeightSpec::AxialPoly {
            axis: 1,
            coeffs: vec![0.0, 0.0, 1.0],
        };
        let a = convex.admissibility(&g).unwrap();
        assert!(a.laplacian_nonnegative && !a.spatial_diagonal_nonpositive);
        let bad = WeightSpec::AxialPoly {
            axis: 0,
            coeffs: vec![0.0, 0.0, -1.0],
        };
        assert!(!bad.admissibility(&g).unwrap().laplacian_nonnegative);
    }

    #[test]
    fn parse_round_trip() {
        for s in ["zero", "quadratic0", "aniso-quadratic", "axial-poly:1:0,0,1"] {
            assert_eq!(s.parse::<WeightSpec>().unwrap().to_string(), s);
        }
        assert!("cubic".parse::<WeightSpec>().is_err());
    }
}
