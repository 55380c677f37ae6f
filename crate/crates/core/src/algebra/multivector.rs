use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::blade::{check_n, product_sign, Blade, Sign, SignTable};
use super::{AlgebraError, Scalar};

/// The three grade-dependent sign maps `a*`, `a†` and `ā`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Involution {
    /// `e_A* = (-1)^{|A|} e_A`
    Inversion,
    /// `e_A† = (-1)^{(|A|-1)|A|/2} e_A`
    Reversion,
    /// `ē_A = (-1)^{(|A|+1)|A|/2} e_A`, the composition of the other two.
    Bar,
}

impl Involution {
    pub fn sign(self, grade: u32) -> Sign {
        let g = grade as u64;
        let k = match self {
            Involution::Inversion => g,
            Involution::Reversion => g * g.saturating_sub(1) / 2,
            Involution::Bar => g * (g + 1) / 2,
        };
        Sign::from_parity((k % 2) as u32)
    }
}

/// `a = Σ_A x_A e_A`, dense over all `2^n` blades in mask order.
#[derive(Clone, PartialEq)]
pub struct Multivector<S> {
    n: usize,
    coeffs: Vec<S>,
}

impl<S: Scalar> Multivector<S> {
    pub fn zero(n: usize) -> Result<Self, AlgebraError> {
        check_n(n)?;
        Ok(Multivector {
            n,
            coeffs: vec![S::zero(); 1 << n],
        })
    }

    pub fn from_coeffs(n: usize, coeffs: Vec<S>) -> Result<Self, AlgebraError> {
        check_n(n)?;
        if coeffs.len() != 1 << n {
            return Err(AlgebraError::CoefficientCount {
                expected: 1 << n,
                got: coeffs.len(),
            });
        }
        Ok(Multivector { n, coeffs })
    }

    /// `s e_0`
    pub fn scalar(n: usize, s: S) -> Result<Self, AlgebraError> {
        let mut m = Self::zero(n)?;
        m.coeffs[0] = s;
        Ok(m)
    }

    /// `s e_A`
    pub fn from_blade(blade: Blade, s: S) -> Self {
        let mut coeffs = vec![S::zero(); 1 << blade.n()];
        coeffs[blade.index()] = s;
        Multivector { n: blade.n(), coeffs }
    }

    pub fn basis(blade: Blade) -> Self {
        Self::from_blade(blade, S::one())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [S] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    /// `[a]_A`. Panics if the blade belongs to a different `n`.
    pub fn component(&self, blade: Blade) -> &S {
        assert_eq!(blade.n(), self.n, "blade and multivector disagree on n");
        &self.coeffs[blade.index()]
    }

    /// `[a]_0`
    pub fn scalar_part(&self) -> &S {
        &self.coeffs[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn scale(&self, s: &S) -> Self {
        Multivector {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect(),
        }
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self, AlgebraError> {
        self.same_n(rhs)?;
        Ok(Multivector {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self, AlgebraError> {
        self.same_n(rhs)?;
        Ok(Multivector {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        })
    }

    /// Clifford product `a b`: the bilinear extension of [`blade_product`](super::blade_product).
    pub fn mul(&self, rhs: &Self) -> Result<Self, AlgebraError> {
        self.same_n(rhs)?;
        let mut out = vec![S::zero(); self.coeffs.len()];
        mul_into(self.n, &self.coeffs, &rhs.coeffs, &mut out);
        Ok(Multivector { n: self.n, coeffs: out })
    }

    pub fn involution(&self, kind: Involution) -> Self {
        Multivector {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(mask, c)| {
                    if kind.sign((mask as u32).count_ones()).is_minus() {
                        -c.clone()
                    } else {
                        c.clone()
                    }
                })
                .collect(),
        }
    }

    pub fn inversion(&self) -> Self {
        self.involution(Involution::Inversion)
    }

    pub fn reversion(&self) -> Self {
        self.involution(Involution::Reversion)
    }

    pub fn bar(&self) -> Self {
        self.involution(Involution::Bar)
    }

    /// `(a, b)_0 = 2^n Σ_A a_A b_A`
    pub fn inner0(&self, rhs: &Self) -> Result<S, AlgebraError> {
        self.same_n(rhs)?;
        let mut acc = S::zero();
        for (a, b) in self.coeffs.iter().zip(&rhs.coeffs) {
            acc.fused_accumulate(a, b, false);
        }
        Ok(acc.scaled_by(1 << self.n))
    }

    /// `|a|_0^2`
    pub fn norm0_sq(&self) -> S {
        self.inner0(self).expect("same n")
    }

    /// `⟨τ_{e_A}, a⟩ = 2^n (-1)^{(|A|+1)|A|/2} a_A`
    pub fn tau(&self, blade: Blade) -> Result<S, AlgebraError> {
        if blade.n() != self.n {
            return Err(AlgebraError::DimensionMismatch {
                left: blade.n(),
                right: self.n,
            });
        }
        let v = self.coeffs[blade.index()].scaled_by(1 << self.n);
        Ok(if Involution::Bar.sign(blade.grade()).is_minus() {
            -v
        } else {
            v
        })
    }

    fn same_n(&self, rhs: &Self) -> Result<(), AlgebraError> {
        if self.n == rhs.n {
            Ok(())
        } else {
            Err(AlgebraError::DimensionMismatch {
                left: self.n,
                right: rhs.n,
            })
        }
    }
}

impl Multivector<f64> {
    pub fn norm0(&self) -> f64 {
        self.norm0_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// `out += a b` on raw coefficient slices of length `2^n`.
pub fn mul_into<S: Scalar>(n: usize, a: &[S], b: &[S], out: &mut [S]) {
    let m = 1usize << n;
    debug_assert!(a.len() == m && b.len() == m && out.len() == m);
    S::mul_slices(n, a, b, out);
}

/// The product loop in `S` itself, one fused accumulate per blade pair.
pub(crate) fn mul_generic<S: Scalar>(n: usize, a: &[S], b: &[S], out: &mut [S]) {
    let table = SignTable::shared(n);
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            let negative = match table {
                Some(t) => t.is_negative(i, j),
                None => product_sign(i as u32, j as u32).is_minus(),
            };
            out[i ^ j].fused_accumulate(x, y, negative);
        }
    }
}

impl<S: Scalar> fmt::Debug for Multivector<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Multivector(n={}; ", self.n)?;
        fmt::Display::fmt(self, f)?;
        f.write_str(")")
    }
}

impl<S: Scalar> fmt::Display for Multivector<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (mask, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let blade = Blade::new(self.n, mask as u32).expect("mask in range");
            write!(f, "({c}){blade}")?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl<S: Scalar> Add for &Multivector<S> {
    type Output = Multivector<S>;
    fn add(self, rhs: Self) -> Multivector<S> {
        self.checked_add(rhs).expect("multivectors over different n")
    }
}

impl<S: Scalar> Sub for &Multivector<S> {
    type Output = Multivector<S>;
    fn sub(self, rhs: Self) -> Multivector<S> {
        self.checked_sub(rhs).expect("multivectors over different n")
    }
}

impl<S: Scalar> Neg for &Multivector<S> {
    type Output = Multivector<S>;
    fn neg(self) -> Multivector<S> {
        Multivector {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational;
    use num_rational::BigRational;

    fn e(n: usize, idx: &[usize]) -> Multivector<f64> {
        Multivector::basis(Blade::from_indices(n, idx).unwrap())
    }

    #[test]
    fn unit_is_identity() {
        let a = Multivector::from_coeffs(2, vec![1.0, -2.0, 0.5, 3.0]).unwrap();
        assert_eq!(e(2, &[]).mul(&a).unwrap(), a);
        assert_eq!(a.mul(&e(2, &[])).unwrap(), a);
    }

    #[test]
    fn generator_square() {
        assert_eq!(e(3, &[1]).mul(&e(3, &[1])).unwrap(), -&e(3, &[]));
    }

    #[test]
    fn one_plus_e1_times_one_minus_e1() {
        let p = Multivector::from_coeffs(1, vec![1.0, 1.0]).unwrap();
        let q = Multivector::from_coeffs(1, vec![1.0, -1.0]).unwrap();
        assert_eq!(p.mul(&q).unwrap(), Multivector::scalar(1, 2.0).unwrap());
    }

    #[test]
    fn involution_signs() {
        assert_eq!(e(3, &[]).inversion(), e(3, &[]));
        assert_eq!(e(3, &[1]).bar(), -&e(3, &[1]));
        assert_eq!(e(3, &[1, 2]).reversion(), -&e(3, &[1, 2]));
        assert_eq!(e(3, &[1, 2]).bar(), -&e(3, &[1, 2]));
        assert_eq!(e(3, &[1, 2, 3]).bar(), e(3, &[1, 2, 3]));
    }

    #[test]
    fn components() {
        let a = &Multivector::scalar(2, 3.0).unwrap() + &e(2, &[1]).scale(&2.0);
        assert_eq!(*a.component(Blade::scalar(2).unwrap()), 3.0);
        assert_eq!(*e(2, &[1, 2]).component(Blade::from_indices(2, &[1, 2]).unwrap()), 1.0);
        let p = e(2, &[1]).mul(&e(2, &[2])).unwrap();
        assert_eq!(*p.component(Blade::from_indices(2, &[1, 2]).unwrap()), 1.0);
    }

    #[test]
    fn inner0_values() {
        assert_eq!(e(2, &[1]).inner0(&e(2, &[1])).unwrap(), 4.0);
        assert_eq!(e(2, &[1]).inner0(&e(2, &[2])).unwrap(), 0.0);
        let p = Multivector::from_coeffs(1, vec![1.0, 1.0]).unwrap();
        let q = Multivector::from_coeffs(1, vec![1.0, -1.0]).unwrap();
        assert_eq!(p.inner0(&q).unwrap(), 0.0);
    }

    #[test]
    fn tau_values() {
        let mu = &Multivector::scalar(2, 3.0).unwrap() + &e(2, &[1]);
        assert_eq!(mu.tau(Blade::scalar(2).unwrap()).unwrap(), 12.0);
        assert_eq!(e(1, &[1]).tau(Blade::generator(1, 1).unwrap()).unwrap(), -2.0);
        assert_eq!(Multivector::<f64>::zero(3).unwrap().tau(Blade::generator(3, 2).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn exact_rational_product() {
        let a = Multivector::from_coeffs(1, vec![rational(1, 2), rational(1, 3)]).unwrap();
        // (1/2 + e1/3)^2 = 1/4 - 1/9 + e1/3
        let sq = a.mul(&a).unwrap();
        assert_eq!(sq.coeffs(), &[rational(5, 36), rational(1, 3)]);
        let z: Multivector<BigRational> = Multivector::zero(1).unwrap();
        assert!(a.mul(&z).unwrap().is_zero());
    }

    #[test]
    fn mismatched_dimensions() {
        assert!(e(2, &[1]).mul(&e(3, &[1])).is_err());
        assert!(e(2, &[1]).inner0(&e(3, &[1])).is_err());
        assert!(e(2, &[1]).tau(Blade::scalar(3).unwrap()).is_err());
        assert!(Multivector::from_coeffs(2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn large_n_falls_back_to_direct_signs() {
        // n = 9 is above the table limit.
        let a = e(9, &[9]);
        let b = e(9, &[1, 9]);
        // e9 e1 e9 = -e1 e9 e9 = e1
        assert_eq!(a.mul(&b).unwrap(), e(9, &[1]));
    }
}
