use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Which coefficient field a multivector is built over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalarKind {
    Float64,
    ExactRational,
}

impl fmt::Display for ScalarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarKind::Float64 => f.write_str("float64"),
            ScalarKind::ExactRational => f.write_str("exact-rational"),
        }
    }
}

/// Coefficient type of a [`Multivector`](super::Multivector).
///
/// The kind is a property of the type, so two multivectors over different
/// kinds can never be combined: there is no implicit coercion between
/// `f64` and `BigRational`.
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + 'static
{
    const KIND: ScalarKind;

    fn from_i64(v: i64) -> Self;

    /// Lossy view used only for reporting.
    fn to_f64(&self) -> f64;

    /// `self += a * b` or `self -= a * b`, without cloning the operands.
    fn fused_accumulate(&mut self, a: &Self, b: &Self, negate: bool);

    /// `self * k` for a small integer `k`.
    fn scaled_by(&self, k: i64) -> Self {
        self.clone() * Self::from_i64(k)
    }

    fn is_nonnegative(&self) -> bool;

    /// `out += a b` for coefficient slices of length `2^n`.
    fn mul_slices(n: usize, a: &[Self], b: &[Self], out: &mut [Self]) {
        super::multivector::mul_generic(n, a, b, out);
    }
}

impl Scalar for f64 {
    const KIND: ScalarKind = ScalarKind::Float64;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    #[inline]
    fn fused_accumulate(&mut self, a: &Self, b: &Self, negate: bool) {
        if negate {
            *self -= a * b;
        } else {
            *self += a * b;
        }
    }

    fn scaled_by(&self, k: i64) -> Self {
        self * k as f64
    }

    fn is_nonnegative(&self) -> bool {
        *self >= 0.0
    }
}

impl Scalar for BigRational {
    const KIND: ScalarKind = ScalarKind::ExactRational;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    #[inline]
    fn fused_accumulate(&mut self, a: &Self, b: &Self, negate: bool) {
        let p = a * b;
        if negate {
            *self -= p;
        } else {
            *self += p;
        }
    }

    fn is_nonnegative(&self) -> bool {
        !self.is_negative()
    }

    /// Clears denominators and runs the product over `i128`, reducing once
    /// per output coefficient. Falls back to rational accumulation when the
    /// scaled numerators are too large.
    fn mul_slices(n: usize, a: &[Self], b: &[Self], out: &mut [Self]) {
        let (Some((da, na)), Some((db, nb))) = (over_common_denominator(a), over_common_denominator(b)) else {
            return super::multivector::mul_generic(n, a, b, out);
        };
        let mut acc = vec![0i128; out.len()];
        mul_integers(n, &na, &nb, &mut acc);
        let den = BigInt::from(da) * BigInt::from(db);
        for (o, v) in out.iter_mut().zip(acc) {
            if v != 0 {
                *o += BigRational::new(BigInt::from(v), den.clone());
            }
        }
    }
}

/// Numerators below this keep every product and its `2^MAX_N`-term sums
/// inside `i128`.
const SMALL: i128 = 1 << 56;

/// `(d, m)` with `v_k = m_k / d`, when `d` and every `m_k` are below [`SMALL`].
fn over_common_denominator(v: &[BigRational]) -> Option<(i128, Vec<i128>)> {
    fn gcd(mut a: i128, mut b: i128) -> i128 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    }
    let mut d: i128 = 1;
    for x in v {
        let q: i128 = x.denom().to_i128()?;
        d = d.checked_mul(q / gcd(d, q))?;
        if d >= SMALL {
            return None;
        }
    }
    v.iter()
        .map(|x| {
            let m = x.numer().to_i128()?.checked_mul(d / x.denom().to_i128()?)?;
            (m.abs() < SMALL).then_some(m)
        })
        .collect::<Option<Vec<i128>>>()
        .map(|m| (d, m))
}

fn mul_integers(n: usize, a: &[i128], b: &[i128], out: &mut [i128]) {
    let table = super::SignTable::shared(n);
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if y == 0 {
                continue;
            }
            let negative = match table {
                Some(t) => t.is_negative(i, j),
                None => super::product_sign(i as u32, j as u32).is_minus(),
            };
            if negative {
                out[i ^ j] -= x * y;
            } else {
                out[i ^ j] += x * y;
            }
        }
    }
}

/// Exact rational from a numerator/denominator pair. Panics on a zero denominator.
pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_are_tied_to_types() {
        assert_eq!(<f64 as Scalar>::KIND, ScalarKind::Float64);
        assert_eq!(<BigRational as Scalar>::KIND, ScalarKind::ExactRational);
    }

    #[test]
    fn rational_accumulate_is_exact() {
        let mut acc = rational(1, 3);
        acc.fused_accumulate(&rational(1, 7), &rational(7, 3), false);
        assert_eq!(acc, rational(2, 3));
        acc.fused_accumulate(&rational(2, 3), &BigRational::one(), true);
        assert!(acc.is_zero());
    }

    #[test]
    fn cleared_denominator_product_matches_rational_loop() {
        let a: Vec<BigRational> = [(1, 3), (-2, 7), (5, 9), (0, 1)].iter().map(|&(p, q)| rational(p, q)).collect();
        let b: Vec<BigRational> = [(4, 5), (1, 6), (-3, 8), (7, 2)].iter().map(|&(p, q)| rational(p, q)).collect();
        let mut fast = vec![rational(1, 11); 4];
        let mut slow = fast.clone();
        BigRational::mul_slices(2, &a, &b, &mut fast);
        super::super::multivector::mul_generic(2, &a, &b, &mut slow);
        assert_eq!(fast, slow);

        let huge = vec![rational(1, 1 << 40) * rational(1, 1 << 30); 4];
        assert!(over_common_denominator(&huge).is_none());
        let mut fast = vec![BigRational::zero(); 4];
        let mut slow = fast.clone();
        BigRational::mul_slices(2, &huge, &a, &mut fast);
        super::super::multivector::mul_generic(2, &huge, &a, &mut slow);
        assert_eq!(fast, slow);
    }

    #[test]
    fn float_accumulate() {
        let mut acc = 1.0_f64;
        acc.fused_accumulate(&2.0, &3.0, true);
        assert_eq!(acc, -5.0);
    }
}
