use std::fmt;
use std::ops::{Mul, Neg};
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{AlgebraError, MAX_N, TABLE_MAX_N};

/// Sign of a basis-blade product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// `(-1)^k`
    pub fn from_parity(k: u32) -> Sign {
        if k % 2 == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn is_minus(self) -> bool {
        self == Sign::Minus
    }

    pub fn to_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.to_i64() as f64
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        self * Sign::Minus
    }
}

/// A basis blade `e_A`, `A ⊆ {1..n}`.
///
/// Bit `i - 1` of the mask marks generator `e_i`; the empty mask is the unit
/// `e_0`. Coefficient arrays of a multivector are indexed by this mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Blade {
    n: u8,
    mask: u32,
}

impl Blade {
    pub fn new(n: usize, mask: u32) -> Result<Blade, AlgebraError> {
        check_n(n)?;
        if mask >> n != 0 {
            return Err(AlgebraError::MaskOutOfRange { mask, n });
        }
        Ok(Blade { n: n as u8, mask })
    }

    pub fn scalar(n: usize) -> Result<Blade, AlgebraError> {
        Blade::new(n, 0)
    }

    /// `e_i` for `1 <= i <= n`; `i = 0` gives the unit `e_0`.
    pub fn generator(n: usize, i: usize) -> Result<Blade, AlgebraError> {
        if i == 0 {
            return Blade::scalar(n);
        }
        if i > n {
            return Err(AlgebraError::GeneratorOutOfRange { index: i, n });
        }
        Blade::new(n, 1 << (i - 1))
    }

    /// Blade from generator indices. Order and repetition are rejected; use
    /// [`blade_product`] to reduce arbitrary words.
    pub fn from_indices(n: usize, indices: &[usize]) -> Result<Blade, AlgebraError> {
        let mut mask = 0u32;
        let mut last = 0usize;
        for &i in indices {
            if i == 0 || i > n {
                return Err(AlgebraError::GeneratorOutOfRange { index: i, n });
            }
            if i <= last {
                return Err(AlgebraError::UnsortedIndices);
            }
            last = i;
            mask |= 1 << (i - 1);
        }
        Blade::new(n, mask)
    }

    pub fn n(self) -> usize {
        self.n as usize
    }

    pub fn mask(self) -> u32 {
        self.mask
    }

    pub fn index(self) -> usize {
        self.mask as usize
    }

    /// `|A|`
    pub fn grade(self) -> u32 {
        self.mask.count_ones()
    }

    pub fn is_scalar(self) -> bool {
        self.mask == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i >= 1 && i <= self.n() && self.mask & (1 << (i - 1)) != 0
    }

    /// `A - i`; `None` when `i ∉ A`.
    pub fn without(self, i: usize) -> Option<Blade> {
        self.contains(i).then(|| Blade {
            n: self.n,
            mask: self.mask & !(1 << (i - 1)),
        })
    }

    /// `A + i`; `None` when `i ∈ A` or `i` is not a generator.
    pub fn with(self, i: usize) -> Option<Blade> {
        (i >= 1 && i <= self.n() && !self.contains(i)).then(|| Blade {
            n: self.n,
            mask: self.mask | (1 << (i - 1)),
        })
    }

    /// 1-based position of generator `i` in the ordered index list of `A`.
    pub fn position(self, i: usize) -> Option<u32> {
        self.contains(i)
            .then(|| (self.mask & ((1u32 << (i - 1)) - 1)).count_ones() + 1)
    }

    /// Generator indices in ascending order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        let mask = self.mask;
        (1..=self.n()).filter(move |&i| mask & (1 << (i - 1)) != 0)
    }

    /// All `2^n` blades in mask order.
    pub fn all(n: usize) -> Result<impl Iterator<Item = Blade>, AlgebraError> {
        check_n(n)?;
        Ok((0..(1u32 << n)).map(move |mask| Blade { n: n as u8, mask }))
    }
}

impl fmt::Display for Blade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.mask == 0 {
            return f.write_str("e0");
        }
        if self.n() <= 9 {
            f.write_str("e")?;
            for i in self.indices() {
                write!(f, "{i}")?;
            }
            Ok(())
        } else {
            f.write_str("e")?;
            for i in self.indices() {
                write!(f, "_{i}")?;
            }
            Ok(())
        }
    }
}

/// Parses `e0`, `e12`, or `e_1_10` against a fixed `n`.
pub fn parse_blade(n: usize, s: &str) -> Result<Blade, AlgebraError> {
    let bad = || AlgebraError::BladeSyntax(s.to_string());
    let body = s.strip_prefix('e').ok_or_else(bad)?;
    if body == "0" {
        return Blade::scalar(n);
    }
    let indices: Vec<usize> = if let Some(rest) = body.strip_prefix('_') {
        rest.split('_')
            .map(|t| usize::from_str(t).map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    } else {
        if body.is_empty() {
            return Err(bad());
        }
        body.chars()
            .map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(bad))
            .collect::<Result<_, _>>()?
    };
    Blade::from_indices(n, &indices)
}

/// Reordering sign of `e_A e_B` from the two masks alone.
///
/// Each generator of `B` passes over every larger generator of `A`, and each
/// shared generator contributes `e_i^2 = -1`.
#[inline]
pub fn product_sign(a: u32, b: u32) -> Sign {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let bit = rest.trailing_zeros();
        swaps += (a >> (bit + 1)).count_ones();
        rest &= rest - 1;
    }
    Sign::from_parity(swaps + (a & b).count_ones())
}

/// `e_A e_B = sign · e_{A △ B}`.
pub fn blade_product(a: Blade, b: Blade) -> Result<(Sign, Blade), AlgebraError> {
    if a.n != b.n {
        return Err(AlgebraError::DimensionMismatch {
            left: a.n(),
            right: b.n(),
        });
    }
    Ok((
        product_sign(a.mask, b.mask),
        Blade {
            n: a.n,
            mask: a.mask ^ b.mask,
        },
    ))
}

/// Which side a generator multiplies from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Left,
    Right,
}

/// Target mask and sign of `e_i e_A` (left) or `e_A e_i` (right), with `ē_i`
/// in place of `e_i` when `conjugated`. `i = 0` is the unit.
#[inline]
pub fn generator_action(i: usize, mask: u32, side: Side, conjugated: bool) -> (u32, bool) {
    if i == 0 {
        return (mask, false);
    }
    let bit = 1u32 << (i - 1);
    let sign = match side {
        Side::Left => product_sign(bit, mask),
        Side::Right => product_sign(mask, bit),
    };
    (mask ^ bit, sign.is_minus() ^ conjugated)
}

/// Precomputed `2^n × 2^n` product signs, row-major by left mask.
pub struct SignTable {
    n: usize,
    negative: Vec<bool>,
}

impl SignTable {
    pub fn build(n: usize) -> Result<SignTable, AlgebraError> {
        if n > TABLE_MAX_N {
            return Err(AlgebraError::UnsupportedDimension { n, max: TABLE_MAX_N });
        }
        let m = 1usize << n;
        let mut negative = Vec::with_capacity(m * m);
        for a in 0..m as u32 {
            for b in 0..m as u32 {
                negative.push(product_sign(a, b).is_minus());
            }
        }
        Ok(SignTable { n, negative })
    }

    /// Shared table for `n <= TABLE_MAX_N`, built on first use.
    pub fn shared(n: usize) -> Option<&'static SignTable> {
        static TABLES: [OnceLock<SignTable>; TABLE_MAX_N + 1] = [const { OnceLock::new() }; TABLE_MAX_N + 1];
        TABLES
            .get(n)
            .map(|cell| cell.get_or_init(|| SignTable::build(n).expect("n within table range")))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_negative(&self, a: usize, b: usize) -> bool {
        self.negative[(a << self.n) | b]
    }
}

pub(crate) fn check_n(n: usize) -> Result<(), AlgebraError> {
    if n > MAX_N {
        Err(AlgebraError::UnsupportedDimension { n, max: MAX_N })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(n: usize, idx: &[usize]) -> Blade {
        Blade::from_indices(n, idx).unwrap()
    }

    #[test]
    fn distinct_generators_no_swap() {
        assert_eq!(blade_product(b(2, &[1]), b(2, &[2])).unwrap(), (Sign::Plus, b(2, &[1, 2])));
    }

    #[test]
    fn generator_squares_to_minus_one() {
        assert_eq!(blade_product(b(3, &[1]), b(3, &[1])).unwrap(), (Sign::Minus, b(3, &[])));
    }

    #[test]
    fn e12_e1_is_e2() {
        // e1 e2 e1 = -e1 e1 e2 = e2
        assert_eq!(blade_product(b(2, &[1, 2]), b(2, &[1])).unwrap(), (Sign::Plus, b(2, &[2])));
    }

    #[test]
    fn mismatched_n_is_an_error() {
        assert!(matches!(
            blade_product(b(2, &[1]), b(3, &[1])),
            Err(AlgebraError::DimensionMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn mask_validation() {
        assert!(Blade::new(2, 0b100).is_err());
        assert!(Blade::new(13, 0).is_err());
        assert!(Blade::from_indices(3, &[2, 1]).is_err());
        assert!(Blade::from_indices(3, &[4]).is_err());
        assert_eq!(b(5, &[1, 3, 4]).grade(), 3);
    }

    #[test]
    fn set_helpers() {
        let a = b(4, &[1, 3, 4]);
        assert_eq!(a.position(3), Some(2));
        assert_eq!(a.position(2), None);
        assert_eq!(a.without(3), Some(b(4, &[1, 4])));
        assert_eq!(a.with(2), Some(b(4, &[1, 2, 3, 4])));
        assert_eq!(a.with(3), None);
        assert_eq!(a.indices().collect::<Vec<_>>(), vec![1, 3, 4]);
    }

    #[test]
    fn display_and_parse() {
        assert_eq!(b(3, &[1, 3]).to_string(), "e13");
        assert_eq!(b(3, &[]).to_string(), "e0");
        assert_eq!(parse_blade(3, "e13").unwrap(), b(3, &[1, 3]));
        assert_eq!(parse_blade(3, "e0").unwrap(), b(3, &[]));
        let wide = b(11, &[1, 10]);
        assert_eq!(wide.to_string(), "e_1_10");
        assert_eq!(parse_blade(11, "e_1_10").unwrap(), wide);
        assert!(parse_blade(3, "x1").is_err());
        assert!(parse_blade(2, "e3").is_err());
    }

    #[test]
    fn generator_action_matches_products() {
        for mask in 0..8u32 {
            for i in 1..=3 {
                let g = Blade::generator(3, i).unwrap();
                let a = Blade::new(3, mask).unwrap();
                let (s, t) = blade_product(g, a).unwrap();
                assert_eq!(generator_action(i, mask, Side::Left, false), (t.mask(), s.is_minus()));
                let (s, t) = blade_product(a, g).unwrap();
                assert_eq!(generator_action(i, mask, Side::Right, true), (t.mask(), !s.is_minus()));
            }
        }
        assert_eq!(generator_action(0, 5, Side::Left, true), (5, false));
    }

    #[test]
    fn table_matches_direct_signs() {
        let t = SignTable::build(4).unwrap();
        for a in 0..16 {
            for c in 0..16 {
                assert_eq!(t.is_negative(a, c), product_sign(a as u32, c as u32).is_minus());
            }
        }
        assert!(SignTable::build(TABLE_MAX_N + 1).is_err());
    }
}
