use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;

use super::{check_range, exhaustive, failure, merge, random_multivector, run_trials, Counterexample, IdentityReport, VerifyError};
use crate::algebra::{blade_product, Blade, Involution, Multivector, Scalar, Sign};

/// Reduces a generator word `e_{w_1} ... e_{w_k}` to `± e_A` by adjacent
/// swaps and `e_i e_i = -1`. Independent of the bit-counting sign rule.
pub fn reduce_word(word: &[usize]) -> (Sign, u32) {
    let mut w = word.to_vec();
    let mut sign = Sign::Plus;
    while let Some(k) = (0..w.len().saturating_sub(1)).find(|&k| w[k] >= w[k + 1]) {
        if w[k] == w[k + 1] {
            w.drain(k..k + 2);
        } else {
            w.swap(k, k + 1);
        }
        sign = -sign;
    }
    (sign, w.iter().fold(0u32, |m, &i| m | 1 << (i - 1)))
}

fn blade_failure(detail: String, blades: &[Blade]) -> Counterexample {
    Counterexample {
        trial: 0,
        seed: 0,
        detail,
        coefficients: Vec::new(),
        blades: blades.iter().map(|b| b.to_string()).collect(),
    }
}

type Q = Multivector<BigRational>;

/// Exhaustive blade laws plus seeded rational trials of associativity, the
/// bar anti-homomorphism, `(·,·)_0` positivity and its `τ` form, and the
/// Cauchy-Schwarz bound for finite sums `Σ f̄_k g_k`.
pub fn verify_core_laws(n: usize, trials: u64, seed: u64) -> Result<IdentityReport, VerifyError> {
    check_range(n, 1)?;
    let m = 1u64 << n;
    let blade = |mask: u64| Blade::new(n, mask as u32).expect("mask in range");
    let mut parts = Vec::new();

    parts.push(exhaustive("blade product matches word reduction", n, m * m, |c| {
        let (a, b) = (blade(c / m), blade(c % m));
        let word: Vec<usize> = a.indices().chain(b.indices()).collect();
        let (s, mask) = reduce_word(&word);
        let got = blade_product(a, b).expect("same n");
        if got == (s, blade(mask as u64)) {
            Ok(())
        } else {
            Err(blade_failure(format!("product {got:?}, word reduction ({s:?}, {mask:#b})"), &[a, b]))
        }
    }));

    parts.push(exhaustive("generators anticommute", n, (n * n) as u64, |c| {
        let (i, j) = ((c as usize) / n + 1, (c as usize) % n + 1);
        if i >= j {
            return Ok(());
        }
        let ei = Q::basis(Blade::generator(n, i).expect("valid"));
        let ej = Q::basis(Blade::generator(n, j).expect("valid"));
        let sum = &ei.mul(&ej).expect("same n") + &ej.mul(&ei).expect("same n");
        if sum.is_zero() {
            Ok(())
        } else {
            Err(blade_failure("e_i e_j + e_j e_i != 0".into(), &[Blade::generator(n, i).unwrap(), Blade::generator(n, j).unwrap()]))
        }
    }));

    parts.push(exhaustive("blade times its bar is one", n, m, |c| {
        let b = Q::basis(blade(c));
        let one = Q::scalar(n, BigRational::from_i64(1)).expect("valid");
        let bb = b.bar();
        if b.mul(&bb).expect("same n") == one && bb.mul(&b).expect("same n") == one {
            Ok(())
        } else {
            Err(blade_failure("e_A bar(e_A) != 1".into(), &[blade(c)]))
        }
    }));

    parts.push(exhaustive("involution signs and involutivity", n, m, |c| {
        let a = blade(c);
        let e = Q::basis(a);
        let word: Vec<usize> = a.indices().collect();
        let reversed: Vec<usize> = word.iter().rev().cloned().collect();
        let (s, mask) = reduce_word(&reversed);
        debug_assert_eq!(mask, a.mask());
        let reversion = Q::from_blade(a, BigRational::from_i64(s.to_i64()));
        let inversion = Q::from_blade(a, BigRational::from_i64(Sign::from_parity(a.grade()).to_i64()));
        let ok = e.reversion() == reversion
            && e.inversion() == inversion
            && e.bar() == e.reversion().inversion()
            && e.bar() == e.inversion().reversion()
            && [Involution::Inversion, Involution::Reversion, Involution::Bar]
                .iter()
                .all(|&k| e.involution(k).involution(k) == e);
        if ok {
            Ok(())
        } else {
            Err(blade_failure("involution sign mismatch".into(), &[a]))
        }
    }));

    parts.push(run_trials("associativity", n, trials, seed, |rng| {
        let (a, b, c) = (random_multivector(n, rng), random_multivector(n, rng), random_multivector(n, rng));
        let left = a.mul(&b).expect("same n").mul(&c).expect("same n");
        let right = a.mul(&b.mul(&c).expect("same n")).expect("same n");
        if left == right {
            Ok(())
        } else {
            Err(failure("(ab)c != a(bc)".into(), &[&a, &b, &c]))
        }
    }));

    parts.push(run_trials("bar anti-homomorphism", n, trials, seed.wrapping_add(1), |rng| {
        let (a, b) = (random_multivector(n, rng), random_multivector(n, rng));
        let left = a.mul(&b).expect("same n").bar();
        let right = b.bar().mul(&a.bar()).expect("same n");
        if left == right {
            Ok(())
        } else {
            Err(failure("bar(ab) != bar(b) bar(a)".into(), &[&a, &b]))
        }
    }));

    parts.push(run_trials("inner product positivity and tau form", n, trials, seed.wrapping_add(2), |rng| {
        let a = if rng.random_ratio(1, 16) {
            Q::zero(n).expect("valid")
        } else {
            random_multivector(n, rng)
        };
        let b = random_multivector(n, rng);
        let aa = a.norm0_sq();
        let positive = if a.is_zero() { aa.is_zero() } else { aa.is_nonnegative() && !aa.is_zero() };
        let tau_form = a.mul(&b.bar()).expect("same n").tau(Blade::scalar(n).expect("valid")).expect("same n");
        if positive && a.inner0(&b).expect("same n") == tau_form {
            Ok(())
        } else {
            Err(failure("(a,a)_0 positivity or (a,b)_0 = tau(a bar(b)) failed".into(), &[&a, &b]))
        }
    }));

    parts.push(run_trials("cauchy-schwarz for module sums", n, trials, seed.wrapping_add(3), |rng| {
        let nodes = 3;
        let f: Vec<Q> = (0..nodes).map(|_| random_multivector(n, rng)).collect();
        let g: Vec<Q> = (0..nodes).map(|_| random_multivector(n, rng)).collect();
        let mut ip = Q::zero(n).expect("valid");
        for (fk, gk) in f.iter().zip(&g) {
            ip = &ip + &fk.bar().mul(gk).expect("same n");
        }
        let ff: BigRational = f.iter().map(|v| v.norm0_sq()).fold(BigRational::zero(), |a, b| a + b);
        let gg: BigRational = g.iter().map(|v| v.norm0_sq()).fold(BigRational::zero(), |a, b| a + b);
        if ip.norm0_sq() <= ff * gg {
            Ok(())
        } else {
            Err(failure("|(f,g)|_0 > |f| |g|".into(), &[&f[0], &g[0]]))
        }
    }));

    Ok(merge("core algebra laws", n, seed, parts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_reduction_examples() {
        assert_eq!(reduce_word(&[1, 2]), (Sign::Plus, 0b11));
        assert_eq!(reduce_word(&[1, 1]), (Sign::Minus, 0));
        assert_eq!(reduce_word(&[1, 2, 1]), (Sign::Plus, 0b10));
        assert_eq!(reduce_word(&[2, 1]), (Sign::Minus, 0b11));
        assert_eq!(reduce_word(&[]), (Sign::Plus, 0));
    }

    #[test]
    fn small_suite_passes() {
        let r = verify_core_laws(3, 50, 11).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(verify_core_laws(7, 1, 0).is_err());
        assert!(verify_core_laws(0, 1, 0).is_err());
    }
}
