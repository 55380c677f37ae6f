//! Sign bookkeeping of the second-derivative term in the norm identity for
//! the weighted adjoint: `I4 = τ_0(ᾱ Σ_{j≥1} Σ_{i≥0} (e_j α ē_i - α e_j ē_i) φ_ji)`
//! split into the diagonal part `I5`, the off-diagonal spatial part `I6` and
//! the `x_0` mixed part `I7`.

use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use rayon::prelude::*;

use super::{
    check_range, failure, merge, random_multivector, random_rational, run_trials, Counterexample,
    IdentityReport, RuleCheck, VerifyError,
};
use crate::algebra::{generator_action, Blade, Multivector, Scalar, Side, Sign};

/// Symmetric `(n+1) × (n+1)` stand-in for `∂²φ/∂x_i∂x_j` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianStub<S> {
    n: usize,
    entries: Vec<S>,
}

impl<S: Scalar> HessianStub<S> {
    /// Row-major entries; rejects non-square or asymmetric input.
    pub fn new(n: usize, entries: Vec<S>) -> Option<HessianStub<S>> {
        let m = n + 1;
        if entries.len() != m * m {
            return None;
        }
        for i in 0..m {
            for j in 0..i {
                if entries[i * m + j] != entries[j * m + i] {
                    return None;
                }
            }
        }
        Some(HessianStub { n, entries })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> S) -> Option<HessianStub<S>> {
        let m = n + 1;
        HessianStub::new(n, (0..m * m).map(|k| f(k / m, k % m)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.entries[i * (self.n + 1) + j]
    }
}

impl HessianStub<BigRational> {
    pub fn random<R: Rng>(n: usize, rng: &mut R) -> HessianStub<BigRational> {
        let m = n + 1;
        let mut e = vec![BigRational::zero(); m * m];
        for i in 0..m {
            for j in 0..=i {
                let v = random_rational(rng);
                e[i * m + j] = v.clone();
                e[j * m + i] = v;
            }
        }
        HessianStub { n, entries: e }
    }

    /// Random stub satisfying the estimate's hypotheses: zero spatial mixed
    /// entries and non-positive spatial diagonal.
    pub fn random_admissible<R: Rng>(n: usize, rng: &mut R) -> HessianStub<BigRational> {
        let mut h = HessianStub::random(n, rng);
        let m = n + 1;
        for i in 1..m {
            for j in 1..m {
                let v = &mut h.entries[i * m + j];
                if i != j {
                    *v = BigRational::zero();
                } else if v.is_nonnegative() {
                    *v = -v.clone();
                }
            }
        }
        h
    }
}

/// The four index configurations under which `[ē_A e_i e_B ē_j]_0 ≠ 0` for
/// `i ≠ j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum I6Family {
    /// `i ∈ A, j ∉ A, i ∉ B, j ∈ B, A - i = B - j`
    C1,
    /// `i ∉ A, j ∈ A, i ∈ B, j ∉ B, A + i = B + j`
    C2,
    /// `i, j ∈ A, i, j ∉ B, A - i = B + j`
    C3,
    /// `i, j ∉ A, i, j ∈ B, A + i = B - j`
    C4,
}

impl I6Family {
    pub const ALL: [I6Family; 4] = [I6Family::C1, I6Family::C2, I6Family::C3, I6Family::C4];

    pub fn name(self) -> &'static str {
        match self {
            I6Family::C1 => "c1",
            I6Family::C2 => "c2",
            I6Family::C3 => "c3",
            I6Family::C4 => "c4",
        }
    }

    fn printed_exponent(self) -> &'static str {
        match self {
            I6Family::C1 => "r^2 + 1 - p(i) - p(j)",
            I6Family::C2 => "r^2 + 1",
            I6Family::C3 | I6Family::C4 => "r^2 - h(j) - h(i)",
        }
    }

    fn corrected_exponent(self) -> &'static str {
        match self {
            I6Family::C1 => "r^2 + 1 - p(i) - p(j)",
            I6Family::C2 => "r^2 + 1 + p_B(i) + p_A(j)",
            I6Family::C3 | I6Family::C4 => "r^2 - h(j) - h(i) + [i > j]",
        }
    }
}

/// Which version of the per-family sign formulas to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignRules {
    /// The exponents as printed: `c1: r²+1-p(i)-p(j)`, `c2: r²+1`,
    /// `c3, c4: r²-h(j)-h(i)`.
    Printed,
    /// Exponents that agree with enumeration for every configuration.
    Corrected,
}

/// Family of `(A, B, i, j)`, if any.
pub fn i6_family(a: Blade, b: Blade, i: usize, j: usize) -> Option<I6Family> {
    let (ia, ja, ib, jb) = (a.contains(i), a.contains(j), b.contains(i), b.contains(j));
    match (ia, ja, ib, jb) {
        (true, false, false, true) if a.without(i) == b.without(j) => Some(I6Family::C1),
        (false, true, true, false) if a.with(i) == b.with(j) => Some(I6Family::C2),
        (true, true, false, false) if a.without(i) == b.with(j) => Some(I6Family::C3),
        (false, false, true, true) if a.with(i) == b.without(j) => Some(I6Family::C4),
        _ => None,
    }
}

/// Sign of `[ē_A e_i e_B ē_j]_0` predicted for a configuration in `family`.
pub fn i6_sign(family: I6Family, a: Blade, b: Blade, i: usize, j: usize, rules: SignRules) -> Sign {
    let pos = |x: Blade, k: usize| x.position(k).expect("member") as i64;
    let corrected = rules == SignRules::Corrected;
    let e = match family {
        I6Family::C1 => {
            let r = a.grade() as i64;
            r * r + 1 - pos(a, i) - pos(b, j)
        }
        I6Family::C2 => {
            let r = a.grade() as i64;
            if corrected {
                r * r + 1 + pos(b, i) + pos(a, j)
            } else {
                r * r + 1
            }
        }
        I6Family::C3 | I6Family::C4 => {
            let (r, big) = if family == I6Family::C3 {
                (b.grade() as i64, a)
            } else {
                (a.grade() as i64, b)
            };
            r * r - pos(big, j) - pos(big, i) + i64::from(corrected && i > j)
        }
    };
    Sign::from_parity(e.rem_euclid(2) as u32)
}

/// Closed form of `I5` for `c_i = ∂²φ/∂x_i²`:
/// `-2^{n+1} Σ_i c_i (Σ_{i∉A, |A| odd} α_A² + Σ_{i∈A, |A| even} α_A²)`.
pub fn i5_closed<S: Scalar>(alpha: &Multivector<S>, hess: &HessianStub<S>) -> S {
    let n = alpha.n();
    let mut total = S::zero();
    for i in 1..=n {
        let bit = 1usize << (i - 1);
        let mut inner = S::zero();
        for (mask, c) in alpha.coeffs().iter().enumerate() {
            let odd = (mask as u32).count_ones() % 2 == 1;
            let member = mask & bit != 0;
            if (!member && odd) || (member && !odd) {
                inner.fused_accumulate(c, c, false);
            }
        }
        total.fused_accumulate(hess.get(i, i), &inner, false);
    }
    -total.scaled_by(1i64 << (n + 1))
}

/// `τ_0(ᾱ e_i α ē_j) = 2^n Σ_{families} α_A α_B (±1)` for one ordered pair
/// `i ≠ j`.
pub fn i6_pair<S: Scalar>(alpha: &Multivector<S>, i: usize, j: usize, rules: SignRules) -> S {
    let n = alpha.n();
    let mut inner = S::zero();
    let flip = (1usize << (i - 1)) | (1usize << (j - 1));
    for (mask, ca) in alpha.coeffs().iter().enumerate() {
        let bm = mask ^ flip;
        let a = Blade::new(n, mask as u32).expect("mask in range");
        let b = Blade::new(n, bm as u32).expect("mask in range");
        if let Some(f) = i6_family(a, b, i, j) {
            let s = i6_sign(f, a, b, i, j, rules);
            inner.fused_accumulate(ca, &alpha.coeffs()[bm], s.is_minus());
        }
    }
    inner.scaled_by(1i64 << n)
}

/// Closed form of `I6 = Σ_{i≠j} φ_ij τ_0(ᾱ e_i α ē_j)`.
pub fn i6_closed<S: Scalar>(alpha: &Multivector<S>, hess: &HessianStub<S>, rules: SignRules) -> S {
    let n = alpha.n();
    let mut total = S::zero();
    for i in 1..=n {
        for j in 1..=n {
            if i != j && !hess.get(i, j).is_zero() {
                total.fused_accumulate(hess.get(i, j), &i6_pair(alpha, i, j, rules), false);
            }
        }
    }
    total
}

/// `I5 + I6 + I7` from the closed forms; `I7` vanishes identically.
pub fn i4_closed<S: Scalar>(alpha: &Multivector<S>, hess: &HessianStub<S>, rules: SignRules) -> S {
    i5_closed(alpha, hess) + i6_closed(alpha, hess, rules)
}

fn basis<S: Scalar>(n: usize, i: usize, conjugated: bool) -> Multivector<S> {
    let (_, neg) = generator_action(i, 0, Side::Left, conjugated);
    let b = Blade::generator(n, i).expect("generator in range");
    Multivector::from_blade(b, if neg { -S::one() } else { S::one() })
}

/// `I4` by full Clifford products.
pub fn i4_brute<S: Scalar>(alpha: &Multivector<S>, hess: &HessianStub<S>) -> S {
    let n = alpha.n();
    let abar = alpha.bar();
    let mut sum = Multivector::<S>::zero(n).expect("n in range");
    for j in 1..=n {
        let ej = basis::<S>(n, j, false);
        let ej_alpha = ej.mul(alpha).expect("same n");
        let alpha_ej = alpha.mul(&ej).expect("same n");
        for i in 0..=n {
            let h = hess.get(j, i);
            if h.is_zero() {
                continue;
            }
            let ei_bar = basis::<S>(n, i, true);
            let term = &ej_alpha.mul(&ei_bar).expect("same n") - &alpha_ej.mul(&ei_bar).expect("same n");
            sum = &sum + &term.scale(h);
        }
    }
    abar.mul(&sum)
        .expect("same n")
        .tau(Blade::scalar(n).expect("n in range"))
        .expect("same n")
}

fn scalar_tau(m: &Multivector<BigRational>) -> BigRational {
    m.tau(Blade::scalar(m.n()).expect("n in range")).expect("same n")
}

/// `[ᾱ e_j α]_0 = 0` and `[ᾱ α e_j]_0 = 0` for every `j`, which makes `I7`
/// vanish.
pub fn verify_scalar_annihilation(n: usize, trials: u64, seed: u64) -> Result<IdentityReport, VerifyError> {
    check_range(n, 1)?;
    Ok(run_trials("scalar annihilation", n, trials, seed, |rng| {
        let alpha = random_multivector(n, rng);
        let abar = alpha.bar();
        let abar_alpha = abar.mul(&alpha).expect("same n");
        for j in 1..=n {
            let ej = basis::<BigRational>(n, j, false);
            let first = abar.mul(&ej).expect("same n").mul(&alpha).expect("same n");
            let second = abar_alpha.mul(&ej).expect("same n");
            if !first.scalar_part().is_zero() || !second.scalar_part().is_zero() {
                return Err(failure(format!("nonzero scalar part for j = {j}"), &[&alpha]));
            }
        }
        Ok(())
    }))
}

/// `Σ_i c_i τ_0(ᾱ e_i α ē_i - ᾱ α)` against the closed form of `I5`.
pub fn verify_i5(n: usize, trials: u64, seed: u64) -> Result<IdentityReport, VerifyError> {
    check_range(n, 1)?;
    Ok(run_trials("I5 closed form", n, trials, seed, |rng| {
        let alpha = random_multivector(n, rng);
        let diag: Vec<BigRational> = (0..=n).map(|_| random_rational(rng)).collect();
        let hess = HessianStub::from_fn(n, |i, j| if i == j { diag[i].clone() } else { BigRational::zero() })
            .expect("diagonal is symmetric");
        let abar = alpha.bar();
        let abar_alpha = abar.mul(&alpha).expect("same n");
        let mut lhs = BigRational::zero();
        for (i, d) in diag.iter().enumerate().skip(1) {
            let ei = basis::<BigRational>(n, i, false);
            let ei_bar = basis::<BigRational>(n, i, true);
            let t = &abar.mul(&ei).expect("same n").mul(&alpha).expect("same n").mul(&ei_bar).expect("same n") - &abar_alpha;
            lhs += scalar_tau(&t) * d;
        }
        let rhs = i5_closed(&alpha, &hess);
        if lhs == rhs {
            Ok(())
        } else {
            Err(failure(format!("brute force {lhs}, closed form {rhs}"), &[&alpha]))
        }
    }))
}

struct Tally {
    checked: u64,
    mismatches: u64,
    first: Option<String>,
}

/// The per-family sign formulas for `[ē_A e_i e_B ē_j]_0`, `i ≠ j`.
///
/// Every `(A, B, i, j)` is enumerated: a configuration must give a nonzero
/// scalar part exactly when it falls in one of the four families, with the
/// sign of the corrected rule. Printed-rule disagreements are tallied into
/// `printed_rules`. Random trials then compare the whole bilinear form
/// `τ_0(ᾱ e_i α ē_j)` with the family sum.
pub fn verify_i6_cases(n: usize, trials: u64, seed: u64) -> Result<IdentityReport, VerifyError> {
    check_range(n, 2)?;
    let m = 1u64 << n;
    let pairs = (n * n) as u64;
    let cases = m * m * pairs;
    let decode = |c: u64| {
        let (ab, ij) = (c / pairs, (c % pairs) as usize);
        let a = Blade::new(n, (ab / m) as u32).expect("mask in range");
        let b = Blade::new(n, (ab % m) as u32).expect("mask in range");
        (a, b, ij / n + 1, ij % n + 1)
    };
    // One pass: corrected rule against enumeration, plus (family, printed
    // rule agrees) for the tallies.
    type Outcome = (Result<(), Counterexample>, Option<(I6Family, bool)>);
    let outcomes: Vec<Outcome> = (0..cases)
        .into_par_iter()
        .map(|c| {
            let (a, b, i, j) = decode(c);
            if i == j {
                return (Ok(()), None);
            }
            let brute = brute_case_sign(a, b, i, j);
            let family = i6_family(a, b, i, j);
            let predicted = family.map(|f| i6_sign(f, a, b, i, j, SignRules::Corrected));
            let printed = family.map(|f| (f, Some(i6_sign(f, a, b, i, j, SignRules::Printed)) == brute));
            let res = if brute == predicted {
                Ok(())
            } else {
                Err(Counterexample {
                    trial: c,
                    seed: 0,
                    detail: format!("i = {i}, j = {j}: enumeration {brute:?}, corrected rule {predicted:?}"),
                    coefficients: Vec::new(),
                    blades: vec![a.to_string(), b.to_string()],
                })
            };
            (res, printed)
        })
        .collect();
    let mut tallies: Vec<Tally> = I6Family::ALL
        .iter()
        .map(|_| Tally {
            checked: 0,
            mismatches: 0,
            first: None,
        })
        .collect();
    for (c, (_, printed)) in outcomes.iter().enumerate() {
        let Some((f, ok)) = printed else { continue };
        let t = &mut tallies[I6Family::ALL.iter().position(|g| g == f).expect("listed family")];
        t.checked += 1;
        if !ok {
            t.mismatches += 1;
            if t.first.is_none() {
                let (a, b, i, j) = decode(c as u64);
                t.first = Some(format!("A = {a}, B = {b}, i = {i}, j = {j}"));
            }
        }
    }
    let enumeration = IdentityReport {
        identity: "case enumeration".to_string(),
        n,
        trials: cases,
        passes: outcomes.iter().filter(|o| o.0.is_ok()).count() as u64,
        seed: 0,
        counterexample: outcomes.into_iter().find_map(|o| o.0.err()),
        printed_rules: Vec::new(),
    };

    let mut forms = run_trials("bilinear form equals family sum", n, trials, seed, |rng| {
        let alpha = random_multivector(n, rng);
        let abar = alpha.bar();
        for i in 1..=n {
            let ei = basis::<BigRational>(n, i, false);
            let left = abar.mul(&ei).expect("same n").mul(&alpha).expect("same n");
            for j in 1..=n {
                if i == j {
                    continue;
                }
                let ej_bar = basis::<BigRational>(n, j, true);
                let brute = scalar_tau(&left.mul(&ej_bar).expect("same n"));
                let closed = i6_pair(&alpha, i, j, SignRules::Corrected);
                if brute != closed {
                    return Err(failure(format!("i = {i}, j = {j}: brute force {brute}, family sum {closed}"), &[&alpha]));
                }
            }
        }
        Ok(())
    });
    forms.printed_rules = I6Family::ALL
        .iter()
        .zip(tallies)
        .map(|(f, t)| RuleCheck {
            rule: format!("case {}", f.name()),
            printed_exponent: f.printed_exponent().to_string(),
            corrected_exponent: f.corrected_exponent().to_string(),
            checked: t.checked,
            mismatches: t.mismatches,
            first_mismatch: t.first,
        })
        .collect();

    Ok(merge("I6 case analysis", n, seed, vec![enumeration, forms]))
}

/// `[ē_A e_i e_B ē_j]_0` as a sign, or `None` when it is zero.
fn brute_case_sign(a: Blade, b: Blade, i: usize, j: usize) -> Option<Sign> {
    let n = a.n();
    let p: Multivector<BigRational> = Multivector::basis(a)
        .bar()
        .mul(&basis(n, i, false))
        .and_then(|x| x.mul(&Multivector::basis(b)))
        .and_then(|x| x.mul(&basis(n, j, true)))
        .expect("same n");
    let s = p.scalar_part();
    if s.is_zero() {
        None
    } else if s.is_nonnegative() {
        Some(Sign::Plus)
    } else {
        Some(Sign::Minus)
    }
}

/// Assembling `I4` from the closed forms (`I5 + I6`, `I7 = 0`) against the
/// brute-force `I4` for random symmetric Hessian stubs. The printed `I6`
/// signs are tallied as a rule check.
pub fn verify_i3_assembly(n: usize, trials: u64, seed: u64) -> Result<IdentityReport, VerifyError> {
    check_range(n, 1)?;
    let mut report = run_trials("I3 integrand assembly", n, trials, seed, |rng| {
        let alpha = random_multivector(n, rng);
        let hess = HessianStub::random(n, rng);
        let brute = i4_brute(&alpha, &hess);
        let closed = i4_closed(&alpha, &hess, SignRules::Corrected);
        if brute == closed {
            Ok(())
        } else {
            Err(failure(format!("brute force {brute}, assembled {closed}"), &[&alpha]))
        }
    });
    let outcomes: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = super::trial_rng(seed, t);
            let alpha = random_multivector(n, &mut rng);
            let hess = HessianStub::random(n, &mut rng);
            i4_brute(&alpha, &hess) == i4_closed(&alpha, &hess, SignRules::Printed)
        })
        .collect();
    let first = outcomes.iter().position(|ok| !ok);
    report.printed_rules.push(RuleCheck {
        rule: "aggregate I6 display".into(),
        printed_exponent: "c1: r^2+1-p(i)-p(j); c2: r^2+1; c3, c4: r^2-h(j)-h(i)".into(),
        corrected_exponent: "c2: r^2+1+p_B(i)+p_A(j); c3, c4: extra sign when i > j".into(),
        checked: trials,
        mismatches: outcomes.iter().filter(|ok| !**ok).count() as u64,
        first_mismatch: first.map(|t| format!("trial {t}")),
    });
    Ok(report)
}

/// `I4 ≥ 0` for stubs with zero spatial mixed entries and non-positive
/// spatial diagonal.
pub fn verify_i3_nonnegative(n: usize, trials: u64, seed: u64) -> Result<IdentityReport, VerifyError> {
    check_range(n, 1)?;
    Ok(run_trials("I3 nonnegative for admissible Hessians", n, trials, seed, |rng| {
        let alpha = random_multivector(n, rng);
        let hess = HessianStub::random_admissible(n, rng);
        let v = i4_brute(&alpha, &hess);
        if v.is_nonnegative() {
            Ok(())
        } else {
            Err(failure(format!("I4 = {v}"), &[&alpha]))
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational;

    fn blade(n: usize, idx: &[usize]) -> Blade {
        Blade::from_indices(n, idx).unwrap()
    }

    #[test]
    fn c1_example() {
        let (a, b) = (blade(2, &[1]), blade(2, &[2]));
        assert_eq!(i6_family(a, b, 1, 2), Some(I6Family::C1));
        assert_eq!(i6_sign(I6Family::C1, a, b, 1, 2, SignRules::Printed), Sign::Plus);
        assert_eq!(brute_case_sign(a, b, 1, 2), Some(Sign::Plus));
    }

    #[test]
    fn outside_families_is_zero() {
        for a in 0..16u32 {
            for b in 0..16u32 {
                for i in 1..=4 {
                    for j in 1..=4 {
                        if i == j {
                            continue;
                        }
                        let (a, b) = (Blade::new(4, a).unwrap(), Blade::new(4, b).unwrap());
                        if i6_family(a, b, i, j).is_none() {
                            assert_eq!(brute_case_sign(a, b, i, j), None);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn i5_example() {
        let alpha = Multivector::basis(blade(2, &[1]));
        let hess = HessianStub::from_fn(2, |i, j| if i == j { rational(1, 1) } else { rational(0, 1) }).unwrap();
        assert_eq!(i5_closed(&alpha, &hess), rational(-8, 1));
        assert_eq!(i4_brute(&alpha, &hess), rational(-8, 1));
    }

    #[test]
    fn scalar_alpha_has_no_i5() {
        let alpha = Multivector::scalar(3, rational(5, 2)).unwrap();
        let hess = HessianStub::from_fn(3, |i, j| if i == j { rational(-3, 1) } else { rational(0, 1) }).unwrap();
        assert!(i5_closed(&alpha, &hess).is_zero());
    }

    #[test]
    fn stub_must_be_symmetric() {
        assert!(HessianStub::new(1, vec![rational(1, 1), rational(2, 1), rational(3, 1), rational(1, 1)]).is_none());
    }

    #[test]
    fn suites_pass_small() {
        for r in [
            verify_scalar_annihilation(3, 20, 1).unwrap(),
            verify_i5(3, 20, 1).unwrap(),
            verify_i6_cases(3, 20, 1).unwrap(),
            verify_i3_assembly(3, 20, 1).unwrap(),
            verify_i3_nonnegative(3, 20, 1).unwrap(),
        ] {
            assert!(r.passed(), "{r:?}");
        }
    }
}
