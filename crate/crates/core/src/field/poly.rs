use std::collections::BTreeMap;

use rand::Rng;

use crate::algebra::{generator_action, product_sign, Multivector, Side};

/// Real polynomial in `x_0..x_n`, keyed by exponent vectors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    terms: BTreeMap<Vec<u8>, f64>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn monomial(exponents: Vec<u8>, coeff: f64) -> Poly {
        let mut p = Poly::zero();
        p.add_term(exponents, coeff);
        p
    }

    fn add_term(&mut self, exponents: Vec<u8>, coeff: f64) {
        if coeff == 0.0 {
            return;
        }
        let e = self.terms.entry(exponents).or_insert(0.0);
        *e += coeff;
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u8], f64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&d| d as u32).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(x).map(|(&d, xi)| xi.powi(d as i32)).product::<f64>())
            .sum()
    }

    pub fn partial(&self, axis: usize) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in &self.terms {
            if e[axis] > 0 {
                let mut d = e.clone();
                d[axis] -= 1;
                out.add_term(d, c * e[axis] as f64);
            }
        }
        out
    }

    pub fn add(&self, other: &Poly, scale: f64) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), scale * c);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    /// Random polynomial in `vars` variables of total degree at most
    /// `degree`, each coefficient uniform in `[-1, 1]`.
    pub fn random<R: Rng>(vars: usize, degree: u32, rng: &mut R) -> Poly {
        let mut p = Poly::zero();
        for e in exponents_up_to(vars, degree) {
            p.add_term(e, rng.random_range(-1.0..=1.0));
        }
        p
    }
}

fn exponents_up_to(vars: usize, degree: u32) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    for _ in 0..vars {
        let mut next = Vec::new();
        for e in &out {
            let used: u32 = e.iter().map(|&d: &u8| d as u32).sum();
            for d in 0..=(degree - used) {
                let mut f = e.clone();
                f.push(d as u8);
                next.push(f);
            }
        }
        out = next;
    }
    out
}

/// Algebra-valued polynomial field `Σ_A p_A(x) e_A` with exact derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyTestField {
    n: usize,
    comps: Vec<Poly>,
}

impl PolyTestField {
    pub fn new(n: usize, comps: Vec<Poly>) -> PolyTestField {
        assert_eq!(comps.len(), 1 << n, "one polynomial per blade");
        PolyTestField { n, comps }
    }

    pub fn zero(n: usize) -> PolyTestField {
        PolyTestField::new(n, vec![Poly::zero(); 1 << n])
    }

    /// Every component random of total degree at most `degree`.
    pub fn random<R: Rng>(n: usize, degree: u32, rng: &mut R) -> PolyTestField {
        PolyTestField::new(n, (0..1 << n).map(|_| Poly::random(n + 1, degree, rng)).collect())
    }

    /// Random paravector field `Σ_{i=0}^n e_i v_i(x)`.
    pub fn random_paravector<R: Rng>(n: usize, degree: u32, rng: &mut R) -> PolyTestField {
        let mut f = PolyTestField::zero(n);
        f.comps[0] = Poly::random(n + 1, degree, rng);
        for i in 1..=n {
            f.comps[1 << (i - 1)] = Poly::random(n + 1, degree, rng);
        }
        f
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn component(&self, mask: usize) -> &Poly {
        &self.comps[mask]
    }

    pub fn eval(&self, x: &[f64]) -> Multivector<f64> {
        Multivector::from_coeffs(self.n, self.comps.iter().map(|p| p.eval(x)).collect()).expect("n in range")
    }

    pub fn partial(&self, axis: usize) -> PolyTestField {
        PolyTestField::new(self.n, self.comps.iter().map(|p| p.partial(axis)).collect())
    }

    pub fn add(&self, other: &PolyTestField, scale: f64) -> PolyTestField {
        PolyTestField::new(
            self.n,
            self.comps.iter().zip(&other.comps).map(|(a, b)| a.add(b, scale)).collect(),
        )
    }

    /// Pointwise Clifford product.
    pub fn mul(&self, other: &PolyTestField) -> PolyTestField {
        let mut out = vec![Poly::zero(); 1 << self.n];
        for (a, pa) in self.comps.iter().enumerate() {
            for (b, pb) in other.comps.iter().enumerate() {
                let sign = if product_sign(a as u32, b as u32).is_minus() {
                    -1.0
                } else {
                    1.0
                };
                out[a ^ b] = out[a ^ b].add(&pa.mul(pb), sign);
            }
        }
        PolyTestField::new(self.n, out)
    }

    /// Exact `Σ_i e_i ∂_i f` (left) or `Σ_i ∂_i f e_i` (right), with `ē_i`
    /// when `conjugated`.
    pub fn dirac(&self, side: Side, conjugated: bool) -> PolyTestField {
        let mut out = vec![Poly::zero(); 1 << self.n];
        for axis in 0..=self.n {
            for (a, p) in self.comps.iter().enumerate() {
                let (t, neg) = generator_action(axis, a as u32, side, conjugated);
                out[t as usize] = out[t as usize].add(&p.partial(axis), if neg { -1.0 } else { 1.0 });
            }
        }
        PolyTestField::new(self.n, out)
    }

    pub fn laplacian(&self) -> PolyTestField {
        let comps = self
            .comps
            .iter()
            .map(|p| (0..=self.n).fold(Poly::zero(), |acc, i| acc.add(&p.partial(i).partial(i), 1.0)))
            .collect();
        PolyTestField::new(self.n, comps)
    }

    pub fn bar(&self) -> PolyTestField {
        let comps = self
            .comps
            .iter()
            .enumerate()
            .map(|(a, p)| {
                let r = (a as u32).count_ones();
                if (r * (r + 1) / 2) % 2 == 1 {
                    Poly::zero().add(p, -1.0)
                } else {
                    p.clone()
                }
            })
            .collect();
        PolyTestField::new(self.n, comps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn poly_basics() {
        let p = Poly::monomial(vec![2, 1], 3.0).add(&Poly::monomial(vec![0, 0], 1.0), 1.0);
        assert_eq!(p.eval(&[2.0, 5.0]), 61.0);
        assert_eq!(p.partial(0).eval(&[2.0, 5.0]), 60.0);
        assert_eq!(p.degree(), 3);
        assert_eq!(p.mul(&p).degree(), 6);
    }

    #[test]
    fn exponent_count() {
        // C(4 + 2, 2) monomials of degree <= 4 in 2 variables.
        assert_eq!(exponents_up_to(2, 4).len(), 15);
    }

    #[test]
    fn identity_function_is_monogenic() {
        // x_0 + e_1 x_1 in n = 1.
        let f = PolyTestField::new(
            1,
            vec![Poly::monomial(vec![1, 0], 1.0), Poly::monomial(vec![0, 1], 1.0)],
        );
        let d = f.dirac(Side::Left, false);
        assert_eq!(d.eval(&[0.3, 0.7]).coeffs(), &[0.0, 0.0]);
    }

    #[test]
    fn random_is_seeded() {
        let a = PolyTestField::random(2, 4, &mut ChaCha8Rng::seed_from_u64(1));
        let b = PolyTestField::random(2, 4, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a, b);
    }
}
