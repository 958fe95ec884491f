use std::collections::BTreeMap;
use std::fmt;

use crate::phase::{Phase, StructureConstants};
use crate::scalar::Scalar;

use super::monomial::{Letter, Monomial};

type Pattern = Vec<(u32, u32)>;

/// A finite linear combination of normal-ordered words.
#[derive(Debug, Clone)]
pub struct FormalSum {
    n: usize,
    terms: BTreeMap<Pattern, Scalar>,
}

impl FormalSum {
    pub fn zero(n: usize) -> Self {
        FormalSum { n, terms: BTreeMap::new() }
    }

    pub fn one(n: usize) -> Self {
        FormalSum::scalar(n, Scalar::one())
    }

    pub fn scalar(n: usize, c: Scalar) -> Self {
        let mut s = FormalSum::zero(n);
        s.add_term(vec![(0, 0); n], c);
        s
    }

    pub fn letter(n: usize, l: Letter) -> Self {
        FormalSum::from_monomial(&Monomial::letter(n, l))
    }

    pub fn from_monomial(m: &Monomial) -> Self {
        let mut s = FormalSum::zero(m.n());
        s.add_term(m.exps.clone(), Scalar::from_phase(m.phase));
        s
    }

    /// `V_i^k V_i^{*k}`.
    pub fn range_projection(n: usize, i: usize, k: u32) -> Self {
        let mut exps = vec![(0, 0); n];
        exps[i] = (k, k);
        FormalSum::from_monomial(&Monomial { phase: Phase::one(), exps })
    }

    /// `1 − V_i V_i*`.
    pub fn defect(n: usize, i: usize) -> Self {
        FormalSum::one(n).sub(&FormalSum::range_projection(n, i, 1))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Pattern, &Scalar)> {
        self.terms.iter()
    }

    fn add_term(&mut self, pattern: Pattern, c: Scalar) {
        let slot = self.terms.entry(pattern.clone()).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&pattern);
        }
    }

    pub fn add(&self, other: &FormalSum) -> FormalSum {
        assert_eq!(self.n, other.n, "formal sums over different n");
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add_term(p.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &FormalSum) -> FormalSum {
        self.add(&other.scale(&Scalar::from_int(-1)))
    }

    pub fn scale(&self, c: &Scalar) -> FormalSum {
        let mut out = FormalSum::zero(self.n);
        for (p, d) in &self.terms {
            out.add_term(p.clone(), c * d);
        }
        out
    }

    /// Distributive product with like-pattern collection.
    pub fn mul(&self, other: &FormalSum, zc: &StructureConstants) -> FormalSum {
        assert_eq!(self.n, other.n, "formal sums over different n");
        let mut out = FormalSum::zero(self.n);
        for (p, c) in &self.terms {
            let left = Monomial { phase: Phase::one(), exps: p.clone() };
            for (q, d) in &other.terms {
                let right = Monomial { phase: Phase::one(), exps: q.clone() };
                let m = left.mul(&right, zc);
                out.add_term(m.exps, (c * d) * m.phase);
            }
        }
        out
    }

    pub fn pow(&self, k: u32, zc: &StructureConstants) -> FormalSum {
        (0..k).fold(FormalSum::one(self.n), |acc, _| acc.mul(self, zc))
    }

    pub fn adjoint(&self, zc: &StructureConstants) -> FormalSum {
        let mut out = FormalSum::zero(self.n);
        for (p, c) in &self.terms {
            let m = Monomial { phase: Phase::one(), exps: p.clone() }.adjoint(zc);
            out.add_term(m.exps, c.conj() * m.phase);
        }
        out
    }

    /// Product of several sums, left to right.
    pub fn product<'a, I: IntoIterator<Item = &'a FormalSum>>(
        n: usize,
        factors: I,
        zc: &StructureConstants,
    ) -> FormalSum {
        factors.into_iter().fold(FormalSum::one(n), |acc, f| acc.mul(f, zc))
    }

    /// The sum as a single monomial, if it is one with a unit coefficient.
    pub fn as_monomial(&self) -> Option<Monomial> {
        if self.terms.len() != 1 {
            return None;
        }
        let (p, c) = self.terms.iter().next()?;
        let crate::scalar::Scalar::Exact(cy) = c else { return None };
        let (r, q) = cy.as_monomial()?;
        let phase = if r == num_rational::Ratio::from_integer(1) {
            Phase::exact(q)
        } else if r == num_rational::Ratio::from_integer(-1) {
            Phase::exact(q + num_rational::Ratio::new(1, 2))
        } else {
            return None;
        };
        Some(Monomial { phase, exps: p.clone() })
    }
}

impl PartialEq for FormalSum {
    fn eq(&self, other: &FormalSum) -> bool {
        self.n == other.n && verify_identity(self, other)
    }
}

/// True iff `lhs − rhs` has no surviving terms.
pub fn verify_identity(lhs: &FormalSum, rhs: &FormalSum) -> bool {
    lhs.sub(rhs).is_zero()
}

impl fmt::Display for FormalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (p, c)) in self.terms.iter().enumerate() {
            let negated = -c.clone();
            let (sign, c) = if negated.is_one() { ("-", &Scalar::one()) } else { ("+", c) };
            match (k, sign) {
                (0, "-") => write!(f, "-")?,
                (0, _) => {}
                _ => write!(f, " {sign} ")?,
            }
            let word = Monomial { phase: Phase::one(), exps: p.clone() }.word_string();
            let is_unit_pattern = p.iter().all(|&(a, b)| a == 0 && b == 0);
            if is_unit_pattern {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "{word}")?;
            } else {
                write!(f, "{c} · {word}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symalg::reduce_word;

    fn zc_i() -> StructureConstants {
        StructureConstants::new(2, &[(0, 1, Phase::turns(1, 4))]).unwrap()
    }

    /// `V_i^k (1 − V_i V_i*) V_i^{*k}`.
    fn shifted_defect(n: usize, i: usize, k: u32, zc: &StructureConstants) -> FormalSum {
        let vk = FormalSum::letter(n, Letter::v(i)).pow(k, zc);
        let vsk = FormalSum::letter(n, Letter::star(i)).pow(k, zc);
        FormalSum::product(n, [&vk, &FormalSum::defect(n, i), &vsk], zc)
    }

    #[test]
    fn sum_mul_examples() {
        let zc = zc_i();
        let d = FormalSum::defect(2, 0);
        assert!(verify_identity(&d.mul(&d, &zc), &d));
        assert!(d.mul(&FormalSum::letter(2, Letter::v(0)), &zc).is_zero());
        assert!(d.mul(&FormalSum::zero(2), &zc).is_zero());
    }

    #[test]
    fn adjoint_involution_and_antihomomorphism() {
        let zc = zc_i();
        let a = FormalSum::defect(2, 1).add(&FormalSum::letter(2, Letter::v(0)));
        let b = FormalSum::letter(2, Letter::star(1)).scale(&Scalar::from_phase(Phase::turns(1, 3)));
        assert!(verify_identity(&a.adjoint(&zc).adjoint(&zc), &a));
        let lhs = a.mul(&b, &zc).adjoint(&zc);
        let rhs = b.adjoint(&zc).mul(&a.adjoint(&zc), &zc);
        assert!(verify_identity(&lhs, &rhs));
    }

    #[test]
    fn moving_factors_instance() {
        // [V1(1−V1V1*)V1*][V2(1−V2V2*)V2*] = V1V2 (1−V1V1*)(1−V2V2*) V2*V1*
        let zc = zc_i();
        let n = 2;
        let lhs = shifted_defect(n, 0, 1, &zc).mul(&shifted_defect(n, 1, 1, &zc), &zc);
        let v = |i| FormalSum::letter(n, Letter::v(i));
        let s = |i| FormalSum::letter(n, Letter::star(i));
        let rhs = FormalSum::product(
            n,
            [&v(0), &v(1), &FormalSum::defect(n, 0), &FormalSum::defect(n, 1), &s(1), &s(0)],
            &zc,
        );
        assert!(verify_identity(&lhs, &rhs));
    }

    #[test]
    fn defects_at_different_depths_are_orthogonal() {
        let zc = StructureConstants::commuting(1);
        let p = shifted_defect(1, 0, 1, &zc).mul(&shifted_defect(1, 0, 2, &zc), &zc);
        assert!(p.is_zero());
    }

    #[test]
    fn isometry_relation() {
        let zc = zc_i();
        let w = reduce_word(&[Letter::star(0), Letter::v(0)], 2, &zc);
        assert!(verify_identity(&FormalSum::from_monomial(&w), &FormalSum::one(2)));
    }

    #[test]
    fn display() {
        let zc = zc_i();
        let d = FormalSum::defect(2, 0);
        assert_eq!(d.to_string(), "1 - V1 V1*");
        let m = reduce_word(&[Letter::star(0), Letter::v(1)], 2, &zc);
        assert_eq!(FormalSum::from_monomial(&m).to_string(), "w(3/4) · V2 V1*");
        assert_eq!(FormalSum::from_monomial(&m).as_monomial(), Some(m));
    }
}
