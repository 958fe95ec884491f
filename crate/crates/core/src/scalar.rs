//! Exact scalars: rational combinations of roots of unity, with a complex
//! float fallback.
//!
//! A [`Cyclo`] stores `Σ c_q · e^{2πiq}` with `q ∈ [0, 1/2)` (the sign absorbs
//! the half turn). Because roots of unity are linearly dependent, zero
//! testing reduces the sum modulo the cyclotomic polynomial of the common
//! order, which is the minimal polynomial of the primitive root.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::phase::{Phase, Rational};

/// Magnitude below which float scalars are treated as zero.
pub const FLOAT_ZERO: f64 = 1e-14;

#[derive(Debug, Clone, Default)]
pub struct Cyclo {
    // sorted by phase, no zero coefficients
    terms: Vec<(Rational, Rational)>,
}

fn half() -> Rational {
    Rational::new(1, 2)
}

impl Cyclo {
    pub fn zero() -> Self {
        Cyclo { terms: Vec::new() }
    }

    pub fn rational(c: Rational) -> Self {
        Cyclo::from_terms([(Rational::zero(), c)])
    }

    pub fn phase(q: Rational) -> Self {
        Cyclo::from_terms([(q, Rational::one())])
    }

    /// Normalizes arbitrary `(turns, coefficient)` pairs.
    pub fn from_terms<I: IntoIterator<Item = (Rational, Rational)>>(iter: I) -> Self {
        let mut acc: BTreeMap<Rational, Rational> = BTreeMap::new();
        for (q, c) in iter {
            if c.is_zero() {
                continue;
            }
            let mut q = q - q.floor();
            let mut c = c;
            if q >= half() {
                q -= half();
                c = -c;
            }
            *acc.entry(q).or_insert_with(Rational::zero) += c;
        }
        Cyclo { terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn terms(&self) -> &[(Rational, Rational)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        match self.terms.len() {
            0 => true,
            1 => false,
            _ => reduce(&self.terms).iter().all(Zero::is_zero),
        }
    }

    /// The value as a rational number, if it is one.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.as_slice() {
            [] => Some(Rational::zero()),
            [(q, c)] => q.is_zero().then_some(*c),
            _ => {
                let r = reduce(&self.terms);
                r.iter().skip(1).all(Zero::is_zero).then(|| r[0])
            }
        }
    }

    /// `Some((c, q))` when the value is `c · e^{2πiq}` with a single term.
    pub fn as_monomial(&self) -> Option<(Rational, Rational)> {
        match self.terms.as_slice() {
            [(q, c)] => Some((*c, *q)),
            _ => None,
        }
    }

    pub fn conj(&self) -> Self {
        Cyclo::from_terms(self.terms.iter().map(|&(q, c)| (-q, c)))
    }

    pub fn to_complex(&self) -> Complex64 {
        self.terms
            .iter()
            .map(|&(q, c)| {
                let r = *c.numer() as f64 / *c.denom() as f64;
                Phase::exact(q).as_complex() * r
            })
            .sum()
    }

    pub fn mul(&self, other: &Cyclo) -> Cyclo {
        if self.terms.len() == 1 && other.terms.len() == 1 {
            let (p, a) = self.terms[0];
            let (q, b) = other.terms[0];
            return Cyclo::from_terms([(p + q, a * b)]);
        }
        Cyclo::from_terms(
            self.terms
                .iter()
                .flat_map(|&(p, a)| other.terms.iter().map(move |&(q, b)| (p + q, a * b))),
        )
    }

    pub fn add(&self, other: &Cyclo) -> Cyclo {
        Cyclo::from_terms(self.terms.iter().chain(other.terms.iter()).copied())
    }

    pub fn neg(&self) -> Cyclo {
        Cyclo { terms: self.terms.iter().map(|&(q, c)| (q, -c)).collect() }
    }
}

/// Coefficients (low to high) of the reduced polynomial in `ζ_N`.
fn reduce(terms: &[(Rational, Rational)]) -> Vec<Rational> {
    let order = terms.iter().fold(1i64, |acc, (q, _)| acc.lcm(q.denom()));
    let phi = cyclotomic_polynomial(order);
    let degree = phi.len() - 1;
    let mut poly = vec![Rational::zero(); (order as usize).max(degree)];
    for &(q, c) in terms {
        let e = (q * order).to_integer() as usize;
        poly[e] += c;
    }
    for top in (degree..poly.len()).rev() {
        let c = poly[top];
        if c.is_zero() {
            continue;
        }
        // subtract c·x^{top-degree}·Φ (Φ is monic)
        for (k, &p) in phi.iter().enumerate() {
            if p != 0 {
                poly[top - degree + k] -= c * p;
            }
        }
    }
    poly.truncate(degree.max(1));
    poly
}

/// Integer coefficients of `Φ_N`, low to high, memoized.
pub fn cyclotomic_polynomial(order: i64) -> Vec<i64> {
    static CACHE: OnceLock<Mutex<HashMap<i64, Vec<i64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(p) = cache.lock().unwrap().get(&order) {
        return p.clone();
    }
    let p = compute_cyclotomic(order);
    cache.lock().unwrap().insert(order, p.clone());
    p
}

fn mobius(mut m: i64) -> i64 {
    let mut result = 1;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if m > 1 {
        result = -result;
    }
    result
}

// Φ_N = ∏_{d | N} (x^d − 1)^{μ(N/d)}
fn compute_cyclotomic(order: i64) -> Vec<i64> {
    assert!(order >= 1);
    let divisors: Vec<i64> = (1..=order).filter(|d| order % d == 0).collect();
    let mut poly = vec![1i64];
    for &d in &divisors {
        if mobius(order / d) == 1 {
            // multiply by x^d − 1
            let mut next = vec![0i64; poly.len() + d as usize];
            for (k, &c) in poly.iter().enumerate() {
                next[k + d as usize] += c;
                next[k] -= c;
            }
            poly = next;
        }
    }
    for &d in &divisors {
        if mobius(order / d) == -1 {
            // exact division by x^d − 1: q_k = q_{k-d} − p_k, top-down
            let d = d as usize;
            let n = poly.len() - d;
            let mut quotient = vec![0i64; n];
            let mut rem = poly.clone();
            for k in (0..n).rev() {
                let c = rem[k + d];
                quotient[k] = c;
                rem[k + d] -= c;
                rem[k] += c;
            }
            debug_assert!(rem.iter().all(|&c| c == 0));
            poly = quotient;
        }
    }
    poly
}

/// A field element: exact cyclotomic when possible, complex float otherwise.
#[derive(Debug, Clone)]
pub enum Scalar {
    Exact(Cyclo),
    Float(Complex64),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(Cyclo::zero())
    }

    pub fn one() -> Self {
        Scalar::from_int(1)
    }

    pub fn from_int(k: i64) -> Self {
        Scalar::Exact(Cyclo::rational(Rational::from_integer(k)))
    }

    pub fn from_rational(c: Rational) -> Self {
        Scalar::Exact(Cyclo::rational(c))
    }

    pub fn from_phase(p: Phase) -> Self {
        match p {
            Phase::Exact(q) => Scalar::Exact(Cyclo::phase(q)),
            Phase::Approx(_) => Scalar::Float(p.as_complex()),
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        Scalar::Float(z)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(c) => c.is_zero(),
            Scalar::Float(z) => z.norm() < FLOAT_ZERO,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Exact(c) => c.as_rational() == Some(Rational::one()),
            Scalar::Float(z) => (z - 1.0).norm() < FLOAT_ZERO,
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Scalar::Exact(c) => c.to_complex(),
            Scalar::Float(z) => *z,
        }
    }

    pub fn conj(&self) -> Scalar {
        match self {
            Scalar::Exact(c) => Scalar::Exact(c.conj()),
            Scalar::Float(z) => Scalar::Float(z.conj()),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.to_complex().norm_sqr()
    }

    /// Exact `|x|²` when the value is a single rational-times-root term.
    pub fn exact_norm_sqr(&self) -> Option<Rational> {
        match self {
            Scalar::Exact(c) => match c.terms() {
                [] => Some(Rational::zero()),
                [(_, r)] => Some(r * r),
                _ => c.mul(&c.conj()).as_rational(),
            },
            Scalar::Float(_) => None,
        }
    }

    pub fn as_rational(&self) -> Option<Rational> {
        match self {
            Scalar::Exact(c) => c.as_rational(),
            Scalar::Float(_) => None,
        }
    }

    /// Exact equality when both are exact, otherwise within `FLOAT_ZERO`.
    pub fn approx_eq(&self, other: &Scalar) -> bool {
        (self.clone() - other.clone()).is_zero()
    }

    /// Reduces an exact value that is secretly zero to the canonical zero.
    pub fn pruned(self) -> Option<Scalar> {
        (!self.is_zero()).then_some(self)
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Scalar) -> bool {
        self.approx_eq(other)
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl From<Phase> for Scalar {
    fn from(p: Phase) -> Self {
        Scalar::from_phase(p)
    }
}

impl From<i64> for Scalar {
    fn from(k: i64) -> Self {
        Scalar::from_int(k)
    }
}

impl From<Complex64> for Scalar {
    fn from(z: Complex64) -> Self {
        Scalar::Float(z)
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.add(&b)),
            (a, b) => Scalar::Float(a.to_complex() + b.to_complex()),
        }
    }
}

impl AddAssign for Scalar {
    fn add_assign(&mut self, rhs: Scalar) {
        let lhs = std::mem::take(self);
        *self = lhs + rhs;
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        self + (-rhs)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(a.neg()),
            Scalar::Float(z) => Scalar::Float(-z),
        }
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        &self * &rhs
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.mul(b)),
            (a, b) => Scalar::Float(a.to_complex() * b.to_complex()),
        }
    }
}

impl Mul<Phase> for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Phase) -> Scalar {
        if rhs.is_one() {
            return self;
        }
        self * Scalar::from_phase(rhs)
    }
}

fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.as_rational() {
            return write!(f, "{}", fmt_rational(&r));
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|&(q, c)| {
                // print negative multiples of a non-trivial root as the opposite root
                let (c, q) = if c.is_negative() && !q.is_zero() { (-c, q + half()) } else { (c, q) };
                let root = Phase::exact(q);
                if q.is_zero() {
                    fmt_rational(&c)
                } else if c.is_one() {
                    root.to_string()
                } else {
                    format!("{}·{}", fmt_rational(&c), root)
                }
            })
            .collect();
        if parts.len() == 1 {
            write!(f, "{}", parts[0])
        } else {
            write!(f, "({})", parts.join(" + "))
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(c) => write!(f, "{c}"),
            Scalar::Float(z) => write!(f, "({}{:+}i)", z.re, z.im),
        }
    }
}
