//! Unit complex numbers and the structure-constant table.
//!
//! A [`Phase`] is either an exact rational rotation `e^{2πiq}` with `q` kept
//! in `[0, 1)` or, as a fallback for irrational constants, a float angle.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, Copy)]
pub enum Phase {
    /// `e^{2πiq}`, `q ∈ [0, 1)`.
    Exact(Rational),
    /// `e^{iθ}`, `θ ∈ [0, 2π)`.
    Approx(f64),
}

fn frac(q: Rational) -> Rational {
    q - q.floor()
}

impl Phase {
    pub fn one() -> Self {
        Phase::Exact(Rational::zero())
    }

    /// `e^{2πi p/q}`.
    pub fn turns(p: i64, q: i64) -> Self {
        assert!(q != 0, "phase denominator must be non-zero");
        Phase::Exact(frac(Rational::new(p, q)))
    }

    pub fn exact(q: Rational) -> Self {
        Phase::Exact(frac(q))
    }

    pub fn radians(theta: f64) -> Self {
        Phase::Approx(theta.rem_euclid(TAU))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Phase::Exact(_))
    }

    pub fn is_one(&self) -> bool {
        match self {
            Phase::Exact(q) => q.is_zero(),
            Phase::Approx(t) => *t == 0.0,
        }
    }

    /// Rotation in turns, when exact.
    pub fn as_turns(&self) -> Option<Rational> {
        match self {
            Phase::Exact(q) => Some(*q),
            Phase::Approx(_) => None,
        }
    }

    pub fn angle(&self) -> f64 {
        match self {
            Phase::Exact(q) => TAU * (*q.numer() as f64) / (*q.denom() as f64),
            Phase::Approx(t) => *t,
        }
    }

    pub fn as_complex(&self) -> Complex64 {
        match self {
            Phase::Exact(q) => {
                // exact values at quarter turns avoid sin(π) noise
                let (n, d) = (*q.numer(), *q.denom());
                match (n, d) {
                    (0, _) => Complex64::new(1.0, 0.0),
                    (1, 4) => Complex64::new(0.0, 1.0),
                    (1, 2) => Complex64::new(-1.0, 0.0),
                    (3, 4) => Complex64::new(0.0, -1.0),
                    _ => Complex64::from_polar(1.0, self.angle()),
                }
            }
            Phase::Approx(t) => Complex64::from_polar(1.0, *t),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, other: Phase) -> Phase {
        match (self, other) {
            (Phase::Exact(p), Phase::Exact(q)) => Phase::Exact(frac(p + q)),
            (a, b) => Phase::radians(a.angle() + b.angle()),
        }
    }

    pub fn conj(self) -> Phase {
        self.pow(-1)
    }

    pub fn pow(self, k: i64) -> Phase {
        match self {
            Phase::Exact(q) => {
                let den = *q.denom();
                // reduce k first so k·numer cannot overflow
                let k = k.mod_floor(&den);
                let num = (*q.numer() as i128 * k as i128).mod_floor(&(den as i128));
                Phase::Exact(Rational::new(num as i64, den))
            }
            Phase::Approx(t) => Phase::radians(t * k as f64),
        }
    }

    /// Smallest `m ≥ 1` with `self^m = 1`, when exact.
    pub fn order(&self) -> Option<i64> {
        self.as_turns().map(|q| *q.denom())
    }
}

impl PartialEq for Phase {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Phase::Exact(p), Phase::Exact(q)) => p == q,
            (Phase::Approx(a), Phase::Approx(b)) => a == b,
            _ => false,
        }
    }
}

impl Default for Phase {
    fn default() -> Self {
        Phase::one()
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Exact(q) => write!(f, "w({}/{})", q.numer(), q.denom()),
            Phase::Approx(t) => write!(f, "e^({t}i)"),
        }
    }
}

/// Wire form: `{"num": p, "den": q}` or `{"rad": θ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(untagged)]
pub enum PhaseRepr {
    Exact { num: i64, den: i64 },
    Approx { rad: f64 },
}

impl From<Phase> for PhaseRepr {
    fn from(p: Phase) -> Self {
        match p {
            Phase::Exact(q) => PhaseRepr::Exact { num: *q.numer(), den: *q.denom() },
            Phase::Approx(t) => PhaseRepr::Approx { rad: t },
        }
    }
}

impl TryFrom<PhaseRepr> for Phase {
    type Error = Error;

    fn try_from(r: PhaseRepr) -> Result<Phase> {
        match r {
            PhaseRepr::Exact { den: 0, .. } => {
                Err(Error::Unsupported("phase with zero denominator".into()))
            }
            PhaseRepr::Exact { num, den } => Ok(Phase::turns(num, den)),
            PhaseRepr::Approx { rad } if rad.is_finite() => Ok(Phase::radians(rad)),
            PhaseRepr::Approx { .. } => Err(Error::Unsupported("non-finite phase angle".into())),
        }
    }
}

impl Serialize for Phase {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PhaseRepr::from(*self).serialize(s)
    }
}

/// The table `z_ij` of an n-tuple: `z_ii = 1`, `z_ji = conj(z_ij)`.
///
/// Indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    n: usize,
    z: Vec<Phase>,
}

impl StructureConstants {
    /// Builds the table from its strictly upper part. Missing pairs default
    /// to `z = 1`.
    pub fn new(n: usize, upper: &[(usize, usize, Phase)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyTuple);
        }
        let mut z = vec![Phase::one(); n * n];
        let mut seen = vec![false; n * n];
        for &(i, j, p) in upper {
            if i >= j || j >= n {
                return Err(Error::PairOutOfRange { i, j, n });
            }
            if seen[i * n + j] {
                return Err(Error::DuplicatePair(i, j));
            }
            seen[i * n + j] = true;
            z[i * n + j] = p;
            z[j * n + i] = p.conj();
        }
        Ok(StructureConstants { n, z })
    }

    /// All constants equal to 1.
    pub fn commuting(n: usize) -> Self {
        StructureConstants::new(n, &[]).expect("n >= 1")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn z(&self, i: usize, j: usize) -> Phase {
        self.z[i * self.n + j]
    }

    pub fn is_exact(&self) -> bool {
        self.z.iter().all(Phase::is_exact)
    }

    /// Strict upper triangle, row by row.
    pub fn upper(&self) -> Vec<(usize, usize, Phase)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                out.push((i, j, self.z(i, j)));
            }
        }
        out
    }

    /// The table restricted to `indices` (in the given order), renumbered
    /// from 0.
    pub fn restrict(&self, indices: &[usize]) -> Self {
        let m = indices.len().max(1);
        let mut upper = Vec::new();
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate().skip(a + 1) {
                upper.push((a, b, self.z(i, j)));
            }
        }
        StructureConstants::new(m, &upper).expect("restriction is well formed")
    }

    /// First pair `(i, j)`, `i < j`, where the tables differ.
    pub fn first_difference(&self, other: &Self) -> Option<(usize, usize)> {
        if self.n != other.n {
            return Some((0, self.n.max(other.n) - 1));
        }
        self.upper()
            .into_iter()
            .find(|&(i, j, p)| p != other.z(i, j))
            .map(|(i, j, _)| (i, j))
    }

    pub fn ensure_matches(&self, other: &Self) -> Result<()> {
        match self.first_difference(other) {
            None => Ok(()),
            Some((i, j)) if self.n == other.n => Err(Error::ConstantsMismatch {
                i: i + 1,
                j: j + 1,
                left: self.z(i, j).to_string(),
                right: other.z(i, j).to_string(),
            }),
            Some(_) => Err(Error::SignatureMismatch(format!(
                "tuple sizes differ: n = {} vs n = {}",
                self.n, other.n
            ))),
        }
    }
}

impl fmt::Display for StructureConstants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}", self.n)?;
        for (i, j, p) in self.upper() {
            write!(f, " z{}{}={}", i + 1, j + 1, p)?;
        }
        Ok(())
    }
}

impl One for Phase {
    fn one() -> Self {
        Phase::one()
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase::mul(self, rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn mul_examples() {
        assert_eq!(Phase::turns(1, 4).mul(Phase::turns(1, 4)), Phase::turns(1, 2));
        assert_eq!(Phase::turns(3, 7).mul(Phase::one()), Phase::turns(3, 7));
        let p = Phase::turns(2, 3).mul(Phase::turns(2, 3));
        assert_eq!(p, Phase::turns(1, 3));
        let float = Phase::turns(2, 3).as_complex() * Phase::turns(2, 3).as_complex();
        assert!(close(p.as_complex(), float));
    }

    #[test]
    fn pow_examples() {
        assert_eq!(Phase::turns(1, 4).pow(-1), Phase::turns(3, 4));
        assert_eq!(Phase::turns(5, 9).pow(0), Phase::one());
        let p = Phase::turns(1, 3).pow(-2);
        assert_eq!(p, Phase::turns(1, 3));
        assert!(close(p.as_complex(), Phase::turns(1, 3).as_complex().powi(-2)));
        assert_eq!(Phase::turns(1, 4).conj(), Phase::turns(1, 4).pow(-1));
    }

    #[test]
    fn approx_demotes() {
        let p = Phase::turns(1, 4).mul(Phase::radians(0.5));
        assert!(!p.is_exact());
        assert!(close(p.as_complex(), Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2 + 0.5)));
    }

    #[test]
    fn constants_examples() {
        let one = StructureConstants::new(1, &[]).unwrap();
        assert_eq!(one.z(0, 0), Phase::one());

        let two = StructureConstants::new(2, &[(0, 1, Phase::turns(1, 4))]).unwrap();
        assert_eq!(two.z(0, 1), Phase::turns(1, 4));
        assert_eq!(two.z(1, 0), Phase::turns(3, 4));

        let three = StructureConstants::new(3, &[(0, 1, Phase::turns(1, 2))]).unwrap();
        assert_eq!(three.z(0, 2), Phase::one());
        assert_eq!(three.z(1, 2), Phase::one());
        assert_eq!(three.z(1, 0), Phase::turns(1, 2));
    }

    #[test]
    fn constants_errors() {
        let p = Phase::turns(1, 3);
        assert_eq!(
            StructureConstants::new(2, &[(0, 1, p), (0, 1, p)]),
            Err(Error::DuplicatePair(0, 1))
        );
        assert!(matches!(
            StructureConstants::new(2, &[(0, 2, p)]),
            Err(Error::PairOutOfRange { .. })
        ));
        assert!(matches!(
            StructureConstants::new(2, &[(1, 0, p)]),
            Err(Error::PairOutOfRange { .. })
        ));
        assert_eq!(StructureConstants::new(0, &[]), Err(Error::EmptyTuple));
    }

    #[test]
    fn restrict_renumbers() {
        let zc = StructureConstants::new(
            3,
            &[(0, 1, Phase::turns(1, 4)), (0, 2, Phase::turns(1, 3)), (1, 2, Phase::turns(1, 5))],
        )
        .unwrap();
        let r = zc.restrict(&[0, 2]);
        assert_eq!(r.n(), 2);
        assert_eq!(r.z(0, 1), Phase::turns(1, 3));
    }
}
