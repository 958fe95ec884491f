use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::phase::Phase;
use crate::scalar::Scalar;

use super::internal::{InternalOperator, ScalarMatrix};
use super::signature::{BasisKey, CoordKind, Signature};
use super::vector::SupportedVector;

/// Largest number of matrix entries `materialize` will allocate.
pub const MATERIALIZE_BUDGET: usize = 1 << 24;

/// `e_k ↦ w^k e_{k+s}` for `k ≥ t`, `0` below the threshold.
///
/// On a line coordinate the threshold is ignored and kept at 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandShiftFactor {
    pub shift: i64,
    pub threshold: i64,
    pub phase: Phase,
}

impl BandShiftFactor {
    pub const IDENTITY: BandShiftFactor =
        BandShiftFactor { shift: 0, threshold: 0, phase: Phase::Exact(num_rational::Ratio::new_raw(0, 1)) };

    /// Up-shift `e_k ↦ e_{k+1}`.
    pub fn up() -> Self {
        BandShiftFactor { shift: 1, ..Self::IDENTITY }
    }

    /// `e_k ↦ w^k e_k`.
    pub fn diagonal(w: Phase) -> Self {
        BandShiftFactor { phase: w, ..Self::IDENTITY }
    }

    pub fn new(shift: i64, threshold: i64, phase: Phase) -> Self {
        BandShiftFactor { shift, threshold, phase }
    }

    pub fn is_identity(&self) -> bool {
        self.shift == 0 && self.threshold == 0 && self.phase.is_one()
    }

    /// Image of `e_k` as `(phase, new index)`, or `None` below the threshold.
    pub fn act(&self, k: i64, kind: CoordKind) -> Option<(Phase, i64)> {
        if kind == CoordKind::HalfLine && k < self.threshold {
            return None;
        }
        Some((self.phase.pow(k), k + self.shift))
    }

    /// `self ∘ f`, returning the factor and the scalar it sheds.
    pub fn after(&self, f: &BandShiftFactor, kind: CoordKind) -> (BandShiftFactor, Phase) {
        let threshold = match kind {
            CoordKind::HalfLine => f.threshold.max(self.threshold - f.shift),
            CoordKind::Line => 0,
        };
        let out = BandShiftFactor { shift: f.shift + self.shift, threshold, phase: f.phase * self.phase };
        (out, self.phase.pow(f.shift))
    }

    pub fn adjoint(&self, kind: CoordKind) -> (BandShiftFactor, Phase) {
        let threshold = match kind {
            CoordKind::HalfLine => self.threshold + self.shift,
            CoordKind::Line => 0,
        };
        (BandShiftFactor { shift: -self.shift, threshold, phase: self.phase.conj() }, self.phase.pow(self.shift))
    }

    /// Half-line outputs stay in `ℕ₀`.
    pub fn is_valid(&self, kind: CoordKind) -> bool {
        match kind {
            CoordKind::HalfLine => self.threshold >= 0 && self.threshold >= -self.shift,
            CoordKind::Line => self.threshold == 0,
        }
    }
}

impl fmt::Display for BandShiftFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(s={}, t={}, w={})", self.shift, self.threshold, self.phase)
    }
}

/// `coeff · (⊗ factors) ⊗ internal` acting on one block.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub block: usize,
    pub coeff: Scalar,
    pub factors: Vec<BandShiftFactor>,
    pub internal: InternalOperator,
}

impl Term {
    fn same_shape(&self, other: &Term) -> bool {
        self.block == other.block && self.factors == other.factors && self.internal == other.internal
    }
}

/// Finite sum of band-shift terms on a (possibly block-tagged) lattice.
#[derive(Debug, Clone)]
pub struct StructuredOperator {
    sig: Signature,
    terms: Vec<Term>,
}

/// Outcome of a window comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowResidual {
    /// `max_x ‖f x − g x‖` over the window basis.
    pub residual: f64,
    /// Basis vector attaining the maximum.
    pub worst: Option<BasisKey>,
    /// First basis vector, in window order, where the two sides differ.
    pub first_violation: Option<BasisKey>,
}

impl WindowResidual {
    pub fn zero() -> Self {
        WindowResidual { residual: 0.0, worst: None, first_violation: None }
    }

    pub fn merge(self, other: WindowResidual) -> WindowResidual {
        let first_violation = self.first_violation.clone().or(other.first_violation.clone());
        let mut out = if other.residual > self.residual { other } else { self };
        out.first_violation = first_violation;
        out
    }
}

impl StructuredOperator {
    pub fn zero(sig: &Signature) -> Self {
        StructuredOperator { sig: sig.clone(), terms: Vec::new() }
    }

    pub fn identity(sig: &Signature) -> Self {
        let terms = sig
            .blocks
            .iter()
            .enumerate()
            .map(|(b, block)| Term {
                block: b,
                coeff: Scalar::one(),
                factors: vec![BandShiftFactor::IDENTITY; block.rank()],
                internal: InternalOperator::Identity,
            })
            .collect();
        StructuredOperator { sig: sig.clone(), terms }
    }

    /// Builds an operator from terms, merging like terms and dropping zeros.
    pub fn from_terms(sig: &Signature, terms: Vec<Term>) -> Result<Self> {
        let mut op = StructuredOperator::zero(sig);
        for t in terms {
            let Some(block) = sig.blocks.get(t.block) else {
                return Err(Error::SignatureMismatch(format!("term on block {} of {sig}", t.block)));
            };
            if t.factors.len() != block.rank() {
                return Err(Error::SignatureMismatch(format!(
                    "term with {} factors on a rank-{} block",
                    t.factors.len(),
                    block.rank()
                )));
            }
            if let Some(d) = t.internal.dim_hint() {
                if d != block.internal_dim {
                    return Err(Error::SignatureMismatch(format!(
                        "internal operator of dimension {d} on C^{}",
                        block.internal_dim
                    )));
                }
            }
            if let Some((k, f)) =
                t.factors.iter().zip(&block.coords).find(|(f, k)| !f.is_valid(**k)).map(|(f, k)| (k, f))
            {
                return Err(Error::Unsupported(format!("factor {f} invalid on a {k:?} coordinate")));
            }
            op.push(t);
        }
        Ok(op)
    }

    /// Single-block operator with one term.
    pub fn monomial(
        sig: &Signature,
        coeff: Scalar,
        factors: Vec<BandShiftFactor>,
        internal: InternalOperator,
    ) -> Result<Self> {
        StructuredOperator::from_terms(sig, vec![Term { block: 0, coeff, factors, internal }])
    }

    fn push(&mut self, t: Term) {
        if t.coeff.is_zero() {
            return;
        }
        if let Some(pos) = self.terms.iter().position(|u| u.same_shape(&t)) {
            let c = std::mem::take(&mut self.terms[pos].coeff) + t.coeff;
            if c.is_zero() {
                self.terms.remove(pos);
            } else {
                self.terms[pos].coeff = c;
            }
        } else {
            self.terms.push(t);
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_exact(&self) -> bool {
        self.terms.iter().all(|t| {
            t.coeff.is_exact() && t.internal.is_exact() && t.factors.iter().all(|f| f.phase.is_exact())
        })
    }

    pub fn add(&self, other: &StructuredOperator) -> Result<StructuredOperator> {
        self.sig.ensure_same(&other.sig)?;
        let mut out = self.clone();
        for t in &other.terms {
            out.push(t.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &StructuredOperator) -> Result<StructuredOperator> {
        self.add(&other.scale(&Scalar::from_int(-1)))
    }

    pub fn scale(&self, c: &Scalar) -> StructuredOperator {
        let mut out = StructuredOperator::zero(&self.sig);
        for t in &self.terms {
            out.push(Term { coeff: c * &t.coeff, ..t.clone() });
        }
        out
    }

    /// `self ∘ f`.
    pub fn compose(&self, f: &StructuredOperator) -> Result<StructuredOperator> {
        self.sig.ensure_same(&f.sig)?;
        let mut out = StructuredOperator::zero(&self.sig);
        for tg in &self.terms {
            for tf in f.terms.iter().filter(|t| t.block == tg.block) {
                let block = &self.sig.blocks[tg.block];
                let mut coeff = &tg.coeff * &tf.coeff;
                let mut shed = Phase::one();
                let mut factors = Vec::with_capacity(block.rank());
                for ((g, h), kind) in tg.factors.iter().zip(&tf.factors).zip(&block.coords) {
                    let (c, p) = g.after(h, *kind);
                    shed = shed * p;
                    factors.push(c);
                }
                coeff = coeff * shed;
                let internal = tg.internal.compose(&tf.internal, block.internal_dim);
                out.push(Term { block: tg.block, coeff, factors, internal });
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> StructuredOperator {
        (0..k).fold(StructuredOperator::identity(&self.sig), |acc, _| acc.compose(self).expect("same signature"))
    }

    pub fn adjoint(&self) -> StructuredOperator {
        let mut out = StructuredOperator::zero(&self.sig);
        for t in &self.terms {
            let block = &self.sig.blocks[t.block];
            let mut shed = Phase::one();
            let factors = t
                .factors
                .iter()
                .zip(&block.coords)
                .map(|(f, kind)| {
                    let (a, p) = f.adjoint(*kind);
                    shed = shed * p;
                    a
                })
                .collect();
            out.push(Term { block: t.block, coeff: t.coeff.conj() * shed, factors, internal: t.internal.adjoint() });
        }
        out
    }

    /// Exact image of a finitely supported vector.
    pub fn apply(&self, x: &SupportedVector) -> Result<SupportedVector> {
        self.sig.ensure_same(x.signature())?;
        let mut out = SupportedVector::zero(&self.sig);
        for (key, c) in x.entries() {
            for t in self.terms.iter().filter(|t| t.block == key.block) {
                let block = &self.sig.blocks[t.block];
                let mut phase = Phase::one();
                let mut index = Vec::with_capacity(key.index.len());
                let mut alive = true;
                for ((f, &k), kind) in t.factors.iter().zip(&key.index).zip(&block.coords) {
                    match f.act(k, *kind) {
                        Some((p, k2)) => {
                            phase = phase * p;
                            index.push(k2);
                        }
                        None => {
                            alive = false;
                            break;
                        }
                    }
                }
                if !alive {
                    continue;
                }
                let base = (&t.coeff * c) * phase;
                for (m, a) in t.internal.column(key.internal) {
                    out.add_entry(BasisKey { block: t.block, index: index.clone(), internal: m }, &base * &a);
                }
            }
        }
        Ok(out)
    }

    fn check_budget(&self, k: usize) -> Result<usize> {
        let n = self.sig.window_len(k);
        match n.checked_mul(n) {
            Some(entries) if entries <= MATERIALIZE_BUDGET => Ok(n),
            _ => Err(Error::WindowTooLarge { rows: n, cols: n, budget: MATERIALIZE_BUDGET }),
        }
    }

    /// Matrix of the compression to the window, in window-basis order.
    pub fn materialize_exact(&self, k: usize) -> Result<ScalarMatrix> {
        let n = self.check_budget(k)?;
        let basis = self.sig.window_basis(k);
        let position: std::collections::HashMap<&BasisKey, usize> =
            basis.iter().enumerate().map(|(i, b)| (b, i)).collect();
        let mut m = ScalarMatrix::zeros(n, n);
        for (col, key) in basis.iter().enumerate() {
            let y = self.apply(&SupportedVector::basis(&self.sig, key.clone()))?;
            for (k2, c) in y.entries() {
                if let Some(&row) = position.get(k2) {
                    m.set(row, col, c.clone());
                }
            }
        }
        Ok(m)
    }

    pub fn materialize(&self, k: usize) -> Result<DMatrix<Complex64>> {
        Ok(self.materialize_exact(k)?.to_complex())
    }

    /// `max_x ‖self x − g x‖` over window basis vectors (images are not truncated).
    pub fn equal_on_window(&self, g: &StructuredOperator, k: usize) -> Result<WindowResidual> {
        self.sig.ensure_same(&g.sig)?;
        let diff = self.sub(g)?;
        let mut out = WindowResidual::zero();
        for key in self.sig.window_basis(k) {
            let y = diff.apply(&SupportedVector::basis(&self.sig, key.clone()))?;
            if y.is_zero() {
                continue;
            }
            let r = y.norm();
            if out.first_violation.is_none() {
                out.first_violation = Some(key.clone());
            }
            if r > out.residual {
                out.residual = r;
                out.worst = Some(key);
            }
        }
        Ok(out)
    }

    /// Same terms on a signature with the given blocks renumbered from `offset`.
    pub(crate) fn shifted_into(&self, sig: &Signature, offset: usize) -> StructuredOperator {
        let terms = self.terms.iter().map(|t| Term { block: t.block + offset, ..t.clone() }).collect();
        StructuredOperator { sig: sig.clone(), terms }
    }

    /// Block-diagonal sum of operators.
    pub fn direct_sum(parts: &[&StructuredOperator]) -> StructuredOperator {
        let sig = Signature::direct_sum(parts.iter().map(|p| &p.sig));
        let mut out = StructuredOperator::zero(&sig);
        let mut offset = 0;
        for p in parts {
            for t in p.shifted_into(&sig, offset).terms {
                out.terms.push(t);
            }
            offset += p.sig.blocks.len();
        }
        out
    }

    /// The same factors read on `sig`, whose blocks must have equal ranks and
    /// internal dimensions. Thresholds on coordinates that become lines are dropped.
    pub fn reinterpret(&self, sig: &Signature) -> Result<StructuredOperator> {
        let compatible = sig.blocks.len() == self.sig.blocks.len()
            && sig
                .blocks
                .iter()
                .zip(&self.sig.blocks)
                .all(|(a, b)| a.rank() == b.rank() && a.internal_dim == b.internal_dim);
        if !compatible {
            return Err(Error::SignatureMismatch(format!("{} vs {sig}", self.sig)));
        }
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let coords = &sig.blocks[t.block].coords;
                let factors = t
                    .factors
                    .iter()
                    .zip(coords)
                    .map(|(f, kind)| match kind {
                        CoordKind::Line => BandShiftFactor { threshold: 0, ..*f },
                        CoordKind::HalfLine => *f,
                    })
                    .collect();
                Term { factors, ..t.clone() }
            })
            .collect();
        StructuredOperator::from_terms(sig, terms)
    }
}

impl fmt::Display for StructuredOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let factors: Vec<String> = t.factors.iter().map(|x| x.to_string()).collect();
            write!(f, "[{}] ({}) {}", t.block, t.coeff, factors.join("⊗"))?;
            if !t.internal.is_identity() {
                write!(f, "⊗U")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::LatticeSignature;

    fn half(d: usize) -> Signature {
        Signature::single(LatticeSignature::half_lines(1, d))
    }

    fn shift(sig: &Signature, f: BandShiftFactor) -> StructuredOperator {
        StructuredOperator::monomial(sig, Scalar::one(), vec![f], InternalOperator::Identity).unwrap()
    }

    fn e(sig: &Signature, k: i64) -> SupportedVector {
        SupportedVector::basis(sig, BasisKey::new(0, vec![k], 0))
    }

    #[test]
    fn down_after_up_is_identity() {
        let sig = half(1);
        let v = shift(&sig, BandShiftFactor::up());
        let vv = v.adjoint().compose(&v).unwrap();
        assert_eq!(vv.terms().len(), 1);
        assert_eq!(vv.terms()[0].factors[0], BandShiftFactor::IDENTITY);
        assert_eq!(vv.equal_on_window(&StructuredOperator::identity(&sig), 5).unwrap().residual, 0.0);
    }

    #[test]
    fn up_after_down_is_range_projection() {
        let sig = half(1);
        let v = shift(&sig, BandShiftFactor::up());
        let p = v.compose(&v.adjoint()).unwrap();
        assert_eq!(p.terms()[0].factors[0], BandShiftFactor::new(0, 1, Phase::one()));
        assert!(p.apply(&e(&sig, 0)).unwrap().is_zero());
        assert_eq!(p.apply(&e(&sig, 1)).unwrap(), e(&sig, 1));
    }

    #[test]
    fn weighted_square() {
        let sig = half(1);
        let i = Phase::turns(1, 4);
        let f = shift(&sig, BandShiftFactor::new(1, 0, i));
        let ff = f.compose(&f).unwrap();
        assert_eq!(ff.terms()[0].factors[0], BandShiftFactor::new(2, 0, Phase::turns(1, 2)));
        assert_eq!(ff.terms()[0].coeff, Scalar::from_phase(i));
        for k in 0..4 {
            let x = e(&sig, k);
            assert_eq!(ff.apply(&x).unwrap(), f.apply(&f.apply(&x).unwrap()).unwrap());
        }
    }

    #[test]
    fn adjoint_of_up_shift() {
        let sig = half(1);
        let v = shift(&sig, BandShiftFactor::up());
        assert_eq!(v.adjoint().terms()[0].factors[0], BandShiftFactor::new(-1, 1, Phase::one()));
        let w = Phase::turns(1, 3);
        let d = shift(&sig, BandShiftFactor::diagonal(w));
        assert_eq!(d.adjoint().terms()[0].factors[0], BandShiftFactor::diagonal(w.conj()));
    }

    #[test]
    fn apply_examples() {
        let sig = half(1);
        let v = shift(&sig, BandShiftFactor::up());
        assert_eq!(v.apply(&e(&sig, 2)).unwrap(), e(&sig, 3));
        let defect = StructuredOperator::identity(&sig).sub(&v.compose(&v.adjoint()).unwrap()).unwrap();
        assert_eq!(defect.apply(&e(&sig, 0)).unwrap(), e(&sig, 0));
        assert!(defect.apply(&e(&sig, 3)).unwrap().is_zero());
        let f = shift(&sig, BandShiftFactor::new(1, 0, Phase::turns(1, 4)));
        let want = e(&sig, 4).scale(&Scalar::from_phase(Phase::turns(3, 4)));
        assert_eq!(f.apply(&e(&sig, 3)).unwrap(), want);
    }

    #[test]
    fn materialize_examples() {
        let sig = half(1);
        let v = shift(&sig, BandShiftFactor::up());
        let m = v.materialize_exact(3).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let want = if r == c + 1 { Scalar::one() } else { Scalar::zero() };
                assert_eq!(*m.get(r, c), want);
            }
        }
        let id = StructuredOperator::identity(&sig).materialize_exact(4).unwrap();
        assert_eq!(id, ScalarMatrix::identity(4));
        let fin = Signature::single(LatticeSignature::finite(4));
        let clock =
            StructuredOperator::monomial(&fin, Scalar::one(), vec![], InternalOperator::clock(4, Phase::turns(1, 4)))
                .unwrap();
        assert_eq!(clock.materialize_exact(1).unwrap(), InternalOperator::clock(4, Phase::turns(1, 4)).to_matrix(4));
    }

    #[test]
    fn window_residuals() {
        let sig = half(1);
        let v = shift(&sig, BandShiftFactor::up());
        let id = StructuredOperator::identity(&sig);
        let r = v.equal_on_window(&id, 2).unwrap();
        assert!((r.residual - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.first_violation, Some(BasisKey::new(0, vec![0], 0)));
        assert_eq!(v.equal_on_window(&v, 2).unwrap().residual, 0.0);
    }

    #[test]
    fn budget_is_enforced() {
        let sig = Signature::single(LatticeSignature::half_lines(3, 4));
        let id = StructuredOperator::identity(&sig);
        assert!(matches!(id.materialize(40), Err(Error::WindowTooLarge { .. })));
    }

    #[test]
    fn line_coordinates_never_annihilate() {
        let sig = Signature::single(LatticeSignature::lines(1, 1));
        let u = shift(&sig, BandShiftFactor::up());
        let uu = u.adjoint().compose(&u).unwrap();
        assert_eq!(uu.equal_on_window(&StructuredOperator::identity(&sig), 3).unwrap().residual, 0.0);
        let uu = u.compose(&u.adjoint()).unwrap();
        assert_eq!(uu.equal_on_window(&StructuredOperator::identity(&sig), 3).unwrap().residual, 0.0);
    }
}
