//! Operator families: standard tuples, torus generators, clock–shift data,
//! direct sums and dilations, plus relation checks.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::index_set::IndexSet;
use crate::opalg::{
    BandShiftFactor, BasisKey, CoordKind, InternalOperator, LatticeSignature, ScalarMatrix, Signature,
    StructuredOperator, SupportedVector, WindowResidual,
};
use crate::phase::{Phase, StructureConstants};
use crate::scalar::Scalar;
use crate::symalg::Monomial;

/// Residual bound for relation checks on wandering data and tuples.
pub const RELATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TupleMeta {
    Standard(IndexSet),
    DirectSum,
    Dilation(IndexSet),
    User,
}

/// `n` operators on a shared space together with their structure constants.
#[derive(Debug, Clone)]
pub struct IsometryTuple {
    zc: StructureConstants,
    ops: Vec<StructuredOperator>,
    meta: TupleMeta,
}

impl IsometryTuple {
    pub fn new(zc: StructureConstants, ops: Vec<StructuredOperator>, meta: TupleMeta) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::EmptyTuple);
        }
        if ops.len() != zc.n() {
            return Err(Error::SignatureMismatch(format!(
                "{} operators for {} structure-constant indices",
                ops.len(),
                zc.n()
            )));
        }
        for op in &ops[1..] {
            ops[0].signature().ensure_same(op.signature())?;
        }
        Ok(IsometryTuple { zc, ops, meta })
    }

    pub fn zc(&self) -> &StructureConstants {
        &self.zc
    }

    pub fn n(&self) -> usize {
        self.ops.len()
    }

    pub fn ops(&self) -> &[StructuredOperator] {
        &self.ops
    }

    pub fn op(&self, i: usize) -> &StructuredOperator {
        &self.ops[i]
    }

    pub fn meta(&self) -> &TupleMeta {
        &self.meta
    }

    pub fn signature(&self) -> &Signature {
        self.ops[0].signature()
    }

    pub fn is_exact(&self) -> bool {
        self.zc.is_exact() && self.ops.iter().all(StructuredOperator::is_exact)
    }

    pub fn window_basis(&self, k: usize) -> Vec<BasisKey> {
        self.signature().window_basis(k)
    }

    pub fn basis_vector(&self, key: BasisKey) -> SupportedVector {
        SupportedVector::basis(self.signature(), key)
    }

    /// Replaces one operator, keeping everything else.
    pub fn with_op(&self, i: usize, op: StructuredOperator) -> Result<Self> {
        let mut ops = self.ops.clone();
        ops[i] = op;
        IsometryTuple::new(self.zc.clone(), ops, TupleMeta::User)
    }
}

/// Index set `A` and the unitaries `V_j|_{W_A}` for `j ∉ A`, in increasing `j`.
#[derive(Debug, Clone)]
pub struct WanderingData {
    pub zc: StructureConstants,
    pub a: IndexSet,
    pub dim: usize,
    pub unitaries: Vec<InternalOperator>,
}

/// Residuals of both printed forms of the torus relation for one pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorusRelationCheck {
    /// 1-based generator indices.
    pub i: usize,
    pub j: usize,
    /// `‖U_i* U_j − z̄_ij U_j U_i*‖`.
    pub doubly_noncommuting: f64,
    /// `‖U_i* U_j − z̄_ij U_j* U_i‖`.
    pub starred_second: f64,
}

impl WanderingData {
    /// Validated data: unitarity and the doubly non-commuting torus relations.
    pub fn new(zc: StructureConstants, a: IndexSet, dim: usize, unitaries: Vec<InternalOperator>) -> Result<Self> {
        let data = WanderingData::unchecked(zc, a, dim, unitaries)?;
        data.validate(RELATION_TOL)?;
        Ok(data)
    }

    /// Shape-checked only; used for extracted data whose quality is reported separately.
    pub fn unchecked(zc: StructureConstants, a: IndexSet, dim: usize, unitaries: Vec<InternalOperator>) -> Result<Self> {
        if !a.is_within(zc.n()) {
            return Err(Error::InvalidWanderingData(format!("index set {a} outside 1..={}", zc.n())));
        }
        let expected = zc.n() - a.len();
        if unitaries.len() != expected {
            return Err(Error::InvalidWanderingData(format!(
                "{} unitaries given, A = {a} needs {expected}",
                unitaries.len()
            )));
        }
        for (u, j) in unitaries.iter().zip(a.complement(zc.n()).iter()) {
            if let Some(d) = u.dim_hint() {
                if d != dim {
                    return Err(Error::InvalidWanderingData(format!(
                        "unitary for index {} has dimension {d}, expected {dim}",
                        j + 1
                    )));
                }
            }
        }
        Ok(WanderingData { zc, a, dim, unitaries })
    }

    /// The generator indices `j ∉ A`, increasing, 0-based.
    pub fn complement_indices(&self) -> Vec<usize> {
        self.a.complement(self.zc.n()).iter().collect()
    }

    pub fn matrices(&self) -> Vec<ScalarMatrix> {
        self.unitaries.iter().map(|u| u.to_matrix(self.dim)).collect()
    }

    pub fn is_exact(&self) -> bool {
        self.unitaries.iter().all(InternalOperator::is_exact)
    }

    pub fn unitarity_defects(&self) -> Vec<f64> {
        self.unitaries.iter().map(|u| u.unitarity_defect(self.dim)).collect()
    }

    pub fn relation_checks(&self) -> Vec<TorusRelationCheck> {
        let js = self.complement_indices();
        let ms = self.matrices();
        let mut out = Vec::new();
        for p in 0..js.len() {
            for q in 0..js.len() {
                if p == q {
                    continue;
                }
                let zbar = Scalar::from_phase(self.zc.z(js[p], js[q]).conj());
                let lhs = ms[p].adjoint().mul(&ms[q]);
                let dnc = ms[q].mul(&ms[p].adjoint()).scale(&zbar);
                let starred = ms[q].adjoint().mul(&ms[p]).scale(&zbar);
                out.push(TorusRelationCheck {
                    i: js[p] + 1,
                    j: js[q] + 1,
                    doubly_noncommuting: lhs.sub(&dnc).residual_norm(),
                    starred_second: lhs.sub(&starred).residual_norm(),
                });
            }
        }
        out
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        for (u, j) in self.unitaries.iter().zip(self.complement_indices()) {
            let r = u.unitarity_defect(self.dim);
            if r > tol {
                return Err(Error::InvalidWanderingData(format!(
                    "unitary for index {} has unitarity defect {r:.3e}",
                    j + 1
                )));
            }
        }
        if let Some(c) = self.relation_checks().into_iter().find(|c| c.doubly_noncommuting > tol) {
            return Err(Error::InvalidWanderingData(format!(
                "relation U{}* U{} = conj(z) U{} U{}* fails with residual {:.3e}",
                c.i, c.j, c.j, c.i, c.doubly_noncommuting
            )));
        }
        Ok(())
    }
}

impl fmt::Display for WanderingData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "A = {}, dim W = {}", self.a, self.dim)?;
        for (m, j) in self.matrices().iter().zip(self.complement_indices()) {
            writeln!(f, "U{}:", j + 1)?;
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

fn diagonal_factors(zc: &StructureConstants, i: usize, coords: &[usize]) -> Vec<BandShiftFactor> {
    coords.iter().map(|&c| BandShiftFactor::diagonal(zc.z(i, c))).collect()
}

/// Factors of the `i`-th twisted shift on coordinates labelled by `coords`:
/// phase `z_{i,c}^{k_c}` for `c < i`, shift on `c = i`, identity above.
fn twisted_shift_factors(zc: &StructureConstants, i: usize, coords: &[usize]) -> Vec<BandShiftFactor> {
    coords
        .iter()
        .map(|&c| match c.cmp(&i) {
            std::cmp::Ordering::Less => BandShiftFactor::diagonal(zc.z(i, c)),
            std::cmp::Ordering::Equal => BandShiftFactor::up(),
            std::cmp::Ordering::Greater => BandShiftFactor::IDENTITY,
        })
        .collect()
}

/// The standard tuple on `ℓ²(ℕ₀^A) ⊗ W` built from wandering data.
pub fn make_standard_tuple(zc: &StructureConstants, data: &WanderingData) -> Result<IsometryTuple> {
    zc.ensure_matches(&data.zc)?;
    if data.dim == 0 {
        return Err(Error::InvalidWanderingData("empty wandering subspace".into()));
    }
    data.validate(RELATION_TOL)?;
    let a: Vec<usize> = data.a.iter().collect();
    let sig = Signature::single(LatticeSignature::half_lines(a.len(), data.dim));
    let mut unitaries = data.unitaries.iter();
    let mut ops = Vec::with_capacity(zc.n());
    for i in 0..zc.n() {
        let (factors, internal) = if data.a.contains(i) {
            (twisted_shift_factors(zc, i, &a), InternalOperator::Identity)
        } else {
            (diagonal_factors(zc, i, &a), unitaries.next().expect("count checked").clone())
        };
        ops.push(StructuredOperator::monomial(&sig, Scalar::one(), factors, internal)?);
    }
    IsometryTuple::new(zc.clone(), ops, TupleMeta::Standard(data.a))
}

/// Twisted bilateral shifts on `ℓ²(ℤ^m)`; `zc` is indexed by the `m` generators.
pub fn make_torus_generators(zc: &StructureConstants) -> Vec<StructuredOperator> {
    let m = zc.n();
    let sig = Signature::single(LatticeSignature::lines(m, 1));
    let coords: Vec<usize> = (0..m).collect();
    (0..m)
        .map(|i| {
            StructuredOperator::monomial(
                &sig,
                Scalar::one(),
                twisted_shift_factors(zc, i, &coords),
                InternalOperator::Identity,
            )
            .expect("valid factors")
        })
        .collect()
}

/// The standard tuple for `A` whose wandering space is the lattice torus
/// `ℓ²(ℤ^{A^c})`: half-line coordinates for `A`, then line coordinates for `A^c`.
pub fn make_standard_torus_tuple(zc: &StructureConstants, a: IndexSet) -> Result<IsometryTuple> {
    if !a.is_within(zc.n()) {
        return Err(Error::InvalidWanderingData(format!("index set {a} outside 1..={}", zc.n())));
    }
    let inside: Vec<usize> = a.iter().collect();
    let outside: Vec<usize> = a.complement(zc.n()).iter().collect();
    let mut coords = vec![CoordKind::HalfLine; inside.len()];
    coords.extend(vec![CoordKind::Line; outside.len()]);
    let sig = Signature::single(LatticeSignature::new(coords, 1));
    let mut ops = Vec::with_capacity(zc.n());
    for i in 0..zc.n() {
        let factors = if a.contains(i) {
            let mut f = twisted_shift_factors(zc, i, &inside);
            f.extend(vec![BandShiftFactor::IDENTITY; outside.len()]);
            f
        } else {
            let mut f = diagonal_factors(zc, i, &inside);
            f.extend(twisted_shift_factors(zc, i, &outside));
            f
        };
        ops.push(StructuredOperator::monomial(&sig, Scalar::one(), factors, InternalOperator::Identity)?);
    }
    IsometryTuple::new(zc.clone(), ops, TupleMeta::Standard(a))
}

/// Finite torus data: clock and cyclic shift for `|A^c| = 2`, a cyclic shift
/// for `|A^c| = 1`, nothing for `A = {1..n}`.
pub fn make_clock_shift_data(zc: &StructureConstants, a: IndexSet, d: usize) -> Result<WanderingData> {
    if d == 0 {
        return Err(Error::InvalidWanderingData("dimension must be positive".into()));
    }
    let js: Vec<usize> = a.complement(zc.n()).iter().collect();
    let unitaries = match js.as_slice() {
        [] => Vec::new(),
        [_] => vec![InternalOperator::cyclic_shift(d)],
        [j1, j2] => {
            let zeta = zc.z(*j1, *j2);
            let Some(order) = zeta.order() else {
                return Err(Error::Unsupported("clock-shift data needs an exact structure constant".into()));
            };
            if d as i64 % order != 0 {
                return Err(Error::DimensionNotDivisible { required: order, got: d });
            }
            vec![InternalOperator::clock(d, zeta), InternalOperator::cyclic_shift(d)]
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "clock-shift data covers at most two unitary directions, A^c has {}",
                js.len()
            )))
        }
    };
    WanderingData::new(zc.clone(), a, d, unitaries)
}

/// Block-diagonal sum on the tagged union of the parts' signatures.
pub fn tuple_direct_sum(parts: &[IsometryTuple]) -> Result<IsometryTuple> {
    let first = parts.first().ok_or(Error::EmptyTuple)?;
    if parts.len() == 1 {
        return Ok(first.clone());
    }
    for p in &parts[1..] {
        if p.n() != first.n() {
            return Err(Error::SignatureMismatch(format!("tuples of {} and {} operators", first.n(), p.n())));
        }
        first.zc.ensure_matches(&p.zc)?;
    }
    let ops = (0..first.n())
        .map(|i| StructuredOperator::direct_sum(&parts.iter().map(|p| p.op(i)).collect::<Vec<_>>()))
        .collect();
    IsometryTuple::new(first.zc.clone(), ops, TupleMeta::DirectSum)
}

/// A standard tuple extended to unitaries by widening every half-line to a line.
#[derive(Debug, Clone)]
pub struct Dilation {
    pub original: IsometryTuple,
    pub dilated: IsometryTuple,
}

/// Checks of the dilation properties on a window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DilationCheck {
    /// `max_i max(‖U_i*U_i − 1‖, ‖U_iU_i* − 1‖)` on the dilated window.
    pub unitarity: f64,
    /// `max_i ‖U_i x − S_i x‖` over the original window.
    pub restriction: f64,
    /// `max_i ‖P_H U_i* x − S_i* x‖` over the original window.
    pub compression: f64,
    /// `max ‖P_H U_i* x‖` over `i ∈ A` and window vectors with `k_i = 0`.
    pub corner: f64,
}

impl Dilation {
    /// Keys of the original space map to themselves.
    pub fn embed(&self, key: &BasisKey) -> BasisKey {
        key.clone()
    }

    /// Orthogonal projection onto the original space.
    pub fn project_to_original(&self, x: &SupportedVector) -> SupportedVector {
        let sig = self.original.signature();
        SupportedVector::from_entries(
            sig,
            x.entries().filter(|(k, _)| sig.contains(k)).map(|(k, c)| (k.clone(), c.clone())),
        )
    }

    pub fn check(&self, k: usize) -> Result<DilationCheck> {
        let big = self.dilated.signature();
        let mut unitarity: f64 = 0.0;
        for u in self.dilated.ops() {
            let id = StructuredOperator::identity(big);
            unitarity = unitarity.max(u.adjoint().compose(u)?.equal_on_window(&id, k)?.residual);
            unitarity = unitarity.max(u.compose(&u.adjoint())?.equal_on_window(&id, k)?.residual);
        }
        let mut restriction: f64 = 0.0;
        let mut compression: f64 = 0.0;
        for (s, u) in self.original.ops().iter().zip(self.dilated.ops()) {
            let (s_adj, u_adj) = (s.adjoint(), u.adjoint());
            for key in self.original.window_basis(k) {
                let x = self.original.basis_vector(key.clone());
                let xk = x.with_signature(big);
                let r = u.apply(&xk)?.sub(&s.apply(&x)?.with_signature(big))?.norm();
                restriction = restriction.max(r);
                let c = self.project_to_original(&u_adj.apply(&xk)?).sub(&s_adj.apply(&x)?)?.norm();
                compression = compression.max(c);
            }
        }
        let a = match self.original.meta() {
            TupleMeta::Standard(a) => *a,
            _ => IndexSet::empty(),
        };
        let mut corner: f64 = 0.0;
        for i in a.iter() {
            let r = a.rank_of(i).expect("index in A");
            let u_adj = self.dilated.op(i).adjoint();
            for key in self.original.window_basis(k).into_iter().filter(|key| key.index[r] == 0) {
                let x = SupportedVector::basis(big, key);
                corner = corner.max(self.project_to_original(&u_adj.apply(&x)?).norm());
            }
        }
        Ok(DilationCheck { unitarity, restriction, compression, corner })
    }
}

/// Dilates a standard tuple. Tuples that are not in standard form are rejected.
pub fn dilate_tuple(t: &IsometryTuple) -> Result<Dilation> {
    let a = match t.meta() {
        TupleMeta::Standard(a) => *a,
        other => {
            return Err(Error::Unsupported(format!(
                "dilation needs a standard tuple, got {other:?}; decompose it first"
            )))
        }
    };
    let sig = Signature { blocks: t.signature().blocks.iter().map(LatticeSignature::dilated).collect() };
    let ops = t.ops().iter().map(|op| op.reinterpret(&sig)).collect::<Result<Vec<_>>>()?;
    let dilated = IsometryTuple::new(t.zc().clone(), ops, TupleMeta::Dilation(a))?;
    Ok(Dilation { original: t.clone(), dilated })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RelationKind {
    /// `V_i* V_i = 1`
    Isometry,
    /// `V_i* V_j = z̄_ij V_j V_i*`
    StarLeft,
    /// `V_i V_j = z_ij V_j V_i`
    Commute,
    /// `V_j* V_i* = z̄_ij V_i* V_j*`
    StarBoth,
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RelationKind::Isometry => "Vi* Vi = 1",
            RelationKind::StarLeft => "Vi* Vj = conj(zij) Vj Vi*",
            RelationKind::Commute => "Vi Vj = zij Vj Vi",
            RelationKind::StarBoth => "Vj* Vi* = conj(zij) Vi* Vj*",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationResidual {
    pub kind: RelationKind,
    /// 1-based indices; `j == i` for the isometry relation.
    pub i: usize,
    pub j: usize,
    pub residual: WindowResidual,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationReport {
    pub window: usize,
    pub entries: Vec<RelationResidual>,
    pub max_residual: f64,
    pub flagged: bool,
}

impl RelationReport {
    pub fn worst(&self) -> Option<&RelationResidual> {
        self.entries.iter().max_by(|a, b| a.residual.residual.total_cmp(&b.residual.residual))
    }

    pub fn get(&self, kind: RelationKind, i: usize, j: usize) -> Option<&RelationResidual> {
        self.entries.iter().find(|e| e.kind == kind && e.i == i && e.j == j)
    }
}

/// Window residuals of the defining and implied relations for all `i ≠ j`.
pub fn verify_tuple_relations(t: &IsometryTuple, k: usize) -> Result<RelationReport> {
    let sig = t.signature();
    let id = StructuredOperator::identity(sig);
    let adj: Vec<StructuredOperator> = t.ops().iter().map(StructuredOperator::adjoint).collect();
    let mut entries = Vec::new();
    for (i, a) in adj.iter().enumerate() {
        let r = a.compose(t.op(i))?.equal_on_window(&id, k)?;
        entries.push(RelationResidual { kind: RelationKind::Isometry, i: i + 1, j: i + 1, residual: r });
    }
    for i in 0..t.n() {
        for j in 0..t.n() {
            if i == j {
                continue;
            }
            let z = Scalar::from_phase(t.zc().z(i, j));
            let zbar = z.conj();
            let (vi, vj) = (t.op(i), t.op(j));
            let checks = [
                (RelationKind::StarLeft, adj[i].compose(vj)?, vj.compose(&adj[i])?.scale(&zbar)),
                (RelationKind::Commute, vi.compose(vj)?, vj.compose(vi)?.scale(&z)),
                (RelationKind::StarBoth, adj[j].compose(&adj[i])?, adj[i].compose(&adj[j])?.scale(&zbar)),
            ];
            for (kind, lhs, rhs) in checks {
                let r = lhs.equal_on_window(&rhs, k)?;
                entries.push(RelationResidual { kind, i: i + 1, j: j + 1, residual: r });
            }
        }
    }
    let max_residual = entries.iter().map(|e| e.residual.residual).fold(0.0, f64::max);
    Ok(RelationReport { window: k, entries, max_residual, flagged: max_residual > RELATION_TOL })
}

/// The operator `phase · ∏_i V_i^{a_i} ∏_i V_i^{*b_i}` realized on a tuple.
pub fn realize_monomial(t: &IsometryTuple, m: &Monomial) -> Result<StructuredOperator> {
    if m.n() != t.n() {
        return Err(Error::SignatureMismatch(format!("monomial over {} generators, tuple of {}", m.n(), t.n())));
    }
    let mut acc = StructuredOperator::identity(t.signature()).scale(&Scalar::from_phase(m.phase));
    for (i, &(a, _)) in m.exps.iter().enumerate() {
        acc = acc.compose(&t.op(i).pow(a))?;
    }
    for (i, &(_, b)) in m.exps.iter().enumerate() {
        acc = acc.compose(&t.op(i).adjoint().pow(b))?;
    }
    Ok(acc)
}

/// Shift of multiplicity `d` (`n = 1`, `A = {1}`).
pub fn unilateral_shift(d: usize) -> IsometryTuple {
    let zc = StructureConstants::commuting(1);
    let data = WanderingData::new(zc.clone(), IndexSet::full(1), d, Vec::new()).expect("no relations to check");
    make_standard_tuple(&zc, &data).expect("valid data")
}

/// The bilateral shift (`n = 1`, `A = ∅`, wandering space `ℓ²(ℤ)`).
pub fn bilateral_shift() -> IsometryTuple {
    make_standard_torus_tuple(&StructureConstants::commuting(1), IndexSet::empty()).expect("valid index set")
}

/// Scalar unitary data `λ` on a one-dimensional wandering space.
pub fn scalar_data(zc: &StructureConstants, a: IndexSet, lambdas: &[Phase]) -> Result<WanderingData> {
    WanderingData::new(
        zc.clone(),
        a,
        1,
        lambdas.iter().map(|&l| InternalOperator::diagonal(vec![l])).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zc2() -> StructureConstants {
        StructureConstants::new(2, &[(0, 1, Phase::turns(1, 4))]).unwrap()
    }

    fn key(k: &[i64]) -> BasisKey {
        BasisKey::new(0, k.to_vec(), 0)
    }

    #[test]
    fn standard_tuple_example() {
        let zc = zc2();
        let data = WanderingData::new(zc.clone(), IndexSet::full(2), 1, vec![]).unwrap();
        let t = make_standard_tuple(&zc, &data).unwrap();
        let x = t.basis_vector(key(&[1, 0]));
        let minus_i = Scalar::from_phase(Phase::turns(3, 4));
        assert_eq!(t.op(1).apply(&x).unwrap(), t.basis_vector(key(&[1, 1])).scale(&minus_i));
        assert_eq!(t.op(0).apply(&x).unwrap(), t.basis_vector(key(&[2, 0])));
        let rep = verify_tuple_relations(&t, 4).unwrap();
        assert_eq!(rep.max_residual, 0.0);
        assert!(!rep.flagged);
    }

    #[test]
    fn adjoint_kills_bottom_row() {
        let zc = zc2();
        let data = WanderingData::new(zc.clone(), IndexSet::full(2), 1, vec![]).unwrap();
        let t = make_standard_tuple(&zc, &data).unwrap();
        for i in 0..2 {
            let adj = t.op(i).adjoint();
            for k in t.window_basis(4).into_iter().filter(|k| k.index[i] == 0) {
                assert!(adj.apply(&t.basis_vector(k)).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn torus_generators() {
        let zc = zc2();
        let u = make_torus_generators(&zc);
        let sig = u[0].signature().clone();
        let x = SupportedVector::basis(&sig, key(&[1, 0]));
        let y = SupportedVector::basis(&sig, key(&[1, 1])).scale(&Scalar::from_phase(Phase::turns(3, 4)));
        assert_eq!(u[1].apply(&x).unwrap(), y);
        let lhs = u[0].adjoint().compose(&u[1]).unwrap();
        let rhs = u[1].compose(&u[0].adjoint()).unwrap().scale(&Scalar::from_phase(Phase::turns(3, 4)));
        assert_eq!(lhs.equal_on_window(&rhs, 3).unwrap().residual, 0.0);
        let e0 = SupportedVector::basis(&sig, key(&[0, 0]));
        let image = lhs.apply(&e0).unwrap();
        assert_eq!(image.entries().next().unwrap().0, &key(&[-1, 1]));
    }

    #[test]
    fn clock_shift_relations_are_exact() {
        let zc = StructureConstants::new(3, &[(1, 2, Phase::turns(1, 4))]).unwrap();
        let data = make_clock_shift_data(&zc, IndexSet::from_indices([0]), 4).unwrap();
        let checks = data.relation_checks();
        assert!(checks.iter().all(|c| c.doubly_noncommuting == 0.0));
        assert!(checks.iter().any(|c| c.starred_second > 0.0));
        assert_eq!(
            make_clock_shift_data(&zc, IndexSet::from_indices([0]), 6).unwrap_err(),
            Error::DimensionNotDivisible { required: 4, got: 6 }
        );
    }

    #[test]
    fn broken_tuple_is_flagged() {
        let zc = zc2();
        let data = WanderingData::new(zc.clone(), IndexSet::full(2), 1, vec![]).unwrap();
        let t = make_standard_tuple(&zc, &data).unwrap();
        let sig = t.signature().clone();
        let plain = StructuredOperator::monomial(
            &sig,
            Scalar::one(),
            vec![BandShiftFactor::IDENTITY, BandShiftFactor::up()],
            InternalOperator::Identity,
        )
        .unwrap();
        let broken = t.with_op(1, plain).unwrap();
        let rep = verify_tuple_relations(&broken, 3).unwrap();
        assert!(rep.flagged);
        assert!(rep.get(RelationKind::StarLeft, 1, 2).unwrap().residual.residual > 0.0);
    }

    #[test]
    fn single_isometry_only_checks_isometry() {
        let rep = verify_tuple_relations(&unilateral_shift(3), 5).unwrap();
        assert_eq!(rep.entries.len(), 1);
        assert_eq!(rep.max_residual, 0.0);
    }

    #[test]
    fn direct_sum_rejects_mismatched_constants() {
        let a = unilateral_shift(1);
        assert_eq!(tuple_direct_sum(std::slice::from_ref(&a)).unwrap().signature(), a.signature());
        let zc_other = StructureConstants::new(2, &[(0, 1, Phase::turns(1, 2))]).unwrap();
        let d1 = WanderingData::new(zc2(), IndexSet::full(2), 1, vec![]).unwrap();
        let d2 = WanderingData::new(zc_other.clone(), IndexSet::full(2), 1, vec![]).unwrap();
        let t1 = make_standard_tuple(&zc2(), &d1).unwrap();
        let t2 = make_standard_tuple(&zc_other, &d2).unwrap();
        assert!(matches!(tuple_direct_sum(&[t1, t2]), Err(Error::ConstantsMismatch { i: 1, j: 2, .. })));
    }

    #[test]
    fn shift_dilates_to_bilateral_shift() {
        let d = dilate_tuple(&unilateral_shift(1)).unwrap();
        let check = d.check(5).unwrap();
        assert_eq!(check, DilationCheck { unitarity: 0.0, restriction: 0.0, compression: 0.0, corner: 0.0 });
        let bil = bilateral_shift();
        assert_eq!(d.dilated.op(0).equal_on_window(bil.op(0), 4).unwrap().residual, 0.0);
    }

    #[test]
    fn dilating_a_unitary_sector_changes_nothing() {
        let zc = zc2();
        let data = scalar_data(&zc, IndexSet::empty(), &[Phase::turns(1, 3), Phase::one()]);
        // scalar unitaries commute, so with z12 = i they violate the torus relation
        assert!(data.is_err());
        let data = make_clock_shift_data(&zc, IndexSet::empty(), 4).unwrap();
        let t = make_standard_tuple(&zc, &data).unwrap();
        let d = dilate_tuple(&t).unwrap();
        assert_eq!(d.dilated.signature(), t.signature());
        assert_eq!(d.check(2).unwrap().unitarity, 0.0);
    }

    #[test]
    fn dilation_rejects_direct_sums() {
        let s = tuple_direct_sum(&[unilateral_shift(1), bilateral_shift()]).unwrap();
        assert!(matches!(dilate_tuple(&s), Err(Error::Unsupported(_))));
    }
}
